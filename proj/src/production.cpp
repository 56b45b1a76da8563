#include "kmarket/production.hpp"

#include "kmarket/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kmarket {

std::string_view to_string(ContentType c) {
    switch (c) {
        case ContentType::Question: return "question";
        case ContentType::Answer: return "answer";
        case ContentType::Comment: return "comment";
    }
    return "?";
}

std::string_view to_string(BasisKind b) {
    switch (b) {
        case BasisKind::Power: return "power";
        case BasisKind::Exponential: return "exponential";
        case BasisKind::Sigmoid: return "sigmoid";
    }
    return "?";
}

std::string_view to_string(InteractionKind i) {
    switch (i) {
        case InteractionKind::Essential: return "essential";
        case InteractionKind::InteractiveEssential: return "interactive_essential";
        case InteractionKind::Antagonistic: return "antagonistic";
        case InteractionKind::Substitutable: return "substitutable";
    }
    return "?";
}

std::string_view to_string(ReturnsToScale r) {
    switch (r) {
        case ReturnsToScale::Decreasing: return "decreasing";
        case ReturnsToScale::Constant: return "constant";
        case ReturnsToScale::Increasing: return "increasing";
    }
    return "?";
}

std::optional<ContentType> parse_content_type(std::string_view text) {
    for (auto c : {ContentType::Question, ContentType::Answer, ContentType::Comment})
        if (text == to_string(c)) return c;
    return std::nullopt;
}

std::optional<BasisKind> parse_basis(std::string_view text) {
    for (auto b : kBasisKinds)
        if (text == to_string(b)) return b;
    return std::nullopt;
}

std::optional<InteractionKind> parse_interaction(std::string_view text) {
    for (auto i : kInteractionKinds)
        if (text == to_string(i)) return i;
    return std::nullopt;
}

std::string family_name(const ModelSpec& spec) {
    std::string name{to_string(spec.content)};
    name += '/';
    name += to_string(spec.basis);
    if (spec.interaction) {
        name += '/';
        name += to_string(*spec.interaction);
    }
    return name;
}

namespace {

std::size_t shape_size(BasisKind b) { return b == BasisKind::Sigmoid ? 2 : 1; }

// Shape value s(x) and ds/dshape for the basis without its amplitude.
struct ShapeEval {
    double value;
    std::array<double, 2> grad;
};

ShapeEval shape_eval(BasisKind kind, const double* shape, double x) {
    switch (kind) {
        case BasisKind::Power: {
            const double lambda = shape[0];
            if (x == 0) return {lambda == 0 ? 1.0 : 0.0, {0, 0}};
            const double v = std::pow(x, lambda);
            return {v, {v * std::log(x), 0}};
        }
        case BasisKind::Exponential: {
            const double b = shape[0];
            if (x == 0) return {1.0, {0, 0}};
            const double v = std::exp(x * std::log(b));
            return {v, {x * v / b, 0}};
        }
        case BasisKind::Sigmoid: {
            const double k = shape[0], x0 = shape[1];
            const double z = k * (x - x0);
            double s;
            if (z > 0) {
                const double e = std::exp(-z);
                s = e / (1 + e);
            } else {
                s = 1 / (1 + std::exp(z));
            }
            const double ds = s * (1 - s);
            return {s, {-(x - x0) * ds, k * ds}};
        }
    }
    return {0, {0, 0}};
}

std::size_t pair_size(BasisKind b, InteractionKind i) {
    const auto sh = shape_size(b);
    return i == InteractionKind::InteractiveEssential ? 1 + 2 * sh : 2 * (1 + sh);
}

// Evaluates a two-factor sub-model whose parameters start at theta[0];
// writes d/dtheta into grad[0 .. pair_size) when grad is non-null.
double pair_eval(BasisKind basis, InteractionKind inter, const double* theta, double x1, double x2, double* grad) {
    const auto sh = shape_size(basis);
    if (inter == InteractionKind::InteractiveEssential) {
        const double a = theta[0];
        const auto s1 = shape_eval(basis, theta + 1, x1);
        const auto s2 = shape_eval(basis, theta + 1 + sh, x2);
        if (grad) {
            grad[0] = s1.value * s2.value;
            for (std::size_t j = 0; j < sh; ++j) {
                grad[1 + j] = a * s2.value * s1.grad[j];
                grad[1 + sh + j] = a * s1.value * s2.grad[j];
            }
        }
        return a * s1.value * s2.value;
    }
    const double a1 = theta[0];
    const double a2 = theta[1 + sh];
    const auto s1 = shape_eval(basis, theta + 1, x1);
    const auto s2 = shape_eval(basis, theta + 2 + sh, x2);
    const double y1 = a1 * s1.value;
    const double y2 = a2 * s2.value;
    double w1 = 0, w2 = 0;  // dz/dy1, dz/dy2
    double z = 0;
    switch (inter) {
        case InteractionKind::Essential:
            if (y1 <= y2) z = y1, w1 = 1;
            else z = y2, w2 = 1;
            break;
        case InteractionKind::Antagonistic:
            if (y1 >= y2) z = y1, w1 = 1;
            else z = y2, w2 = 1;
            break;
        case InteractionKind::Substitutable:
            z = y1 + y2, w1 = 1, w2 = 1;
            break;
        case InteractionKind::InteractiveEssential: break;
    }
    if (grad) {
        grad[0] = w1 * s1.value;
        for (std::size_t j = 0; j < sh; ++j) grad[1 + j] = w1 * a1 * s1.grad[j];
        grad[1 + sh] = w2 * s2.value;
        for (std::size_t j = 0; j < sh; ++j) grad[2 + sh + j] = w2 * a2 * s2.grad[j];
    }
    return z;
}

// One period: value and optional gradient row.
double point_eval(const ModelSpec& spec, const double* x, double* grad) {
    const double* theta = spec.theta.data();
    switch (spec.content) {
        case ContentType::Question: {
            const auto s = shape_eval(spec.basis, theta + 1, x[0]);
            if (grad) {
                grad[0] = s.value;
                for (std::size_t j = 0; j < shape_size(spec.basis); ++j) grad[1 + j] = theta[0] * s.grad[j];
            }
            return theta[0] * s.value;
        }
        case ContentType::Answer: return pair_eval(spec.basis, *spec.interaction, theta, x[0], x[1], grad);
        case ContentType::Comment: {
            const auto n = pair_size(spec.basis, *spec.interaction);
            const double on_questions = pair_eval(spec.basis, *spec.interaction, theta, x[0], x[2], grad);
            const double on_answers =
                pair_eval(spec.basis, *spec.interaction, theta + n, x[1], x[2], grad ? grad + n : nullptr);
            return on_questions + on_answers;
        }
    }
    return 0;
}

void check_inputs(const ModelSpec& spec, const FactorInputs& inputs) {
    if (inputs.size() != factor_arity(spec.content)) throw ContractViolation("factor arity mismatch");
    for (const auto& column : inputs) {
        if (column.size() != inputs.front().size()) throw ContractViolation("factor columns differ in length");
        for (double v : column)
            if (!(v >= 0)) throw ContractViolation("negative or NaN factor input");
    }
}

struct ParamSlot {
    ParamKind kind;
    std::size_t factor;
    std::string name;
};

std::vector<ParamSlot> layout(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction) {
    auto shape_slots = [&](std::size_t factor, const std::string& prefix, const std::string& suffix,
                           std::vector<ParamSlot>& out) {
        switch (basis) {
            case BasisKind::Power: out.push_back({ParamKind::Exponent, factor, prefix + "lambda" + suffix}); break;
            case BasisKind::Exponential: out.push_back({ParamKind::Base, factor, prefix + "b" + suffix}); break;
            case BasisKind::Sigmoid:
                out.push_back({ParamKind::Rate, factor, prefix + "k" + suffix});
                out.push_back({ParamKind::Location, factor, prefix + "x0" + suffix});
                break;
        }
    };
    const std::string amp = basis == BasisKind::Sigmoid ? "L" : "a";
    auto pair_slots = [&](std::size_t f1, std::size_t f2, const std::string& prefix, std::vector<ParamSlot>& out) {
        if (*interaction == InteractionKind::InteractiveEssential) {
            out.push_back({ParamKind::Amplitude, f1, prefix + amp});
            shape_slots(f1, prefix, "_1", out);
            shape_slots(f2, prefix, "_2", out);
        } else {
            out.push_back({ParamKind::Amplitude, f1, prefix + amp + "_1"});
            shape_slots(f1, prefix, "_1", out);
            out.push_back({ParamKind::Amplitude, f2, prefix + amp + "_2"});
            shape_slots(f2, prefix, "_2", out);
        }
    };
    std::vector<ParamSlot> out;
    switch (content) {
        case ContentType::Question:
            if (interaction) throw ContractViolation("question models take no interaction");
            out.push_back({ParamKind::Amplitude, 0, amp});
            shape_slots(0, "", "", out);
            break;
        case ContentType::Answer:
            if (!interaction) throw ContractViolation("answer models need an interaction");
            pair_slots(0, 1, "", out);
            break;
        case ContentType::Comment:
            if (!interaction) throw ContractViolation("comment models need an interaction");
            pair_slots(0, 2, "cq.", out);
            pair_slots(1, 2, "ca.", out);
            break;
    }
    return out;
}

}  // namespace

double Basis::operator()(double x) const {
    return amplitude * shape_eval(kind, shape.data(), x).value;
}

bool Basis::cobb_douglas_admissible() const {
    return kind == BasisKind::Power && shape[0] >= 0 && shape[0] <= 1;
}

double combine(InteractionKind kind, double y1, double y2) {
    switch (kind) {
        case InteractionKind::Essential: return std::min(y1, y2);
        case InteractionKind::InteractiveEssential: return y1 * y2;
        case InteractionKind::Antagonistic: return std::max(y1, y2);
        case InteractionKind::Substitutable: return y1 + y2;
    }
    return 0;
}

std::size_t factor_arity(ContentType content) {
    switch (content) {
        case ContentType::Question: return 1;
        case ContentType::Answer: return 2;
        case ContentType::Comment: return 3;
    }
    return 0;
}

std::size_t parameter_count(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction) {
    return layout(content, basis, interaction).size();
}

std::vector<ParamKind> parameter_kinds(ContentType content, BasisKind basis,
                                       std::optional<InteractionKind> interaction) {
    std::vector<ParamKind> out;
    for (const auto& s : layout(content, basis, interaction)) out.push_back(s.kind);
    return out;
}

std::vector<std::size_t> parameter_factors(ContentType content, BasisKind basis,
                                           std::optional<InteractionKind> interaction) {
    std::vector<std::size_t> out;
    for (const auto& s : layout(content, basis, interaction)) out.push_back(s.factor);
    return out;
}

std::vector<std::string> parameter_names(ContentType content, BasisKind basis,
                                         std::optional<InteractionKind> interaction) {
    std::vector<std::string> out;
    for (const auto& s : layout(content, basis, interaction)) out.push_back(s.name);
    return out;
}

FactorInputs factor_inputs(ContentType content, const MarketSeries& series) {
    switch (content) {
        case ContentType::Question: return {series.column(SeriesField::Askers)};
        case ContentType::Answer:
            return {series.column(SeriesField::Questions), series.column(SeriesField::Answerers)};
        case ContentType::Comment:
            return {series.column(SeriesField::Questions), series.column(SeriesField::Answers),
                    series.column(SeriesField::Commenters)};
    }
    return {};
}

std::vector<double> target_output(ContentType content, const MarketSeries& series) {
    switch (content) {
        case ContentType::Question: return series.column(SeriesField::Questions);
        case ContentType::Answer: return series.column(SeriesField::Answers);
        case ContentType::Comment: return series.column(SeriesField::Comments);
    }
    return {};
}

void check_spec(const ModelSpec& spec) {
    const auto n = parameter_count(spec.content, spec.basis, spec.interaction);
    if (spec.theta.size() != n)
        throw ContractViolation("theta has " + std::to_string(spec.theta.size()) + " entries, " + family_name(spec) +
                                " needs " + std::to_string(n));
    if (!spec.bounds.empty() && spec.bounds.size() != n) throw ContractViolation("bounds arity mismatch");
}

std::vector<double> evaluate(const ModelSpec& spec, const FactorInputs& inputs) {
    check_spec(spec);
    check_inputs(spec, inputs);
    const std::size_t periods = inputs.front().size();
    std::vector<double> out(periods);
    std::array<double, 3> x{};
    for (std::size_t t = 0; t < periods; ++t) {
        for (std::size_t f = 0; f < inputs.size(); ++f) x[f] = inputs[f][t];
        out[t] = point_eval(spec, x.data(), nullptr);
    }
    return out;
}

void evaluate_with_jacobian(const ModelSpec& spec, const FactorInputs& inputs, Eigen::VectorXd& values,
                            Eigen::MatrixXd& jacobian) {
    check_spec(spec);
    check_inputs(spec, inputs);
    const auto periods = static_cast<Eigen::Index>(inputs.front().size());
    const auto k = static_cast<Eigen::Index>(spec.theta.size());
    values.resize(periods);
    jacobian.resize(periods, k);
    std::array<double, 3> x{};
    std::vector<double> row(static_cast<std::size_t>(k));
    for (Eigen::Index t = 0; t < periods; ++t) {
        for (std::size_t f = 0; f < inputs.size(); ++f) x[f] = inputs[f][static_cast<std::size_t>(t)];
        std::fill(row.begin(), row.end(), 0.0);
        values[t] = point_eval(spec, x.data(), row.data());
        for (Eigen::Index j = 0; j < k; ++j) jacobian(t, j) = row[static_cast<std::size_t>(j)];
    }
}

double evaluate_point(const ModelSpec& spec, std::span<const double> point) {
    FactorInputs inputs;
    for (double v : point) inputs.push_back({v});
    return evaluate(spec, inputs).front();
}

double marginal_return(const ModelSpec& spec, std::size_t factor_index, std::span<const double> point,
                       double baseline) {
    if (factor_index >= factor_arity(spec.content)) throw ContractViolation("factor_index out of range");
    if (point.size() != factor_arity(spec.content)) throw ContractViolation("factor arity mismatch");
    require(baseline >= 1, "baseline must be at least 1");
    std::vector<double> lo(point.begin(), point.end());
    auto hi = lo;
    lo[factor_index] = baseline;
    hi[factor_index] = baseline + 1;
    return evaluate_point(spec, hi) - evaluate_point(spec, lo);
}

CobbDouglasSummary cobb_douglas_summary(const ModelSpec& spec) {
    check_spec(spec);
    const bool question = spec.content == ContentType::Question && spec.basis == BasisKind::Power;
    const bool answer = spec.content == ContentType::Answer && spec.basis == BasisKind::Power &&
                        spec.interaction == InteractionKind::InteractiveEssential;
    if (!question && !answer)
        throw Error("not-cobb-douglas", "summary undefined for this model family (" + family_name(spec) + ")");
    CobbDouglasSummary s;
    s.total_factor_productivity = spec.theta[0];
    s.elasticities.assign(spec.theta.begin() + 1, spec.theta.end());
    s.returns_to_scale = 0;
    s.admissible = true;
    for (double l : s.elasticities) {
        s.returns_to_scale += l;
        s.admissible = s.admissible && l >= 0 && l <= 1;
    }
    constexpr double tie = 1e-12;
    if (s.returns_to_scale < 1 - tie) s.classification = ReturnsToScale::Decreasing;
    else if (s.returns_to_scale > 1 + tie) s.classification = ReturnsToScale::Increasing;
    else s.classification = ReturnsToScale::Constant;
    return s;
}

ModelSpec make_template(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction,
                        const FactorInputs& inputs) {
    ModelSpec spec;
    spec.content = content;
    spec.basis = basis;
    spec.interaction = interaction;
    const auto slots = layout(content, basis, interaction);
    if (inputs.size() != factor_arity(content)) throw ContractViolation("factor arity mismatch");

    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const auto& slot : slots) {
        const auto& col = inputs[slot.factor];
        double lo_x = 0, hi_x = 1;
        if (!col.empty()) {
            const auto [mn, mx] = std::ranges::minmax_element(col);
            lo_x = *mn;
            hi_x = *mx;
        }
        const double span = std::max(hi_x - lo_x, 1.0);
        switch (slot.kind) {
            case ParamKind::Amplitude: spec.bounds.push_back({0, inf}); break;
            case ParamKind::Exponent: spec.bounds.push_back({0, 1.5}); break;
            case ParamKind::Base: spec.bounds.push_back({1e-12, 2}); break;
            case ParamKind::Rate: {
                const double k = 50 / std::max(hi_x, 1.0);
                spec.bounds.push_back({-k, k});
                break;
            }
            case ParamKind::Location: spec.bounds.push_back({lo_x - span, hi_x + span}); break;
        }
    }
    return spec;
}

ModelSpec make_template(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction,
                        const MarketSeries& observed) {
    return make_template(content, basis, interaction, factor_inputs(content, observed));
}

}  // namespace kmarket
