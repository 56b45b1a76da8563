#include "kmarket/fitting.hpp"

#include "kmarket/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <thread>

namespace kmarket {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double result = 0;
    double f = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= static_cast<double>(base);
    }
    return result;
}

constexpr std::array<std::uint64_t, 16> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double max_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::ranges::max_element(v); }
double min_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::ranges::min_element(v); }

// Scales every amplitude by the c minimizing ||target − c·f(theta)||.
// All layouts are homogeneous of degree one in their amplitudes.
void rescale_amplitudes(ModelSpec& spec, const FactorInputs& inputs, std::span<const double> target,
                        const std::vector<ParamKind>& kinds) {
    const auto f = evaluate(spec, inputs);
    double ff = 0, fy = 0;
    for (std::size_t t = 0; t < f.size(); ++t) {
        ff += f[t] * f[t];
        fy += f[t] * target[t];
    }
    if (!(ff > 0) || !std::isfinite(ff) || !std::isfinite(fy) || fy <= 0) return;
    const double c = fy / ff;
    for (std::size_t j = 0; j < kinds.size(); ++j)
        if (kinds[j] == ParamKind::Amplitude)
            spec.theta[j] = std::clamp(spec.theta[j] * c, spec.bounds[j].lo, spec.bounds[j].hi);
}

double sse_of(const ModelSpec& spec, const FactorInputs& inputs, std::span<const double> target) {
    const auto f = evaluate(spec, inputs);
    double s = 0;
    for (std::size_t t = 0; t < f.size(); ++t) s += (target[t] - f[t]) * (target[t] - f[t]);
    return std::isfinite(s) ? s : kInf;
}

bool name_less(const GridCell& a, const GridCell& b) {
    const auto ka = std::pair{std::string(to_string(a.basis)),
                              a.interaction ? std::string(to_string(*a.interaction)) : std::string()};
    const auto kb = std::pair{std::string(to_string(b.basis)),
                              b.interaction ? std::string(to_string(*b.interaction)) : std::string()};
    return ka < kb;
}

}  // namespace

FitMetrics fit_metrics(std::span<const double> observed, std::span<const double> predicted, std::size_t k) {
    if (observed.size() != predicted.size()) throw ContractViolation("observed and predicted differ in length");
    require(observed.size() >= 2, "fit metrics need at least two observations");
    const auto T = static_cast<double>(observed.size());
    std::vector<double> resid(observed.size());
    for (std::size_t t = 0; t < observed.size(); ++t) resid[t] = observed[t] - predicted[t];

    FitMetrics m;
    for (double e : resid) m.sse += e * e;
    m.rmse = std::sqrt(m.sse / T);
    const double range = max_of(observed) - min_of(observed);
    m.nrmse = range > 0 ? m.rmse / range : kNaN;
    const double var_obs = stats::population_variance(observed);
    m.evs = var_obs > 0 ? 1.0 - stats::population_variance(resid) / var_obs : kNaN;
    m.aic = T * std::log(std::max(m.sse / T, kAicLogFloor)) + 2.0 * static_cast<double>(k);
    return m;
}

std::vector<std::vector<double>> start_points(const ModelSpec& tmpl, const FactorInputs& inputs,
                                              std::span<const double> target, const FitOptions& options) {
    const auto kinds = parameter_kinds(tmpl.content, tmpl.basis, tmpl.interaction);
    const auto factors = parameter_factors(tmpl.content, tmpl.basis, tmpl.interaction);
    const auto dims = kinds.size();
    require(dims <= kPrimes.size(), "too many parameters for the start sequence");
    require(tmpl.bounds.size() == dims, "template bounds missing");

    std::mt19937_64 rng(options.seed);
    std::vector<double> shift(dims);
    for (auto& s : shift) s = std::generate_canonical<double, 53>(rng);

    const double max_target = max_of(target);
    std::vector<std::vector<double>> starts;
    for (int i = 0; i < options.restarts; ++i) {
        std::vector<double> theta(dims);
        for (std::size_t j = 0; j < dims; ++j) {
            double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[j]) + shift[j];
            u -= std::floor(u);
            const auto& col = inputs[factors[j]];
            const double xmax = std::max(max_of(col), 1.0);
            const double xmin = min_of(col);
            double lo = 0, hi = 1;
            switch (kinds[j]) {
                case ParamKind::Amplitude:
                    lo = 0;
                    hi = 2 * std::max(max_target, 1.0) / xmax;
                    u = std::max(u, 1e-3);
                    break;
                case ParamKind::Exponent: lo = 0, hi = 1.5; break;
                case ParamKind::Base: {
                    const double lnb = -2.0 / xmax + u * 6.0 / xmax;
                    theta[j] = std::clamp(std::exp(lnb), tmpl.bounds[j].lo, tmpl.bounds[j].hi);
                    continue;
                }
                case ParamKind::Rate: lo = -10.0 / xmax, hi = 10.0 / xmax; break;
                case ParamKind::Location: lo = xmin, hi = std::max(max_of(col), xmin + 1); break;
            }
            theta[j] = std::clamp(lo + u * (hi - lo), tmpl.bounds[j].lo, tmpl.bounds[j].hi);
        }
        ModelSpec spec = tmpl;
        spec.theta = std::move(theta);
        rescale_amplitudes(spec, inputs, target, kinds);
        starts.push_back(std::move(spec.theta));
    }
    return starts;
}

FitReport fit(const ModelSpec& tmpl_in, const FactorInputs& inputs, std::span<const double> target,
              const FitOptions& options) {
    ModelSpec tmpl = tmpl_in;
    const auto k = parameter_count(tmpl.content, tmpl.basis, tmpl.interaction);
    if (tmpl.bounds.empty()) tmpl.bounds = make_template(tmpl.content, tmpl.basis, tmpl.interaction, inputs).bounds;
    if (tmpl.bounds.size() != k) throw ContractViolation("bounds arity mismatch");
    if (inputs.size() != factor_arity(tmpl.content)) throw ContractViolation("factor arity mismatch");
    if (inputs.front().size() != target.size()) throw ContractViolation("inputs and target differ in length");
    if (target.size() < k + 2)
        throw Error("series-too-short", family_name(tmpl) + " needs at least " + std::to_string(k + 2) +
                                            " periods, got " + std::to_string(target.size()));
    if (std::ranges::all_of(target, [](double v) { return v == 0; }))
        throw Error("degenerate-target", "degenerate target: every observed value is zero");

    const auto T = static_cast<Eigen::Index>(target.size());
    Eigen::VectorXd lower(static_cast<Eigen::Index>(k)), upper(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        lower[static_cast<Eigen::Index>(j)] = tmpl.bounds[j].lo;
        upper[static_cast<Eigen::Index>(j)] = tmpl.bounds[j].hi;
    }

    ModelSpec work = tmpl;
    work.theta.assign(k, 0.0);
    Eigen::VectorXd values;
    Eigen::MatrixXd jac;
    const lsq::ResidualFn residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        for (std::size_t j = 0; j < k; ++j) work.theta[j] = x[static_cast<Eigen::Index>(j)];
        evaluate_with_jacobian(work, inputs, values, jac);
        r.resize(T);
        for (Eigen::Index t = 0; t < T; ++t) r[t] = values[t] - target[static_cast<std::size_t>(t)];
        if (J) *J = jac;
    };

    FitReport report;
    report.parameters = k;
    report.observations = target.size();
    const auto starts = start_points(tmpl, inputs, target, options);
    std::optional<lsq::Result> best;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        ModelSpec start = tmpl;
        start.theta = starts[s];
        report.start_sse.push_back(sse_of(start, inputs, target));
        const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(starts[s].data(), static_cast<Eigen::Index>(k));
        auto result = lsq::solve(residual, x0, lower, upper, options.solver);
        ++report.restarts_used;
        if (!best || result.sse < best->sse) {
            best = std::move(result);
            report.best_start = static_cast<int>(s);
        }
    }

    report.spec = tmpl;
    report.spec.theta.assign(best->x.data(), best->x.data() + best->x.size());
    report.converged = best->converged();
    report.termination = lsq::to_string(best->termination);
    report.iterations = best->iterations;
    report.predicted = evaluate(report.spec, inputs);
    report.residuals.resize(target.size());
    for (std::size_t t = 0; t < target.size(); ++t) report.residuals[t] = target[t] - report.predicted[t];
    report.metrics = fit_metrics(target, report.predicted, k);
    return report;
}

FitReport fit(const ModelSpec& spec_template, const MarketSeries& observed, const FitOptions& options) {
    ModelSpec tmpl = spec_template;
    if (tmpl.bounds.empty()) tmpl.bounds = make_template(tmpl.content, tmpl.basis, tmpl.interaction, observed).bounds;
    const auto target = target_output(tmpl.content, observed);
    auto report = fit(tmpl, factor_inputs(tmpl.content, observed), target, options);
    report.site_id = observed.site_id;
    return report;
}

const GridCell* ModelGridResult::find(ContentType c, BasisKind b, std::optional<InteractionKind> i) const {
    for (const auto& cell : cells)
        if (cell.content == c && cell.basis == b && cell.interaction == i) return &cell;
    return nullptr;
}

const GridCell* ModelGridResult::winner(ContentType c) const {
    const auto it = winners.find(c);
    return it == winners.end() ? nullptr : &cells[it->second];
}

ModelGridResult fit_grid(const MarketSeries& observed, const GridOptions& options) {
    validate(observed);
    ModelGridResult grid;
    grid.site_id = observed.site_id;
    for (auto basis : kBasisKinds) {
        if (options.filter.basis && *options.filter.basis != basis) continue;
        grid.cells.push_back({ContentType::Question, basis, std::nullopt, std::nullopt, {}, 0});
    }
    for (auto content : {ContentType::Answer, ContentType::Comment})
        for (auto basis : kBasisKinds)
            for (auto inter : kInteractionKinds) {
                if (options.filter.basis && *options.filter.basis != basis) continue;
                if (options.filter.interaction && *options.filter.interaction != inter) continue;
                grid.cells.push_back({content, basis, inter, std::nullopt, {}, 0});
            }

    auto run = [&](GridCell& cell) {
        try {
            const auto tmpl = make_template(cell.content, cell.basis, cell.interaction, observed);
            cell.report = fit(tmpl, observed, options.fit);
        } catch (const Error& e) {
            cell.error = e.kind() + ": " + e.what();
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1) {
        for (auto& cell : grid.cells) run(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < std::min<std::size_t>(threads, grid.cells.size()); ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < grid.cells.size();) run(grid.cells[i]);
            });
    }

    for (auto content : {ContentType::Question, ContentType::Answer, ContentType::Comment}) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < grid.cells.size(); ++i) {
            const auto& c = grid.cells[i];
            if (c.content != content || !c.report) continue;
            if (!best) {
                best = i;
                continue;
            }
            const auto& b = grid.cells[*best];
            const double ai = c.report->metrics.aic, ab = b.report->metrics.aic;
            if (ai < ab || (ai == ab && (c.report->parameters < b.report->parameters ||
                                         (c.report->parameters == b.report->parameters && name_less(c, b)))))
                best = i;
        }
        if (!best) continue;
        grid.winners[content] = *best;
        const double winner_aic = grid.cells[*best].report->metrics.aic;
        for (auto& c : grid.cells)
            if (c.content == content && c.report) c.delta_aic = c.report->metrics.aic - winner_aic;
    }
    return grid;
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::Rmse: return "rmse";
        case Metric::Nrmse: return "nrmse";
        case Metric::Evs: return "evs";
        case Metric::Aic: return "aic";
    }
    return "?";
}

double metric_value(const FitMetrics& m, Metric metric) {
    switch (metric) {
        case Metric::Rmse: return m.rmse;
        case Metric::Nrmse: return m.nrmse;
        case Metric::Evs: return m.evs;
        case Metric::Aic: return m.aic;
    }
    return kNaN;
}

std::vector<MetricComparison> compare_models(std::span<const FitReport> a, std::span<const FitReport> b,
                                             double alpha) {
    if (a.size() != b.size()) throw ContractViolation("report lists are not paired");
    require(a.size() >= 2, "comparison needs at least two paired sites");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].site_id != b[i].site_id) throw ContractViolation("report lists are not paired by site");
        if (a[i].spec.content != b[i].spec.content) throw ContractViolation("paired reports differ in content type");
    }
    std::vector<MetricComparison> out;
    for (auto metric : kMetrics) {
        std::vector<double> va, vb;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double x = metric_value(a[i].metrics, metric), y = metric_value(b[i].metrics, metric);
            if (std::isfinite(x) && std::isfinite(y)) {
                va.push_back(x);
                vb.push_back(y);
            }
        }
        MetricComparison c;
        c.metric = metric;
        c.pairs = va.size();
        if (va.size() >= 2) {
            c.test = stats::paired_t_test(va, vb);
            c.significant = c.test.p_value < alpha;
            const bool higher_better = metric == Metric::Evs;
            const double d = c.test.mean_difference;  // b − a
            if (d != 0) c.favors = (d > 0) != higher_better ? "a" : "b";
        } else {
            c.test.p_value = kNaN;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace kmarket
