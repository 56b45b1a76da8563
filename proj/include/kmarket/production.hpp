#pragma once

#include "kmarket/series.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kmarket {

enum class ContentType { Question, Answer, Comment };
enum class BasisKind { Power, Exponential, Sigmoid };
enum class InteractionKind { Essential, InteractiveEssential, Antagonistic, Substitutable };

inline constexpr std::array kBasisKinds{BasisKind::Power, BasisKind::Exponential, BasisKind::Sigmoid};
inline constexpr std::array kInteractionKinds{InteractionKind::Essential, InteractionKind::InteractiveEssential,
                                              InteractionKind::Antagonistic, InteractionKind::Substitutable};

std::string_view to_string(ContentType c);
std::string_view to_string(BasisKind b);
std::string_view to_string(InteractionKind i);
std::optional<ContentType> parse_content_type(std::string_view text);
std::optional<BasisKind> parse_basis(std::string_view text);
std::optional<InteractionKind> parse_interaction(std::string_view text);

/// Per-factor consumption curve: power a·x^λ, exponential a·b^x, or sigmoid L/(1+e^{k(x−x0)}).
struct Basis {
    BasisKind kind = BasisKind::Power;
    double amplitude = 1;              // a, or L for sigmoid
    std::array<double, 2> shape{1, 0};  // {λ, -} | {b, -} | {k, x0}

    double operator()(double x) const;

    /// Power basis with exponent in [0, 1].
    bool cobb_douglas_admissible() const;
};

/// Combines two per-factor values.
double combine(InteractionKind kind, double y1, double y2);

/// Role a parameter plays; decides its bounds, start region and recovery tolerance.
enum class ParamKind { Amplitude, Exponent, Base, Rate, Location };

struct ParamBounds {
    double lo = 0;
    double hi = 0;
    bool operator==(const ParamBounds&) const = default;
};

/// A production model for one content type together with its parameter vector.
///
/// Parameter layout, with "shape" meaning {λ} for power, {b} for exponential
/// and {k, x0} for sigmoid:
///   Question                       [A, shape(U_q)]
///   Answer, interactive essential  [A, shape(N_q), shape(U_a)]   (one shared amplitude)
///   Answer, other interactions     [A1, shape(N_q), A2, shape(U_a)]
///   Comment                        [answer-layout(N_q, U_c), answer-layout(N_a, U_c)]
/// Substitutable weights are fixed at 1 and absorbed into the amplitudes.
struct ModelSpec {
    ContentType content = ContentType::Answer;
    BasisKind basis = BasisKind::Power;
    std::optional<InteractionKind> interaction;  // absent for Question
    std::vector<double> theta;
    std::vector<ParamBounds> bounds;

    bool operator==(const ModelSpec&) const = default;
};

/// Family identifier without parameters, e.g. "answer/power/interactive_essential".
std::string family_name(const ModelSpec& spec);

std::size_t parameter_count(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction);
std::vector<ParamKind> parameter_kinds(ContentType content, BasisKind basis,
                                       std::optional<InteractionKind> interaction);
std::vector<std::string> parameter_names(ContentType content, BasisKind basis,
                                         std::optional<InteractionKind> interaction);
/// Factor column each parameter acts on (the first factor for a shared amplitude).
std::vector<std::size_t> parameter_factors(ContentType content, BasisKind basis,
                                           std::optional<InteractionKind> interaction);

/// Number of factor columns each content type consumes: 1, 2 or 3.
std::size_t factor_arity(ContentType content);

/// Factor columns in model order: Question {U_q}; Answer {N_q, U_a}; Comment {N_q, N_a, U_c}.
using FactorInputs = std::vector<std::vector<double>>;

FactorInputs factor_inputs(ContentType content, const MarketSeries& series);
std::vector<double> target_output(ContentType content, const MarketSeries& series);

/// Validates theta/bounds arity and interaction presence. Throws ContractViolation.
void check_spec(const ModelSpec& spec);

/// Elementwise model output. Inputs must be non-negative and match the content arity.
std::vector<double> evaluate(const ModelSpec& spec, const FactorInputs& inputs);

/// Model output and its Jacobian with respect to theta (rows = periods).
/// For min/max interactions ties take the first argument's gradient.
void evaluate_with_jacobian(const ModelSpec& spec, const FactorInputs& inputs, Eigen::VectorXd& values,
                            Eigen::MatrixXd& jacobian);

/// Output at a single input point (one value per factor).
double evaluate_point(const ModelSpec& spec, std::span<const double> point);

/// f(.., x_i = baseline+1, ..) − f(.., x_i = baseline, ..) with the other factors held at `point`.
double marginal_return(const ModelSpec& spec, std::size_t factor_index, std::span<const double> point,
                       double baseline);

enum class ReturnsToScale { Decreasing, Constant, Increasing };
std::string_view to_string(ReturnsToScale r);

struct CobbDouglasSummary {
    double total_factor_productivity = 0;
    std::vector<double> elasticities;
    double returns_to_scale = 0;
    ReturnsToScale classification = ReturnsToScale::Constant;
    bool admissible = false;  // every elasticity within [0, 1]
};

/// Defined for power-basis question models and power/interactive-essential
/// answer models. Throws Error("not-cobb-douglas") otherwise.
CobbDouglasSummary cobb_douglas_summary(const ModelSpec& spec);

/// Unfitted spec for a family with bounds scaled to the observed factor ranges.
/// theta is left empty.
ModelSpec make_template(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction,
                        const MarketSeries& observed);

/// Same, for raw inputs (used by the synthetic generator and tests).
ModelSpec make_template(ContentType content, BasisKind basis, std::optional<InteractionKind> interaction,
                        const FactorInputs& inputs);

}  // namespace kmarket
