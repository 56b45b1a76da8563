#include "kmarket/error.hpp"
#include "kmarket/production.hpp"

#include "markets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace kmarket;
using kmtest::spec;

TEST(Production, AcademiaAnswerModelAtUnitInputs) {
    auto s = spec(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential, {6.93, 0.18, 0.65});
    const std::array<double, 2> point{1, 1};
    EXPECT_DOUBLE_EQ(evaluate_point(s, point), 6.93);
}

TEST(Production, InteractionExamples) {
    const std::array<double, 2> point{3, 5};
    EXPECT_DOUBLE_EQ(evaluate_point(spec(ContentType::Answer, BasisKind::Power, InteractionKind::Essential, {1, 1, 1, 1}), point), 3);
    EXPECT_DOUBLE_EQ(
        evaluate_point(spec(ContentType::Answer, BasisKind::Power, InteractionKind::Substitutable, {1, 1, 1, 1}), point), 8);
    EXPECT_DOUBLE_EQ(
        evaluate_point(spec(ContentType::Answer, BasisKind::Power, InteractionKind::Antagonistic, {1, 1, 1, 1}), point), 5);
}

TEST(Production, InteractionIdentities) {
    for (double y : {0.0, 0.3, 7.0, 1e6}) {
        EXPECT_EQ(combine(InteractionKind::Essential, y, y), y);
        EXPECT_EQ(combine(InteractionKind::Antagonistic, y, y), y);
        EXPECT_EQ(combine(InteractionKind::InteractiveEssential, y, 1.0), y);
        EXPECT_EQ(combine(InteractionKind::Substitutable, y, 0.0), y);
    }
}

TEST(Production, BasisValues) {
    EXPECT_DOUBLE_EQ((Basis{BasisKind::Power, 2, {0.5, 0}})(16), 8);
    EXPECT_DOUBLE_EQ((Basis{BasisKind::Exponential, 3, {2, 0}})(3), 24);
    const Basis sig{BasisKind::Sigmoid, 10, {-1, 5}};
    EXPECT_DOUBLE_EQ(sig(5), 5);
    for (double x : {0.0, 1.0, 100.0, 1e5}) {
        EXPECT_GE(sig(x), 0);
        EXPECT_LE(sig(x), 10);
    }
    EXPECT_TRUE((Basis{BasisKind::Power, 1, {0.65, 0}}).cobb_douglas_admissible());
    EXPECT_FALSE((Basis{BasisKind::Power, 1, {1.2, 0}}).cobb_douglas_admissible());
    EXPECT_FALSE((Basis{BasisKind::Exponential, 1, {0.5, 0}}).cobb_douglas_admissible());
}

TEST(Production, ParameterCounts) {
    EXPECT_EQ(parameter_count(ContentType::Question, BasisKind::Power, std::nullopt), 2u);
    EXPECT_EQ(parameter_count(ContentType::Question, BasisKind::Sigmoid, std::nullopt), 3u);
    EXPECT_EQ(parameter_count(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential), 3u);
    EXPECT_EQ(parameter_count(ContentType::Answer, BasisKind::Power, InteractionKind::Essential), 4u);
    EXPECT_EQ(parameter_count(ContentType::Answer, BasisKind::Sigmoid, InteractionKind::InteractiveEssential), 5u);
    EXPECT_EQ(parameter_count(ContentType::Answer, BasisKind::Sigmoid, InteractionKind::Antagonistic), 6u);
    EXPECT_EQ(parameter_count(ContentType::Comment, BasisKind::Power, InteractionKind::InteractiveEssential), 6u);
    EXPECT_EQ(parameter_count(ContentType::Comment, BasisKind::Power, InteractionKind::Substitutable), 8u);
    for (auto b : kBasisKinds)
        for (auto i : kInteractionKinds)
            EXPECT_EQ(parameter_count(ContentType::Comment, b, i), 2 * parameter_count(ContentType::Answer, b, i));
}

TEST(Production, ContractViolations) {
    auto s = kmtest::answer_cobb_douglas();
    EXPECT_THROW(evaluate(s, {{1, 2}}), ContractViolation);
    EXPECT_THROW(evaluate(s, {{1, 2}, {1, -1}}), ContractViolation);
    EXPECT_THROW(evaluate(s, {{1, 2}, {1}}), ContractViolation);
    s.theta.pop_back();
    EXPECT_THROW(evaluate(s, {{1}, {1}}), ContractViolation);
    const std::array<double, 2> point{1, 1};
    EXPECT_THROW(marginal_return(kmtest::answer_cobb_douglas(), 2, point, 10), ContractViolation);
    EXPECT_THROW(marginal_return(kmtest::answer_cobb_douglas(), 0, point, 0.5), ContractViolation);
}

TEST(Production, MarginalReturnExamples) {
    auto s = spec(ContentType::Question, BasisKind::Power, std::nullopt, {1.0, 0.65});
    const std::array<double, 1> point{1};
    EXPECT_NEAR(marginal_return(s, 0, point, 100), std::pow(101, 0.65) - std::pow(100, 0.65), 1e-12);
    EXPECT_NEAR(marginal_return(s, 0, point, 100), 0.129, 5e-4);
    EXPECT_NEAR(marginal_return(s, 0, point, 110), 0.125, 5e-4);
    auto linear = spec(ContentType::Question, BasisKind::Power, std::nullopt, {3.0, 1.0});
    for (double b : {1.0, 10.0, 1000.0}) EXPECT_NEAR(marginal_return(linear, 0, point, b), 3.0, 1e-9);
}

TEST(Production, DiminishingReturns) {
    for (double l : {0.1, 0.5, 0.9}) {
        auto s = spec(ContentType::Question, BasisKind::Power, std::nullopt, {2.0, l});
        const std::array<double, 1> point{1};
        double prev = INFINITY;
        for (double b = 1; b < 2000; b *= 1.7) {
            const double m = marginal_return(s, 0, point, b);
            EXPECT_LT(m, prev);
            prev = m;
        }
    }
}

TEST(Production, ConstantElasticity) {
    auto s = spec(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential, {6.93, 0.18, 0.65});
    const std::array<double, 2> base{120, 340};
    const double y = evaluate_point(s, base);
    for (double eps : {-0.9, -0.3, 0.01, 0.5, 4.0}) {
        for (std::size_t i = 0; i < 2; ++i) {
            auto p = base;
            p[i] *= 1 + eps;
            EXPECT_NEAR(evaluate_point(s, p) / y, std::pow(1 + eps, s.theta[1 + i]), 1e-12);
        }
    }
}

TEST(Production, CobbDouglasSummary) {
    auto academia = cobb_douglas_summary(
        spec(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential, {6.93, 0.18, 0.65}));
    EXPECT_NEAR(academia.returns_to_scale, 0.83, 1e-15);
    EXPECT_EQ(academia.classification, ReturnsToScale::Decreasing);
    EXPECT_DOUBLE_EQ(academia.total_factor_productivity, 6.93);
    EXPECT_TRUE(academia.admissible);
    EXPECT_EQ(cobb_douglas_summary(spec(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential,
                                        {1, 0.5, 0.5}))
                  .classification,
              ReturnsToScale::Constant);
    auto inc = cobb_douglas_summary(
        spec(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential, {1, 0.7, 0.6}));
    EXPECT_NEAR(inc.returns_to_scale, 1.3, 1e-15);
    EXPECT_EQ(inc.classification, ReturnsToScale::Increasing);
    EXPECT_TRUE(inc.admissible);
    try {
        cobb_douglas_summary(spec(ContentType::Answer, BasisKind::Power, InteractionKind::Essential, {1, 1, 1, 1}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "not-cobb-douglas");
    }
}

TEST(Production, CommentIsSumOfHalves) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> x(1, 500);
    FactorInputs inputs(3);
    for (int t = 0; t < 20; ++t)
        for (auto& col : inputs) col.push_back(x(rng));
    for (auto b : kBasisKinds) {
        for (auto i : kInteractionKinds) {
            auto tmpl = make_template(ContentType::Answer, b, i, FactorInputs{inputs[0], inputs[2]});
            std::vector<double> half1, half2;
            for (std::size_t p = 0; p < tmpl.bounds.size(); ++p) {
                auto pick = [&](double u) {
                    const auto& bd = tmpl.bounds[p];
                    const double lo = std::max(bd.lo, -3.0), hi = std::min(bd.hi, 3.0);
                    return lo + u * (hi - lo);
                };
                half1.push_back(pick(0.3 + 0.1 * static_cast<double>(p % 3)));
                half2.push_back(pick(0.6 - 0.1 * static_cast<double>(p % 2)));
            }
            auto q_half = spec(ContentType::Answer, b, i, half1);
            auto a_half = spec(ContentType::Answer, b, i, half2);
            auto joined = half1;
            joined.insert(joined.end(), half2.begin(), half2.end());
            auto comment = spec(ContentType::Comment, b, i, joined);
            const auto c = evaluate(comment, inputs);
            const auto yq = evaluate(q_half, {inputs[0], inputs[2]});
            const auto ya = evaluate(a_half, {inputs[1], inputs[2]});
            for (std::size_t t = 0; t < c.size(); ++t)
                EXPECT_NEAR(c[t], yq[t] + ya[t], 1e-12 * std::max(1.0, std::abs(c[t])));
        }
    }
}

TEST(Production, FamilyNamesAndParsing) {
    EXPECT_EQ(family_name(kmtest::answer_cobb_douglas()), "answer/power/interactive_essential");
    EXPECT_EQ(family_name(kmtest::question_power()), "question/power");
    for (auto b : kBasisKinds) EXPECT_EQ(parse_basis(to_string(b)), b);
    for (auto i : kInteractionKinds) EXPECT_EQ(parse_interaction(to_string(i)), i);
    EXPECT_FALSE(parse_basis("linear"));
}

TEST(Production, TemplateBounds) {
    auto t = make_template(ContentType::Answer, BasisKind::Power, InteractionKind::Essential,
                           FactorInputs{{1, 5, 9}, {2, 4, 6}});
    ASSERT_EQ(t.bounds.size(), 4u);
    EXPECT_EQ(t.bounds[1], (ParamBounds{0, 1.5}));
    EXPECT_EQ(t.bounds[0].lo, 0);
    EXPECT_TRUE(std::isinf(t.bounds[0].hi));
    auto e = make_template(ContentType::Question, BasisKind::Exponential, std::nullopt, FactorInputs{{1, 5, 9}});
    EXPECT_LE(e.bounds[1].hi, 2);
    EXPECT_GT(e.bounds[1].lo, 0);
}

TEST(Production, JacobianMatchesCentralDifferences) {
    FactorInputs inputs{{3, 10, 40, 90}, {5, 12, 30, 70}};
    for (auto b : kBasisKinds) {
        for (auto i : kInteractionKinds) {
            auto s = make_template(ContentType::Answer, b, i, inputs);
            for (std::size_t p = 0; p < s.bounds.size(); ++p) {
                const auto& bd = s.bounds[p];
                const double lo = std::max(bd.lo, 0.05), hi = std::min(bd.hi, 2.0);
                s.theta.push_back(lo + (0.37 + 0.11 * static_cast<double>(p)) * (hi - lo) / 2);
            }
            Eigen::VectorXd values;
            Eigen::MatrixXd jac;
            evaluate_with_jacobian(s, inputs, values, jac);
            for (std::size_t p = 0; p < s.theta.size(); ++p) {
                const double h = 1e-6 * std::max(1.0, std::abs(s.theta[p]));
                auto up = s, down = s;
                up.theta[p] += h;
                down.theta[p] -= h;
                const auto yu = evaluate(up, inputs), yd = evaluate(down, inputs);
                for (std::size_t t = 0; t < yu.size(); ++t) {
                    const double fd = (yu[t] - yd[t]) / (2 * h);
                    const double an = jac(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p));
                    // one-sided slopes disagree only where a min/max arm switch lies within h
                    const double fwd = (yu[t] - values[static_cast<Eigen::Index>(t)]) / h;
                    const double bwd = (values[static_cast<Eigen::Index>(t)] - yd[t]) / h;
                    if (std::abs(fwd - bwd) > 1e-3 * std::max(1.0, std::abs(fd))) continue;
                    EXPECT_NEAR(an, fd, 1e-4 * std::max(1.0, std::abs(fd))) << family_name(s) << " param " << p;
                }
            }
        }
    }
}
