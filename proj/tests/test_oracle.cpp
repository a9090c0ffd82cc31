#include "zenoanneal/experiments.hpp"
#include "zenoanneal/oracle.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace zeno;
using namespace zeno::oracle;

namespace {

std::vector<double> grid(double t_end, int n) { return experiments::uniform_grid(t_end, n); }

}  // namespace

TEST(Regime, Boundaries) {
    const double g = 1.3;
    EXPECT_EQ((DampingParams{g, 4 * std::numbers::sqrt2 * g}).regime(), Regime::critical);
    EXPECT_EQ((DampingParams{g, 1.0}).regime(), Regime::underdamped);
    EXPECT_EQ((DampingParams{g, 100.0}).regime(), Regime::overdamped);
    EXPECT_THROW(rho12_ode({-1.0, 0.0}, 1.0, {0.0}), std::invalid_argument);
}

TEST(Ode, UndampedCosine) {
    const DampingParams p{0.7, 0.0};
    const auto ts = grid(10.0, 41);
    const auto traj = rho12_ode(p, 0.5, ts);
    for (std::size_t k = 0; k < ts.size(); ++k)
        EXPECT_NEAR(std::abs(traj[k] - 0.5 * std::cos(std::numbers::sqrt2 * 0.7 * ts[k])), 0.0, 1e-9);
}

TEST(Ode, CriticalDampingHasNoSignChange) {
    const double g = 2.0;
    const auto traj = rho12_ode({g, 4 * std::numbers::sqrt2 * g}, 1.0, grid(20.0, 801));
    EXPECT_EQ(sign_changes(traj), 0);
    const auto under = rho12_ode({g, 0.9 * 4 * std::numbers::sqrt2 * g}, 1.0, grid(20.0, 801));
    EXPECT_GE(sign_changes(under), 1);
}

TEST(Ode, NeverAmplifies) {
    for (double eta : {0.0, 1.0, 5.0, 11.3137, 40.0}) {
        const auto traj = rho12_ode({2.0, eta}, 1.0, grid(5.0, 201));
        for (const auto& z : traj) EXPECT_LE(std::abs(z), 1.0 + 1e-10) << eta;
    }
}

TEST(ClosedForm, CorrectedFormsMatchOde) {
    const auto ts = grid(4.0, 81);
    for (const DampingParams& p : {DampingParams{2.0, 3.0}, DampingParams{2.0, 4 * std::numbers::sqrt2 * 2.0}, DampingParams{2.0, 30.0}}) {
        const auto traj = rho12_ode(p, 1.0, ts);
        for (std::size_t k = 0; k < ts.size(); ++k)
            EXPECT_NEAR(std::abs(rho12_closed_form(p, 1.0, ts[k]) - traj[k]), 0.0, 1e-8) << to_string(p.regime()) << " t=" << ts[k];
    }
}

TEST(ClosedForm, PrintedFormsDisagreeAwayFromZero) {
    const DampingParams under{2.0, 3.0};
    const DampingParams over{2.0, 30.0};
    for (const auto& p : {under, over}) {
        EXPECT_NEAR(std::abs(rho12_closed_form(p, 1.0, 0.0, ClosedForm::printed) - 1.0), 0.0, 1e-15);
        const auto ode = rho12_ode(p, 1.0, {0.5}).front();
        EXPECT_GT(std::abs(rho12_closed_form(p, 1.0, 0.5, ClosedForm::printed) - ode), 1e-3);
    }
}

TEST(ClosedForm, InitialValueAndCriticalContinuity) {
    const double g = 1.5;
    const double ec = 4 * std::numbers::sqrt2 * g;
    for (double eta : {1.0, ec, 50.0}) EXPECT_NEAR(std::abs(rho12_closed_form({g, eta}, 0.7, 0.0) - 0.7), 0.0, 1e-15);
    for (double t : {0.1, 0.5, 2.0}) {
        const auto c = rho12_closed_form({g, ec}, 1.0, t);
        EXPECT_NEAR(std::abs(rho12_closed_form({g, ec * (1 + 1e-6)}, 1.0, t) - c), 0.0, 1e-5);
        EXPECT_NEAR(std::abs(rho12_closed_form({g, ec * (1 - 1e-6)}, 1.0, t) - c), 0.0, 1e-5);
    }
}

TEST(Markov, EffectiveRateAndInversion) {
    EXPECT_NEAR(gamma_tpa_effective(1.0, 1000.0) / (4.0 / 1000.0), 1.0, 1e-4);
    for (double target : {0.01, 0.5, 1.0, 2.0}) {
        const double eta = 100.0;
        EXPECT_NEAR(gamma_tpa_effective(gamma_for_target(target, eta), eta), target, 1e-12);
    }
    EXPECT_THROW(gamma_for_target(30.0, 100.0), std::domain_error);
    EXPECT_THROW(gamma_for_target(1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(gamma_tpa_effective(10.0, 1.0), std::invalid_argument);
    EXPECT_NEAR(gamma_for_target_printed(1.0, 100.0), 5.0, 1e-15);
}

TEST(Markov, StronglyOverdampedApproachesExponential) {
    const auto m = experiments::markov_approach(1.0, 100.0);
    EXPECT_LT(m.max_relative_error, 0.05);
}

TEST(FullSimulation, MatchesOdeAcrossRegimes) {
    const auto ts = grid(2.0, 11);
    for (const DampingParams& p : {DampingParams{1.0, 0.5}, DampingParams{1.0, 4 * std::numbers::sqrt2}, DampingParams{0.5, 20.0}}) {
        const auto full = experiments::rho12_full_simulation(p.gamma, p.eta, ts);
        const auto ode = rho12_ode(p, 0.5, ts);
        for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_NEAR(std::abs(full[k] - ode[k]), 0.0, 1e-8) << to_string(p.regime());
    }
}

TEST(Experiments, LinearFit) {
    const auto f = experiments::linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Experiments, LogGrid) {
    const auto g = experiments::log_grid(1.0, 100.0, 2);
    ASSERT_EQ(g.size(), 5u);
    EXPECT_NEAR(g[2], 10.0, 1e-12);
    EXPECT_NEAR(g.back(), 100.0, 1e-12);
}

TEST(Experiments, ThresholdRateBisects) {
    const double r = experiments::threshold_rate([](double x) { return x >= 3.7 ? 1.0 : 0.0; }, 0.5, 0.5);
    EXPECT_NEAR(r, 3.7, 3.7e-3);
}

TEST(Experiments, OnsetWithoutNonlinearitySpreadsPopulation) {
    const auto s = experiments::zeno_onset(experiments::Nonlinearity::tpa, 1.0, 0.0, 0.0, 31, std::numbers::pi / 2, 3);
    EXPECT_NEAR(s.back().p1, 0.2, 0.02);
    EXPECT_GT(s.back().p_higher, 0.5);
}
