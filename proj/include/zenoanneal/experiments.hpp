#pragma once

#include "zenoanneal/anneal.hpp"
#include "zenoanneal/oracle.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace zeno::experiments {

enum class Nonlinearity { tpa, sfg };

struct OnsetSample {
    double t = 0;
    double p0 = 0;
    double p1 = 0;
    double p_higher = 0;
};

/// Uniform time grid t_k = k * t_end / (samples - 1).
inline std::vector<double> uniform_grid(double t_end, int samples) {
    std::vector<double> g;
    for (int k = 0; k < samples; ++k) g.push_back(t_end * k / (samples - 1));
    return g;
}

/// Populations of one driven mode started in vacuum. For SFG the pump is appended and traced per sample.
inline std::vector<OnsetSample> zeno_onset(Nonlinearity kind, double c, double gamma, double eta, std::size_t mode_dim,
                                           double t_end, int samples, const PropagatorOptions& opt = {}) {
    const FockSpace mode({mode_dim});
    const FockSpace space = kind == Nonlinearity::tpa ? mode : with_pump(mode);
    const GeneratorSpec gen = kind == Nonlinearity::tpa ? drive_tpa_generator(mode, {c, gamma, 0, 0})
                                                        : drive_sfg_generator(space, {c, gamma, eta, 0});
    const double dt = t_end / (samples - 1);
    DensityState rho = to_density(vacuum(space));
    std::optional<Superoperator> step;
    if (space.total_dim() <= opt.dense_threshold) step = expm_dense(gen, dt, opt);
    std::vector<OnsetSample> out;
    for (int k = 0; k < samples; ++k) {
        if (k > 0) rho = step ? step->apply(rho) : expm_apply(gen, dt, rho, opt);
        const auto pops = mode_populations(rho, 0);
        double higher = 0;
        for (std::size_t n = 2; n < pops.size(); ++n) higher += pops[n];
        out.push_back({k * dt, pops[0], pops[1], higher});
    }
    return out;
}

/// Truncation used for the driven-mode sweeps: 10 photons below gamma = 10, 5 photons above.
inline std::size_t sweep_mode_dim(double gamma) { return gamma < 10 ? 11 : 6; }

/// P(|1>) after driving vacuum for t = pi/(2c).
inline double flip_probability(Nonlinearity kind, double c, double gamma, double eta, std::size_t mode_dim,
                               const PropagatorOptions& opt = {}) {
    const FockSpace mode({mode_dim});
    const double t = std::numbers::pi / (2 * c);
    const DensityState vac = to_density(vacuum(mode));
    if (kind == Nonlinearity::tpa) return mode_populations(evolve(drive_tpa_generator(mode, {c, gamma, 0, 0}), t, vac, opt), 0)[1];
    return mode_populations(evolve_dl_sfg(vac, {c, gamma, eta, t}, opt), 0)[1];
}

/// Smallest rate reaching `target` for a monotone-in-the-tail probability curve: geometric scan, then bisection.
inline double threshold_rate(const std::function<double(double)>& prob, double target, double start, double factor = 1.25,
                             double rel_tol = 1e-3, double max_rate = 1e5) {
    double lo = 0, hi = start;
    while (prob(hi) < target) {
        lo = hi;
        hi *= factor;
        if (hi > max_rate) throw NumericalError("threshold not reached below the rate cap");
    }
    if (lo == 0) return hi;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (prob(mid) >= target ? hi : lo) = mid;
    }
    return hi;
}

/// Gamma needed for 99% flips with pump loss eta = ratio * 4 sqrt2 gamma (ratio 0 = lossless, 1 = critical).
inline double gamma_99_sfg(double c, double critical_fraction, double start = 0.5) {
    return threshold_rate(
        [&](double g) {
            return flip_probability(Nonlinearity::sfg, c, g, critical_fraction * 4 * std::numbers::sqrt2 * g, sweep_mode_dim(g));
        },
        0.99, start);
}

inline double gamma_99_tpa(double c, double start = 0.5) {
    return threshold_rate([&](double g) { return flip_probability(Nonlinearity::tpa, c, g, 0, sweep_mode_dim(g)); }, 0.99,
                          start);
}

struct MarkovComparison {
    double gamma = 0;
    double max_relative_error = 0;
    std::vector<double> times;
    std::vector<double> sfg;
    std::vector<double> markov;
};

/// Coherence under lossy SFG with gamma matched to gamma_tpa, against exp(-gamma_tpa t) over `decay_constants`.
inline MarkovComparison markov_approach(double gamma_tpa, double eta, double decay_constants = 2, int samples = 201) {
    MarkovComparison m;
    m.gamma = oracle::gamma_for_target(gamma_tpa, eta);
    m.times = uniform_grid(decay_constants / gamma_tpa, samples);
    const auto traj = oracle::rho12_ode({m.gamma, eta}, 1.0, m.times);
    for (std::size_t k = 0; k < m.times.size(); ++k) {
        const double ref = std::exp(-gamma_tpa * m.times[k]);
        m.sfg.push_back(traj[k].real());
        m.markov.push_back(ref);
        m.max_relative_error = std::max(m.max_relative_error, std::abs(traj[k].real() - ref) / ref);
    }
    return m;
}

/// <1,0_p|rho|2,0_p> under c = 0 lossy SFG from (|1>+|2>)(<1|+<2|)/2, sampled on `times`.
inline std::vector<cplx> rho12_full_simulation(double gamma, double eta, const std::vector<double>& times,
                                               std::size_t mode_dim = 3) {
    const FockSpace mode({mode_dim});
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(mode_dim));
    psi(1) = psi(2) = 1.0 / std::numbers::sqrt2;
    const DensityState rho0{mode, psi * psi.adjoint()};
    const FockSpace joint = with_pump(mode);
    const auto row = static_cast<Eigen::Index>(joint.index({1, 0}));
    const auto col = static_cast<Eigen::Index>(joint.index({2, 0}));
    std::vector<cplx> out;
    double prev = 0;
    DensityState rho = evolve_dl_sfg_joint(rho0, {0, gamma, eta, 0});
    const GeneratorSpec gen = drive_sfg_generator(joint, {0, gamma, eta, 0});
    for (double t : times) {
        rho = evolve(gen, t - prev, rho);
        prev = t;
        out.push_back(rho.matrix(row, col));
    }
    return out;
}

struct ConstraintPoint {
    double sfg_angle = 0;
    int n_cycle = 0;
    double success = 0;
    double max_entropy = 0;
    double final_entropy = 0;
    double max_leakage = 0;
};

/// Success and entropy of the density-matrix anneal over (SFG angle, n_cycle).
inline std::vector<ConstraintPoint> constraint_sweep(const ProblemGraph& g, double R_tot, double pump_phase,
                                                     const std::vector<double>& angles, const std::vector<int>& n_cycles,
                                                     AnnealOptions opt = {}) {
    std::vector<ConstraintPoint> out;
    for (double a : angles)
        for (int n : n_cycles) {
            const auto rep = run_anneal_density(g, make_schedule(n, R_tot), {pump_phase, a, 0.0}, opt);
            ConstraintPoint p{a, n, rep.final.success, 0, rep.final.entropy, 0};
            for (const auto& c : rep.cycles) {
                p.max_entropy = std::max(p.max_entropy, c.entropy);
                p.max_leakage = std::max(p.max_leakage, c.leakage);
            }
            out.push_back(p);
        }
    return out;
}

/// Smallest n_cycle on the grid whose success reaches `level`, if any.
inline std::optional<int> first_reaching(const std::vector<ConstraintPoint>& pts, double angle, double level) {
    std::optional<int> best;
    for (const auto& p : pts)
        if (std::abs(p.sfg_angle - angle) < 1e-12 && p.success >= level && (!best || p.n_cycle < *best)) best = p.n_cycle;
    return best;
}

struct ComparisonPoint {
    int n_cycle = 0;
    double R_tot = 0;
    double phase = 0;
    double ideal = 0;
};

struct CriticalResult {
    int n_cycle = 0;
    std::optional<double> critical;  // first R_tot whose deviation exceeds the tolerance
    double max_deviation_below = 0;
    std::vector<ComparisonPoint> curve;
};

/// Log-spaced grid from lo to hi with `per_decade` points per decade.
inline std::vector<double> log_grid(double lo, double hi, int per_decade) {
    std::vector<double> g;
    const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
    for (int k = 0; k <= n; ++k) g.push_back(lo * std::pow(10.0, static_cast<double>(k) / per_decade));
    return g;
}

/// Phase-kick constraints against projected-driver constraints over an R_tot grid.
inline CriticalResult ideal_vs_phase(const ProblemGraph& g, int n_cycle, const std::vector<double>& R_grid, double pump_phase,
                                     double tolerance, bool stop_at_critical = true) {
    CriticalResult res{n_cycle, std::nullopt, 0, {}};
    AnnealOptions opt;
    opt.record_every = 0;
    for (double R : R_grid) {
        const auto s = make_schedule(n_cycle, R);
        const double ph = run_anneal_statevector(g, s, pump_phase, opt).final.success;
        const double id = run_anneal_ideal(g, s, opt).final.success;
        res.curve.push_back({n_cycle, R, ph, id});
        const double dev = std::abs(ph - id);
        if (!res.critical && dev > tolerance) {
            res.critical = R;
            if (stop_at_critical) break;
        }
        if (!res.critical) res.max_deviation_below = std::max(res.max_deviation_below, dev);
    }
    return res;
}

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += r * r;
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    f.r_squared = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
    return f;
}

}  // namespace zeno::experiments
