#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace zeno::oracle {

using cplx = std::complex<double>;

enum class Regime { underdamped, critical, overdamped };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::underdamped: return "underdamped";
        case Regime::critical: return "critical";
        case Regime::overdamped: return "overdamped";
    }
    return "?";
}

/// SFG coupling and pump loss rate of the two-level coherence problem.
struct DampingParams {
    double gamma = 0;
    double eta = 0;

    double critical_eta() const { return 4.0 * std::numbers::sqrt2 * gamma; }

    Regime regime() const {
        const double ec = critical_eta();
        if (eta == ec) return Regime::critical;
        return eta < ec ? Regime::underdamped : Regime::overdamped;
    }
};

inline void check(const DampingParams& p) {
    if (!(p.gamma >= 0) || !(p.eta >= 0)) throw std::invalid_argument("damping parameters must be non-negative");
}

namespace detail {

struct Pair {
    cplx coherence;  // <1,0_p|rho|2,0_p>
    cplx pump;       // <1,0_p|rho|0,1_p>
};

inline Pair derivative(const DampingParams& p, const Pair& s) {
    const cplx coupling{0.0, std::numbers::sqrt2 * p.gamma};
    return {coupling * s.pump, coupling * s.coherence - 0.5 * p.eta * s.pump};
}

inline Pair rk4_step(const DampingParams& p, const Pair& s, double h) {
    auto axpy = [](const Pair& a, double f, const Pair& b) { return Pair{a.coherence + f * b.coherence, a.pump + f * b.pump}; };
    const Pair k1 = derivative(p, s);
    const Pair k2 = derivative(p, axpy(s, h / 2, k1));
    const Pair k3 = derivative(p, axpy(s, h / 2, k2));
    const Pair k4 = derivative(p, axpy(s, h, k3));
    return {s.coherence + h / 6 * (k1.coherence + 2.0 * k2.coherence + 2.0 * k3.coherence + k4.coherence),
            s.pump + h / 6 * (k1.pump + 2.0 * k2.pump + 2.0 * k3.pump + k4.pump)};
}

inline std::vector<cplx> integrate(const DampingParams& p, cplx rho12_0, const std::vector<double>& grid, int substeps) {
    std::vector<cplx> out;
    out.reserve(grid.size());
    Pair s{rho12_0, 0.0};
    double t = 0;
    for (double target : grid) {
        if (target < t) throw std::invalid_argument("time grid must be non-decreasing and start at or after 0");
        const double span = target - t;
        if (span > 0) {
            const double h = span / substeps;
            for (int k = 0; k < substeps; ++k) s = rk4_step(p, s, h);
        }
        t = target;
        out.push_back(s.coherence);
    }
    return out;
}

}  // namespace detail

/// Fixed-step RK4 integration of the coupled coherence equations with an empty initial pump.
/// The step count doubles until halving the step changes no sample by more than 1e-10.
inline std::vector<cplx> rho12_ode(const DampingParams& p, cplx rho12_0, const std::vector<double>& t_grid) {
    check(p);
    double longest = 0, prev = 0;
    for (double t : t_grid) {
        longest = std::max(longest, t - prev);
        prev = t;
    }
    const double rate = std::max({std::numbers::sqrt2 * p.gamma, p.eta / 2, 1e-12});
    int substeps = std::max(8, static_cast<int>(std::ceil(longest * rate / 0.05)));
    auto coarse = detail::integrate(p, rho12_0, t_grid, substeps);
    const double tol = 1e-10 * std::max(1.0, std::abs(rho12_0));
    for (int round = 0; round < 12; ++round) {
        substeps *= 2;
        auto fine = detail::integrate(p, rho12_0, t_grid, substeps);
        double diff = 0;
        for (std::size_t i = 0; i < fine.size(); ++i) diff = std::max(diff, std::abs(fine[i] - coarse[i]));
        coarse = std::move(fine);
        if (diff < tol) return coarse;
    }
    throw std::runtime_error("rho12_ode: step refinement did not reach 1e-10");
}

enum class ClosedForm {
    printed,   // expressions exactly as typeset
    corrected  // the solution of the damped oscillator with rho12'(0) = 0
};

/// Closed-form coherence in the regime selected by the parameters.
inline cplx rho12_closed_form(const DampingParams& p, cplx rho12_0, double t, ClosedForm form = ClosedForm::corrected) {
    check(p);
    const double decay = std::exp(-p.eta * t / 4);
    switch (p.regime()) {
        case Regime::critical: return rho12_0 * (1 + p.eta * t / 4) * decay;
        case Regime::underdamped: {
            const double w = std::sqrt(2 * p.gamma * p.gamma - p.eta * p.eta / 16);
            const double sine_coeff = form == ClosedForm::printed ? p.eta / 4 : p.eta / (4 * w);
            return rho12_0 * (std::cos(w * t) + sine_coeff * std::sin(w * t)) * decay;
        }
        case Regime::overdamped: {
            const double k = std::sqrt(p.eta * p.eta / 16 - 2 * p.gamma * p.gamma);
            const double slow = form == ClosedForm::printed ? (4 + p.eta) / 8 : 0.5 + p.eta / (8 * k);
            const double fast = form == ClosedForm::printed ? (4 - p.eta) / 8 : 0.5 - p.eta / (8 * k);
            return rho12_0 * (slow * std::exp(-(p.eta / 4 - k) * t) + fast * std::exp(-(p.eta / 4 + k) * t));
        }
    }
    return 0.0;
}

/// Decay rate of the slow overdamped term, eta/4 - sqrt(eta^2/16 - 2 gamma^2).
inline double gamma_tpa_effective(double gamma, double eta) {
    const double disc = eta * eta / 16 - 2 * gamma * gamma;
    if (disc < 0 || gamma < 0 || eta < 0) throw std::invalid_argument("gamma_tpa_effective needs the overdamped or critical regime");
    return eta / 4 - std::sqrt(disc);
}

/// Exact inverse of gamma_tpa_effective at fixed eta.
inline double gamma_for_target(double gamma_tpa, double eta) {
    if (!(eta > 0)) throw std::invalid_argument("gamma_for_target needs eta > 0");
    if (gamma_tpa < 0) throw std::invalid_argument("gamma_for_target needs gamma_tpa >= 0");
    if (gamma_tpa > eta / 4) throw std::domain_error("target gamma_tpa unreachable: exceeds eta/4");
    return std::sqrt(gamma_tpa * (eta - 2 * gamma_tpa)) / 2;
}

/// The large-eta matching relation as typeset, gamma ~ (sqrt(eta)/2) gamma_tpa.
inline double gamma_for_target_printed(double gamma_tpa, double eta) { return std::sqrt(eta) / 2 * gamma_tpa; }

/// Number of sign changes of the real part along a trajectory, ignoring samples below `floor`.
inline int sign_changes(const std::vector<cplx>& traj, double floor = 1e-12) {
    int changes = 0, last = 0;
    for (const auto& z : traj) {
        const double x = z.real();
        if (std::abs(x) <= floor) continue;
        const int s = x > 0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

}  // namespace zeno::oracle
