#pragma once

#include "zenoanneal/gadgets.hpp"
#include "zenoanneal/problems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace zeno {

struct ScheduleEntry {
    double tau = 0;
    double phi = 0;   // phase angle per unit weight
    double c = 0;     // drive angle
    double zeta = 0;  // QUBO ramp (zero for MIS schedules)
};

struct Schedule {
    int n_cycle = 0;
    double R_tot = 0;
    std::vector<ScheduleEntry> entries;
    std::optional<std::vector<double>> weights;

    double weight(std::size_t node) const { return weights ? (*weights)[node] : 1.0; }
};

/// tau_i = i/(n+1); phi/c = cot(pi tau) with |phi| + |c| = R_tot / n_cycle.
inline Schedule make_schedule(int n_cycle, double R_tot) {
    if (n_cycle < 1) throw std::invalid_argument("n_cycle must be at least 1");
    if (!(R_tot > 0)) throw std::invalid_argument("R_tot must be positive");
    Schedule s{n_cycle, R_tot, {}, std::nullopt};
    const double step = R_tot / n_cycle;
    s.entries.reserve(static_cast<std::size_t>(n_cycle));
    for (int i = 1; i <= n_cycle; ++i) {
        const double tau = static_cast<double>(i) / (n_cycle + 1);
        const double ct = std::cos(std::numbers::pi * tau) / std::sin(std::numbers::pi * tau);
        const double denom = 1.0 + std::abs(ct);
        s.entries.push_back({tau, step * ct / denom, step / denom, 0.0});
    }
    return s;
}

/// Per-node phase multipliers w_i.
inline Schedule weighted_phases(Schedule s, const std::vector<double>& weights) {
    for (double w : weights)
        if (!(w > 0)) throw std::invalid_argument("weights must be positive");
    s.weights = weights;
    return s;
}

enum class DriveMode { ideal_two_level, zeno_tpa, zeno_sfg };

inline const char* to_string(DriveMode d) {
    switch (d) {
        case DriveMode::ideal_two_level: return "ideal-2level";
        case DriveMode::zeno_tpa: return "zeno-tpa";
        case DriveMode::zeno_sfg: return "zeno-sfg";
    }
    return "?";
}

struct AnnealOptions {
    DriveMode drive = DriveMode::ideal_two_level;
    double drive_gamma_ratio = 150.0;  // nonlinear rate over drive rate for Zeno drives
    double drive_loss_ratio = 0.0;     // pump loss rate over nonlinear rate for the SFG drive
    int cache_stages = 30;
    std::size_t mode_dim = 3;
    bool record_entropy = true;
    int record_every = 1;  // 0 records only the final cycle
};

struct CycleRecord {
    int cycle = 0;
    double success = 0;
    double entropy = 0;
    double leakage = 0;
};

struct AnnealReport {
    std::vector<CycleRecord> cycles;
    CycleRecord final;
    std::string order = "phase,drive,constraints";
    std::vector<std::vector<std::size_t>> targets;
    std::vector<std::pair<std::string, double>> top_states;  // most populated basis states at the end
};

/// Basis states the success probability counts: every optimum of the (weighted) MIS or QUBO.
inline std::vector<std::vector<std::size_t>> target_sets(const ProblemGraph& g) {
    if (g.qubo) return brute_force_qubo(g).optima;
    return (g.weights ? brute_force_wmis(g) : brute_force_mis(g)).optima;
}

namespace detail {

inline std::vector<std::size_t> set_to_occupations(const std::vector<std::size_t>& set, std::size_t n) {
    std::vector<std::size_t> occ(n, 0);
    for (auto v : set) occ[v] = 1;
    return occ;
}

inline std::string occupation_label(const FockSpace& space, std::size_t index) {
    std::string s;
    for (auto o : space.occupations(index)) s += std::to_string(o);
    return s;
}

template <class Populations>
std::vector<std::pair<std::string, double>> top_states(const FockSpace& space, const Populations& pop, std::size_t k) {
    std::vector<std::pair<std::string, double>> all;
    for (std::size_t i = 0; i < space.total_dim(); ++i) all.emplace_back(occupation_label(space, i), pop(i));
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    all.resize(std::min(k, all.size()));
    return all;
}

/// Basis indices of the independent 0/1 configurations of `g` within `space`.
inline std::vector<std::size_t> independent_indices(const FockSpace& space, const ProblemGraph& g) {
    std::vector<std::size_t> out;
    const std::size_t n = g.n_vertices;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        if (!g.independent(mask)) continue;
        std::vector<std::size_t> occ(n);
        for (std::size_t v = 0; v < n; ++v) occ[v] = (mask >> v) & 1U;
        out.push_back(space.index(occ));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline bool should_record(const AnnealOptions& o, int cycle, int n_cycle) {
    if (cycle == n_cycle) return true;
    return o.record_every > 0 && cycle % o.record_every == 0;
}

/// e^{-i c X} on {|0>,|1>}, identity on higher photon numbers.
inline Matrix two_level_rotation(std::size_t dim, double c) {
    Matrix u = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    u(0, 0) = std::cos(c);
    u(1, 1) = std::cos(c);
    u(0, 1) = -I_unit * std::sin(c);
    u(1, 0) = -I_unit * std::sin(c);
    return u;
}

}  // namespace detail

inline double success_probability(const DensityState& rho, const ProblemGraph& g,
                                  const std::vector<std::vector<std::size_t>>& targets) {
    double p = 0;
    for (const auto& s : targets) p += population(rho, detail::set_to_occupations(s, g.n_vertices));
    return p;
}

inline double success_probability(const PureState& psi, const ProblemGraph& g,
                                  const std::vector<std::vector<std::size_t>>& targets) {
    double p = 0;
    for (const auto& s : targets) p += population(psi, detail::set_to_occupations(s, g.n_vertices));
    return p;
}

template <class State>
double success_probability(const State& s, const ProblemGraph& g) {
    return success_probability(s, g, target_sets(g));
}

/// Population outside the independent 0/1 configurations (includes any photon number >= 2).
inline double leakage(const DensityState& rho, const ProblemGraph& g) {
    double inside = 0;
    for (auto i : detail::independent_indices(rho.space, g))
        inside += rho.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    return std::max(0.0, 1.0 - inside);
}

inline double leakage(const PureState& psi, const ProblemGraph& g) {
    double inside = 0;
    for (auto i : detail::independent_indices(psi.space, g)) inside += std::norm(psi.amplitudes(static_cast<Eigen::Index>(i)));
    return std::max(0.0, 1.0 - inside);
}

namespace detail {

/// Per-cycle local drive map on one mode, either a unitary (ideal) or a superoperator (Zeno drives).
class DriveFactory {
public:
    DriveFactory(const Schedule& s, const AnnealOptions& o) : opt_(o), local_({o.mode_dim}) {
        double c_max = 0;
        for (const auto& e : s.entries) c_max = std::max(c_max, e.c);
        if (o.drive == DriveMode::ideal_two_level || c_max == 0) return;
        const double kappa = o.drive_gamma_ratio;
        if (o.drive == DriveMode::zeno_tpa) {
            cache_ = build_cache(combine({{gen_displacement(local_, 0), 1.0}, {lindblad_tpa(local_, 0), kappa}}), c_max,
                                 o.cache_stages);
        } else {
            joint_ = with_pump(local_);
            cache_ = build_cache(drive_sfg_generator(*joint_, {1.0, kappa, kappa * o.drive_loss_ratio, 0.0}), c_max,
                                 o.cache_stages);
        }
    }

    bool unitary() const { return !cache_.has_value(); }

    Matrix unitary_for(double c) const { return two_level_rotation(opt_.mode_dim, c); }

    Matrix superop_for(double c) const {
        Matrix joint_map = cache_->compose(c);
        if (!joint_) return joint_map;
        return trace_out_pump(Superoperator{*joint_, joint_map, "drive"}, local_).matrix;
    }

private:
    AnnealOptions opt_;
    FockSpace local_;
    std::optional<FockSpace> joint_;
    std::optional<BinaryExpCache> cache_;
};

}  // namespace detail

/// Density-matrix execution of the protocol on truncated photonic modes with gadget constraints.
inline AnnealReport run_anneal_density(const ProblemGraph& g, const Schedule& s, const ConstraintParams& constraint,
                                       const AnnealOptions& opt = {}) {
    const std::size_t n = g.n_vertices;
    if (opt.mode_dim < 2) throw FockError("mode dimension must be at least 2");
    if (!g.edges.empty() && opt.mode_dim < 3) throw FockError("gadget constraints need mode dimension >= 3");
    if (opt.drive != DriveMode::ideal_two_level && opt.mode_dim < 3)
        throw FockError("Zeno drives need mode dimension >= 3");
    FockSpace space(std::vector<std::size_t>(n, opt.mode_dim));
    AnnealReport rep;
    rep.targets = target_sets(g);

    Matrix gadget;
    if (!g.edges.empty()) gadget = omega_constraint(FockSpace({opt.mode_dim, opt.mode_dim}), 0, 1, constraint).matrix;
    detail::DriveFactory drive(s, opt);

    DensityState rho = to_density(vacuum(space));
    for (int i = 0; i < s.n_cycle; ++i) {
        const auto& e = s.entries[static_cast<std::size_t>(i)];
        for (std::size_t v = 0; v < n; ++v) phase_superop_elementwise(rho, v, e.phi * s.weight(v));
        if (drive.unitary()) {
            const Matrix u = drive.unitary_for(e.c);
            for (std::size_t v = 0; v < n; ++v) rho = apply_local_operator(u, rho, {v});
        } else {
            const Matrix m = drive.superop_for(e.c);
            for (std::size_t v = 0; v < n; ++v) rho = apply_local_superop(m, rho, {v});
        }
        for (auto [j, k] : g.edges) rho = apply_local_superop(gadget, rho, {j, k});
        if (detail::should_record(opt, i + 1, s.n_cycle)) {
            CycleRecord r{i + 1, success_probability(rho, g, rep.targets), 0.0, leakage(rho, g)};
            if (opt.record_entropy) r.entropy = von_neumann_entropy(rho);
            rep.cycles.push_back(r);
        }
    }
    rep.final = rep.cycles.back();
    rep.top_states = detail::top_states(space, [&](std::size_t k) {
        return rho.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
    }, 4);
    return rep;
}

namespace detail {

inline FockSpace qubit_space(std::size_t n) { return FockSpace(std::vector<std::size_t>(n, 2)); }

/// Diagonal e^{-i sum_v phi_v n_v} over the qubit basis.
inline void apply_phases(Vector& amp, const FockSpace& space, const std::vector<double>& node_phase) {
    for (std::size_t idx = 0; idx < space.total_dim(); ++idx) {
        double ph = 0;
        for (std::size_t v = 0; v < node_phase.size(); ++v)
            if (space.occupation(idx, v)) ph += node_phase[v];
        amp(static_cast<Eigen::Index>(idx)) *= std::exp(-I_unit * ph);
    }
}

inline void apply_x_rotations(Vector& amp, const FockSpace& space, double c) {
    const cplx cs = std::cos(c), sn = -I_unit * std::sin(c);
    for (std::size_t v = 0; v < space.num_modes(); ++v) {
        const std::size_t stride = space.stride(v);
        for (std::size_t idx = 0; idx < space.total_dim(); ++idx) {
            if (space.occupation(idx, v)) continue;
            const auto a = static_cast<Eigen::Index>(idx), b = static_cast<Eigen::Index>(idx + stride);
            const cplx x0 = amp(a), x1 = amp(b);
            amp(a) = cs * x0 + sn * x1;
            amp(b) = sn * x0 + cs * x1;
        }
    }
}

template <class Step>
AnnealReport run_pure(const ProblemGraph& g, const Schedule& s, const AnnealOptions& opt, PureState psi, Step step) {
    AnnealReport rep;
    rep.targets = target_sets(g);
    for (int i = 0; i < s.n_cycle; ++i) {
        step(psi.amplitudes, s.entries[static_cast<std::size_t>(i)]);
        if (should_record(opt, i + 1, s.n_cycle))
            rep.cycles.push_back({i + 1, success_probability(psi, g, rep.targets), 0.0, leakage(psi, g)});
    }
    rep.final = rep.cycles.back();
    rep.top_states = top_states(psi.space, [&](std::size_t k) { return std::norm(psi.amplitudes(static_cast<Eigen::Index>(k))); }, 4);
    return rep;
}

}  // namespace detail

/// Coherent limit on qubits: each edge multiplies |11> by -e^{i phi_kick}.
inline AnnealReport run_anneal_statevector(const ProblemGraph& g, const Schedule& s, double phi_kick,
                                           const AnnealOptions& opt = {}) {
    const FockSpace space = detail::qubit_space(g.n_vertices);
    Vector kick = Vector::Ones(static_cast<Eigen::Index>(space.total_dim()));
    const cplx edge_factor = -std::exp(I_unit * phi_kick);
    for (std::size_t idx = 0; idx < space.total_dim(); ++idx)
        for (auto [j, k] : g.edges)
            if (space.occupation(idx, j) && space.occupation(idx, k)) kick(static_cast<Eigen::Index>(idx)) *= edge_factor;
    std::vector<double> phases(g.n_vertices);
    return detail::run_pure(g, s, opt, vacuum(space), [&](Vector& amp, const ScheduleEntry& e) {
        for (std::size_t v = 0; v < g.n_vertices; ++v) phases[v] = e.phi * s.weight(v);
        detail::apply_phases(amp, space, phases);
        detail::apply_x_rotations(amp, space, e.c);
        amp = amp.cwiseProduct(kick);
    });
}

/// Reference path: the driver is projected onto independent configurations, so no constraint is needed.
inline AnnealReport run_anneal_ideal(const ProblemGraph& g, const Schedule& s, const AnnealOptions& opt = {}) {
    const FockSpace space = detail::qubit_space(g.n_vertices);
    const auto allowed = detail::independent_indices(space, g);
    const auto m = static_cast<Eigen::Index>(allowed.size());
    Matrix hx = Matrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) {
            const std::size_t diff = allowed[static_cast<std::size_t>(a)] ^ allowed[static_cast<std::size_t>(b)];
            if (std::popcount(diff) == 1) hx(a, b) = 1.0;
        }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hx);
    const Matrix vecs = es.eigenvectors();
    const Eigen::VectorXd vals = es.eigenvalues();
    std::vector<std::vector<std::size_t>> occ(static_cast<std::size_t>(m));
    for (Eigen::Index a = 0; a < m; ++a) occ[static_cast<std::size_t>(a)] = space.occupations(allowed[static_cast<std::size_t>(a)]);

    return detail::run_pure(g, s, opt, vacuum(space), [&](Vector& amp, const ScheduleEntry& e) {
        Vector sub(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            double ph = 0;
            for (std::size_t v = 0; v < g.n_vertices; ++v)
                if (occ[static_cast<std::size_t>(a)][v]) ph += e.phi * s.weight(v);
            sub(a) = amp(static_cast<Eigen::Index>(allowed[static_cast<std::size_t>(a)])) * std::exp(-I_unit * ph);
        }
        Vector rotated = vecs.adjoint() * sub;
        for (Eigen::Index a = 0; a < m; ++a) rotated(a) *= std::exp(-I_unit * e.c * vals(a));
        sub = vecs * rotated;
        for (Eigen::Index a = 0; a < m; ++a) amp(static_cast<Eigen::Index>(allowed[static_cast<std::size_t>(a)])) = sub(a);
    });
}

/// Angles of one QUBO cycle: phase, drive and coupling ramp.
struct QuboAngles {
    double phi = 0;
    double c = 0;
    double zeta = 0;
};

using QuboProfile = std::function<QuboAngles(double tau, double step)>;

/// phi = step (1 - tau), c = step sin^2(pi tau), zeta = step tau.
inline QuboProfile default_qubo_profile() {
    return [](double tau, double step) {
        const double s = std::sin(std::numbers::pi * tau);
        return QuboAngles{step * (1.0 - tau), step * s * s, step * tau};
    };
}

inline Schedule make_qubo_schedule(int n_cycle, double R_tot, const QuboProfile& profile) {
    if (n_cycle < 1) throw std::invalid_argument("n_cycle must be at least 1");
    if (!(R_tot > 0)) throw std::invalid_argument("R_tot must be positive");
    Schedule s{n_cycle, R_tot, {}, std::nullopt};
    const double step = R_tot / n_cycle;
    for (int i = 1; i <= n_cycle; ++i) {
        const double tau = static_cast<double>(i) / (n_cycle + 1);
        const auto a = profile(tau, step);
        s.entries.push_back({tau, a.phi, a.c, a.zeta});
    }
    return s;
}

/// Three-parameter anneal towards the minimum of E_Q(s) = sum_jk s_j s_k Q_jk. Each coupling runs
/// through a coherent gadget with pump phase pi - 2 zeta Q_jk; diagonal terms ride on the node phases.
inline AnnealReport qubo_anneal(const Eigen::MatrixXd& q, int n_cycle, double R_tot, const QuboProfile& profile,
                                const ConstraintParams& constraint, const AnnealOptions& opt = {}) {
    if (constraint.pump_loss != 0.0) throw std::invalid_argument("QUBO phases need a lossless pump");
    if (constraint.coherence() != Coherence::coherent)
        throw std::invalid_argument("QUBO phases need fully coherent constraint gadgets");
    const ProblemGraph g = make_qubo_problem(q);
    const Schedule s = make_qubo_schedule(n_cycle, R_tot, profile);
    const FockSpace space = detail::qubit_space(g.n_vertices);
    std::vector<double> phases(g.n_vertices);
    Vector kick(static_cast<Eigen::Index>(space.total_dim()));
    return detail::run_pure(g, s, opt, vacuum(space), [&](Vector& amp, const ScheduleEntry& e) {
        for (std::size_t v = 0; v < g.n_vertices; ++v) phases[v] = e.phi + e.zeta * q(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v));
        detail::apply_phases(amp, space, phases);
        detail::apply_x_rotations(amp, space, e.c);
        kick.setOnes();
        for (auto [j, k] : g.edges) {
            const double pump_phase = std::numbers::pi - 2.0 * e.zeta * q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            const cplx factor = -std::exp(I_unit * pump_phase);
            for (std::size_t idx = 0; idx < space.total_dim(); ++idx)
                if (space.occupation(idx, j) && space.occupation(idx, k)) kick(static_cast<Eigen::Index>(idx)) *= factor;
        }
        amp = amp.cwiseProduct(kick);
    });
}

}  // namespace zeno
