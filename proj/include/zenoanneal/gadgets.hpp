#pragma once

#include "zenoanneal/propagator.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace zeno {

/// SFG exposure giving complete conversion of a photon pair into the pump.
inline const double kConversionAngle = std::numbers::pi / (4.0 * std::numbers::sqrt2);
/// SFG exposure giving a complete coherent round trip, |2> -> -|2>.
inline const double kReturnAngle = std::numbers::pi / (2.0 * std::numbers::sqrt2);

enum class Coherence { incoherent, partial, coherent };

inline const char* to_string(Coherence c) {
    switch (c) {
        case Coherence::incoherent: return "incoherent";
        case Coherence::partial: return "partial";
        case Coherence::coherent: return "coherent";
    }
    return "?";
}

struct ConstraintParams {
    double pump_phase = 0.0;  // applied to the pump as -pump_phase between the two SFG passes
    double sfg_angle = kReturnAngle;  // total SFG exposure of one nonlinear pass
    double pump_loss = 0.0;   // loss exposure of the pump between the passes

    Coherence coherence() const {
        if (pump_loss == 0.0 && std::abs(sfg_angle - kReturnAngle) < 1e-12) return Coherence::coherent;
        if (std::abs(sfg_angle - kConversionAngle) < 1e-12 || std::isinf(pump_loss)) return Coherence::incoherent;
        return Coherence::partial;
    }

    static ConstraintParams coherent(double phase) { return {phase, kReturnAngle, 0.0}; }
    static ConstraintParams incoherent() { return {0.0, kConversionAngle, 0.0}; }
};

struct DriveParams {
    double c = 0.0;      // displacement rate
    double gamma = 0.0;  // nonlinear rate
    double eta = 0.0;    // pump loss rate
    double t = 0.0;      // duration
};

namespace detail {

inline void require_single_mode(const FockSpace& space, const char* what) {
    if (space.num_modes() != 1) throw FockError(std::string(what) + " expects a single-mode space");
}

/// Builds a single-mode superoperator and lifts it onto `mode` of `space`.
template <class Build>
Superoperator on_mode(const FockSpace& space, std::size_t mode, Build build) {
    space.check_mode(mode);
    if (space.num_modes() == 1) return build(space);
    FockSpace local({space.mode_dim(mode)});
    Superoperator s = build(local);
    return {space, embed_superop(s.matrix, space, {mode}), s.provenance + " on mode " + std::to_string(mode)};
}

inline void check_drive(const DriveParams& p) {
    if (p.c < 0 || p.gamma < 0 || p.eta < 0 || p.t < 0) throw NumericalError("drive parameters must be non-negative");
}

}  // namespace detail

/// Signal mode followed by a private pump mode.
inline FockSpace with_pump(const FockSpace& single_mode) {
    detail::require_single_mode(single_mode, "with_pump");
    return single_mode.with_mode(default_pump_dim(single_mode.mode_dim(0)));
}

inline Superoperator omega_tpa(const FockSpace& space, std::size_t mode, double gamma_t) {
    if (gamma_t < 0) throw NumericalError("omega_tpa needs gamma t >= 0");
    return detail::on_mode(space, mode, [&](const FockSpace& s) { return expm_dense(lindblad_tpa(s, 0), gamma_t); });
}

/// exp(2 angle G_sfg) on signal + pump. The factor 2 puts `angle` in the gadget
/// units where kConversionAngle converts a pair and kReturnAngle returns it.
inline Superoperator sfg_joint(const FockSpace& joint, double angle) {
    return expm_dense(gen_sfg(joint, 0, 1), 2.0 * angle);
}

inline Superoperator omega_sfg(const FockSpace& space, std::size_t mode, double angle) {
    return detail::on_mode(space, mode, [&](const FockSpace& s) {
        const FockSpace joint = with_pump(s);
        return trace_out_pump(sfg_joint(joint, angle), s);
    });
}

inline GeneratorSpec drive_tpa_generator(const FockSpace& single, const DriveParams& p) {
    return combine({{gen_displacement(single, 0), p.c}, {lindblad_tpa(single, 0), p.gamma}});
}

/// c G_disp + gamma G_sfg + eta L_loss(pump) on signal + pump.
inline GeneratorSpec drive_sfg_generator(const FockSpace& joint, const DriveParams& p) {
    return combine({{gen_displacement(joint, 0), p.c}, {gen_sfg(joint, 0, 1), p.gamma}, {lindblad_loss(joint, 1), p.eta}});
}

inline Superoperator omega_drive_tpa(const FockSpace& space, std::size_t mode, const DriveParams& p) {
    detail::check_drive(p);
    return detail::on_mode(space, mode, [&](const FockSpace& s) { return expm_dense(drive_tpa_generator(s, p), p.t); });
}

inline Superoperator omega_dl_sfg(const FockSpace& space, std::size_t mode, const DriveParams& p) {
    detail::check_drive(p);
    return detail::on_mode(space, mode, [&](const FockSpace& s) {
        const FockSpace joint = with_pump(s);
        return trace_out_pump(expm_dense(drive_sfg_generator(joint, p), p.t), s);
    });
}

inline Superoperator omega_drive_sfg(const FockSpace& space, std::size_t mode, DriveParams p) {
    p.eta = 0.0;
    return omega_dl_sfg(space, mode, p);
}

/// Joint signal + pump state after a lossy SFG drive from `rho` with an empty pump.
inline DensityState evolve_dl_sfg_joint(const DensityState& rho, const DriveParams& p, const PropagatorOptions& opt = {}) {
    detail::check_drive(p);
    detail::require_single_mode(rho.space, "evolve_dl_sfg_joint");
    const FockSpace joint = with_pump(rho.space);
    const auto pump = static_cast<Eigen::Index>(joint.mode_dim(1));
    Matrix vac = Matrix::Zero(pump, pump);
    vac(0, 0) = 1.0;
    DensityState start{joint, Eigen::kroneckerProduct(rho.matrix, vac).eval()};
    return evolve(drive_sfg_generator(joint, p), p.t, start, opt);
}

/// Evolves `rho` under a lossy SFG drive and traces the pump.
inline DensityState evolve_dl_sfg(const DensityState& rho, const DriveParams& p, const PropagatorOptions& opt = {}) {
    return partial_trace(evolve_dl_sfg_joint(rho, p, opt), {0});
}

/// 50:50 beamsplitter U with U^dag a_j U = (a_j + i a_k)/sqrt2, U^dag a_k U = (i a_j + a_k)/sqrt2.
inline Matrix beamsplitter(const FockSpace& space, std::size_t j, std::size_t k) {
    space.check_mode(j);
    space.check_mode(k);
    if (j == k) throw FockError("beamsplitter needs two distinct modes");
    if (space.mode_dim(j) != space.mode_dim(k)) throw FockError("beamsplitter needs equal mode truncations");
    const auto& aj = *annihilation(space, j);
    const auto& ak = *annihilation(space, k);
    SparseMatrix hop = SparseMatrix(aj.adjoint()) * ak;
    Matrix g = Matrix(hop + SparseMatrix(hop.adjoint()));
    return (I_unit * (std::numbers::pi / 4.0) * g).exp();
}

/// Nonlinear pass of one mode: SFG to full conversion, pump phase -phi_Q and pump
/// loss, then the remaining SFG exposure; pump traced at the end.
inline Superoperator omega_nl(const FockSpace& space, std::size_t mode, const ConstraintParams& p) {
    if (p.sfg_angle < 0 || p.pump_loss < 0) throw NumericalError("constraint angles must be non-negative");
    return detail::on_mode(space, mode, [&](const FockSpace& s) {
        const FockSpace joint = with_pump(s);
        if (p.sfg_angle <= kConversionAngle) return trace_out_pump(sfg_joint(joint, p.sfg_angle), s);
        Superoperator first = sfg_joint(joint, kConversionAngle);
        Superoperator between = expm_dense(gen_phase(joint, 1), -p.pump_phase);
        if (std::isinf(p.pump_loss)) {
            // Saturated loss: the pump photon never comes back.
            return trace_out_pump(first, s);
        }
        if (p.pump_loss > 0) between = between.then(expm_dense(lindblad_loss(joint, 1), p.pump_loss));
        Superoperator second = sfg_joint(joint, p.sfg_angle - kConversionAngle);
        return trace_out_pump(first.then(between).then(second), s);
    });
}

/// Two-mode constraint: beamsplitter, nonlinear pass on each output, inverse beamsplitter.
inline Superoperator omega_constraint(const FockSpace& space, std::size_t j, std::size_t k, const ConstraintParams& p) {
    if (j == k) throw FockError("omega_constraint needs two distinct modes");
    const Matrix u = beamsplitter(space, j, k);
    Superoperator in = unitary_superop(space, u, "BS");
    Superoperator out = unitary_superop(space, u.adjoint(), "BS^dag");
    return in.then(omega_nl(space, k, p)).then(omega_nl(space, j, p)).then(out);
}

/// phi_Q = pi + pi/d; with d the maximum vertex degree the total kick on any vertex stays within pi.
inline double phi_q_conservative_bound(double d) {
    if (!(d > 0)) throw NumericalError("phi_q_conservative_bound needs d > 0");
    return std::numbers::pi + std::numbers::pi / d;
}

/// Restriction of a two-mode superoperator to the {|0>,|1>}^2 block (row-major |00>,|01>,|10>,|11>).
inline Matrix qubit_block(const Superoperator& s) {
    if (s.space.num_modes() != 2) throw FockError("qubit_block expects a two-mode space");
    std::vector<Eigen::Index> idx;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) idx.push_back(static_cast<Eigen::Index>(s.space.index({a, b})));
    const auto n = static_cast<Eigen::Index>(s.space.total_dim());
    Matrix out(16, 16);
    for (Eigen::Index c = 0; c < 16; ++c)
        for (Eigen::Index r = 0; r < 16; ++r)
            out(r, c) = s.matrix(idx[r % 4] + idx[r / 4] * n, idx[c % 4] + idx[c / 4] * n);
    return out;
}

}  // namespace zeno
