#pragma once

#include "zenoanneal/generators.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeno {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PropagatorOptions {
    std::size_t dense_threshold = 64;    // total_dim at or below which the dense path is used
    std::size_t max_dense_superop = 2048; // cap on total_dim^2 for dense exponentials
    double series_tolerance = 1e-16;
    int max_series_terms = 80;
};

/// Dense matrix on column-stacked density matrices.
struct Superoperator {
    FockSpace space;
    Matrix matrix;
    std::string provenance;

    DensityState apply(const DensityState& rho) const {
        if (rho.space != space) throw FockError("superoperator applied to a state on another space");
        return devectorize(matrix * vectorize(rho), space);
    }

    Superoperator then(const Superoperator& next) const {
        if (next.space != space) throw FockError("cannot compose superoperators on different spaces");
        return {space, next.matrix * matrix, provenance + " ; " + next.provenance};
    }
};

inline Superoperator identity_superop(const FockSpace& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim() * space.total_dim());
    return {space, Matrix::Identity(n, n), "identity"};
}

/// Superoperator of rho -> U rho U^dag.
inline Superoperator unitary_superop(const FockSpace& space, const Matrix& u, std::string provenance) {
    return {space, Eigen::kroneckerProduct(u.conjugate(), u).eval(), std::move(provenance)};
}

namespace detail {

inline void check_time(const GeneratorSpec& gen, double t) {
    if (!std::isfinite(t)) throw NumericalError("non-finite evolution time");
    if (t < 0 && gen.dissipative()) throw NumericalError("negative time is only allowed for Hamiltonian generators");
}

inline double norm1(const SparseMatrix& m) {
    double best = 0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        double s = 0;
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

}  // namespace detail

inline Superoperator expm_dense(const GeneratorSpec& gen, double t, const PropagatorOptions& opt = {}) {
    detail::check_time(gen, t);
    const std::size_t n2 = gen.space.total_dim() * gen.space.total_dim();
    if (n2 > opt.max_dense_superop)
        throw NumericalError("dense exponential refused: superoperator dimension " + std::to_string(n2) +
                             " exceeds cap " + std::to_string(opt.max_dense_superop));
    Matrix a = Matrix(gen.matrix) * t;
    Matrix e = a.exp();
    if (!e.allFinite()) throw NumericalError("dense exponential produced non-finite entries");
    return {gen.space, std::move(e), "exp[" + std::to_string(t) + " * (" + gen.describe() + ")]"};
}

/// exp(tA) v by a scaled Taylor series; the generator's mean diagonal is factored out first.
inline Vector expm_multiply(const SparseMatrix& a, double t, const Vector& v, const PropagatorOptions& opt = {}) {
    if (t == 0.0 || a.nonZeros() == 0) return v;
    const auto n = a.rows();
    const cplx mu = a.diagonal().sum() / static_cast<double>(n);
    SparseMatrix shifted = a;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= mu;
    const double norm = std::abs(t) * detail::norm1(shifted);
    const int steps = std::max(1, static_cast<int>(std::ceil(norm / 2.0)));
    const double h = t / steps;
    const cplx step_scale = std::exp(h * mu);
    Vector w = v;
    for (int s = 0; s < steps; ++s) {
        Vector term = w;
        Vector sum = w;
        bool converged = false;
        for (int k = 1; k <= opt.max_series_terms; ++k) {
            term = (shifted * term) * (h / static_cast<double>(k));
            sum += term;
            if (term.norm() <= opt.series_tolerance * sum.norm()) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("Taylor series for the exponential action did not converge");
        w = sum * step_scale;
        if (!w.allFinite()) throw NumericalError("exponential action produced non-finite entries");
    }
    return w;
}

/// exp(tG) applied to a state without forming the exponential.
inline DensityState expm_apply(const GeneratorSpec& gen, double t, const DensityState& rho,
                               const PropagatorOptions& opt = {}) {
    detail::check_time(gen, t);
    if (rho.space != gen.space) throw FockError("state and generator live on different spaces");
    return devectorize(expm_multiply(gen.matrix, t, vectorize(rho), opt), rho.space);
}

/// Dense exponential below the configured threshold, action path above it.
inline DensityState evolve(const GeneratorSpec& gen, double t, const DensityState& rho,
                           const PropagatorOptions& opt = {}) {
    if (gen.space.total_dim() <= opt.dense_threshold) return expm_dense(gen, t, opt).apply(rho);
    return expm_apply(gen, t, rho, opt);
}

/// Exponentials of one generator at t_max / 2^j, composed by the binary expansion of t.
struct BinaryExpCache {
    GeneratorSpec generator;
    double t_max = 0;
    int m = 0;
    std::vector<Matrix> stages;

    /// Stage indices whose durations sum to the binary expansion of t.
    std::vector<int> decomposition(double t) const {
        if (!(t >= 0.0) || t >= 2.0 * t_max) throw NumericalError("cache time outside [0, 2 t_max)");
        std::vector<int> used;
        double remaining = t;
        if (remaining >= t_max) {
            used.push_back(0);
            remaining -= t_max;
        }
        for (int j = 0; j < m; ++j) {
            const double d = std::ldexp(t_max, -j);
            if (remaining >= d) {
                used.push_back(j);
                remaining -= d;
            }
        }
        if (m > 0 && remaining >= 0.5 * std::ldexp(t_max, -(m - 1))) used.push_back(m - 1);
        return used;
    }

    Matrix compose(double t) const {
        const auto n = static_cast<Eigen::Index>(stages.front().rows());
        Matrix out = Matrix::Identity(n, n);
        for (int j : decomposition(t)) out = stages[static_cast<std::size_t>(j)] * out;
        return out;
    }

    Vector apply(double t, const Vector& v) const {
        Vector w = v;
        for (int j : decomposition(t)) w = stages[static_cast<std::size_t>(j)] * w;
        return w;
    }
};

inline BinaryExpCache build_cache(const GeneratorSpec& gen, double t_max, int m, const PropagatorOptions& opt = {}) {
    if (m < 1) throw NumericalError("cache needs at least one stage");
    if (!(t_max > 0.0)) throw NumericalError("cache t_max must be positive");
    BinaryExpCache c{gen, t_max, m, {}};
    c.stages.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) c.stages.push_back(expm_dense(gen, std::ldexp(t_max, -j), opt).matrix);
    return c;
}

inline DensityState apply_cached(const BinaryExpCache& cache, double t, const DensityState& rho) {
    if (rho.space != cache.generator.space) throw FockError("state and cache live on different spaces");
    return devectorize(cache.apply(t, vectorize(rho)), rho.space);
}

/// In-place e^{-i phi (m - n)} on every element <m|rho|n>, counting photons of `mode`.
inline void phase_superop_elementwise(DensityState& rho, std::size_t mode, double phi) {
    const auto& sp = rho.space;
    sp.check_mode(mode);
    const std::size_t d = sp.mode_dim(mode);
    std::vector<cplx> factor(2 * d - 1);
    for (std::size_t k = 0; k < factor.size(); ++k)
        factor[k] = std::exp(-I_unit * phi * (static_cast<double>(k) - static_cast<double>(d - 1)));
    const std::size_t n = sp.total_dim();
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t nc = sp.occupation(col, mode);
        for (std::size_t row = 0; row < n; ++row) {
            const std::size_t mr = sp.occupation(row, mode);
            if (mr == nc) continue;
            rho.matrix(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) *= factor[mr + d - 1 - nc];
        }
    }
}

/// Superoperator on (signal modes + trailing pump) reduced to the signal modes,
/// with the pump prepared in vacuum and traced out afterwards.
inline Superoperator trace_out_pump(const Superoperator& joint, const FockSpace& signal) {
    const std::size_t pump = joint.space.mode_dim(joint.space.num_modes() - 1);
    if (joint.space.total_dim() != signal.total_dim() * pump)
        throw FockError("joint space is not the signal space with one trailing pump mode");
    const auto d = static_cast<Eigen::Index>(signal.total_dim());
    const auto dj = static_cast<Eigen::Index>(joint.space.total_dim());
    const auto p = static_cast<Eigen::Index>(pump);
    Matrix out = Matrix::Zero(d * d, d * d);
    for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index e = 0; e < d; ++e) {
            const Eigen::Index src = c * p + (e * p) * dj;
            for (Eigen::Index a = 0; a < d; ++a)
                for (Eigen::Index b = 0; b < d; ++b) {
                    cplx s = 0;
                    for (Eigen::Index q = 0; q < p; ++q) s += joint.matrix((a * p + q) + (b * p + q) * dj, src);
                    out(a + b * d, c + e * d) = s;
                }
        }
    return {signal, out, "Tr_p[" + joint.provenance + "]"};
}

}  // namespace zeno
