#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeno {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx I_unit{0.0, 1.0};

struct FockError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Ordered list of truncated bosonic modes. Basis indices are row-major with
/// the last mode varying fastest.
class FockSpace {
public:
    FockSpace() = default;

    explicit FockSpace(std::vector<std::size_t> mode_dims) : dims_(std::move(mode_dims)) {
        if (dims_.empty()) throw FockError("FockSpace needs at least one mode");
        for (auto d : dims_)
            if (d < 2) throw FockError("every mode dimension must be >= 2");
        strides_.assign(dims_.size(), 1);
        for (std::size_t m = dims_.size() - 1; m > 0; --m) strides_[m - 1] = strides_[m] * dims_[m];
        total_ = strides_[0] * dims_[0];
    }

    std::size_t num_modes() const { return dims_.size(); }
    std::size_t total_dim() const { return total_; }
    std::size_t mode_dim(std::size_t mode) const { return dims_.at(mode); }
    const std::vector<std::size_t>& mode_dims() const { return dims_; }
    std::size_t stride(std::size_t mode) const { return strides_.at(mode); }

    std::size_t index(const std::vector<std::size_t>& occupations) const {
        if (occupations.size() != dims_.size())
            throw FockError("occupation tuple length does not match the number of modes");
        std::size_t idx = 0;
        for (std::size_t m = 0; m < dims_.size(); ++m) {
            if (occupations[m] >= dims_[m])
                throw FockError("occupation " + std::to_string(occupations[m]) + " out of range for mode " +
                                std::to_string(m));
            idx += occupations[m] * strides_[m];
        }
        return idx;
    }

    std::vector<std::size_t> occupations(std::size_t index) const {
        if (index >= total_) throw FockError("basis index out of range");
        std::vector<std::size_t> occ(dims_.size());
        for (std::size_t m = 0; m < dims_.size(); ++m) {
            occ[m] = index / strides_[m];
            index %= strides_[m];
        }
        return occ;
    }

    std::size_t occupation(std::size_t index, std::size_t mode) const {
        return (index / strides_[mode]) % dims_[mode];
    }

    void check_mode(std::size_t mode) const {
        if (mode >= dims_.size()) throw FockError("mode index " + std::to_string(mode) + " out of range");
    }

    /// Space made of the listed modes, in the listed order.
    FockSpace subspace(const std::vector<std::size_t>& modes) const {
        std::vector<std::size_t> d;
        for (auto m : modes) {
            check_mode(m);
            d.push_back(dims_[m]);
        }
        return FockSpace(d);
    }

    /// Copy with one extra mode appended at the end.
    FockSpace with_mode(std::size_t dim) const {
        auto d = dims_;
        d.push_back(dim);
        return FockSpace(d);
    }

    bool operator==(const FockSpace& o) const { return dims_ == o.dims_; }
    bool operator!=(const FockSpace& o) const { return !(*this == o); }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

inline FockSpace make_space(const std::vector<std::size_t>& mode_dims) { return FockSpace(mode_dims); }

inline std::size_t basis_index(const FockSpace& space, const std::vector<std::size_t>& occupations) {
    return space.index(occupations);
}

struct PureState {
    FockSpace space;
    Vector amplitudes;
};

struct DensityState {
    FockSpace space;
    Matrix matrix;
};

inline PureState number_state(const FockSpace& space, const std::vector<std::size_t>& occupations) {
    PureState s{space, Vector::Zero(static_cast<Eigen::Index>(space.total_dim()))};
    s.amplitudes(static_cast<Eigen::Index>(space.index(occupations))) = 1.0;
    return s;
}

inline PureState vacuum(const FockSpace& space) {
    return number_state(space, std::vector<std::size_t>(space.num_modes(), 0));
}

inline DensityState to_density(const PureState& psi) {
    return {psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
}

inline DensityState density_number_state(const FockSpace& space, const std::vector<std::size_t>& occupations) {
    return to_density(number_state(space, occupations));
}

struct StateCheck {
    double norm_error = 0;        // pure: | ||psi||^2 - 1 |
    double hermiticity_error = 0; // max |rho - rho^dag|
    double trace_error = 0;       // |Tr rho - 1|
    double min_eigenvalue = 0;
    bool ok = true;
};

inline StateCheck check_state(const PureState& psi, double tol = 1e-12) {
    StateCheck c;
    c.norm_error = std::abs(psi.amplitudes.squaredNorm() - 1.0);
    c.ok = c.norm_error <= tol && static_cast<std::size_t>(psi.amplitudes.size()) == psi.space.total_dim();
    return c;
}

inline StateCheck check_state(const DensityState& rho, double herm_tol = 1e-10, double trace_tol = 1e-10,
                              double eig_tol = -1e-8) {
    StateCheck c;
    const auto& m = rho.matrix;
    c.hermiticity_error = (m - m.adjoint()).cwiseAbs().maxCoeff();
    c.trace_error = std::abs(m.trace() - 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    c.ok = c.hermiticity_error <= herm_tol && c.trace_error <= trace_tol && c.min_eigenvalue >= eig_tol;
    return c;
}

/// Column-stacking vectorisation: element (i, j) lands at i + j * dim.
inline Vector vectorize(const DensityState& rho) {
    return Eigen::Map<const Vector>(rho.matrix.data(), rho.matrix.size());
}

inline Vector vectorize(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline DensityState devectorize(const Vector& v, const FockSpace& space) {
    const auto d = static_cast<Eigen::Index>(space.total_dim());
    if (v.size() != d * d) throw FockError("vector length does not match total_dim^2");
    return {space, Eigen::Map<const Matrix>(v.data(), d, d)};
}

namespace detail {

/// Splits every global basis index into (index over `targets`, index over the remaining modes).
struct ModeSplit {
    std::size_t local_dim = 1;
    std::size_t rest_dim = 1;
    std::vector<std::size_t> local_of;                // global -> local
    std::vector<std::size_t> rest_of;                 // global -> rest
    std::vector<std::vector<std::size_t>> global_of;  // [rest][local] -> global
};

inline ModeSplit split_modes(const FockSpace& space, const std::vector<std::size_t>& targets) {
    std::vector<bool> is_target(space.num_modes(), false);
    for (auto t : targets) {
        space.check_mode(t);
        if (is_target[t]) throw FockError("target modes must be distinct");
        is_target[t] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t m = 0; m < space.num_modes(); ++m)
        if (!is_target[m]) rest.push_back(m);

    ModeSplit s;
    for (auto t : targets) s.local_dim *= space.mode_dim(t);
    for (auto r : rest) s.rest_dim *= space.mode_dim(r);
    const std::size_t n = space.total_dim();
    s.local_of.resize(n);
    s.rest_of.resize(n);
    s.global_of.assign(s.rest_dim, std::vector<std::size_t>(s.local_dim));
    for (std::size_t g = 0; g < n; ++g) {
        std::size_t li = 0, ri = 0;
        for (auto t : targets) li = li * space.mode_dim(t) + space.occupation(g, t);
        for (auto r : rest) ri = ri * space.mode_dim(r) + space.occupation(g, r);
        s.local_of[g] = li;
        s.rest_of[g] = ri;
        s.global_of[ri][li] = g;
    }
    return s;
}

}  // namespace detail

/// Reduced state on the `keep` modes (kept in ascending mode order).
inline DensityState partial_trace(const DensityState& rho, const std::set<std::size_t>& keep) {
    if (keep.empty()) throw FockError("partial_trace needs at least one kept mode");
    std::vector<std::size_t> kept(keep.begin(), keep.end());
    auto split = detail::split_modes(rho.space, kept);
    const auto dl = static_cast<Eigen::Index>(split.local_dim);
    Matrix out = Matrix::Zero(dl, dl);
    for (std::size_t r = 0; r < split.rest_dim; ++r) {
        const auto& g = split.global_of[r];
        for (Eigen::Index a = 0; a < dl; ++a)
            for (Eigen::Index b = 0; b < dl; ++b)
                out(a, b) += rho.matrix(static_cast<Eigen::Index>(g[a]), static_cast<Eigen::Index>(g[b]));
    }
    return {rho.space.subspace(kept), out};
}

/// Applies an operator on `targets` to a pure state.
inline PureState apply_local_operator(const Matrix& op, const PureState& psi, const std::vector<std::size_t>& targets) {
    auto split = detail::split_modes(psi.space, targets);
    const auto dl = static_cast<Eigen::Index>(split.local_dim);
    if (op.rows() != dl || op.cols() != dl) throw FockError("operator dimension does not match target modes");
    PureState out = psi;
    Vector block(dl);
    for (std::size_t r = 0; r < split.rest_dim; ++r) {
        const auto& g = split.global_of[r];
        for (Eigen::Index a = 0; a < dl; ++a) block(a) = psi.amplitudes(static_cast<Eigen::Index>(g[a]));
        Vector res = op * block;
        for (Eigen::Index a = 0; a < dl; ++a) out.amplitudes(static_cast<Eigen::Index>(g[a])) = res(a);
    }
    return out;
}

/// rho -> op rho op^dag with `op` acting on `targets`.
inline DensityState apply_local_operator(const Matrix& op, const DensityState& rho,
                                         const std::vector<std::size_t>& targets) {
    auto split = detail::split_modes(rho.space, targets);
    const auto dl = static_cast<Eigen::Index>(split.local_dim);
    if (op.rows() != dl || op.cols() != dl) throw FockError("operator dimension does not match target modes");
    DensityState out = rho;
    Matrix block(dl, dl);
    const Matrix op_adj = op.adjoint();
    for (std::size_t r = 0; r < split.rest_dim; ++r) {
        for (std::size_t s = 0; s < split.rest_dim; ++s) {
            const auto& gr = split.global_of[r];
            const auto& gs = split.global_of[s];
            for (Eigen::Index a = 0; a < dl; ++a)
                for (Eigen::Index b = 0; b < dl; ++b)
                    block(a, b) = rho.matrix(static_cast<Eigen::Index>(gr[a]), static_cast<Eigen::Index>(gs[b]));
            Matrix res = op * block * op_adj;
            for (Eigen::Index a = 0; a < dl; ++a)
                for (Eigen::Index b = 0; b < dl; ++b)
                    out.matrix(static_cast<Eigen::Index>(gr[a]), static_cast<Eigen::Index>(gs[b])) = res(a, b);
        }
    }
    return out;
}

/// Applies a superoperator (acting on column-stacked local density matrices) on `targets`.
inline DensityState apply_local_superop(const Matrix& superop, const DensityState& rho,
                                        const std::vector<std::size_t>& targets) {
    auto split = detail::split_modes(rho.space, targets);
    const auto dl = static_cast<Eigen::Index>(split.local_dim);
    if (superop.rows() != dl * dl || superop.cols() != dl * dl)
        throw FockError("superoperator dimension does not match target modes");
    DensityState out = rho;
    Vector block(dl * dl);
    for (std::size_t r = 0; r < split.rest_dim; ++r) {
        for (std::size_t s = 0; s < split.rest_dim; ++s) {
            const auto& gr = split.global_of[r];
            const auto& gs = split.global_of[s];
            for (Eigen::Index b = 0; b < dl; ++b)
                for (Eigen::Index a = 0; a < dl; ++a)
                    block(a + b * dl) = rho.matrix(static_cast<Eigen::Index>(gr[a]), static_cast<Eigen::Index>(gs[b]));
            Vector res = superop * block;
            for (Eigen::Index b = 0; b < dl; ++b)
                for (Eigen::Index a = 0; a < dl; ++a)
                    out.matrix(static_cast<Eigen::Index>(gr[a]), static_cast<Eigen::Index>(gs[b])) = res(a + b * dl);
        }
    }
    return out;
}

/// Dispatches on size: a dl x dl matrix is an operator, a dl^2 x dl^2 matrix is a superoperator.
inline DensityState apply_local(const Matrix& op_or_superop, const DensityState& rho,
                                const std::vector<std::size_t>& targets) {
    std::size_t dl = 1;
    for (auto t : targets) dl *= rho.space.mode_dim(t);
    const auto n = static_cast<std::size_t>(op_or_superop.rows());
    if (n == dl) return apply_local_operator(op_or_superop, rho, targets);
    if (n == dl * dl) return apply_local_superop(op_or_superop, rho, targets);
    throw FockError("local matrix dimension matches neither operator nor superoperator on target modes");
}

inline PureState apply_local(const Matrix& op, const PureState& psi, const std::vector<std::size_t>& targets) {
    return apply_local_operator(op, psi, targets);
}

/// Embeds a local operator into the full space by tensoring with identities.
inline Matrix embed_operator(const Matrix& op, const FockSpace& space, const std::vector<std::size_t>& targets) {
    auto split = detail::split_modes(space, targets);
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    const auto dl = static_cast<Eigen::Index>(split.local_dim);
    if (op.rows() != dl || op.cols() != dl) throw FockError("operator dimension does not match target modes");
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t r = 0; r < split.rest_dim; ++r) {
        const auto& g = split.global_of[r];
        for (Eigen::Index a = 0; a < dl; ++a)
            for (Eigen::Index b = 0; b < dl; ++b)
                out(static_cast<Eigen::Index>(g[a]), static_cast<Eigen::Index>(g[b])) = op(a, b);
    }
    return out;
}

/// Embeds a local superoperator into the full space.
inline Matrix embed_superop(const Matrix& superop, const FockSpace& space, const std::vector<std::size_t>& targets) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    Matrix out(n * n, n * n);
    DensityState unit{space, Matrix::Zero(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            unit.matrix(i, j) = 1.0;
            out.col(i + j * n) = vectorize(apply_local_superop(superop, unit, targets));
            unit.matrix(i, j) = 0.0;
        }
    }
    return out;
}

/// -Tr(rho log2 rho), eigenvalues below 1e-12 treated as zero.
inline double von_neumann_entropy(const DensityState& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho.matrix + rho.matrix.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lambda = es.eigenvalues()(i);
        if (lambda > 1e-12) s -= lambda * std::log2(lambda);
    }
    return std::max(s, 0.0);
}

inline double purity(const DensityState& rho) { return (rho.matrix * rho.matrix).trace().real(); }

inline double population(const DensityState& rho, const std::vector<std::size_t>& occupations) {
    const auto i = static_cast<Eigen::Index>(rho.space.index(occupations));
    return rho.matrix(i, i).real();
}

inline double population(const PureState& psi, const std::vector<std::size_t>& occupations) {
    return std::norm(psi.amplitudes(static_cast<Eigen::Index>(psi.space.index(occupations))));
}

/// Marginal photon-number distribution of one mode.
inline std::vector<double> mode_populations(const DensityState& rho, std::size_t mode) {
    rho.space.check_mode(mode);
    std::vector<double> p(rho.space.mode_dim(mode), 0.0);
    for (std::size_t g = 0; g < rho.space.total_dim(); ++g)
        p[rho.space.occupation(g, mode)] += rho.matrix(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g)).real();
    return p;
}

}  // namespace zeno
