#pragma once

#include "zenoanneal/fock.hpp"

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace zeno {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

enum class TermKind { hamiltonian, dissipator, phase };

inline const char* to_string(TermKind k) {
    switch (k) {
        case TermKind::hamiltonian: return "hamiltonian";
        case TermKind::dissipator: return "dissipator";
        case TermKind::phase: return "phase";
    }
    return "?";
}

struct GeneratorTerm {
    TermKind kind;
    std::vector<std::size_t> modes;
    double rate;
    std::string label;
};

/// Linear map on column-stacked density matrices plus a readable term list.
struct GeneratorSpec {
    FockSpace space;
    SparseMatrix matrix;
    std::vector<GeneratorTerm> terms;

    bool dissipative() const {
        for (const auto& t : terms)
            if (t.kind == TermKind::dissipator && t.rate != 0.0) return true;
        return false;
    }

    std::string describe() const {
        std::string s;
        for (const auto& t : terms) {
            if (!s.empty()) s += " + ";
            s += std::to_string(t.rate) + "*" + t.label;
        }
        return s.empty() ? "0" : s;
    }
};

namespace detail {

inline SparseMatrix prune(SparseMatrix m) {
    m.prune([](const Eigen::Index&, const Eigen::Index&, const cplx& v) { return std::abs(v) >= 1e-15; });
    m.makeCompressed();
    return m;
}

inline SparseMatrix sparse_identity(std::size_t n) {
    SparseMatrix id(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    id.setIdentity();
    return id;
}

inline SparseMatrix build_annihilation(const FockSpace& space, std::size_t mode) {
    space.check_mode(mode);
    const std::size_t n = space.total_dim();
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::size_t g = 0; g < n; ++g) {
        const std::size_t k = space.occupation(g, mode);
        if (k == 0) continue;
        trip.emplace_back(static_cast<Eigen::Index>(g - space.stride(mode)), static_cast<Eigen::Index>(g),
                          std::sqrt(static_cast<double>(k)));
    }
    SparseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

}  // namespace detail

/// Annihilation operator of `mode`, built once per (dims, mode) and shared read-only.
inline std::shared_ptr<const SparseMatrix> annihilation(const FockSpace& space, std::size_t mode) {
    using Key = std::pair<std::vector<std::size_t>, std::size_t>;
    static std::mutex mtx;
    static std::map<Key, std::shared_ptr<const SparseMatrix>> cache;
    Key key{space.mode_dims(), mode};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto op = std::make_shared<const SparseMatrix>(detail::build_annihilation(space, mode));
    cache.emplace(key, op);
    return op;
}

inline SparseMatrix number_operator(const FockSpace& space, std::size_t mode) {
    const auto& a = *annihilation(space, mode);
    return SparseMatrix(a.adjoint() * a);
}

/// G[rho] = -i[H, rho].
inline SparseMatrix commutator_superop(const SparseMatrix& h) {
    const auto id = detail::sparse_identity(static_cast<std::size_t>(h.rows()));
    SparseMatrix ht = h.transpose();
    SparseMatrix left = Eigen::kroneckerProduct(id, h);
    SparseMatrix right = Eigen::kroneckerProduct(ht, id);
    return detail::prune(I_unit * (right - left));
}

/// D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}.
inline SparseMatrix dissipator_superop(const SparseMatrix& l) {
    const auto id = detail::sparse_identity(static_cast<std::size_t>(l.rows()));
    SparseMatrix ldl = l.adjoint() * l;
    SparseMatrix lconj = l.conjugate();
    SparseMatrix ldlt = ldl.transpose();
    SparseMatrix jump = Eigen::kroneckerProduct(lconj, l);
    SparseMatrix left = Eigen::kroneckerProduct(id, ldl);
    SparseMatrix right = Eigen::kroneckerProduct(ldlt, id);
    return detail::prune(jump - 0.5 * left - 0.5 * right);
}

inline GeneratorSpec hamiltonian_generator(const FockSpace& space, const SparseMatrix& h,
                                           std::vector<std::size_t> modes, std::string label) {
    return {space, commutator_superop(h), {{TermKind::hamiltonian, std::move(modes), 1.0, std::move(label)}}};
}

inline GeneratorSpec dissipator_generator(const FockSpace& space, const SparseMatrix& l,
                                          std::vector<std::size_t> modes, std::string label) {
    return {space, dissipator_superop(l), {{TermKind::dissipator, std::move(modes), 1.0, std::move(label)}}};
}

/// Incoherent removal of photon pairs: jump operator a^2.
inline GeneratorSpec lindblad_tpa(const FockSpace& space, std::size_t mode) {
    const auto& a = *annihilation(space, mode);
    SparseMatrix a2 = a * a;
    return dissipator_generator(space, a2, {mode}, "L_tpa(" + std::to_string(mode) + ")");
}

/// Single-photon loss: jump operator a.
inline GeneratorSpec lindblad_loss(const FockSpace& space, std::size_t mode) {
    return dissipator_generator(space, *annihilation(space, mode), {mode}, "L_loss(" + std::to_string(mode) + ")");
}

/// Linear displacement with H = a + a^dag.
inline GeneratorSpec gen_displacement(const FockSpace& space, std::size_t mode) {
    const auto& a = *annihilation(space, mode);
    SparseMatrix h = a + SparseMatrix(a.adjoint());
    return hamiltonian_generator(space, h, {mode}, "G_disp(" + std::to_string(mode) + ")");
}

/// Default pump truncation: enough room for every pair the signal mode can hold.
inline std::size_t default_pump_dim(std::size_t signal_dim) { return 1 + (signal_dim - 1) / 2; }

/// Pair conversion into a pump mode, H = a a a_p^dag + a^dag a^dag a_p.
inline GeneratorSpec gen_sfg(const FockSpace& space, std::size_t mode, std::size_t pump_mode) {
    space.check_mode(mode);
    space.check_mode(pump_mode);
    if (mode == pump_mode) throw FockError("gen_sfg: pump mode must differ from the signal mode");
    if (space.mode_dim(pump_mode) < default_pump_dim(space.mode_dim(mode)))
        throw FockError("gen_sfg: pump truncation too small for the signal truncation");
    const auto& a = *annihilation(space, mode);
    const auto& ap = *annihilation(space, pump_mode);
    SparseMatrix up = a * a * SparseMatrix(ap.adjoint());
    SparseMatrix h = up + SparseMatrix(up.adjoint());
    return hamiltonian_generator(space, h, {mode, pump_mode},
                                 "G_sfg(" + std::to_string(mode) + "," + std::to_string(pump_mode) + ")");
}

/// Phase rotation generator: exp(phi * G) realises exp(-i phi n).
inline GeneratorSpec gen_phase(const FockSpace& space, std::size_t mode) {
    auto g = hamiltonian_generator(space, number_operator(space, mode), {mode}, "G_phase(" + std::to_string(mode) + ")");
    g.terms.front().kind = TermKind::phase;
    return g;
}

/// Weighted sum of generators over one space.
inline GeneratorSpec combine(const std::vector<std::pair<GeneratorSpec, double>>& parts) {
    if (parts.empty()) throw FockError("combine needs at least one generator");
    GeneratorSpec out{parts.front().first.space, {}, {}};
    const auto n = static_cast<Eigen::Index>(out.space.total_dim() * out.space.total_dim());
    out.matrix = SparseMatrix(n, n);
    for (const auto& [g, w] : parts) {
        if (g.space != out.space) throw FockError("combine: generators live on different spaces");
        out.matrix += w * g.matrix;
        for (auto t : g.terms) {
            t.rate *= w;
            out.terms.push_back(std::move(t));
        }
    }
    out.matrix = detail::prune(out.matrix);
    return out;
}

inline Matrix apply_generator(const GeneratorSpec& g, const DensityState& rho) {
    Vector v = g.matrix * vectorize(rho);
    return devectorize(v, rho.space).matrix;
}

}  // namespace zeno
