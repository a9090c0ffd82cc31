#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace zeno {

struct ProblemError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using Edge = std::pair<std::size_t, std::size_t>;

struct ProblemGraph {
    std::size_t n_vertices = 0;
    std::vector<Edge> edges;  // normalised (u < v), sorted, unique
    std::optional<std::vector<double>> weights;
    std::optional<Eigen::MatrixXd> qubo;

    double weight(std::size_t v) const { return weights ? (*weights)[v] : 1.0; }

    bool has_edge(std::size_t u, std::size_t v) const {
        if (u > v) std::swap(u, v);
        return std::binary_search(edges.begin(), edges.end(), Edge{u, v});
    }

    std::size_t max_degree() const {
        std::vector<std::size_t> deg(n_vertices, 0);
        for (auto [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    }

    bool independent(std::uint64_t mask) const {
        for (auto [u, v] : edges)
            if (((mask >> u) & 1U) && ((mask >> v) & 1U)) return false;
        return true;
    }

    bool independent(const std::vector<std::size_t>& set) const {
        for (std::size_t a = 0; a < set.size(); ++a)
            for (std::size_t b = a + 1; b < set.size(); ++b)
                if (has_edge(set[a], set[b])) return false;
        return true;
    }
};

inline ProblemGraph make_graph(std::size_t n, std::vector<Edge> edges,
                               std::optional<std::vector<double>> weights = std::nullopt) {
    if (n == 0) throw ProblemError("graph needs at least one vertex");
    for (auto& [u, v] : edges) {
        if (u >= n || v >= n) throw ProblemError("edge references a vertex outside the graph");
        if (u == v) throw ProblemError("self-loops are not allowed");
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (weights) {
        if (weights->size() != n) throw ProblemError("weight list length must equal the vertex count");
        for (double w : *weights)
            if (!(w > 0)) throw ProblemError("vertex weights must be positive");
    }
    return {n, std::move(edges), std::move(weights), std::nullopt};
}

/// Graph whose edges are the nonzero off-diagonal couplings of a symmetric QUBO matrix.
inline ProblemGraph make_qubo_problem(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols() || q.rows() == 0) throw ProblemError("QUBO matrix must be square and nonempty");
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ProblemError("QUBO matrix must be symmetric");
    std::vector<Edge> e;
    for (Eigen::Index j = 0; j < q.rows(); ++j)
        for (Eigen::Index k = j + 1; k < q.cols(); ++k)
            if (q(j, k) != 0.0) e.emplace_back(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
    auto g = make_graph(static_cast<std::size_t>(q.rows()), e);
    g.qubo = q;
    return g;
}

inline ProblemGraph line_graph(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return make_graph(n, e);
}

inline ProblemGraph five_node_graph() { return make_graph(5, {{0, 1}, {0, 2}, {1, 2}, {1, 4}, {2, 3}, {2, 4}}); }

inline ProblemGraph complete_graph(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return make_graph(n, e);
}

inline std::vector<std::size_t> mask_to_set(std::uint64_t mask, std::size_t n) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < n; ++i)
        if ((mask >> i) & 1U) s.push_back(i);
    return s;
}

struct OptimumSet {
    double value = 0;
    std::vector<std::vector<std::size_t>> optima;  // in increasing mask order
};

inline constexpr std::size_t kMaxBruteForceVertices = 24;

namespace detail {

inline void guard_size(std::size_t n) {
    if (n > kMaxBruteForceVertices)
        throw ProblemError("brute force limited to " + std::to_string(kMaxBruteForceVertices) + " vertices");
}

template <class Score, class Better>
OptimumSet exhaustive(std::size_t n, bool independent_only, const ProblemGraph& g, Score score, Better better) {
    guard_size(n);
    OptimumSet out;
    bool have = false;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (independent_only && !g.independent(mask)) continue;
        const double v = score(mask);
        if (!have || better(v, out.value) > 0) {
            out.value = v;
            out.optima.clear();
            have = true;
        }
        if (better(v, out.value) == 0) out.optima.push_back(mask_to_set(mask, n));
    }
    return out;
}

inline int compare_max(double a, double b) {
    const double tol = 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    return a > b + tol ? 1 : (a < b - tol ? -1 : 0);
}

}  // namespace detail

inline OptimumSet brute_force_mis(const ProblemGraph& g) {
    return detail::exhaustive(g.n_vertices, true, g, [](std::uint64_t m) { return static_cast<double>(std::popcount(m)); },
                              detail::compare_max);
}

inline OptimumSet brute_force_wmis(const ProblemGraph& g) {
    return detail::exhaustive(
        g.n_vertices, true, g,
        [&](std::uint64_t m) {
            double s = 0;
            for (std::size_t i = 0; i < g.n_vertices; ++i)
                if ((m >> i) & 1U) s += g.weight(i);
            return s;
        },
        detail::compare_max);
}

/// E_Q(s) = sum_j sum_k s_j s_k Q_jk.
inline double qubo_energy(const Eigen::MatrixXd& q, std::uint64_t mask) {
    double e = 0;
    for (Eigen::Index j = 0; j < q.rows(); ++j) {
        if (!((mask >> j) & 1U)) continue;
        for (Eigen::Index k = 0; k < q.cols(); ++k)
            if ((mask >> k) & 1U) e += q(j, k);
    }
    return e;
}

/// Minimum energy and every minimiser.
inline OptimumSet brute_force_qubo(const ProblemGraph& g) {
    if (!g.qubo) throw ProblemError("graph carries no QUBO matrix");
    const auto& q = *g.qubo;
    return detail::exhaustive(g.n_vertices, false, g, [&](std::uint64_t m) { return qubo_energy(q, m); },
                              [](double a, double b) { return detail::compare_max(-a, -b); });
}

/// Relabels 0 <-> 1 on the flipped variables; returns the transformed matrix and the constant offset
/// so that E_Q(s) = E_Q'(s') + offset.
inline std::pair<Eigen::MatrixXd, double> qubo_gauge_flip(const Eigen::MatrixXd& q, const std::vector<bool>& flip) {
    const auto n = q.rows();
    if (static_cast<Eigen::Index>(flip.size()) != n) throw ProblemError("flip mask length mismatch");
    Eigen::VectorXd a(n), sigma(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        a(j) = flip[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
        sigma(j) = flip[static_cast<std::size_t>(j)] ? -1.0 : 1.0;
    }
    Eigen::MatrixXd out = sigma.asDiagonal() * q * sigma.asDiagonal();
    const Eigen::VectorXd qa = q * a;
    for (Eigen::Index m = 0; m < n; ++m) out(m, m) = q(m, m) + 2.0 * sigma(m) * qa(m);
    const double offset = a.dot(q * a);
    return {out, offset};
}

/// Every original vertex j becomes copies j*n_copy + p; every original edge becomes the complete
/// bipartite set between the two vertex classes.
inline ProblemGraph mitigation_encode(const ProblemGraph& g, std::size_t n_copy) {
    if (n_copy < 1) throw ProblemError("n_copy must be at least 1");
    std::vector<Edge> e;
    e.reserve(g.edges.size() * n_copy * n_copy);
    for (auto [j, k] : g.edges)
        for (std::size_t p = 0; p < n_copy; ++p)
            for (std::size_t q = 0; q < n_copy; ++q) e.emplace_back(j * n_copy + p, k * n_copy + q);
    std::optional<std::vector<double>> w;
    if (g.weights) {
        w.emplace();
        for (std::size_t j = 0; j < g.n_vertices; ++j)
            for (std::size_t p = 0; p < n_copy; ++p) w->push_back((*g.weights)[j]);
    }
    return make_graph(g.n_vertices * n_copy, e, w);
}

/// OR rule: vertex j is in the set if any of its copies is 1.
inline std::vector<std::size_t> mitigation_decode(const std::vector<int>& encoded, std::size_t n_copy) {
    if (n_copy < 1) throw ProblemError("n_copy must be at least 1");
    if (encoded.size() % n_copy != 0) throw ProblemError("encoded sample length is not a multiple of n_copy");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < encoded.size() / n_copy; ++j) {
        bool any = false;
        for (std::size_t p = 0; p < n_copy; ++p) {
            const int bit = encoded[j * n_copy + p];
            if (bit != 0 && bit != 1) throw ProblemError("encoded sample must be 0/1");
            any = any || bit == 1;
        }
        if (any) out.push_back(j);
    }
    return out;
}

struct LossExperimentResult {
    bool success = false;      // decoded set equals the brute-force optimum
    bool independent = false;  // decoded set is independent in the original graph
    std::vector<std::size_t> decoded;
    std::vector<std::size_t> optimum;
};

/// Encodes, takes all copies of the first optimum, drops the photons in `loss_pattern`, decodes.
inline LossExperimentResult loss_injection_experiment(const ProblemGraph& g, std::size_t n_copy,
                                                      const std::set<std::size_t>& loss_pattern) {
    const auto enc = mitigation_encode(g, n_copy);
    const auto best = g.weights ? brute_force_wmis(g) : brute_force_mis(g);
    const auto& opt = best.optima.front();
    std::vector<int> sample(enc.n_vertices, 0);
    for (auto j : opt)
        for (std::size_t p = 0; p < n_copy; ++p) sample[j * n_copy + p] = 1;
    for (auto idx : loss_pattern) {
        if (idx >= sample.size()) throw ProblemError("loss pattern index outside the encoded graph");
        if (sample[idx] == 0) throw ProblemError("loss pattern attempts a 0 -> 1 flip at encoded vertex " + std::to_string(idx));
        sample[idx] = 0;
    }
    LossExperimentResult r;
    r.decoded = mitigation_decode(sample, n_copy);
    r.optimum = opt;
    r.independent = g.independent(r.decoded);
    r.success = r.decoded == opt;
    return r;
}

/// Text graph format: "vertices N", "weight i w", "u v [coupling]"; '#' starts a comment.
inline ProblemGraph parse_graph(std::istream& in) {
    std::size_t n = 0;
    std::vector<Edge> edges;
    std::vector<std::pair<std::size_t, double>> weights;
    std::vector<std::tuple<std::size_t, std::size_t, double>> couplings;
    std::vector<std::pair<std::size_t, double>> diagonal;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        auto fail = [&](const std::string& why) {
            throw ProblemError("graph line " + std::to_string(lineno) + ": " + why);
        };
        if (first == "vertices") {
            if (!(ls >> n)) fail("expected vertex count");
        } else if (first == "weight") {
            std::size_t i;
            double w;
            if (!(ls >> i >> w)) fail("expected 'weight i w'");
            weights.emplace_back(i, w);
        } else if (first == "bias") {
            std::size_t i;
            double b;
            if (!(ls >> i >> b)) fail("expected 'bias i value'");
            diagonal.emplace_back(i, b);
        } else {
            std::size_t u, v;
            try {
                u = std::stoul(first);
            } catch (const std::exception&) {
                fail("unrecognised keyword '" + first + "'");
            }
            if (!(ls >> v)) fail("expected 'u v [coupling]'");
            edges.emplace_back(u, v);
            double c;
            if (ls >> c) couplings.emplace_back(u, v, c);
        }
    }
    if (n == 0) {
        for (auto [u, v] : edges) n = std::max({n, u + 1, v + 1});
    }
    std::optional<std::vector<double>> w;
    if (!weights.empty()) {
        w = std::vector<double>(n, 1.0);
        for (auto [i, x] : weights) {
            if (i >= n) throw ProblemError("weight for a vertex outside the graph");
            (*w)[i] = x;
        }
    }
    auto g = make_graph(n, edges, w);
    if (!couplings.empty() || !diagonal.empty()) {
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (auto [u, v, c] : couplings) {
            q(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = c;
            q(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = c;
        }
        for (auto [i, b] : diagonal) {
            if (i >= n) throw ProblemError("bias for a vertex outside the graph");
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = b;
        }
        g.qubo = q;
    }
    return g;
}

inline ProblemGraph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ProblemError("cannot open graph file '" + path + "'");
    return parse_graph(f);
}

/// Dense row-major QUBO text: one matrix row per line, whitespace separated.
inline Eigen::MatrixXd parse_qubo_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        if (!ls.eof()) throw ProblemError("non-numeric entry in QUBO matrix");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw ProblemError("empty QUBO matrix");
    Eigen::MatrixXd q(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n)
            throw ProblemError("QUBO matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) q(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    return q;
}

inline Eigen::MatrixXd load_qubo_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ProblemError("cannot open QUBO file '" + path + "'");
    return parse_qubo_matrix(f);
}

}  // namespace zeno
