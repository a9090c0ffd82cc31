#pragma once

#include "zenoanneal/problems.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace zeno::timebin {

// Positions are counted from the back of the train: position 0 is the last bin, and the bin at
// position p arrives at time -p*D. All delays are stored in units of D/2.

using Settings = std::array<int, 4>;  // S1..S4, 0 = top channel, 1 = bottom channel

inline constexpr Settings kConstraintFirst{0, 0, 0, 0};
inline constexpr Settings kConstraintSecond{1, 1, 1, 1};
inline constexpr Settings kIdentityFirst{0, 0, 0, 0};
inline constexpr Settings kIdentitySecond{0, 1, 1, 0};

/// Delay (units of D/2) of each switch stage for the top and bottom channel.
inline constexpr std::array<std::array<int, 2>, 4> kStageDelay{{{2, 0}, {0, 1}, {1, 0}, {0, 2}}};
inline constexpr int kBlockDelay = 3;  // 3D/2

struct BinOps {
    Settings switches{};
    int block_delay = kBlockDelay;
    int shuffle_delay = 0;
};

struct Round {
    std::vector<std::size_t> order_before;  // logical mode at each position
    std::vector<BinOps> bins;               // indexed by position
    std::vector<std::size_t> order_after;
};

struct SwitchProgram {
    std::size_t n_bins = 0;
    std::vector<Round> rounds;
};

struct CompileError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Switch settings for one pass; interact[p] asks for a constraint between positions p and p+1.
/// Remaining bins are grouped into identity pairs from the front of the train; a lone bin gets the first row.
inline std::vector<BinOps> compile_pair_ops(std::size_t n_bins, const std::vector<bool>& interact) {
    if (n_bins < 1) throw CompileError("need at least one bin");
    if (interact.size() + 1 != n_bins && !(n_bins == 1 && interact.empty()))
        throw CompileError("need one interaction flag per adjacent pair");
    std::vector<BinOps> bins(n_bins);
    std::vector<bool> used(n_bins, false);
    for (std::size_t p = 0; p + 1 < n_bins; ++p) {
        if (!interact[p]) continue;
        if (used[p] || used[p + 1]) throw CompileError("a bin cannot take part in two interactions in one pass");
        used[p] = used[p + 1] = true;
        bins[p + 1].switches = kConstraintFirst;
        bins[p].switches = kConstraintSecond;
    }
    std::size_t p = n_bins;
    while (p-- > 0) {
        if (used[p]) continue;
        bins[p].switches = kIdentityFirst;
        if (p > 0 && !used[p - 1]) {
            bins[p - 1].switches = kIdentitySecond;
            used[p - 1] = true;
            --p;
        }
    }
    return bins;
}

struct ShuffleRound {
    std::vector<std::size_t> order;        // logical mode at each position before the delays
    std::vector<int> delays;               // units of D/2: 0, 2 or 4
    std::vector<std::size_t> order_after;  // after the delays
    std::vector<std::size_t> swap_positions;  // p such that positions p and p+1 exchange (interaction slots)
};

/// Alternating odd/even 2D delays with D at the ends; n rounds.
inline std::vector<ShuffleRound> all_pairs_shuffle(std::size_t n) {
    if (n < 2) throw CompileError("all_pairs_shuffle needs n >= 2");
    std::vector<std::size_t> mode_nums(n);
    std::iota(mode_nums.begin(), mode_nums.end(), 0);
    std::vector<ShuffleRound> rounds;
    for (std::size_t r = 0; r < n; ++r) {
        ShuffleRound sr;
        sr.order = mode_nums;
        std::vector<std::size_t> next(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 2 == r % 2) {
                if (i == 0) {
                    sr.delays.push_back(2);
                    next[0] = mode_nums[0];
                } else {
                    sr.delays.push_back(4);
                    next[i - 1] = mode_nums[i];
                }
            } else if (i == n - 1) {
                sr.delays.push_back(2);
                next[n - 1] = mode_nums[n - 1];
            } else {
                sr.delays.push_back(0);
                next[i + 1] = mode_nums[i];
                sr.swap_positions.push_back(i);
            }
        }
        sr.order_after = next;
        mode_nums = next;
        rounds.push_back(std::move(sr));
    }
    return rounds;
}

/// Unordered logical pairs that occupy an interaction slot at least once.
inline std::set<std::pair<std::size_t, std::size_t>> slot_coverage(const std::vector<ShuffleRound>& rounds) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& r : rounds)
        for (auto p : r.swap_positions) {
            auto a = r.order[p], b = r.order[p + 1];
            seen.emplace(std::min(a, b), std::max(a, b));
        }
    return seen;
}

/// Full shuffle with constraints flagged only on graph edges, each edge on its first slot.
inline SwitchProgram compile_program(const ProblemGraph& g) {
    const std::size_t n = g.n_vertices;
    SwitchProgram prog{n, {}};
    if (n == 1) {
        prog.rounds.push_back({{0}, compile_pair_ops(1, {}), {0}});
        return prog;
    }
    std::set<std::pair<std::size_t, std::size_t>> done;
    for (const auto& sr : all_pairs_shuffle(n)) {
        std::vector<bool> flags(n - 1, false);
        for (auto p : sr.swap_positions) {
            auto a = std::min(sr.order[p], sr.order[p + 1]), b = std::max(sr.order[p], sr.order[p + 1]);
            if (g.has_edge(a, b) && !done.count({a, b})) {
                flags[p] = true;
                done.emplace(a, b);
            }
        }
        Round r{sr.order, compile_pair_ops(n, flags), sr.order_after};
        for (std::size_t p = 0; p < n; ++p) r.bins[p].shuffle_delay = sr.delays[p];
        prog.rounds.push_back(std::move(r));
    }
    return prog;
}

struct VerifyReport {
    std::vector<std::string> violations;
    std::set<std::pair<std::size_t, std::size_t>> realized;
    std::size_t interactions = 0;
    bool ok() const { return violations.empty(); }
};

namespace detail {

inline bool is_permutation_of_range(const std::vector<std::size_t>& v, std::size_t n) {
    if (v.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (auto x : v) {
        if (x >= n || seen[x]) return false;
        seen[x] = true;
    }
    return true;
}

}  // namespace detail

/// Simulates bin arrival times through every pass and checks the realised interactions against the graph.
inline VerifyReport verify_program(const SwitchProgram& prog, const ProblemGraph& g) {
    VerifyReport rep;
    const std::size_t n = prog.n_bins;
    auto fail = [&](std::size_t round, const std::string& what) {
        rep.violations.push_back("round " + std::to_string(round) + ": " + what);
    };
    if (n != g.n_vertices) rep.violations.push_back("program bin count differs from the graph vertex count");
    for (std::size_t ri = 0; ri < prog.rounds.size(); ++ri) {
        const auto& r = prog.rounds[ri];
        if (!detail::is_permutation_of_range(r.order_before, n) || !detail::is_permutation_of_range(r.order_after, n) ||
            r.bins.size() != n) {
            fail(ri, "mode order is not a permutation of the bins");
            continue;
        }
        if (ri + 1 < prog.rounds.size() && prog.rounds[ri + 1].order_before != r.order_after)
            fail(ri, "next pass does not start from this pass's output order");

        // Stage-by-stage arrival times in units of D/2, starting from -2p.
        std::vector<std::array<int, 5>> time(n);
        for (std::size_t p = 0; p < n; ++p) {
            const auto& s = r.bins[p].switches;
            int t = -2 * static_cast<int>(p);
            time[p][0] = t;
            int total = 0;
            for (int k = 0; k < 4; ++k) {
                if (s[static_cast<std::size_t>(k)] != 0 && s[static_cast<std::size_t>(k)] != 1) {
                    fail(ri, "switch value outside {0,1} at position " + std::to_string(p));
                    break;
                }
                const int d = kStageDelay[static_cast<std::size_t>(k)][static_cast<std::size_t>(s[static_cast<std::size_t>(k)])];
                t += d;
                total += d;
                time[p][static_cast<std::size_t>(k) + 1] = t;
            }
            if (total != kBlockDelay || r.bins[p].block_delay != kBlockDelay)
                fail(ri, "position " + std::to_string(p) + " is not delayed by 3D/2 in the interaction block");
        }
        auto meetings = [&](std::size_t stage_after, const char* where) {
            std::map<int, std::vector<std::size_t>> at;
            for (std::size_t p = 0; p < n; ++p) at[time[p][stage_after]].push_back(p);
            std::set<std::pair<std::size_t, std::size_t>> met;
            for (const auto& [t, ps] : at) {
                if (ps.size() > 2) {
                    fail(ri, std::string("more than two bins collide at ") + where);
                    continue;
                }
                if (ps.size() == 2) {
                    const auto& s0 = r.bins[ps[0]].switches;
                    const auto& s1 = r.bins[ps[1]].switches;
                    if (s0[stage_after - 1] == s1[stage_after - 1])
                        fail(ri, std::string("two bins share one channel at ") + where);
                    met.emplace(std::min(ps[0], ps[1]), std::max(ps[0], ps[1]));
                }
            }
            return met;
        };
        const auto bs1 = meetings(1, "the first beamsplitter");
        const auto nl = meetings(2, "the nonlinear element");
        if (!nl.empty()) fail(ri, "bins overlap in the nonlinear element");
        const auto bs2 = meetings(3, "the second beamsplitter");
        for (const auto& pr : bs1) {
            if (!bs2.count(pr)) {
                fail(ri, "positions " + std::to_string(pr.first) + "," + std::to_string(pr.second) +
                             " meet at the first beamsplitter only");
                continue;
            }
            const auto a = r.order_before[pr.first], b = r.order_before[pr.second];
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            ++rep.interactions;
            rep.realized.insert(key);
            if (!g.has_edge(key.first, key.second))
                fail(ri, "unintended interaction between modes " + std::to_string(key.first) + " and " + std::to_string(key.second));
        }
        for (const auto& pr : bs2)
            if (!bs1.count(pr)) fail(ri, "bins meet at the second beamsplitter only");

        // Train spacing after the block, then the reordering delays.
        std::set<int> out_times;
        for (std::size_t p = 0; p < n; ++p) out_times.insert(time[p][4]);
        if (out_times.size() != n || (n > 1 && *out_times.rbegin() - *out_times.begin() != 2 * static_cast<int>(n - 1)))
            fail(ri, "bin spacing after the interaction block is not D");
        std::vector<std::size_t> reordered(n, n);
        for (std::size_t p = 0; p < n; ++p) {
            const int d = r.bins[p].shuffle_delay;
            if (d != 0 && d != 2 && d != 4) {
                fail(ri, "reordering delay must be 0, D or 2D");
                continue;
            }
            const long np = static_cast<long>(p) + 1 - d / 2;
            if (np < 0 || np >= static_cast<long>(n) || reordered[static_cast<std::size_t>(np)] != n) {
                fail(ri, "reordering delays collide or leave the train");
                continue;
            }
            reordered[static_cast<std::size_t>(np)] = r.order_before[p];
        }
        if (reordered != r.order_after) fail(ri, "reordering delays do not produce the declared output order");
    }
    for (auto [u, v] : g.edges)
        if (!rep.realized.count({u, v}))
            rep.violations.push_back("edge " + std::to_string(u) + "-" + std::to_string(v) + " is never realised");
    return rep;
}

/// Line-oriented program text; delays in units of D/2.
inline void write_program(std::ostream& os, const SwitchProgram& prog) {
    os << "# zenoanneal switch program\n";
    os << "# bins " << prog.n_bins << " rounds " << prog.rounds.size() << "\n";
    os << "# positions count from the back of the train; delays in units of D/2\n";
    os << "round,position,mode,S1,S2,S3,S4,block_delay,shuffle_delay,mode_after\n";
    for (std::size_t ri = 0; ri < prog.rounds.size(); ++ri) {
        const auto& r = prog.rounds[ri];
        for (std::size_t p = 0; p < prog.n_bins; ++p) {
            const auto& b = r.bins[p];
            os << ri << ',' << p << ',' << r.order_before[p] << ',' << b.switches[0] << ',' << b.switches[1] << ','
               << b.switches[2] << ',' << b.switches[3] << ',' << b.block_delay << ',' << b.shuffle_delay << ','
               << r.order_after[p] << '\n';
        }
    }
}

inline SwitchProgram read_program(std::istream& in) {
    SwitchProgram prog;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::size_t ri, p, mode, after;
        BinOps b;
        if (!(ls >> ri >> p >> mode >> b.switches[0] >> b.switches[1] >> b.switches[2] >> b.switches[3] >> b.block_delay >>
              b.shuffle_delay >> after))
            throw CompileError("malformed program row: " + line);
        if (ri >= prog.rounds.size()) prog.rounds.resize(ri + 1);
        auto& r = prog.rounds[ri];
        if (p >= r.bins.size()) {
            r.bins.resize(p + 1);
            r.order_before.resize(p + 1);
            r.order_after.resize(p + 1);
        }
        r.bins[p] = b;
        r.order_before[p] = mode;
        r.order_after[p] = after;
        prog.n_bins = std::max(prog.n_bins, p + 1);
    }
    return prog;
}

}  // namespace zeno::timebin
