#include "zenoanneal/anneal.hpp"
#include "zenoanneal/experiments.hpp"
#include "zenoanneal/oracle.hpp"
#include "zenoanneal/problems.hpp"
#include "zenoanneal/timebin.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace {

using namespace zeno;
namespace ex = zeno::experiments;

constexpr double pi = std::numbers::pi;

constexpr int kExitConfig = 1;
constexpr int kExitGuard = 2;

struct GuardViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string join_set(const std::vector<std::size_t>& s, char sep = ' ') {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(s[i]);
    }
    return out;
}

/// Non-finite observables are reported as guard violations instead of being written out.
double checked(double x, const char* what) {
    if (!std::isfinite(x)) throw GuardViolation(std::string("non-finite ") + what);
    return x;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::string& config, std::vector<std::string> columns) : os_(os) {
        os_ << "# config: " << config << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
        os_ << '\n';
        width_ = columns.size();
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != width_) throw std::logic_error("CSV row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

private:
    std::ostream& os_;
    std::size_t width_ = 0;
};

/// Runs fn(i) for i in [0, n) on `threads` workers and returns results in index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

/// Built-in graphs by name ("line:N", "complete:N", "five-node", "pair") or an edge-list file.
ProblemGraph resolve_graph(const std::string& name) {
    auto sized = [&](const std::string& prefix) -> std::optional<std::size_t> {
        if (name.rfind(prefix, 0) != 0) return std::nullopt;
        return static_cast<std::size_t>(std::stoul(name.substr(prefix.size())));
    };
    if (auto n = sized("line:")) return line_graph(*n);
    if (auto n = sized("complete:")) return complete_graph(*n);
    if (name == "five-node") return five_node_graph();
    if (name == "pair") return make_graph(2, {{0, 1}});
    if (!std::filesystem::exists(name)) throw ProblemError("graph '" + name + "' is neither a built-in name nor a file");
    return load_graph(name);
}

struct Common {
    std::string out;
    unsigned threads = 0;

    unsigned workers() const { return threads ? threads : std::max(1U, std::thread::hardware_concurrency()); }
};

/// Resolves the output target. Relative paths and the default file name land in $ZENOANNEAL_OUTPUT_DIR when set.
std::unique_ptr<std::ostream> open_output(const Common& common, const std::string& default_name) {
    const char* dir = std::getenv("ZENOANNEAL_OUTPUT_DIR");
    std::filesystem::path path;
    if (!common.out.empty() && common.out != "-") {
        path = common.out;
        if (dir && *dir && path.is_relative()) path = std::filesystem::path(dir) / path;
    } else if (common.out.empty() && dir && *dir) {
        path = std::filesystem::path(dir) / default_name;
    } else {
        return nullptr;
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto f = std::make_unique<std::ofstream>(path);
    if (!*f) throw std::invalid_argument("cannot open output file " + path.string());
    return f;
}

/// One-line record of every option of a subcommand, including defaults.
std::string config_line(const CLI::App& sub) {
    std::string text = sub.config_to_str(true, false);
    std::string out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '[' || line[0] == '#') continue;
        if (!out.empty()) out += "; ";
        out += line;
    }
    return std::string(sub.get_name()) + " " + out;
}

template <class T>
std::string default_text(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
        return v ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
        return num(v);
    } else if constexpr (std::is_same_v<T, std::string>) {
        return v;
    } else if constexpr (requires { v.begin(); }) {
        std::string out = "[";
        for (auto it = v.begin(); it != v.end(); ++it) out += (it == v.begin() ? "" : ", ") + default_text(*it);
        return out + "]";
    } else {
        return std::to_string(v);
    }
}

/// Adds an option whose recorded default keeps full floating-point precision.
template <class T>
CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& description) {
    return app->add_option(name, var, description)->default_str(default_text(var));
}

struct Command {
    CLI::App* app = nullptr;
    std::string default_file;
    std::function<void(std::ostream&, const std::string&)> run;
};

// ---------------------------------------------------------------------------------------------------------------------

void add_zeno_onset(CLI::App& root, const Common& common, std::vector<Command>& cmds) {
    struct Opts {
        std::string kind = "both";
        std::vector<double> tpa_ratios{0.0, 150.0};
        std::vector<double> sfg_ratios{0.0, 10.0};
        double eta_ratio = 0.0;
        std::size_t tpa_levels = 31;
        std::size_t sfg_levels = 11;
        double periods = 1.0;
        int samples = 81;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("zeno-onset", "Populations of a driven mode started in vacuum (c = 1)");
    add(app, "--kind", o->kind, "tpa, sfg, or both")->check(CLI::IsMember({"tpa", "sfg", "both"}));
    add(app, "--tpa-ratios", o->tpa_ratios, "TPA rate over drive rate")->delimiter(',');
    add(app, "--sfg-ratios", o->sfg_ratios, "SFG rate over drive rate")->delimiter(',');
    add(app, "--eta-ratio", o->eta_ratio, "SFG pump loss over nonlinear rate");
    add(app, "--tpa-levels", o->tpa_levels, "Fock truncation for the TPA runs");
    add(app, "--sfg-levels", o->sfg_levels, "Signal truncation for the SFG runs");
    add(app, "--periods", o->periods, "Duration in units of 2 pi / c");
    add(app, "--samples", o->samples, "Time samples per curve")->check(CLI::Range(2, 100000));
    cmds.push_back({app, "zeno_onset.csv", [o, &common](std::ostream& os, const std::string& cfg) {
                        std::vector<std::pair<ex::Nonlinearity, double>> jobs;
                        for (const auto& [kind, ratios] : {std::pair{ex::Nonlinearity::tpa, o->tpa_ratios}, std::pair{ex::Nonlinearity::sfg, o->sfg_ratios}})
                            for (double r : ratios) {
                                if (o->kind != "both" && o->kind != (kind == ex::Nonlinearity::tpa ? "tpa" : "sfg")) continue;
                                if (r < 0) throw std::invalid_argument("gamma ratios must be non-negative");
                                jobs.emplace_back(kind, r);
                            }
                        const auto res = parallel_map<std::vector<ex::OnsetSample>>(jobs.size(), common.workers(), [&](std::size_t i) {
                            const auto [kind, r] = jobs[i];
                            const bool tpa = kind == ex::Nonlinearity::tpa;
                            return ex::zeno_onset(kind, 1.0, r, o->eta_ratio * r, tpa ? o->tpa_levels : o->sfg_levels,
                                                  2 * pi * o->periods, o->samples);
                        });
                        CsvWriter csv(os, cfg, {"kind", "gamma_over_c", "t", "p0", "p1", "p_higher"});
                        for (std::size_t i = 0; i < jobs.size(); ++i)
                            for (const auto& s : res[i])
                                csv.row({jobs[i].first == ex::Nonlinearity::tpa ? "tpa" : "sfg", num(jobs[i].second), num(s.t),
                                         num(checked(s.p0, "population")), num(checked(s.p1, "population")),
                                         num(checked(s.p_higher, "population"))});
                    }});
}

void add_drive_sweep(CLI::App& root, const Common& common, std::vector<Command>& cmds) {
    struct Opts {
        std::string mode = "flip";
        std::vector<double> fractions{0.0, 0.25, 0.5, 0.75, 1.0};
        double gamma_min = 0.1;
        double gamma_max = 1000.0;
        int per_decade = 8;
        bool tpa_reference = true;
        double gamma_tpa = 1.0;
        std::vector<double> eta_ratios{10.0, 30.0, 100.0};
        int samples = 101;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("drive-sweep", "P(|1>) after t = pi/(2c) against the nonlinear rate, or the Markov approach");
    add(app, "--mode", o->mode, "flip (success vs gamma) or markov (coherence decay vs lossy SFG)")
        ->check(CLI::IsMember({"flip", "markov"}));
    add(app, "--critical-fractions", o->fractions, "SFG pump loss as a fraction of critical damping")->delimiter(',');
    add(app, "--gamma-min", o->gamma_min, "Smallest nonzero gamma/c");
    add(app, "--gamma-max", o->gamma_max, "Largest gamma/c");
    add(app, "--per-decade", o->per_decade, "Log-grid density");
    add(app, "--tpa-reference", o->tpa_reference, "Include the TPA drive curve (true/false)");
    add(app, "--gamma-tpa", o->gamma_tpa, "Target two-photon loss rate (markov mode)");
    add(app, "--eta-ratios", o->eta_ratios, "Pump loss over the target rate, each above 4 (markov mode)")->delimiter(',');
    add(app, "--samples", o->samples, "Time samples over two decay constants (markov mode)");
    cmds.push_back({app, "drive_sweep.csv", [o, &common](std::ostream& os, const std::string& cfg) {
                        if (o->mode == "markov") {
                            const auto res = parallel_map<ex::MarkovComparison>(o->eta_ratios.size(), common.workers(), [&](std::size_t i) {
                                return ex::markov_approach(o->gamma_tpa, o->eta_ratios[i] * o->gamma_tpa, 2, o->samples);
                            });
                            CsvWriter csv(os, cfg, {"eta_over_gamma_tpa", "gamma", "t", "rho12_sfg", "rho12_markov"});
                            for (std::size_t i = 0; i < res.size(); ++i)
                                for (std::size_t k = 0; k < res[i].times.size(); ++k)
                                    csv.row({num(o->eta_ratios[i]), num(res[i].gamma), num(res[i].times[k]),
                                             num(checked(res[i].sfg[k], "coherence")), num(res[i].markov[k])});
                            return;
                        }
                        if (!(o->gamma_min > 0 && o->gamma_max > o->gamma_min)) throw std::invalid_argument("need 0 < gamma-min < gamma-max");
                        std::vector<double> gammas{0.0};
                        for (double g : ex::log_grid(o->gamma_min, o->gamma_max, o->per_decade)) gammas.push_back(g);
                        struct Curve {
                            std::string kind;
                            double fraction;
                        };
                        std::vector<Curve> curves;
                        for (double f : o->fractions) curves.push_back({"sfg", f});
                        if (o->tpa_reference) curves.push_back({"tpa", 0.0});
                        using Rows = std::vector<std::array<double, 3>>;
                        const auto res = parallel_map<Rows>(curves.size(), common.workers(), [&](std::size_t i) {
                            Rows rows;
                            const bool tpa = curves[i].kind == "tpa";
                            for (double g : gammas) {
                                const double eta = tpa ? 0.0 : curves[i].fraction * 4 * std::numbers::sqrt2 * g;
                                const double p = ex::flip_probability(tpa ? ex::Nonlinearity::tpa : ex::Nonlinearity::sfg, 1.0, g, eta,
                                                                      ex::sweep_mode_dim(g));
                                rows.push_back({g, eta, checked(p, "flip probability")});
                                if (p >= 0.99) break;
                            }
                            return rows;
                        });
                        CsvWriter csv(os, cfg, {"kind", "critical_fraction", "gamma_over_c", "eta_over_c", "p1"});
                        for (std::size_t i = 0; i < curves.size(); ++i)
                            for (const auto& r : res[i])
                                csv.row({curves[i].kind, num(curves[i].fraction), num(r[0]), num(r[1]), num(r[2])});
                    }});
}

void add_constraint_sweep(CLI::App& root, const Common& common, std::vector<Command>& cmds, const std::string& graph) {
    struct Opts {
        double r_tot = 20 * pi;
        double pump_phase = 1.5 * pi;
        std::vector<double> angles;
        int angle_points = 5;
        std::vector<int> n_cycles{10, 20, 50, 100, 200, 500, 1000, 2000};
        std::size_t mode_dim = 3;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("constraint-sweep", "Density-matrix anneal success and entropy over SFG exposure and cycle count");
    add(app, "--r-tot", o->r_tot, "Total drive angle");
    add(app, "--pump-phase", o->pump_phase, "Pump phase between the two SFG passes");
    add(app, "--angles", o->angles, "Explicit SFG exposures gamma*t (overrides --angle-points)")->delimiter(',');
    add(app, "--angle-points", o->angle_points, "Evenly spaced exposures from pi/(4 sqrt2) to pi/(2 sqrt2)")
        ->check(CLI::Range(1, 1000));
    add(app, "--n-cycles", o->n_cycles, "Cycle counts")->delimiter(',');
    add(app, "--mode-dim", o->mode_dim, "Fock truncation per mode");
    cmds.push_back({app, "constraint_sweep.csv", [o, &common, &graph](std::ostream& os, const std::string& cfg) {
                        const auto g = resolve_graph(graph.empty() ? "line:3" : graph);
                        auto angles = o->angles;
                        if (angles.empty()) {
                            for (int k = 0; k < o->angle_points; ++k)
                                angles.push_back(o->angle_points == 1 ? kReturnAngle
                                                                       : kConversionAngle + (kReturnAngle - kConversionAngle) * k / (o->angle_points - 1));
                        }
                        AnnealOptions opt;
                        opt.mode_dim = o->mode_dim;
                        opt.record_every = 1;
                        const std::size_t nn = o->n_cycles.size();
                        const auto res = parallel_map<ex::ConstraintPoint>(angles.size() * nn, common.workers(), [&](std::size_t i) {
                            return ex::constraint_sweep(g, o->r_tot, o->pump_phase, {angles[i / nn]}, {o->n_cycles[i % nn]}, opt).front();
                        });
                        const double guess = std::ldexp(1.0, -static_cast<int>(g.n_vertices));
                        CsvWriter csv(os, cfg,
                                      {"sfg_angle", "coherence", "n_cycle", "success", "max_entropy", "final_entropy", "max_leakage",
                                       "random_guess"});
                        for (const auto& p : res) {
                            const ConstraintParams cp{o->pump_phase, p.sfg_angle, 0.0};
                            csv.row({num(p.sfg_angle), to_string(cp.coherence()), std::to_string(p.n_cycle),
                                     num(checked(p.success, "success")), num(checked(p.max_entropy, "entropy")), num(p.final_entropy),
                                     num(p.max_leakage), num(guess)});
                        }
                    }});
}

void add_anneal(CLI::App& root, const Common& common, std::vector<Command>& cmds, const std::string& graph) {
    struct Opts {
        std::string simulator = "compare";
        std::vector<int> n_cycles{100, 200, 400};
        std::vector<double> r_values;
        double r_min = 1.0;
        double r_max = 1e4;
        int per_decade = 20;
        double pump_phase = 1.5 * pi;
        double tolerance = 0.01;
        std::string drive = "ideal";
        double drive_gamma_ratio = 150.0;
        double drive_loss_ratio = 0.0;
        double sfg_angle = kReturnAngle;
        double pump_loss = 0.0;
        std::size_t mode_dim = 3;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("anneal", "MIS anneal over an R_tot grid: ideal vs phase-kick comparison or a single simulator");
    add(app, "--simulator", o->simulator, "compare, ideal, phase, or density")
        ->check(CLI::IsMember({"compare", "ideal", "phase", "density"}));
    add(app, "--n-cycles", o->n_cycles, "Cycle counts")->delimiter(',');
    add(app, "--r-values", o->r_values, "Explicit R_tot values (overrides the log grid)")->delimiter(',');
    add(app, "--r-min", o->r_min, "Log grid start");
    add(app, "--r-max", o->r_max, "Log grid end");
    add(app, "--per-decade", o->per_decade, "Log grid density");
    add(app, "--pump-phase", o->pump_phase, "Constraint pump phase");
    add(app, "--tolerance", o->tolerance, "Deviation marking the critical R_tot (compare)");
    add(app, "--drive", o->drive, "ideal, zeno-tpa, or zeno-sfg (density)")->check(CLI::IsMember({"ideal", "zeno-tpa", "zeno-sfg"}));
    add(app, "--drive-gamma-ratio", o->drive_gamma_ratio, "Nonlinear over drive rate for Zeno drives");
    add(app, "--drive-loss-ratio", o->drive_loss_ratio, "Pump loss over nonlinear rate for the SFG drive");
    add(app, "--sfg-angle", o->sfg_angle, "Constraint SFG exposure (density)");
    add(app, "--pump-loss", o->pump_loss, "Constraint pump loss exposure (density)");
    add(app, "--mode-dim", o->mode_dim, "Fock truncation per mode (density)");
    cmds.push_back({app, "anneal.csv", [o, &common, &graph](std::ostream& os, const std::string& cfg) {
                        const auto g = resolve_graph(graph.empty() ? "five-node" : graph);
                        std::vector<double> rs = o->r_values;
                        if (rs.empty()) {
                            if (!(o->r_min > 0 && o->r_max > o->r_min)) throw std::invalid_argument("need 0 < r-min < r-max");
                            rs = ex::log_grid(o->r_min, o->r_max, o->per_decade);
                        }
                        const std::size_t nr = rs.size();
                        if (o->simulator == "compare") {
                            const auto res = parallel_map<ex::CriticalResult>(o->n_cycles.size(), common.workers(), [&](std::size_t i) {
                                return ex::ideal_vs_phase(g, o->n_cycles[i], rs, o->pump_phase, o->tolerance, false);
                            });
                            CsvWriter csv(os, cfg, {"n_cycle", "R_tot", "phase", "ideal", "deviation", "below_critical"});
                            for (const auto& r : res)
                                for (const auto& p : r.curve)
                                    csv.row({std::to_string(p.n_cycle), num(p.R_tot), num(checked(p.phase, "success")),
                                             num(checked(p.ideal, "success")), num(std::abs(p.phase - p.ideal)),
                                             (!r.critical || p.R_tot < *r.critical) ? "1" : "0"});
                            return;
                        }
                        AnnealOptions opt;
                        opt.record_every = 0;
                        opt.mode_dim = o->mode_dim;
                        opt.drive = o->drive == "zeno-tpa"   ? DriveMode::zeno_tpa
                                    : o->drive == "zeno-sfg" ? DriveMode::zeno_sfg
                                                             : DriveMode::ideal_two_level;
                        opt.drive_gamma_ratio = o->drive_gamma_ratio;
                        opt.drive_loss_ratio = o->drive_loss_ratio;
                        const auto res = parallel_map<CycleRecord>(o->n_cycles.size() * nr, common.workers(), [&](std::size_t i) {
                            const auto s = g.weights ? weighted_phases(make_schedule(o->n_cycles[i / nr], rs[i % nr]), *g.weights)
                                                     : make_schedule(o->n_cycles[i / nr], rs[i % nr]);
                            if (o->simulator == "ideal") return run_anneal_ideal(g, s, opt).final;
                            if (o->simulator == "phase") return run_anneal_statevector(g, s, o->pump_phase, opt).final;
                            return run_anneal_density(g, s, {o->pump_phase, o->sfg_angle, o->pump_loss}, opt).final;
                        });
                        CsvWriter csv(os, cfg, {"n_cycle", "R_tot", "success", "entropy", "leakage"});
                        for (std::size_t i = 0; i < res.size(); ++i)
                            csv.row({std::to_string(o->n_cycles[i / nr]), num(rs[i % nr]), num(checked(res[i].success, "success")),
                                     num(res[i].entropy), num(res[i].leakage)});
                    }});
}

void add_wmis(CLI::App& root, const Common& common, std::vector<Command>& cmds, const std::string& graph) {
    struct Opts {
        std::vector<double> w0{0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 1.75};
        int n_cycle = 1000;
        double r_tot = 200 * pi;
        double pump_phase = 1.5 * pi;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("wmis", "Weighted MIS anneal with the weight of vertex 0 swept");
    add(app, "--w0", o->w0, "Weights of vertex 0")->delimiter(',');
    add(app, "--n-cycle", o->n_cycle, "Cycle count");
    add(app, "--r-tot", o->r_tot, "Total drive angle");
    add(app, "--pump-phase", o->pump_phase, "Constraint pump phase");
    cmds.push_back({app, "wmis.csv", [o, &common, &graph](std::ostream& os, const std::string& cfg) {
                        const auto base = resolve_graph(graph.empty() ? "pair" : graph);
                        AnnealOptions opt;
                        opt.record_every = 0;
                        const auto schedule = make_schedule(o->n_cycle, o->r_tot);
                        const auto res = parallel_map<AnnealReport>(o->w0.size(), common.workers(), [&](std::size_t i) {
                            auto w = base.weights.value_or(std::vector<double>(base.n_vertices, 1.0));
                            w.at(0) = o->w0[i];
                            const auto g = make_graph(base.n_vertices, base.edges, w);
                            return run_anneal_statevector(g, weighted_phases(schedule, w), o->pump_phase, opt);
                        });
                        CsvWriter csv(os, cfg, {"w0", "state", "probability", "success"});
                        for (std::size_t i = 0; i < res.size(); ++i) {
                            auto states = res[i].top_states;
                            std::sort(states.begin(), states.end());
                            for (const auto& [label, p] : states)
                                csv.row({num(o->w0[i]), label, num(checked(p, "probability")), num(res[i].final.success)});
                        }
                    }});
}

void add_qubo(CLI::App& root, const Common&, std::vector<Command>& cmds, const std::string& graph) {
    struct Opts {
        std::string matrix;
        int n_cycle = 200;
        double r_tot = 20 * pi;
        double pump_phase = pi;
        bool gauge_flip = false;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("qubo", "QUBO anneal with the default ramp profile");
    add(app, "--matrix", o->matrix, "Dense row-major QUBO matrix file (alternative to bias/coupling lines in --graph)");
    add(app, "--n-cycle", o->n_cycle, "Cycle count");
    add(app, "--r-tot", o->r_tot, "Total drive angle");
    add(app, "--pump-phase", o->pump_phase, "Constraint pump phase");
    app->add_flag("--gauge-flip", o->gauge_flip, "Flip variables so the brute-force optimum becomes the vacuum");
    cmds.push_back({app, "qubo.csv", [o, &graph](std::ostream& os, const std::string& cfg) {
                        Eigen::MatrixXd q;
                        if (!o->matrix.empty()) {
                            q = load_qubo_matrix(o->matrix);
                        } else {
                            if (graph.empty()) throw std::invalid_argument("qubo needs --matrix or a --graph with bias/coupling lines");
                            const auto g = resolve_graph(graph);
                            if (!g.qubo) throw std::invalid_argument("graph file carries no bias or coupling entries");
                            q = *g.qubo;
                        }
                        std::vector<bool> flip(static_cast<std::size_t>(q.rows()), false);
                        if (o->gauge_flip) {
                            const auto best = brute_force_qubo(make_qubo_problem(q));
                            for (auto v : best.optima.front()) flip[v] = true;
                            q = qubo_gauge_flip(q, flip).first;
                        }
                        AnnealOptions opt;
                        opt.record_every = 0;
                        const auto rep = qubo_anneal(q, o->n_cycle, o->r_tot, default_qubo_profile(), ConstraintParams::coherent(o->pump_phase), opt);
                        CsvWriter csv(os, cfg, {"state", "gauge", "probability", "energy", "optimal"});
                        auto states = rep.top_states;
                        std::sort(states.begin(), states.end());
                        std::string gauge;
                        for (bool f : flip) gauge += f ? '1' : '0';
                        for (const auto& [label, p] : states) {
                            std::uint64_t mask = 0;
                            std::vector<std::size_t> set;
                            for (std::size_t j = 0; j < label.size(); ++j)
                                if (label[j] == '1') {
                                    mask |= std::uint64_t{1} << j;
                                    set.push_back(j);
                                }
                            const bool optimal = std::find(rep.targets.begin(), rep.targets.end(), set) != rep.targets.end();
                            csv.row({label, gauge, num(checked(p, "probability")), num(qubo_energy(q, mask)), optimal ? "1" : "0"});
                        }
                    }});
}

void add_mitigate(CLI::App& root, const Common&, std::vector<Command>& cmds, const std::string& graph) {
    struct Opts {
        std::vector<std::size_t> n_copies{1, 2, 3};
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("mitigate", "Exhaustive photon-loss injection on the copy-encoded optimum");
    add(app, "--n-copies", o->n_copies, "Copies per vertex")->delimiter(',');
    cmds.push_back({app, "mitigate.csv", [o, &graph](std::ostream& os, const std::string& cfg) {
                        const auto g = resolve_graph(graph.empty() ? "line:3" : graph);
                        const auto best = (g.weights ? brute_force_wmis(g) : brute_force_mis(g)).optima.front();
                        CsvWriter csv(os, cfg, {"n_copy", "lost", "copies_survive", "decoded", "success", "independent"});
                        for (std::size_t n_copy : o->n_copies) {
                            if (n_copy == 0) throw std::invalid_argument("n_copy must be positive");
                            std::vector<std::size_t> occupied;
                            for (auto v : best)
                                for (std::size_t p = 0; p < n_copy; ++p) occupied.push_back(v * n_copy + p);
                            if (occupied.size() > 24) throw std::invalid_argument("too many occupied photons for an exhaustive sweep");
                            for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << occupied.size()); ++sub) {
                                std::set<std::size_t> lost;
                                for (std::size_t i = 0; i < occupied.size(); ++i)
                                    if ((sub >> i) & 1U) lost.insert(occupied[i]);
                                bool survive = true;
                                for (auto v : best) {
                                    std::size_t left = 0;
                                    for (std::size_t p = 0; p < n_copy; ++p) left += lost.count(v * n_copy + p) ? 0 : 1;
                                    survive = survive && left > 0;
                                }
                                const auto r = loss_injection_experiment(g, n_copy, lost);
                                csv.row({std::to_string(n_copy), join_set({lost.begin(), lost.end()}), survive ? "1" : "0",
                                         join_set(r.decoded), r.success ? "1" : "0", r.independent ? "1" : "0"});
                                if (!r.independent) throw GuardViolation("decoded set is not independent");
                            }
                        }
                    }});
}

void add_timebin(CLI::App& root, const Common&, std::vector<Command>& cmds, const std::string& graph) {
    auto* app = root.add_subcommand("timebin-compile", "Compile and verify the switch program for a graph");
    cmds.push_back({app, "timebin_program.csv", [&graph](std::ostream& os, const std::string& cfg) {
                        const auto g = resolve_graph(graph.empty() ? "complete:5" : graph);
                        const auto prog = timebin::compile_program(g);
                        const auto rep = timebin::verify_program(prog, g);
                        os << "# config: " << cfg << '\n';
                        timebin::write_program(os, prog);
                        std::cerr << "verified: " << rep.realized.size() << " edges realised, " << rep.interactions << " interactions, "
                                  << rep.violations.size() << " violations\n";
                        for (const auto& v : rep.violations) std::cerr << "  " << v << '\n';
                        if (!rep.ok()) throw GuardViolation("compiled program failed verification");
                    }});
}

void add_oracle_check(CLI::App& root, const Common& common, std::vector<Command>& cmds) {
    struct Opts {
        std::vector<double> gammas{0.5, 1.0, 1.5, 2.0, 3.0};
        std::vector<double> critical_fractions{0.25, 0.6, 1.0, 2.0, 5.0};
        double t_end = 2.0;
        int samples = 21;
        double tolerance = 1e-8;
    };
    auto o = std::make_shared<Opts>();
    auto* app = root.add_subcommand("oracle-check", "Coherence <1|rho|2> from the ODE, the closed forms, and full lossy-SFG propagation");
    add(app, "--gammas", o->gammas, "Nonlinear rates")->delimiter(',');
    add(app, "--critical-fractions", o->critical_fractions, "Pump loss as a fraction of critical damping")->delimiter(',');
    add(app, "--t-end", o->t_end, "Final time");
    add(app, "--samples", o->samples, "Time samples")->check(CLI::Range(2, 100000));
    add(app, "--tolerance", o->tolerance, "Allowed |full - ode| before exiting with a guard violation");
    cmds.push_back({app, "oracle_check.csv", [o, &common](std::ostream& os, const std::string& cfg) {
                        const auto ts = ex::uniform_grid(o->t_end, o->samples);
                        const std::size_t nf = o->critical_fractions.size();
                        struct Traj {
                            std::vector<cplx> ode, full;
                            int sign_changes = 0;
                        };
                        const auto res = parallel_map<Traj>(o->gammas.size() * nf, common.workers(), [&](std::size_t i) {
                            const double g = o->gammas[i / nf];
                            const oracle::DampingParams p{g, o->critical_fractions[i % nf] * 4 * std::numbers::sqrt2 * g};
                            Traj t{oracle::rho12_ode(p, 0.5, ts), ex::rho12_full_simulation(p.gamma, p.eta, ts), 0};
                            t.sign_changes = oracle::sign_changes(t.ode);
                            return t;
                        });
                        CsvWriter csv(os, cfg,
                                      {"gamma", "eta", "regime", "t", "ode_re", "ode_im", "closed_re", "closed_printed_re", "full_re",
                                       "full_im", "abs_full_minus_ode", "sign_changes"});
                        double worst = 0;
                        for (std::size_t i = 0; i < res.size(); ++i) {
                            const double g = o->gammas[i / nf];
                            const oracle::DampingParams p{g, o->critical_fractions[i % nf] * 4 * std::numbers::sqrt2 * g};
                            for (std::size_t k = 0; k < ts.size(); ++k) {
                                const double diff = checked(std::abs(res[i].full[k] - res[i].ode[k]), "coherence");
                                worst = std::max(worst, diff);
                                csv.row({num(g), num(p.eta), oracle::to_string(p.regime()), num(ts[k]), num(res[i].ode[k].real()),
                                         num(res[i].ode[k].imag()), num(oracle::rho12_closed_form(p, 0.5, ts[k]).real()),
                                         num(oracle::rho12_closed_form(p, 0.5, ts[k], oracle::ClosedForm::printed).real()),
                                         num(res[i].full[k].real()), num(res[i].full[k].imag()), num(diff),
                                         std::to_string(res[i].sign_changes)});
                            }
                        }
                        std::cerr << "max |full - ode| = " << num(worst) << '\n';
                        if (worst > o->tolerance) throw GuardViolation("full propagation departs from the ODE by " + num(worst));
                    }});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zeno-constrained optical annealing simulator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with one [section] per subcommand; command-line flags win");
    Common common;
    std::string graph;
    app.add_option("--out", common.out, "Output file (default stdout, or $ZENOANNEAL_OUTPUT_DIR/<command>.csv)");
    app.add_option("--threads", common.threads, "Worker threads (0 = hardware concurrency)");
    app.add_option("--graph", graph, "Edge-list file or built-in: line:N, complete:N, five-node, pair");

    std::vector<Command> cmds;
    add_zeno_onset(app, common, cmds);
    add_drive_sweep(app, common, cmds);
    add_constraint_sweep(app, common, cmds, graph);
    add_anneal(app, common, cmds, graph);
    add_wmis(app, common, cmds, graph);
    add_qubo(app, common, cmds, graph);
    add_mitigate(app, common, cmds, graph);
    add_timebin(app, common, cmds, graph);
    add_oracle_check(app, common, cmds);
    for (auto& c : cmds) c.app->fallthrough()->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    for (auto& c : cmds) {
        if (!c.app->parsed()) continue;
        std::string cfg = config_line(*c.app);
        if (!graph.empty()) cfg += "; graph=" + graph;
        try {
            auto file = open_output(common, c.default_file);
            std::ostringstream buffer;
            c.run(buffer, cfg);
            (file ? *file : std::cout) << buffer.str();
        } catch (const GuardViolation& e) {
            std::cerr << c.app->get_name() << ": numerical guard: " << e.what() << '\n';
            return kExitGuard;
        } catch (const NumericalError& e) {
            std::cerr << c.app->get_name() << ": numerical guard: " << e.what() << '\n';
            return kExitGuard;
        } catch (const std::domain_error& e) {
            std::cerr << c.app->get_name() << ": numerical guard: " << e.what() << '\n';
            return kExitGuard;
        } catch (const std::exception& e) {
            std::cerr << c.app->get_name() << ": configuration error: " << e.what() << '\n';
            return kExitConfig;
        }
    }
    return 0;
}
