// Batch front door: instance generation, ALNS / exact solving, LP export
// and the R-sensitivity sweep, all reporting CSV.
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "evtspd/charging.hpp"
#include "evtspd/heuristics.hpp"
#include "evtspd/instance.hpp"
#include "evtspd/milp.hpp"
#include "evtspd/network.hpp"
#include "evtspd/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evtspd;

namespace {

int thread_cap() {
    if (const char* env = std::getenv("EVTSPD_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// run fn(i) for i in [0, count) on up to thread_cap() workers
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    int workers = std::min<std::size_t>(thread_cap(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct CommonOpts {
    std::string variant = "pl";
    int segments = 6;
    int maxleg = -1;
    bool lrt = false;
    bool range = false;
    int m_copies = -1; // -1: use the instance's own value
    std::string out = ".";
};

void add_variant_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--variant", o.variant, "charging variant")
        ->check(CLI::IsMember({"pl", "pp"}));
    cmd->add_option("--segments", o.segments, "secant segments for pp");
    cmd->add_option("--maxleg", o.maxleg, "max customers per truck leg");
    cmd->add_flag("--lrt", o.lrt, "launch/retrieve preparation times");
    cmd->add_flag("--range", o.range, "payload-dependent drone range");
    cmd->add_option("--m-copies", o.m_copies, "station copies in the network");
    cmd->add_option("--out", o.out, "output directory");
}

struct Prepared {
    Instance inst;
    AugmentedNetwork net;
    ChargingModel model;
    VariantFlags flags;
    Variant variant;
    int segments;
};

Prepared prepare(const std::string& path, const CommonOpts& o) {
    Prepared p;
    p.inst = Instance::load(path);
    if (o.range && !p.inst.weight_range_fn)
        p.inst.weight_range_fn = default_weight_range_fn(p.inst.params.qd_s);
    int m = o.m_copies > 0 ? o.m_copies : p.inst.params.m_copies;
    p.net = build_augmented_network(p.inst, m);
    compute_sortie_set(p.net, p.inst);
    p.segments = o.variant == "pl" ? 1 : o.segments;
    p.variant = o.variant == "pl" ? Variant::PL : Variant::PP;
    p.model = build_approximation(ChargeCurve::builtin(), p.segments);
    if (o.maxleg >= 0) p.flags.max_leg = o.maxleg;
    p.flags.lrt = o.lrt;
    return p;
}

void write_manifest(const std::string& dir, const std::string& command,
                    const std::vector<std::string>& paths, const json& options) {
    json m;
    m["command"] = command;
    m["instances"] = paths;
    m["options"] = options;
    std::ofstream(fs::path(dir) / "manifest.json") << m.dump(2) << '\n';
}

std::string csv_quote(const std::string& s) { return s; } // paths carry no commas here

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV-and-drone routing toolkit"};
    app.require_subcommand(1);

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "write random instances");
    int g_customers = 0, g_stations = 2, g_count = 1;
    std::uint64_t g_seed = 1;
    CommonOpts g_opts;
    gen->add_option("--customers", g_customers, "customers per instance")->required();
    gen->add_option("--stations", g_stations, "charging stations");
    gen->add_option("--count", g_count, "number of instances");
    gen->add_option("--seed", g_seed, "base seed");
    gen->add_option("--m-copies", g_opts.m_copies, "station copies stored in params");
    gen->add_option("--out", g_opts.out, "output directory");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "run the search on instances");
    std::vector<std::string> s_paths;
    double s_time = 5.0;
    long s_iters = -1;
    std::uint64_t s_seed = 1;
    bool s_oracle = false;
    CommonOpts s_opts;
    solve->add_option("instances", s_paths, "instance files")->required();
    solve->add_option("--time", s_time, "wall-clock budget per instance, seconds");
    solve->add_option("--iters", s_iters, "iteration budget (deterministic mode)");
    solve->add_option("--seed", s_seed, "search seed");
    solve->add_flag("--oracle", s_oracle, "also solve exactly and report the gap");
    add_variant_flags(solve, s_opts);

    // ---- export ----
    auto* exp = app.add_subcommand("export", "write LP models and audits");
    std::vector<std::string> e_paths;
    CommonOpts e_opts;
    exp->add_option("instances", e_paths, "instance files")->required();
    add_variant_flags(exp, e_opts);

    // ---- experiment-r ----
    auto* expr = app.add_subcommand("experiment-r", "segment-count sensitivity sweep");
    std::vector<std::string> r_paths;
    double r_time = 5.0;
    long r_iters = -1;
    std::uint64_t r_seed = 1;
    CommonOpts r_opts;
    expr->add_option("instances", r_paths, "instance files")->required();
    expr->add_option("--time", r_time, "wall-clock budget per run, seconds");
    expr->add_option("--iters", r_iters, "iteration budget (deterministic mode)");
    expr->add_option("--seed", r_seed, "search seed");
    add_variant_flags(expr, r_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            if (g_customers < 1) throw CLI::ValidationError("--customers must be at least 1");
            fs::create_directories(g_opts.out);
            std::vector<std::string> written;
            for (int i = 0; i < g_count; ++i) {
                InstanceParams params;
                if (g_opts.m_copies > 0) params.m_copies = g_opts.m_copies;
                Instance inst = generate_instance(g_seed + i, g_customers, g_stations, params);
                std::ostringstream name;
                name << "inst_c" << g_customers << "_s" << g_stations << "_seed" << (g_seed + i)
                     << ".json";
                std::string path = (fs::path(g_opts.out) / name.str()).string();
                inst.save(path);
                written.push_back(path);
            }
            write_manifest(g_opts.out, "generate", written,
                           {{"customers", g_customers},
                            {"stations", g_stations},
                            {"count", g_count},
                            {"seed", g_seed}});
            std::cout << written.size() << " instance(s) written to " << g_opts.out << "\n";
            return 0;
        }

        if (*solve) {
            fs::create_directories(s_opts.out);
            struct RowOut {
                std::string line;
                bool ok = false;
            };
            std::vector<RowOut> rows(s_paths.size());
            parallel_for(s_paths.size(), [&](std::size_t i) {
                std::ostringstream row;
                try {
                    Prepared p = prepare(s_paths[i], s_opts);
                    SearchConfig cfg;
                    cfg.seed = s_seed;
                    cfg.time_limit_s = s_time;
                    if (s_iters > 0) cfg.iter_limit = s_iters;
                    auto t0 = std::chrono::steady_clock::now();
                    auto [sol, rep] = alns_search(p.net, p.inst, p.model, cfg, p.flags);
                    double rt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                    .count();
                    row << csv_quote(s_paths[i]) << ',' << s_seed << ',' << s_opts.variant << ','
                        << p.segments << ',' << rep.initial_cost << ',' << rep.best_cost << ','
                        << rep.iterations << ',' << rt;
                    for (long u : rep.destroy_usage) row << ',' << u;
                    for (long u : rep.repair_usage) row << ',' << u;
                    if (s_oracle) {
                        OracleResult o = solve_exact(p.inst, p.net, p.model, p.flags);
                        double gap = (rep.best_cost - o.cost) / o.cost * 100.0;
                        row << ',' << o.cost << ',' << gap;
                    }
                    rows[i] = {row.str(), true};
                } catch (const std::exception& e) {
                    rows[i] = {csv_quote(s_paths[i]) + ",error: " + e.what(), false};
                }
            });
            std::ofstream csv(fs::path(s_opts.out) / "results.csv");
            csv << "instance,seed,variant,segments,initial_cost,best_cost,iterations,runtime_s,"
                   "destroy_random,destroy_cluster,repair_greedy,repair_nearby,repair_cp";
            if (s_oracle) csv << ",oracle_cost,gap_pct";
            csv << '\n';
            bool all_ok = true;
            for (const auto& r : rows) {
                csv << r.line << '\n';
                all_ok = all_ok && r.ok;
                if (!r.ok) std::cerr << r.line << '\n';
            }
            write_manifest(s_opts.out, "solve", s_paths,
                           {{"seed", s_seed},
                            {"time", s_time},
                            {"iters", s_iters},
                            {"variant", s_opts.variant},
                            {"oracle", s_oracle}});
            std::cout << "results.csv written to " << s_opts.out << "\n";
            return all_ok ? 0 : 1;
        }

        if (*exp) {
            fs::create_directories(e_opts.out);
            std::vector<int> status(e_paths.size(), 0);
            parallel_for(e_paths.size(), [&](std::size_t i) {
                try {
                    Prepared p = prepare(e_paths[i], e_opts);
                    ModelSpec spec = build_model(p.net, p.inst, p.model, p.variant, p.flags);
                    std::string stem = fs::path(e_paths[i]).stem().string() + "_" + e_opts.variant;
                    write_lp(spec, (fs::path(e_opts.out) / (stem + ".lp")).string());
                    std::ofstream(fs::path(e_opts.out) / (stem + "_audit.json"))
                        << spec.audit().dump(2) << '\n';
                    status[i] = 1;
                } catch (const std::exception& e) {
                    std::cerr << e_paths[i] << ": " << e.what() << '\n';
                }
            });
            write_manifest(e_opts.out, "export", e_paths,
                           {{"variant", e_opts.variant}, {"segments", e_opts.segments}});
            bool all_ok = std::all_of(status.begin(), status.end(), [](int s) { return s == 1; });
            std::cout << "LP files written to " << e_opts.out << "\n";
            return all_ok ? 0 : 1;
        }

        if (*expr) {
            fs::create_directories(r_opts.out);
            const std::vector<int> sweep = {1, 2, 4, 6};
            std::vector<std::vector<double>> cost(r_paths.size(),
                                                  std::vector<double>(sweep.size(), 0.0));
            std::vector<int> status(r_paths.size(), 0);
            parallel_for(r_paths.size(), [&](std::size_t i) {
                try {
                    for (std::size_t ri = 0; ri < sweep.size(); ++ri) {
                        CommonOpts o = r_opts;
                        o.variant = sweep[ri] == 1 ? "pl" : "pp";
                        o.segments = sweep[ri];
                        Prepared p = prepare(r_paths[i], o);
                        SearchConfig cfg;
                        cfg.seed = r_seed;
                        cfg.time_limit_s = r_time;
                        if (r_iters > 0) cfg.iter_limit = r_iters;
                        auto [sol, rep] = alns_search(p.net, p.inst, p.model, cfg, p.flags);
                        cost[i][ri] = rep.best_cost;
                    }
                    status[i] = 1;
                } catch (const std::exception& e) {
                    std::cerr << r_paths[i] << ": " << e.what() << '\n';
                }
            });
            std::ofstream csv(fs::path(r_opts.out) / "sensitivity.csv");
            csv << "instance,cost_r1,cost_r2,cost_r4,cost_r6\n";
            std::vector<double> mean(sweep.size(), 0.0);
            int n_ok = 0;
            for (std::size_t i = 0; i < r_paths.size(); ++i) {
                if (!status[i]) continue;
                ++n_ok;
                csv << csv_quote(r_paths[i]);
                for (std::size_t ri = 0; ri < sweep.size(); ++ri) {
                    csv << ',' << cost[i][ri];
                    mean[ri] += cost[i][ri];
                }
                csv << '\n';
            }
            if (n_ok > 0) {
                for (auto& m : mean) m /= n_ok;
                double gap = (mean[0] - mean.back()) / mean[0] * 100.0;
                csv << "mean";
                for (double m : mean) csv << ',' << m;
                csv << '\n';
                csv << "pl_vs_r6_gap_pct," << gap << ",,,\n";
            }
            write_manifest(r_opts.out, "experiment-r", r_paths,
                           {{"seed", r_seed}, {"time", r_time}, {"iters", r_iters}});
            std::cout << "sensitivity.csv written to " << r_opts.out << "\n";
            return n_ok == static_cast<int>(r_paths.size()) ? 0 : 1;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
