#include "evtspd/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "evtspd/insertion.hpp"

namespace evtspd {

namespace {

// structural/energy feasibility of a possibly partial solution
bool eval_ok(const Solution& sol, const AugmentedNetwork& net, const Instance& inst,
             const ChargingModel& model, const VariantFlags& flags) {
    return evaluate(sol, net, inst, model, flags).ok();
}

double cost_of(const Solution& sol, const AugmentedNetwork& net, const Instance& inst,
               const ChargingModel& model, const VariantFlags& flags) {
    EvalResult res = evaluate(sol, net, inst, model, flags);
    if (!res.ok()) return std::numeric_limits<double>::infinity();
    return res.timeline.completion;
}

// drop stations whose removal keeps the solution feasible (cost can only
// shrink: shorter route, weakly less charging)
void prune_stations(Solution& sol, const AugmentedNetwork& net, const Instance& inst,
                    const ChargingModel& model, const VariantFlags& flags) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t p = 1; p + 1 < sol.ev_route.size(); ++p) {
            int v = sol.ev_route[p];
            if (!net.is_station(v)) continue;
            bool in_sortie = false;
            for (const auto& s : sol.sorties)
                if (s.launch == v || s.retrieve == v) in_sortie = true;
            if (in_sortie) continue;
            Solution trial = sol;
            trial.ev_route.erase(trial.ev_route.begin() + p);
            if (eval_ok(trial, net, inst, model, flags)) {
                sol = std::move(trial);
                changed = true;
                break;
            }
        }
    }
}

} // namespace

std::optional<Solution> insert_customer_least_cost(const Solution& sol, int customer,
                                                   const AugmentedNetwork& net, const Instance& inst,
                                                   const ChargingModel& model,
                                                   const VariantFlags& flags) {
    std::optional<Solution> best;
    double best_cost = std::numeric_limits<double>::infinity();
    bool direct_found = false;
    for (std::size_t q = 1; q < sol.ev_route.size(); ++q) {
        Solution trial = sol;
        trial.ev_route.insert(trial.ev_route.begin() + q, customer);
        EvalResult res = evaluate(trial, net, inst, model, flags);
        if (res.ok()) {
            if (res.timeline.completion < best_cost) {
                best_cost = res.timeline.completion;
                best = std::move(trial);
            }
            direct_found = true;
        }
    }
    if (direct_found) return best;

    // no plain position works: restore energy feasibility with stations
    for (std::size_t q = 1; q < sol.ev_route.size(); ++q) {
        Solution trial = sol;
        trial.ev_route.insert(trial.ev_route.begin() + q, customer);
        auto restored = restore_feasibility_g(trial, net, inst, model, flags);
        if (!restored) continue;
        double c = cost_of(*restored, net, inst, model, flags);
        if (c < best_cost) {
            best_cost = c;
            best = std::move(restored);
        }
    }
    return best;
}

Solution mcws_initial(const AugmentedNetwork& net, const Instance& inst,
                      const ChargingModel& model, const VariantFlags& flags) {
    int depot = net.depot_start(), end = net.depot_end();

    auto tour_cost = [&](const Solution& s) { return cost_of(s, net, inst, model, flags); };

    // step 1-3: back-and-forth tours, station-fixed where needed
    std::vector<Solution> tours;
    for (int c = 1; c <= net.n_customers; ++c) {
        Solution t;
        t.ev_route = {depot, c, end};
        if (!eval_ok(t, net, inst, model, flags)) {
            // least-cost single station insertion over both arcs
            std::optional<Solution> fixed;
            double best = std::numeric_limits<double>::infinity();
            for (int v = 0; v < net.size(); ++v) {
                if (!net.is_station(v)) continue;
                for (int arc = 0; arc < 2; ++arc) {
                    Solution trial = t;
                    trial.ev_route.insert(trial.ev_route.begin() + 1 + arc, v);
                    EvalResult res = evaluate(trial, net, inst, model, flags);
                    if (res.ok() && res.timeline.completion < best) {
                        best = res.timeline.completion;
                        fixed = std::move(trial);
                    }
                }
            }
            if (!fixed) {
                auto restored = restore_feasibility_g(t, net, inst, model, flags);
                if (!restored)
                    throw ConstructionFailure("customer unreachable even via stations");
                fixed = std::move(restored);
            }
            t = std::move(*fixed);
        }
        tours.push_back(std::move(t));
    }

    // merged tour: interior of a, then interior of b; duplicate station
    // copies are remapped to unused copies of the same parent
    auto merge = [&](const Solution& a, const Solution& b) -> std::optional<Solution> {
        Solution m;
        m.ev_route.push_back(depot);
        m.ev_route.insert(m.ev_route.end(), a.ev_route.begin() + 1, a.ev_route.end() - 1);
        std::vector<int> used = m.ev_route;
        for (std::size_t i = 1; i + 1 < b.ev_route.size(); ++i) {
            int v = b.ev_route[i];
            if (net.is_station(v) && std::count(used.begin(), used.end(), v)) {
                int parent = net.nodes[v].parent_station;
                int remap = -1;
                for (int w = 0; w < net.size(); ++w)
                    if (net.is_station(w) && net.nodes[w].parent_station == parent &&
                        !std::count(used.begin(), used.end(), w)) {
                        remap = w;
                        break;
                    }
                if (remap < 0) return std::nullopt;
                v = remap;
            }
            m.ev_route.push_back(v);
            used.push_back(v);
        }
        m.ev_route.push_back(end);
        if (!eval_ok(m, net, inst, model, flags)) {
            auto restored = restore_feasibility_g(m, net, inst, model, flags);
            if (!restored) return std::nullopt;
            m = std::move(*restored);
        }
        prune_stations(m, net, inst, model, flags);
        return m;
    };

    // steps 4-5: merge by decreasing savings until a single tour remains
    while (tours.size() > 1) {
        struct Pair {
            std::size_t a, b;
            double saving;
        };
        std::vector<Pair> spl;
        for (std::size_t i = 0; i < tours.size(); ++i)
            for (std::size_t j = 0; j < tours.size(); ++j) {
                if (i == j) continue;
                spl.push_back({i, j, 0.0});
            }
        std::vector<double> costs(tours.size());
        for (std::size_t i = 0; i < tours.size(); ++i) costs[i] = tour_cost(tours[i]);
        for (auto& p : spl) {
            // endpoint-distance savings estimate orders the list; the merge
            // itself is validated with the exact evaluator
            int tail = tours[p.a].ev_route[tours[p.a].ev_route.size() - 2];
            int head = tours[p.b].ev_route[1];
            p.saving = net.ev_time[tail][end] + net.ev_time[depot][head] - net.ev_time[tail][head];
        }
        std::stable_sort(spl.begin(), spl.end(),
                         [](const Pair& x, const Pair& y) { return x.saving > y.saving; });

        bool merged_any = false;
        for (const auto& p : spl) {
            auto m = merge(tours[p.a], tours[p.b]);
            if (!m) continue;
            std::size_t hi = std::max(p.a, p.b), lo = std::min(p.a, p.b);
            tours.erase(tours.begin() + hi);
            tours.erase(tours.begin() + lo);
            tours.push_back(std::move(*m));
            merged_any = true;
            break;
        }
        if (!merged_any)
            throw ConstructionFailure("tours cannot be merged into one feasible route");
    }

    Solution out = std::move(tours.front());
    prune_stations(out, net, inst, model, flags);
    return out;
}

int max_removal(const Solution& sol, const AugmentedNetwork& net) {
    int removable = static_cast<int>(sol.sorties.size());
    for (int v : sol.ev_route)
        if (net.is_customer(v)) ++removable;
    if (removable == 0) return 0;
    int n = static_cast<int>(sol.ev_route.size());
    int d = static_cast<int>(sol.sorties.size());
    int x = (n - 1 - d) / 2;
    return std::clamp(x, 1, removable);
}

namespace {

struct RemovalPool {
    std::vector<int> customers; // removable customer node indices
};

RemovalPool removal_pool(const Solution& sol, const AugmentedNetwork& net) {
    RemovalPool pool;
    for (int v : sol.ev_route)
        if (net.is_customer(v)) pool.customers.push_back(v);
    for (const auto& s : sol.sorties) pool.customers.push_back(s.customer);
    return pool;
}

// remove one customer from the working solution, dissolving coupled
// sorties; returns the extra drone customers that joined P
std::vector<int> remove_customer(Solution& sol, int customer) {
    std::vector<int> extra;
    auto it = std::find(sol.ev_route.begin(), sol.ev_route.end(), customer);
    if (it != sol.ev_route.end()) {
        sol.ev_route.erase(it);
        for (auto s = sol.sorties.begin(); s != sol.sorties.end();) {
            if (s->launch == customer || s->retrieve == customer) {
                extra.push_back(s->customer);
                s = sol.sorties.erase(s);
            } else {
                ++s;
            }
        }
    } else {
        for (auto s = sol.sorties.begin(); s != sol.sorties.end();) {
            if (s->customer == customer)
                s = sol.sorties.erase(s);
            else
                ++s;
        }
    }
    return extra;
}

DestroyResult destroy_common(const Solution& sol, const AugmentedNetwork& net, int beta, Rng& rng,
                             bool cluster) {
    auto pool = removal_pool(sol, net).customers;
    if (beta < 1 || beta > static_cast<int>(pool.size()))
        throw std::invalid_argument("beta out of range for this solution");

    DestroyResult out;
    out.partial = sol;
    int prev = -1;
    for (int picked = 0; picked < beta && !pool.empty(); ++picked) {
        std::size_t idx;
        if (!cluster || prev < 0) {
            idx = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1));
        } else {
            // nearest remaining customer to the previous pick
            idx = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < pool.size(); ++i) {
                double dx = net.nodes[pool[i]].x - net.nodes[prev].x;
                double dy = net.nodes[pool[i]].y - net.nodes[prev].y;
                double d = std::hypot(dx, dy);
                if (d < best) {
                    best = d;
                    idx = i;
                }
            }
        }
        int victim = pool[idx];
        pool.erase(pool.begin() + idx);
        out.removed.push_back(victim);
        prev = victim;
        for (int extra : remove_customer(out.partial, victim)) {
            out.removed.push_back(extra);
            pool.erase(std::remove(pool.begin(), pool.end(), extra), pool.end());
        }
    }
    return out;
}

} // namespace

DestroyResult destroy_random(const Solution& sol, const AugmentedNetwork& net, int beta, Rng& rng) {
    return destroy_common(sol, net, beta, rng, false);
}

DestroyResult destroy_cluster(const Solution& sol, const AugmentedNetwork& net, int beta, Rng& rng) {
    return destroy_common(sol, net, beta, rng, true);
}

namespace {

bool node_in_sortie_role(const Solution& sol, int v) {
    for (const auto& s : sol.sorties)
        if (s.launch == v || s.retrieve == v) return true;
    return false;
}

// greedy phase 2: convert route customers to zero-intermediate sorties
void greedy_sortie_pass(Solution& sol, const AugmentedNetwork& net, const Instance& inst,
                        const ChargingModel& model, const VariantFlags& flags) {
    std::size_t p = 1;
    while (p + 1 < sol.ev_route.size()) {
        int v = sol.ev_route[p];
        if (net.is_customer(v) && net.nodes[v].drone_eligible && !node_in_sortie_role(sol, v)) {
            int i = sol.ev_route[p - 1], k = sol.ev_route[p + 1];
            if (!node_in_sortie_role(sol, i) && !node_in_sortie_role(sol, k) &&
                net.sortie_in_d(i, v, k)) {
                Solution trial = sol;
                trial.ev_route.erase(trial.ev_route.begin() + p);
                trial.sorties.push_back({i, v, k});
                if (eval_ok(trial, net, inst, model, flags)) {
                    sol = std::move(trial);
                    continue; // same position now holds the retrieve node
                }
            }
        }
        ++p;
    }
}

std::optional<Solution> phase1_insert_all(Solution sol, std::vector<int> removed,
                                          const AugmentedNetwork& net, const Instance& inst,
                                          const ChargingModel& model, const VariantFlags& flags,
                                          bool nearest_position) {
    for (int c : removed) {
        if (!nearest_position) {
            auto next = insert_customer_least_cost(sol, c, net, inst, model, flags);
            if (!next) return std::nullopt;
            sol = std::move(*next);
            continue;
        }
        // nearby phase 1: before the closest customer node on the route
        std::size_t at = sol.ev_route.size() - 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 1; p + 1 < sol.ev_route.size(); ++p) {
            int v = sol.ev_route[p];
            if (!net.is_customer(v)) continue;
            double d = std::hypot(net.nodes[v].x - net.nodes[c].x, net.nodes[v].y - net.nodes[c].y);
            if (d < best) {
                best = d;
                at = p;
            }
        }
        Solution trial = sol;
        trial.ev_route.insert(trial.ev_route.begin() + at, c);
        if (!eval_ok(trial, net, inst, model, flags)) {
            auto restored = restore_feasibility_g(trial, net, inst, model, flags);
            if (!restored) {
                // fall back to the cheapest feasible position
                auto next = insert_customer_least_cost(sol, c, net, inst, model, flags);
                if (!next) return std::nullopt;
                sol = std::move(*next);
                continue;
            }
            trial = std::move(*restored);
        }
        sol = std::move(trial);
    }
    return sol;
}

} // namespace

std::optional<Solution> repair_greedy(const Solution& partial, const std::vector<int>& removed,
                                      const AugmentedNetwork& net, const Instance& inst,
                                      const ChargingModel& model, const VariantFlags& flags) {
    auto sol = phase1_insert_all(partial, removed, net, inst, model, flags, false);
    if (!sol) return std::nullopt;
    prune_stations(*sol, net, inst, model, flags);
    greedy_sortie_pass(*sol, net, inst, model, flags);
    if (!check_feasible(*sol, net, inst, model, flags).ok()) return std::nullopt;
    return sol;
}

std::optional<Solution> repair_nearby(const Solution& partial, const std::vector<int>& removed,
                                      const AugmentedNetwork& net, const Instance& inst,
                                      const ChargingModel& model, const VariantFlags& flags) {
    auto sol_opt = phase1_insert_all(partial, removed, net, inst, model, flags, true);
    if (!sol_opt) return std::nullopt;
    Solution sol = std::move(*sol_opt);
    prune_stations(sol, net, inst, model, flags);

    double cur_cost = cost_of(sol, net, inst, model, flags);
    if (!std::isfinite(cur_cost)) return std::nullopt;

    // segment improvement: best positive-saving sortie, repeated
    while (true) {
        std::vector<int> pos(net.size(), -1);
        for (std::size_t p = 0; p < sol.ev_route.size(); ++p) pos[sol.ev_route[p]] = static_cast<int>(p);
        int len = static_cast<int>(sol.ev_route.size());

        // positions covered by an active sortie (drone off-board)
        std::vector<char> busy(len, 0);
        for (const auto& s : sol.sorties)
            for (int p = pos[s.launch]; p <= pos[s.retrieve]; ++p) busy[p] = 1;

        double best_saving = 1e-9;
        std::optional<Solution> best;
        for (int l = 0; l + 2 < len; ++l) {
            if (busy[l]) continue;
            for (int jp = l + 1; jp + 1 < len; ++jp)
                for (int r = jp + 1; r < len; ++r) {
                    bool blocked = false;
                    for (int p = l; p <= r; ++p)
                        if (busy[p]) blocked = true;
                    if (blocked) continue;
                    int j = sol.ev_route[jp];
                    if (!net.is_customer(j) || !net.nodes[j].drone_eligible) continue;
                    int i = sol.ev_route[l], k = sol.ev_route[r];
                    if (node_in_sortie_role(sol, i) || node_in_sortie_role(sol, k)) continue;
                    if (!net.sortie_in_d(i, j, k)) continue;
                    Solution trial = sol;
                    trial.ev_route.erase(trial.ev_route.begin() + jp);
                    trial.sorties.push_back({i, j, k});
                    EvalResult res = evaluate(trial, net, inst, model, flags);
                    if (!res.ok()) continue;
                    double saving = cur_cost - res.timeline.completion;
                    if (saving > best_saving) { // ties: lowest l, then lowest r
                        best_saving = saving;
                        best = std::move(trial);
                    }
                }
        }
        if (!best) break;
        sol = std::move(*best);
        cur_cost -= best_saving;
        cur_cost = cost_of(sol, net, inst, model, flags);
    }
    if (!check_feasible(sol, net, inst, model, flags).ok()) return std::nullopt;
    return sol;
}

std::size_t select_operator(const std::vector<OperatorBank::Entry>& bank, Rng& rng) {
    double total = 0.0;
    for (const auto& e : bank) total += e.score;
    double draw = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        acc += bank[i].score;
        if (draw < acc) return i;
    }
    return bank.size() - 1;
}

void update_score(OperatorBank::Entry& entry, const OperatorBank& bank,
                  IterationOutcome outcome, double iter_time_s) {
    double lambda = outcome == IterationOutcome::GlobalBest ? bank.lambda1
                    : outcome == IterationOutcome::Feasible ? bank.lambda2
                                                            : bank.lambda3;
    double tau = iter_time_s > 1.0 ? bank.tau1 : bank.tau2;
    entry.score = bank.rho * entry.score + (lambda / tau) * (1.0 - bank.rho);
}

bool accept(double current_cost, double candidate_cost, double temperature, Rng& rng) {
    if (candidate_cost < current_cost) return true;
    return rng.uniform() < std::exp((current_cost - candidate_cost) / temperature);
}

double temperature(double t0, double elapsed, double limit) {
    return t0 * (1.0 - elapsed / limit);
}

std::string RunReport::trace_csv(const OperatorBank& bank) const {
    std::ostringstream ss;
    ss << "iteration,elapsed_s,T,operator_d,operator_r,candidate_cost,accepted,best_cost\n";
    for (const auto& r : trace)
        ss << r.iter << ',' << r.elapsed_s << ',' << r.temperature << ','
           << bank.destroys[r.destroy_op].name << ',' << bank.repairs[r.repair_op].name << ','
           << r.candidate_cost << ',' << (r.accepted ? 1 : 0) << ',' << r.best_cost << '\n';
    return ss.str();
}

std::pair<Solution, RunReport> alns_search(const AugmentedNetwork& net, const Instance& inst,
                                           const ChargingModel& model, const SearchConfig& config,
                                           const VariantFlags& flags) {
    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    auto elapsed_s = [&] {
        return std::chrono::duration<double>(clock::now() - start).count();
    };

    Rng rng(config.seed);
    OperatorBank bank;
    RunReport report;
    report.destroy_usage.assign(bank.destroys.size(), 0);
    report.repair_usage.assign(bank.repairs.size(), 0);

    Solution current = mcws_initial(net, inst, model, flags);
    double cur_cost = cost_of(current, net, inst, model, flags);
    Solution best = current;
    double best_cost = cur_cost;
    report.initial_cost = cur_cost;

    int no_impro = 0;
    long iter = 0;
    while (true) {
        double frac = config.iter_limit ? static_cast<double>(iter) / *config.iter_limit
                                        : elapsed_s() / config.time_limit_s;
        if (frac >= 1.0) break;
        double temp = temperature(config.t0, frac, 1.0);
        if (temp < config.t_min) break;
        ++iter;

        auto iter_start = clock::now();
        std::size_t d_op = select_operator(bank.destroys, rng);
        std::size_t r_op = select_operator(bank.repairs, rng);
        ++report.destroy_usage[d_op];
        ++report.repair_usage[r_op];

        std::optional<Solution> candidate;
        int beta_max = max_removal(current, net);
        if (beta_max >= 1) {
            int beta = rng.uniform_int(1, beta_max);
            DestroyResult destroyed = d_op == 0 ? destroy_random(current, net, beta, rng)
                                                : destroy_cluster(current, net, beta, rng);
            if (r_op == 0)
                candidate = repair_greedy(destroyed.partial, destroyed.removed, net, inst, model, flags);
            else if (r_op == 1)
                candidate = repair_nearby(destroyed.partial, destroyed.removed, net, inst, model, flags);
            else
                candidate = repair_cp(destroyed.partial, destroyed.removed, net, inst, model, rng, flags);
        }

        double cand_cost = candidate ? cost_of(*candidate, net, inst, model, flags)
                                     : std::numeric_limits<double>::infinity();
        if (candidate && !std::isfinite(cand_cost)) candidate.reset();

        bool accepted = false;
        IterationOutcome outcome = IterationOutcome::Failed;
        if (candidate) {
            outcome = cand_cost < best_cost ? IterationOutcome::GlobalBest : IterationOutcome::Feasible;
            if (accept(cur_cost, cand_cost, temp, rng)) {
                current = *candidate;
                cur_cost = cand_cost;
                accepted = true;
            }
            if (cand_cost < best_cost) {
                best = *candidate;
                best_cost = cand_cost;
                no_impro = 0;
            } else if (++no_impro > config.no_impro_max) {
                current = best;
                cur_cost = best_cost;
                no_impro = 0;
            }
        } else if (++no_impro > config.no_impro_max) {
            current = best;
            cur_cost = best_cost;
            no_impro = 0;
        }

        // deterministic tau classification under an iteration budget
        double iter_time = config.iter_limit
                               ? 0.0
                               : std::chrono::duration<double>(clock::now() - iter_start).count();
        update_score(bank.destroys[d_op], bank, outcome, iter_time);
        update_score(bank.repairs[r_op], bank, outcome, iter_time);

        if (config.record_trace)
            report.trace.push_back({iter, elapsed_s(), temp, static_cast<int>(d_op),
                                    static_cast<int>(r_op),
                                    candidate ? cand_cost : -1.0, accepted, best_cost});
    }
    report.iterations = iter;
    report.best_cost = best_cost;
    return {std::move(best), std::move(report)};
}

} // namespace evtspd
