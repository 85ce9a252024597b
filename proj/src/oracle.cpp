#include "evtspd/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace evtspd {

namespace {

using clock_t_ = std::chrono::steady_clock;

struct Search {
    const Instance& inst;
    const AugmentedNetwork& net;
    const ChargingModel& model;
    const VariantFlags& flags;
    const OracleLimits& limits;

    Search(const Instance& i, const AugmentedNetwork& n, const ChargingModel& m,
           const VariantFlags& f, const OracleLimits& l)
        : inst(i), net(n), model(m), flags(f), limits(l), qt(i.params.qt_s) {}

    double qt = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
    Solution best;
    long evals = 0;
    clock_t_::time_point start = clock_t_::now();
    long tick = 0;

    std::vector<int> route;        // under construction
    std::vector<int> drone_set;    // customers served by drone this round
    std::vector<Sortie> assigned;  // sortie assignment under construction

    void check_clock() {
        if ((++tick & 0x3ff) != 0) return;
        double el = std::chrono::duration<double>(clock_t_::now() - start).count();
        if (el > limits.time_budget_s)
            throw OracleTimeout("oracle time budget exceeded", best_cost);
    }

    // every structure is priced exactly by the evaluator
    void score() {
        ++evals;
        Solution sol;
        sol.ev_route = route;
        sol.sorties = assigned;
        EvalResult res = evaluate(sol, net, inst, model, flags);
        if (res.ok() && res.timeline.completion < best_cost) {
            best_cost = res.timeline.completion;
            best = std::move(sol);
        }
    }

    void assign_sorties(std::size_t di, const std::vector<char>& role_used) {
        check_clock();
        if (di == drone_set.size()) {
            score();
            return;
        }
        int j = drone_set[di];
        int len = static_cast<int>(route.size());
        for (int l = 0; l + 1 < len; ++l) {
            if (role_used[l]) continue;
            for (int r = l + 1; r < len; ++r) {
                if (role_used[r]) continue;
                if (!net.sortie_in_d(route[l], j, route[r])) continue;
                bool overlap = false; // disjoint intervals, endpoints included
                for (const auto& s : assigned) {
                    int sl = 0, sr = 0;
                    for (int p = 0; p < len; ++p) {
                        if (route[p] == s.launch) sl = p;
                        if (route[p] == s.retrieve) sr = p;
                    }
                    if (l <= sr && sl <= r) overlap = true;
                }
                if (overlap) continue;
                auto used = role_used;
                used[l] = used[r] = 1;
                assigned.push_back({route[l], j, route[r]});
                assign_sorties(di + 1, used);
                assigned.pop_back();
            }
        }
    }

    void extend(std::vector<int>& remaining, int stations_used, int consec_stations,
                std::vector<char>& copy_used, double elapsed, double energy_since) {
        check_clock();
        int last = route.back();

        // admissible bound: each remaining customer must still be reached
        // and the route must return to the depot
        double lb = net.ev_time[last][net.depot_end()];
        for (int r : remaining)
            lb = std::max(lb, net.ev_time[last][r] + net.ev_time[r][net.depot_end()]);
        if (elapsed + lb >= best_cost) return;

        if (remaining.empty()) {
            double e = net.ev_energy[last][net.depot_end()] / qt;
            if (energy_since + e <= 1.0 + 1e-12) {
                route.push_back(net.depot_end());
                assigned.clear();
                assign_sorties(0, std::vector<char>(route.size(), 0));
                route.pop_back();
            }
            // fall through: a station stop before the depot may still be
            // required for a sortie drain, handled by the station branch
        }

        for (std::size_t idx = 0; idx < remaining.size(); ++idx) {
            int c = remaining[idx];
            double e = net.ev_energy[last][c] / qt;
            if (energy_since + e > 1.0 + 1e-12) continue; // truck-only relaxation
            int saved = remaining[idx];
            remaining.erase(remaining.begin() + idx);
            route.push_back(c);
            extend(remaining, stations_used, 0, copy_used,
                   elapsed + net.ev_time[last][c] + net.nodes[c].service_time_s,
                   energy_since + e);
            route.pop_back();
            remaining.insert(remaining.begin() + idx, saved);
        }

        if (stations_used < limits.max_station_visits &&
            consec_stations < limits.max_stations_per_leg) {
            for (int w = 0; w < net.size(); ++w) {
                if (!net.is_station(w) || copy_used[w]) continue;
                double e = net.ev_energy[last][w] / qt;
                if (energy_since + e > 1.0 + 1e-12) continue;
                copy_used[w] = 1;
                route.push_back(w);
                extend(remaining, stations_used + 1, consec_stations + 1, copy_used,
                       elapsed + net.ev_time[last][w], 0.0);
                route.pop_back();
                copy_used[w] = 0;
            }
        }
    }
};

} // namespace

OracleResult solve_exact(const Instance& inst, const AugmentedNetwork& net,
                         const ChargingModel& model, const VariantFlags& flags,
                         const OracleLimits& limits) {
    if (limits.max_customers <= 0 || limits.max_station_visits < 0 || limits.time_budget_s <= 0)
        throw std::invalid_argument("oracle limits must be positive");
    int c = net.n_customers;
    if (c > limits.max_customers)
        throw std::invalid_argument("instance exceeds the oracle customer limit");

    Search s(inst, net, model, flags, limits);

    // which customers can fly at all
    std::vector<char> has_sortie(net.size(), 0);
    for (const auto& so : net.sorties) has_sortie[so.customer] = 1;

    for (unsigned mask = 0; mask < (1u << c); ++mask) {
        bool ok = true;
        s.drone_set.clear();
        std::vector<int> remaining;
        for (int j = 1; j <= c; ++j) {
            if (mask & (1u << (j - 1))) {
                if (!has_sortie[j]) {
                    ok = false;
                    break;
                }
                s.drone_set.push_back(j);
            } else {
                remaining.push_back(j);
            }
        }
        if (!ok) continue;
        s.route.assign(1, net.depot_start());
        std::vector<char> copy_used(net.size(), 0);
        s.extend(remaining, 0, 0, copy_used, 0.0, 0.0);
    }

    if (!std::isfinite(s.best_cost))
        throw std::runtime_error("oracle found no feasible solution");
    return {std::move(s.best), s.best_cost, s.evals};
}

} // namespace evtspd
