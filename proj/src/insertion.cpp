#include "evtspd/insertion.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace evtspd {

std::string InsertionProblem::candidates_csv() const {
    std::ostringstream ss;
    ss << "customer,launch_pos,retrieve_pos,duration_s,waiting_s\n";
    for (const auto& c : candidates)
        ss << c.customer << ',' << c.launch_pos << ',' << c.retrieve_pos << ','
           << c.duration_s << ',' << c.waiting_s << '\n';
    return ss.str();
}

InsertionProblem build_insertion_problem(const std::vector<int>& route,
                                         const std::vector<int>& drone_customers,
                                         const AugmentedNetwork& net, const Instance& inst,
                                         const ChargingModel& model, const VariantFlags& flags) {
    InsertionProblem prob;
    prob.route = route;
    prob.drone_customers = drone_customers;

    Solution base;
    base.ev_route = route;
    EvalResult base_res = evaluate(base, net, inst, model, flags);
    if (!base_res.ok()) throw InfeasibleSubproblem("base truck route is infeasible");
    double base_cost = base_res.timeline.completion;
    for (int v : route) prob.truck_arrival.push_back(base_res.timeline.t_arrive[v]);

    int len = static_cast<int>(route.size());
    for (int j : drone_customers) {
        bool any = false;
        for (int l = 0; l + 1 < len; ++l)
            for (int r = l + 1; r < len; ++r) {
                int i = route[l], k = route[r];
                if (!net.sortie_in_d(i, j, k)) continue;
                if (flags.max_leg && r - l - 1 > *flags.max_leg) continue;
                Solution trial = base;
                trial.sorties.push_back({i, j, k});
                EvalResult res = evaluate(trial, net, inst, model, flags);
                if (!res.ok()) continue;
                double fly = net.drone_time[i][j] + net.drone_time[j][k];
                prob.candidates.push_back({j, l, r, fly + net.nodes[j].service_time_s,
                                           res.timeline.completion - base_cost});
                any = true;
            }
        if (!any) throw InfeasibleSubproblem("customer has no feasible sortie on this route");
    }
    std::stable_sort(prob.candidates.begin(), prob.candidates.end(),
                     [](const SortieCandidate& a, const SortieCandidate& b) {
                         if (a.launch_pos != b.launch_pos) return a.launch_pos < b.launch_pos;
                         return a.retrieve_pos < b.retrieve_pos;
                     });
    return prob;
}

InsertionSelection solve_insertion(const InsertionProblem& problem) {
    const auto& cands = problem.candidates;
    std::vector<int> customers = problem.drone_customers;
    std::size_t m = customers.size();

    // per-customer candidate indices and minimal-waiting lower bounds
    std::vector<std::vector<std::size_t>> by_cust(m);
    std::vector<double> min_w(m, std::numeric_limits<double>::infinity());
    for (std::size_t ci = 0; ci < cands.size(); ++ci)
        for (std::size_t u = 0; u < m; ++u)
            if (cands[ci].customer == customers[u]) {
                by_cust[u].push_back(ci);
                min_w[u] = std::min(min_w[u], cands[ci].waiting_s);
            }
    std::vector<double> suffix_bound(m + 1, 0.0);
    for (std::size_t u = m; u-- > 0;) suffix_bound[u] = suffix_bound[u + 1] + min_w[u];

    double best_total = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_pick, pick;

    auto overlaps = [&](const SortieCandidate& a, const SortieCandidate& b) {
        // strict disjointness, endpoints included
        return a.launch_pos <= b.retrieve_pos && b.launch_pos <= a.retrieve_pos;
    };

    std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double acc) {
        if (acc + suffix_bound[u] >= best_total) return;
        if (u == m) {
            best_total = acc;
            best_pick = pick;
            return;
        }
        for (std::size_t ci : by_cust[u]) {
            bool ok = true;
            for (std::size_t prev : pick)
                if (overlaps(cands[ci], cands[prev])) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            pick.push_back(ci);
            dfs(u + 1, acc + cands[ci].waiting_s);
            pick.pop_back();
        }
    };
    dfs(0, 0.0);

    if (!std::isfinite(best_total) && m > 0)
        throw InfeasibleSubproblem("no non-overlapping cover of all drone customers");

    InsertionSelection sel;
    sel.total_waiting_s = m == 0 ? 0.0 : best_total;
    for (std::size_t ci : best_pick) sel.selected.push_back(cands[ci]);
    return sel;
}

std::optional<Solution> repair_cp(const Solution& partial, const std::vector<int>& removed,
                                  const AugmentedNetwork& net, const Instance& inst,
                                  const ChargingModel& model, Rng& rng, const VariantFlags& flags) {
    // phase 1: cheapest-position reinsertion of the removed customers
    Solution sol = partial;
    for (int c : removed) {
        auto next = insert_customer_least_cost(sol, c, net, inst, model, flags);
        if (!next) return std::nullopt;
        sol = std::move(*next);
    }

    // dissolve existing sorties into the candidate pool, then add a few
    // random route customers to it
    std::vector<int> pool;
    for (const auto& s : sol.sorties) pool.push_back(s.customer);
    sol.sorties.clear();

    std::vector<std::size_t> cust_pos;
    for (std::size_t p = 1; p + 1 < sol.ev_route.size(); ++p)
        if (net.is_customer(sol.ev_route[p])) cust_pos.push_back(p);
    int extra = rng.uniform_int(0, std::min<int>(3, static_cast<int>(cust_pos.size())));
    for (int e = 0; e < extra; ++e) {
        std::size_t at = cust_pos[rng.uniform_int(0, static_cast<int>(cust_pos.size()) - 1)];
        int victim = sol.ev_route[at];
        if (!net.nodes[victim].drone_eligible) continue; // route-only customer stays
        pool.push_back(victim);
        sol.ev_route.erase(sol.ev_route.begin() + at);
        cust_pos.clear();
        for (std::size_t p = 1; p + 1 < sol.ev_route.size(); ++p)
            if (net.is_customer(sol.ev_route[p])) cust_pos.push_back(p);
        if (cust_pos.empty()) break;
    }

    // the bare route must stand on its own
    if (!evaluate(sol, net, inst, model, flags).ok()) {
        auto restored = restore_feasibility_g(sol, net, inst, model, flags);
        if (!restored) return std::nullopt;
        sol = std::move(*restored);
    }
    if (pool.empty()) return sol;

    auto fallback = [&]() -> std::optional<Solution> {
        return repair_greedy(sol, pool, net, inst, model, flags);
    };

    try {
        InsertionProblem prob = build_insertion_problem(sol.ev_route, pool, net, inst, model, flags);
        InsertionSelection sel = solve_insertion(prob);
        Solution grafted = sol;
        for (const auto& c : sel.selected)
            grafted.sorties.push_back(
                {sol.ev_route[c.launch_pos], c.customer, sol.ev_route[c.retrieve_pos]});
        if (!check_feasible(grafted, net, inst, model, flags).ok()) return fallback();
        return grafted;
    } catch (const InfeasibleSubproblem&) {
        return fallback();
    }
}

} // namespace evtspd
