#include "evtspd/solution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace evtspd {

std::string Solution::to_json() const {
    nlohmann::json j;
    j["ev_route"] = ev_route;
    j["sorties"] = nlohmann::json::array();
    for (const auto& s : sorties)
        j["sorties"].push_back({s.launch, s.customer, s.retrieve});
    nlohmann::json ch = nlohmann::json::object();
    for (const auto& [node, amount] : charges) ch[std::to_string(node)] = amount;
    j["charges"] = ch;
    return j.dump(2);
}

Solution Solution::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Solution sol;
    sol.ev_route = j.at("ev_route").get<std::vector<int>>();
    for (const auto& s : j.at("sorties"))
        sol.sorties.push_back({s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()});
    if (j.contains("charges"))
        for (const auto& [key, val] : j.at("charges").items())
            sol.charges[std::stoi(key)] = val.get<double>();
    return sol;
}

Solution Solution::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open solution file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void Solution::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write solution file: " + path);
    out << to_json() << '\n';
}

std::string Timeline::to_csv(const AugmentedNetwork& net) const {
    std::ostringstream ss;
    ss << "node,t_arrive,t_depart,soc_arrive,soc_depart,wait\n";
    for (int i = 0; i < net.size(); ++i)
        ss << i << ',' << t_arrive[i] << ',' << t_depart[i] << ',' << soc_arrive[i]
           << ',' << soc_dep_post[i] << ',' << wait[i] << '\n';
    return ss.str();
}

namespace {

Violation structure_violation(const std::string& detail) {
    return {ViolationKind::Structure, detail, -1, -1};
}

// Position of each route node, -1 if not on the route.
std::vector<int> route_positions(const Solution& sol, int n) {
    std::vector<int> pos(n, -1);
    for (std::size_t p = 0; p < sol.ev_route.size(); ++p) pos[sol.ev_route[p]] = static_cast<int>(p);
    return pos;
}

std::optional<Violation> check_structure(const Solution& sol, const AugmentedNetwork& net,
                                         std::vector<int>& pos) {
    int n = net.size();
    if (sol.ev_route.size() < 2 || sol.ev_route.front() != net.depot_start() ||
        sol.ev_route.back() != net.depot_end())
        return structure_violation("route must run from depot-start to depot-end");
    std::vector<int> seen(n, 0);
    for (std::size_t p = 0; p < sol.ev_route.size(); ++p) {
        int v = sol.ev_route[p];
        if (v < 0 || v >= n) return structure_violation("route node out of range");
        if ((net.nodes[v].role == NodeRole::DepotStart && p != 0) ||
            (net.nodes[v].role == NodeRole::DepotEnd && p + 1 != sol.ev_route.size()))
            return structure_violation("depot nodes may appear only at the route ends");
        if (++seen[v] > 1) return structure_violation("node repeated on the EV route");
    }
    pos = route_positions(sol, n);

    std::vector<int> served(n, 0); // customer coverage
    for (int v : sol.ev_route)
        if (net.is_customer(v)) ++served[v];

    std::vector<int> role_used(n, 0);
    for (const auto& s : sol.sorties) {
        if (s.launch < 0 || s.launch >= n || s.customer < 0 || s.customer >= n ||
            s.retrieve < 0 || s.retrieve >= n)
            return structure_violation("sortie node out of range");
        if (!net.is_customer(s.customer))
            return structure_violation("sortie middle node must be a customer");
        if (pos[s.customer] >= 0)
            return structure_violation("drone customer also appears on the EV route");
        if (pos[s.launch] < 0 || pos[s.retrieve] < 0)
            return structure_violation("sortie launch/retrieve must lie on the EV route");
        if (pos[s.launch] >= pos[s.retrieve])
            return structure_violation("sortie launch must precede its retrieve");
        if (++role_used[s.launch] > 1 || ++role_used[s.retrieve] > 1)
            return structure_violation("node used by more than one sortie");
        ++served[s.customer];
    }
    // partial solutions (during construction/repair) may leave customers
    // unserved; full coverage is enforced by check_feasible
    for (int v = 1; v <= net.n_customers; ++v)
        if (served[v] > 1) return structure_violation("customer served more than once");

    // no interleaving: retrieve before the next launch
    std::vector<Sortie> ordered = sol.sorties;
    std::sort(ordered.begin(), ordered.end(),
              [&](const Sortie& a, const Sortie& b) { return pos[a.launch] < pos[b.launch]; });
    for (std::size_t i = 1; i < ordered.size(); ++i)
        if (pos[ordered[i - 1].retrieve] > pos[ordered[i].launch])
            return structure_violation("drone sorties interleave");
    return std::nullopt;
}

} // namespace

EvalResult evaluate(const Solution& sol, const AugmentedNetwork& net, const Instance& inst,
                    const ChargingModel& model, const VariantFlags& flags) {
    int n = net.size();
    EvalResult res;
    Timeline& tl = res.timeline;
    tl.t_arrive.assign(n, 0.0);
    tl.t_depart.assign(n, 0.0);
    tl.t_drone.assign(n, 0.0);
    tl.soc_arrive.assign(n, 0.0);
    tl.soc_dep_pre.assign(n, 0.0);
    tl.soc_dep_post.assign(n, 0.0);
    tl.wait.assign(n, 0.0);

    std::vector<int> pos;
    if (auto v = check_structure(sol, net, pos)) {
        res.violation = *v;
        return res;
    }
    const auto& route = sol.ev_route;
    int len = static_cast<int>(route.size());
    double qt = inst.params.qt_s;

    std::vector<int> launch_at(n, -1), retrieve_at(n, -1); // sortie index by role node
    for (std::size_t s = 0; s < sol.sorties.size(); ++s) {
        launch_at[sol.sorties[s].launch] = static_cast<int>(s);
        retrieve_at[sol.sorties[s].retrieve] = static_cast<int>(s);
    }

    // drone range: flight time of each sortie against the (possibly
    // weight-dependent) budget; waiting consumes no energy
    double sl = flags.lrt ? inst.params.launch_s : 0.0;
    double sr = flags.lrt ? inst.params.retrieve_s : 0.0;
    for (const auto& s : sol.sorties) {
        // the retrieve preparation keeps the drone airborne, so it counts
        // against the flight budget
        double flight = net.drone_energy[s.launch][s.customer] +
                        net.drone_energy[s.customer][s.retrieve] + sr;
        if (flight > net.budget(s.customer) + 1e-9) {
            res.violation = {ViolationKind::DroneRange,
                             "sortie exceeds the drone flight budget", s.launch, s.retrieve};
            return res;
        }
    }

    // max customers per truck leg (strictly between launch and retrieve)
    if (flags.max_leg) {
        for (const auto& s : sol.sorties) {
            int between = 0;
            for (int p = pos[s.launch] + 1; p < pos[s.retrieve]; ++p)
                if (net.is_customer(route[p])) ++between;
            if (between > *flags.max_leg) {
                res.violation = {ViolationKind::MaxLeg,
                                 "truck leg exceeds the customer limit", s.launch, s.retrieve};
                return res;
            }
        }
    }

    // energy pass: consumption along the route in soc fractions, with the
    // drone launch drain applied at departure
    std::vector<double> consume_after(len, 0.0); // drain at node p + arc p -> p+1
    for (int p = 0; p + 1 < len; ++p) {
        double drain = 0.0;
        if (int s = launch_at[route[p]]; s >= 0) {
            const auto& so = sol.sorties[s];
            drain = inst.params.gamma *
                    (net.drone_energy[so.launch][so.customer] + net.drone_energy[so.customer][so.retrieve]) / qt;
        }
        consume_after[p] = drain + net.ev_energy[route[p]][route[p + 1]] / qt;
    }

    // just-in-time charging: at each charge point depart with
    // max(arrival soc, energy of the next inter-station segment); minimal
    // total charge time because the time-SoC model is linear or concave
    std::vector<double> charge_amt(len, 0.0);
    {
        std::vector<int> charge_points;
        for (int p = 0; p < len; ++p)
            if (net.is_station(route[p])) charge_points.push_back(p);
        charge_points.push_back(len - 1); // sentinel: end of the last segment

        auto violating_arc = [&](int from_pos, double avail) -> std::pair<int, int> {
            double e = 0.0;
            for (int p = from_pos; p + 1 < len; ++p) {
                e += consume_after[p];
                if (e > avail + 1e-12) return {route[p], route[p + 1]};
            }
            return {route[len - 2], route[len - 1]};
        };

        double soc = 1.0; // full at the depot
        int seg_start = 0;
        for (int seg_end : charge_points) {
            double need = 0.0;
            for (int p = seg_start; p < seg_end; ++p) need += consume_after[p];
            double depart = std::max(soc, need);
            if (depart > 1.0 + 1e-9) {
                auto [a, b] = violating_arc(seg_start, 1.0);
                res.violation = {ViolationKind::Energy,
                                 "segment energy exceeds the EV battery capacity", a, b};
                return res;
            }
            charge_amt[seg_start] = depart - soc; // zero at the depot by construction
            soc = depart - need;
            seg_start = seg_end;
        }
    }

    // timing pass
    double t = 0.0, soc = 1.0;
    tl.t_arrive[route[0]] = 0.0;
    tl.soc_arrive[route[0]] = 1.0;
    for (int p = 0; p < len; ++p) {
        int v = route[p];
        double arrive = t;
        tl.t_arrive[v] = arrive;
        tl.soc_arrive[v] = soc;

        // drone rendezvous at a retrieve node: EV departs no earlier than
        // the drone's return
        double ready = arrive;
        if (int s = retrieve_at[v]; s >= 0) {
            const auto& so = sol.sorties[s];
            double launched = tl.t_depart[so.launch];
            double at_cust = launched + net.drone_time[so.launch][so.customer] +
                             net.nodes[so.customer].service_time_s;
            tl.t_drone[so.customer] = at_cust;
            double drone_in = at_cust + net.drone_time[so.customer][so.retrieve];
            tl.wait[v] = std::max(0.0, drone_in - arrive);
            // the retrieve preparation S_R delays departure whichever
            // vehicle lands first
            ready = std::max(arrive, drone_in) + sr;
        }
        tl.t_drone[v] = std::max(tl.t_drone[v], ready);

        double dwell = 0.0;
        if (net.is_customer(v)) dwell = net.nodes[v].service_time_s;
        double pre = soc;
        if (net.is_station(v)) {
            double amount = charge_amt[p];
            if (amount > 0) {
                dwell = charge_duration(model, soc, std::min(1.0, soc + amount));
                tl.charges[v] = amount;
                tl.total_charge_s += dwell;
            }
            pre = std::min(1.0, soc + amount);
        }
        double depart = ready + dwell;
        tl.t_depart[v] = depart;
        tl.soc_dep_pre[v] = pre;

        double post = pre;
        if (int s = launch_at[v]; s >= 0) {
            const auto& so = sol.sorties[s];
            post = pre - inst.params.gamma *
                             (net.drone_energy[so.launch][so.customer] +
                              net.drone_energy[so.customer][so.retrieve]) / qt;
            tl.t_drone[v] = std::max(tl.t_drone[v], depart);
        }
        tl.soc_dep_post[v] = post;

        if (p + 1 < len) {
            int w = route[p + 1];
            double leg = net.ev_time[v][w];
            if (launch_at[v] >= 0) leg += sl;
            t = depart + leg;
            soc = post - net.ev_energy[v][w] / qt;
            if (soc < -1e-9) {
                res.violation = {ViolationKind::Energy, "battery exhausted on arc", v, w};
                return res;
            }
            soc = std::max(0.0, soc);
        }
    }
    tl.completion = tl.t_depart[net.depot_end()];
    return res;
}

Violation check_feasible(const Solution& sol, const AugmentedNetwork& net, const Instance& inst,
                         const ChargingModel& model, const VariantFlags& flags) {
    std::vector<int> served(net.size(), 0);
    for (int v : sol.ev_route)
        if (net.is_customer(v)) ++served[v];
    for (const auto& s : sol.sorties) ++served[s.customer];
    for (int v = 1; v <= net.n_customers; ++v)
        if (served[v] != 1)
            return {ViolationKind::Structure, "each customer must be served exactly once", -1, -1};
    return evaluate(sol, net, inst, model, flags).violation;
}

namespace {

// station copies not yet on the route, by increasing EV time from `anchor`
std::vector<int> stations_by_distance(const AugmentedNetwork& net, const Solution& sol, int anchor) {
    std::vector<int> used(net.size(), 0);
    for (int v : sol.ev_route) used[v] = 1;
    std::vector<int> cand;
    for (int v = 0; v < net.size(); ++v)
        if (net.is_station(v) && !used[v]) cand.push_back(v);
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
        double da = net.ev_time[anchor][a], db = net.ev_time[anchor][b];
        if (da != db) return da < db;
        return a < b; // lowest node id wins ties
    });
    return cand;
}

} // namespace

std::optional<Solution> restore_feasibility_g(Solution sol, const AugmentedNetwork& net,
                                              const Instance& inst, const ChargingModel& model,
                                              const VariantFlags& flags, int backtrack_limit) {
    for (int rounds = 0; rounds < 4 * net.size(); ++rounds) {
        EvalResult res = evaluate(sol, net, inst, model, flags);
        if (res.ok()) return sol;
        if (res.violation.kind != ViolationKind::Energy) return std::nullopt;

        int from = res.violation.arc_from;
        auto arc_pos = [&](int node) {
            auto it = std::find(sol.ev_route.begin(), sol.ev_route.end(), node);
            return it == sol.ev_route.end() ? -1 : static_cast<int>(it - sol.ev_route.begin());
        };
        int p = arc_pos(from);
        if (p < 0) return std::nullopt;

        auto try_insert = [&](int at, int station) -> bool {
            Solution trial = sol;
            trial.ev_route.insert(trial.ev_route.begin() + at + 1, station);
            EvalResult r = evaluate(trial, net, inst, model, flags);
            bool improved = r.ok();
            if (!improved && r.violation.kind == ViolationKind::Energy) {
                // progress if the violation moved past the current arc
                int q = arc_pos(r.violation.arc_from);
                int pq = -1;
                for (std::size_t i = 0; i + 1 < trial.ev_route.size(); ++i)
                    if (trial.ev_route[i] == r.violation.arc_from) pq = static_cast<int>(i);
                improved = pq > at + 1;
                (void)q;
            }
            if (improved) sol = std::move(trial);
            return improved;
        };

        // Step 2: insert the station copy nearest to the arc tail
        auto near_from = stations_by_distance(net, sol, from);
        if (near_from.empty()) return std::nullopt;
        int step2_station = near_from.front();
        if (try_insert(p, step2_station)) continue;

        // Step 3: walk back up to the backtrack limit, trying the station
        // nearest to the prior node or the step-2 station
        bool progressed = false;
        for (int back = 1; back <= backtrack_limit && p - back >= 0; ++back) {
            int prior = sol.ev_route[p - back];
            auto near_prior = stations_by_distance(net, sol, prior);
            if (!near_prior.empty() && try_insert(p - back, near_prior.front())) {
                progressed = true;
                break;
            }
            if (try_insert(p - back, step2_station)) {
                progressed = true;
                break;
            }
        }
        if (!progressed) return std::nullopt;
    }
    return std::nullopt;
}

} // namespace evtspd
