#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <limits>

#include "evtspd/heuristics.hpp"
#include "evtspd/insertion.hpp"

using namespace evtspd;

namespace {

ChargingModel lin() { return build_approximation(ChargeCurve::builtin(), 1); }

bool overlaps(const SortieCandidate& a, const SortieCandidate& b) {
    return a.launch_pos <= b.retrieve_pos && b.launch_pos <= a.retrieve_pos;
}

// exhaustive minimal-waiting cover: product over customers of their
// candidate choices, pairwise non-overlapping
double brute_force(const InsertionProblem& p) {
    std::vector<std::vector<const SortieCandidate*>> per(p.drone_customers.size());
    for (const auto& c : p.candidates)
        for (std::size_t i = 0; i < p.drone_customers.size(); ++i)
            if (p.drone_customers[i] == c.customer) per[i].push_back(&c);
    double best = std::numeric_limits<double>::infinity();
    std::vector<const SortieCandidate*> pick(per.size(), nullptr);
    auto rec = [&](auto&& self, std::size_t i, double acc) -> void {
        if (acc >= best) return;
        if (i == per.size()) {
            best = acc;
            return;
        }
        for (const auto* c : per[i]) {
            bool clash = false;
            for (std::size_t j = 0; j < i && !clash; ++j) clash = overlaps(*pick[j], *c);
            if (clash) continue;
            pick[i] = c;
            self(self, i + 1, acc + c->waiting_s);
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

} // namespace

TEST_CASE("candidates on a two-customer corridor, by hand") {
    Instance inst;
    inst.customers = {{1, 1, 0, 0, 1, true}, {2, 2, 0, 0, 1, true}};
    AugmentedNetwork net = build_augmented_network(inst, 1);
    ChargingModel m = lin();
    std::vector<int> route{0, 1, net.depot_end()};

    InsertionProblem p = build_insertion_problem(route, {2}, net, inst, m);
    REQUIRE(p.candidates.size() == 3);
    // truck alone: 0 -> c1 (90 s) -> depot (180 s)
    CHECK(p.truck_arrival[1] == doctest::Approx(90.0));
    CHECK(p.truck_arrival[2] == doctest::Approx(180.0));
    // sorted by (launch_pos, retrieve_pos)
    CHECK(p.candidates[0].launch_pos == 0);
    CHECK(p.candidates[0].retrieve_pos == 1);
    CHECK(p.candidates[0].waiting_s == doctest::Approx(90.0)); // drone 3 km vs truck 90 s
    CHECK(p.candidates[1].retrieve_pos == 2);
    CHECK(p.candidates[1].waiting_s == doctest::Approx(60.0)); // drone 4 km vs truck 180 s
    CHECK(p.candidates[2].launch_pos == 1);
    CHECK(p.candidates[2].waiting_s == doctest::Approx(90.0)); // launch at 90 s, 3 km flight

    InsertionSelection sel = solve_insertion(p);
    REQUIRE(sel.selected.size() == 1);
    CHECK(sel.total_waiting_s == doctest::Approx(60.0));
    CHECK(sel.selected[0].retrieve_pos == 2);

    std::string csv = p.candidates_csv();
    CHECK(csv.rfind("customer,launch_pos,retrieve_pos,duration_s,waiting_s", 0) == 0);
}

TEST_CASE("selection equals power-set brute force on generated problems") {
    ChargingModel m = lin();
    int solved = 0;
    for (std::uint64_t seed = 1; seed <= 120 && solved < 25; ++seed) {
        Instance inst = generate_instance(seed, 5, 2, {});
        AugmentedNetwork net = build_augmented_network(inst, 2);
        Solution tour = mcws_initial(net, inst, m);
        // peel 1-2 customers off the route and serve them by drone
        Rng rng(seed);
        std::vector<int> customers;
        for (int v : tour.ev_route)
            if (net.is_customer(v)) customers.push_back(v);
        int take = 1 + static_cast<int>(seed % 2);
        std::vector<int> drones;
        std::vector<int> route = tour.ev_route;
        for (int t = 0; t < take; ++t) {
            int v = customers[rng.uniform_int(0, static_cast<int>(customers.size()) - 1)];
            if (std::find(drones.begin(), drones.end(), v) != drones.end()) continue;
            drones.push_back(v);
            route.erase(std::find(route.begin(), route.end(), v));
        }
        InsertionProblem p;
        try {
            p = build_insertion_problem(route, drones, net, inst, m);
        } catch (const InfeasibleSubproblem&) {
            continue;
        }
        double want = brute_force(p);
        if (!std::isfinite(want)) {
            CHECK_THROWS_AS(solve_insertion(p), InfeasibleSubproblem);
            continue;
        }
        InsertionSelection sel = solve_insertion(p);
        CHECK(sel.total_waiting_s == doctest::Approx(want).epsilon(1e-9));
        // exactly one candidate per drone customer, pairwise disjoint
        CHECK(sel.selected.size() == drones.size());
        for (std::size_t i = 0; i < sel.selected.size(); ++i)
            for (std::size_t j = i + 1; j < sel.selected.size(); ++j)
                CHECK_FALSE(overlaps(sel.selected[i], sel.selected[j]));
        ++solved;
    }
    CHECK(solved >= 15);
}

TEST_CASE("overlapping-only candidates are infeasible") {
    InsertionProblem p;
    p.route = {0, 1, 2, 3};
    p.drone_customers = {7, 8};
    p.candidates = {{7, 0, 2, 100.0, 5.0}, {8, 1, 3, 100.0, 5.0}, {8, 2, 3, 100.0, 9.0}};
    // (0,2) and (2,3) share position 2: endpoints conflict too
    CHECK_THROWS_AS(solve_insertion(p), InfeasibleSubproblem);
    // freeing the clash restores feasibility
    p.candidates.push_back({7, 0, 1, 100.0, 30.0});
    InsertionSelection sel = solve_insertion(p);
    CHECK(sel.total_waiting_s == doctest::Approx(39.0));
}

TEST_CASE("uncoverable customer throws at build time") {
    Instance inst;
    inst.customers = {{1, 1, 0, 0, 1, true}, {2, 19, 19, 0, 1, true}};
    inst.params.qd_s = 300.0; // far corner is out of drone reach
    AugmentedNetwork net = build_augmented_network(inst, 1);
    std::vector<int> route{0, 1, net.depot_end()};
    CHECK_THROWS_AS(build_insertion_problem(route, {2}, net, inst, lin()), InfeasibleSubproblem);
}

TEST_CASE("waitings are additive on station-free routes") {
    ChargingModel m = lin();
    for (std::uint64_t seed : {3ull, 9ull, 14ull}) {
        Instance inst = generate_instance(seed, 6, 2, {});
        AugmentedNetwork net = build_augmented_network(inst, 2);
        Solution tour = mcws_initial(net, inst, m);
        bool has_station = false;
        for (int v : tour.ev_route) has_station |= net.is_station(v);
        if (has_station) continue;
        Rng rng(seed);
        std::vector<int> route = tour.ev_route;
        std::vector<int> drones;
        for (int t = 0; t < 2; ++t) {
            std::vector<int> customers;
            for (int v : route)
                if (net.is_customer(v)) customers.push_back(v);
            int v = customers[rng.uniform_int(0, static_cast<int>(customers.size()) - 1)];
            drones.push_back(v);
            route.erase(std::find(route.begin(), route.end(), v));
        }
        InsertionProblem p;
        InsertionSelection sel;
        try {
            p = build_insertion_problem(route, drones, net, inst, m);
            sel = solve_insertion(p);
        } catch (const InfeasibleSubproblem&) {
            continue;
        }
        Solution grafted;
        grafted.ev_route = route;
        for (const auto& c : sel.selected)
            grafted.sorties.push_back({route[c.launch_pos], c.customer, route[c.retrieve_pos]});
        EvalResult base = evaluate(Solution{route, {}, {}}, net, inst, m);
        EvalResult full = evaluate(grafted, net, inst, m);
        REQUIRE(base.ok());
        REQUIRE(full.ok());
        CHECK(full.timeline.completion ==
              doctest::Approx(base.timeline.completion + sel.total_waiting_s).epsilon(1e-9));
    }
}
