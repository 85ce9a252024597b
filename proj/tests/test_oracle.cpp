#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "evtspd/heuristics.hpp"
#include "evtspd/oracle.hpp"

using namespace evtspd;

namespace {

ChargingModel lin() { return build_approximation(ChargeCurve::builtin(), 1); }

} // namespace

TEST_CASE("one customer: best of truck trip and drone sortie") {
    Instance inst;
    inst.customers = {{1, 5, 5, 0, 1, true}};
    AugmentedNetwork net = build_augmented_network(inst, 1);
    OracleResult res = solve_exact(inst, net, lin());
    // truck: 20 km Manhattan = 1800 s; drone: 2*sqrt(50) km Euclidean ~ 848.5 s
    double drone = 2.0 * std::sqrt(50.0) / 60.0 * 3600.0;
    CHECK(res.cost == doctest::Approx(drone));
    CHECK(check_feasible(res.solution, net, inst, lin()).ok());
    REQUIRE(res.solution.sorties.size() == 1);
    CHECK(res.solution.sorties[0].customer == 1);

    // out of drone reach: the truck trip is optimal
    Instance far = inst;
    far.customers[0] = {1, 15, 15, 0, 1, true};
    AugmentedNetwork fnet = build_augmented_network(far, 1);
    OracleResult fres = solve_exact(far, fnet, lin());
    CHECK(fres.cost == doctest::Approx(60.0 / 40.0 * 3600.0)); // 60 km Manhattan
    CHECK(fres.solution.sorties.empty());
}

TEST_CASE("two customers match hand enumeration") {
    Instance inst;
    inst.customers = {{1, 2, 0, 0, 1, true}, {2, 0, 3, 0, 1, true}};
    AugmentedNetwork net = build_augmented_network(inst, 1);
    ChargingModel m = lin();

    // enumerate every structure by hand: truck orders, plus each customer
    // flown with all launch/retrieve pairs on the remaining route
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const Solution& sol) {
        if (!check_feasible(sol, net, inst, m).ok()) return;
        best = std::min(best, evaluate(sol, net, inst, m).timeline.completion);
    };
    int end = net.depot_end();
    for (std::vector<int> mid : {std::vector<int>{1, 2}, std::vector<int>{2, 1}}) {
        Solution s;
        s.ev_route = {0, mid[0], mid[1], end};
        consider(s);
    }
    for (int flown : {1, 2}) {
        int kept = flown == 1 ? 2 : 1;
        std::vector<int> route{0, kept, end};
        for (int l = 0; l < 3; ++l)
            for (int r = l + 1; r < 3; ++r) {
                Solution s;
                s.ev_route = route;
                s.sorties = {{route[l], flown, route[r]}};
                consider(s);
            }
    }
    {
        Solution s; // both flown: two disjoint sorties need 4 role nodes, route has 2
        s.ev_route = {0, end};
        s.sorties = {{0, 1, end}};
        consider(s); // customer 2 unserved, rejected by check_feasible
    }
    OracleResult res = solve_exact(inst, net, m);
    CHECK(res.cost == doctest::Approx(best));
}

TEST_CASE("oracle never exceeds the heuristic") {
    for (std::uint64_t seed : {61ull, 62ull, 63ull}) {
        Instance inst = generate_instance(seed, 5, 2, {});
        AugmentedNetwork net = build_augmented_network(inst, 2);
        ChargingModel m = lin();
        OracleResult opt = solve_exact(inst, net, m);
        SearchConfig cfg;
        cfg.iter_limit = 400;
        cfg.seed = seed;
        auto [sol, rep] = alns_search(net, inst, m, cfg);
        (void)sol;
        CHECK(opt.cost <= rep.best_cost + 1e-9);
        CHECK(check_feasible(opt.solution, net, inst, m).ok());
    }
}

TEST_CASE("optimal cost is invariant under customer relabeling") {
    Instance inst = generate_instance(71, 4, 2, {});
    AugmentedNetwork net = build_augmented_network(inst, 1);
    ChargingModel m = lin();
    double want = solve_exact(inst, net, m).cost;

    Instance shuffled = inst;
    std::reverse(shuffled.customers.begin(), shuffled.customers.end());
    AugmentedNetwork snet = build_augmented_network(shuffled, 1);
    CHECK(solve_exact(shuffled, snet, m).cost == doctest::Approx(want));
}

TEST_CASE("side constraints only tighten the optimum") {
    Instance inst = generate_instance(81, 4, 2, {});
    AugmentedNetwork net = build_augmented_network(inst, 1);
    ChargingModel m = build_approximation(ChargeCurve::builtin(), 4);
    double base = solve_exact(inst, net, m).cost;
    double with_lrt = solve_exact(inst, net, m, {true, std::nullopt}).cost;
    double with_leg = solve_exact(inst, net, m, {false, 0}).cost;
    CHECK(with_lrt >= base - 1e-9);
    CHECK(with_leg >= base - 1e-9);
}

TEST_CASE("limits are enforced") {
    Instance inst = generate_instance(91, 8, 2, {});
    AugmentedNetwork net = build_augmented_network(inst, 1);
    CHECK_THROWS_AS(solve_exact(inst, net, lin()), std::invalid_argument); // 8 > 7 customers

    Instance big = generate_instance(92, 7, 3, {});
    AugmentedNetwork bnet = build_augmented_network(big, 2);
    OracleLimits tight;
    tight.time_budget_s = 1e-6;
    CHECK_THROWS_AS(solve_exact(big, bnet, lin(), {}, tight), OracleTimeout);
}
