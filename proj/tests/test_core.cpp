#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "evtspd/charging.hpp"
#include "evtspd/instance.hpp"
#include "evtspd/network.hpp"
#include "evtspd/solution.hpp"

using namespace evtspd;

namespace {

Instance one_customer_at(double x, double y) {
    Instance inst;
    inst.customers.push_back({1, x, y, 0.0, 1.0, true});
    return inst;
}

} // namespace

TEST_CASE("parameter validation") {
    Instance inst = one_customer_at(5, 5);
    inst.validate();
    Instance bad = inst;
    bad.params.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParameters);
    bad = inst;
    bad.params.qt_s = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidParameters);
    bad = inst;
    bad.customers.push_back({1, 2, 2, 0, 1, true}); // duplicate id
    CHECK_THROWS_AS(bad.validate(), InvalidParameters);
    bad = inst;
    bad.customers.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidParameters);
}

TEST_CASE("json round trip preserves the instance") {
    Instance inst = generate_instance(11, 4, 2, {});
    Instance back = Instance::from_json(inst.to_json());
    CHECK(back.customers.size() == inst.customers.size());
    CHECK(back.stations.size() == inst.stations.size());
    for (std::size_t i = 0; i < inst.customers.size(); ++i) {
        CHECK(back.customers[i].x == inst.customers[i].x);
        CHECK(back.customers[i].y == inst.customers[i].y);
        CHECK(back.customers[i].weight_kg == inst.customers[i].weight_kg);
        CHECK(back.customers[i].drone_eligible == inst.customers[i].drone_eligible);
    }
    CHECK(back.params.qt_s == inst.params.qt_s);
    CHECK(back.params.gamma == inst.params.gamma);
    CHECK(back.to_json() == inst.to_json());

    const char* path = "inst_tmp.json";
    inst.save(path);
    Instance loaded = Instance::load(path);
    std::remove(path);
    CHECK(loaded.to_json() == inst.to_json());
}

TEST_CASE("generation is deterministic in the seed") {
    Instance a = generate_instance(99, 5, 2, {});
    Instance b = generate_instance(99, 5, 2, {});
    Instance c = generate_instance(100, 5, 2, {});
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json() != c.to_json());
    CHECK_THROWS_AS(generate_instance(1, 0, 2, {}), InvalidParameters);
}

TEST_CASE("augmented network layout") {
    Instance inst = generate_instance(3, 4, 2, {});
    AugmentedNetwork net = build_augmented_network(inst, 3);
    int c = 4, s = 2, m = 3;
    REQUIRE(net.size() == c + s * m + 2);
    CHECK(net.n_customers == c);
    CHECK(net.n_stations == s);
    CHECK(net.copies_per_station == m);
    CHECK(net.depot_start() == 0);
    CHECK(net.depot_end() == net.size() - 1);
    CHECK(net.nodes[0].role == NodeRole::DepotStart);
    CHECK(net.nodes[net.depot_end()].role == NodeRole::DepotEnd);
    for (int j = 1; j <= c; ++j) {
        CHECK(net.nodes[j].role == NodeRole::Customer);
        CHECK(net.nodes[j].customer == j - 1);
    }
    for (int p = 0; p < s * m; ++p) {
        int node = c + 1 + p;
        CHECK(net.nodes[node].role == NodeRole::StationCopy);
        CHECK(net.nodes[node].parent_station == p % s);
    }
    // copies of the same station share coordinates
    CHECK(net.nodes[c + 1].x == net.nodes[c + 1 + s].x);
    CHECK(net.nodes[c + 1].y == net.nodes[c + 1 + s].y);
    // depot-end mirrors depot-start
    CHECK(net.nodes[0].x == net.nodes[net.depot_end()].x);
    CHECK(net.nodes[0].y == net.nodes[net.depot_end()].y);
}

TEST_CASE("travel times use the right metrics") {
    Instance inst = one_customer_at(3.0, 4.0);
    AugmentedNetwork net = build_augmented_network(inst, 1);
    // EV: Manhattan at 40 km/h; drone: Euclidean at 60 km/h
    CHECK(net.ev_time[0][1] == doctest::Approx(7.0 / 40.0 * 3600.0));
    CHECK(net.drone_time[0][1] == doctest::Approx(5.0 / 60.0 * 3600.0));
    // energies equal travel times in seconds
    CHECK(net.ev_energy[0][1] == doctest::Approx(net.ev_time[0][1]));
    CHECK(net.drone_energy[0][1] == doctest::Approx(net.drone_time[0][1]));
    // symmetric matrices, zero diagonal
    for (int i = 0; i < net.size(); ++i)
        for (int j = 0; j < net.size(); ++j) {
            CHECK(net.ev_time[i][j] == doctest::Approx(net.ev_time[j][i]));
            CHECK(net.drone_time[i][j] == doctest::Approx(net.drone_time[j][i]));
        }
}

TEST_CASE("sortie set matches its definition, brute force") {
    Instance inst = generate_instance(17, 5, 2, {});
    inst.customers[1].drone_eligible = false;
    inst.weight_range_fn = default_weight_range_fn(inst.params.qd_s);
    AugmentedNetwork net = build_augmented_network(inst, 2);

    std::size_t count = 0;
    for (int i = 0; i < net.size(); ++i) {
        if (!net.in_nd(i)) continue;
        for (int j = 1; j <= net.n_customers; ++j) {
            if (j == i || !net.nodes[j].drone_eligible) continue;
            for (int k = 0; k < net.size(); ++k) {
                if (!net.in_na(k) || k == i || k == j) continue;
                bool fits = net.drone_energy[i][j] + net.drone_energy[j][k] <= net.budget(j);
                CHECK(net.sortie_in_d(i, j, k) == fits);
                if (fits) ++count;
            }
        }
    }
    CHECK(net.sorties.size() == count);
    // the ineligible customer never appears as a served customer
    for (const Sortie& s : net.sorties) CHECK(s.customer != 2);
    // weight-dependent budgets shrink the set versus the constant budget
    Instance flat = inst;
    flat.weight_range_fn = nullptr;
    AugmentedNetwork fnet = build_augmented_network(flat, 2);
    CHECK(net.sorties.size() <= fnet.sorties.size());
}

TEST_CASE("single customer served by truck takes 1800 s") {
    // customer at (5,5): 20 km Manhattan round trip at 40 km/h
    Instance inst = one_customer_at(5.0, 5.0);
    AugmentedNetwork net = build_augmented_network(inst, 1);
    ChargingModel lin = build_approximation(ChargeCurve::builtin(), 1);
    Solution sol;
    sol.ev_route = {0, 1, net.depot_end()};
    EvalResult res = evaluate(sol, net, inst, lin);
    REQUIRE(res.ok());
    CHECK(res.timeline.completion == doctest::Approx(1800.0));
}

TEST_CASE("single customer served by drone takes sqrt(50)*2/60 h") {
    Instance inst = one_customer_at(5.0, 5.0);
    AugmentedNetwork net = build_augmented_network(inst, 1);
    ChargingModel lin = build_approximation(ChargeCurve::builtin(), 1);
    Solution sol;
    sol.ev_route = {0, net.depot_end()};
    sol.sorties = {{0, 1, net.depot_end()}};
    EvalResult res = evaluate(sol, net, inst, lin);
    REQUIRE(res.ok());
    double leg = std::sqrt(50.0) / 60.0 * 3600.0;
    CHECK(res.timeline.completion == doctest::Approx(2.0 * leg)); // ~848.53 s
}
