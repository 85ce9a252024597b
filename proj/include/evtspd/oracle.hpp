#pragma once

#include <stdexcept>

#include "evtspd/charging.hpp"
#include "evtspd/network.hpp"
#include "evtspd/solution.hpp"

namespace evtspd {

struct OracleLimits {
    int max_customers = 7;
    int max_station_visits = 3;  // total station stops on the route
    int max_stations_per_leg = 2; // consecutive station stops
    double time_budget_s = 300.0;
};

struct OracleTimeout : std::runtime_error {
    double best_bound; // cost of the best solution found before the cutoff
    OracleTimeout(const std::string& what, double bound)
        : std::runtime_error(what), best_bound(bound) {}
};

struct OracleResult {
    Solution solution;
    double cost = 0.0;
    long evaluations = 0; // complete structures evaluated
};

// Exhaustive search: every drone/EV customer partition, every EV route
// order with bounded station insertions, every non-interleaving sortie
// assignment. Exact because evaluate() prices a fixed structure optimally.
OracleResult solve_exact(const Instance& inst, const AugmentedNetwork& net,
                         const ChargingModel& model, const VariantFlags& flags = {},
                         const OracleLimits& limits = {});

} // namespace evtspd
