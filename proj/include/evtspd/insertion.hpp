#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "evtspd/heuristics.hpp"
#include "evtspd/solution.hpp"

namespace evtspd {

struct InfeasibleSubproblem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One candidate way of serving a drone customer: launch at route position
// l, retrieve at route position r (l < r), with the waiting time the
// sortie induces on the fixed truck route.
struct SortieCandidate {
    int customer;   // customer node index
    int launch_pos; // position on the route (l)
    int retrieve_pos;
    double duration_s; // drone elapsed time of the sortie
    double waiting_s;  // w_ij, completion-time increase on the fixed route
};

struct InsertionProblem {
    std::vector<int> route;            // fixed EV route (node indices)
    std::vector<double> truck_arrival; // t_i per route position
    std::vector<int> drone_customers;  // customer node indices to cover
    std::vector<SortieCandidate> candidates;

    std::string candidates_csv() const;
};

InsertionProblem build_insertion_problem(const std::vector<int>& route,
                                         const std::vector<int>& drone_customers,
                                         const AugmentedNetwork& net, const Instance& inst,
                                         const ChargingModel& model,
                                         const VariantFlags& flags = {});

struct InsertionSelection {
    std::vector<SortieCandidate> selected;
    double total_waiting_s = 0.0;
};

// Exact branch-and-bound: minimal total waiting cover with strictly
// non-overlapping position intervals.
InsertionSelection solve_insertion(const InsertionProblem& problem);

std::optional<Solution> repair_cp(const Solution& partial, const std::vector<int>& removed,
                                  const AugmentedNetwork& net, const Instance& inst,
                                  const ChargingModel& model, Rng& rng,
                                  const VariantFlags& flags = {});

} // namespace evtspd
