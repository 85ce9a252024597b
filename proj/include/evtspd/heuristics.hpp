#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evtspd/rng.hpp"
#include "evtspd/solution.hpp"

namespace evtspd {

struct ConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OperatorBank {
    struct Entry {
        std::string name;
        double score;
    };
    std::vector<Entry> destroys{{"random", 10.0}, {"cluster", 10.0}};
    std::vector<Entry> repairs{{"greedy", 10.0}, {"nearby", 10.0}, {"cp", 10.0}};
    double rho = 0.8;
    double lambda1 = 30.0, lambda2 = 10.0, lambda3 = 0.0;
    double tau1 = 2.0, tau2 = 1.0;
};

enum class IterationOutcome { GlobalBest, Feasible, Failed };

struct SearchConfig {
    double time_limit_s = 5.0;          // wall-clock budget
    std::optional<long> iter_limit;     // iteration budget (determinism mode)
    double t0 = 1000.0;
    double t_min = 5.0;
    int no_impro_max = 50;
    std::uint64_t seed = 1;
    bool record_trace = true;
};

struct IterRecord {
    long iter;
    double elapsed_s;
    double temperature;
    int destroy_op, repair_op;
    double candidate_cost; // negative when no feasible candidate emerged
    bool accepted;
    double best_cost;
};

struct RunReport {
    double initial_cost = 0.0;
    double best_cost = 0.0;
    long iterations = 0;
    std::vector<long> destroy_usage, repair_usage;
    std::vector<IterRecord> trace;

    std::string trace_csv(const OperatorBank& bank) const;
};

// MCWS construction: drone-free, energy-feasible EV tour.
Solution mcws_initial(const AugmentedNetwork& net, const Instance& inst,
                      const ChargingModel& model, const VariantFlags& flags = {});

// floor((n - 1 - d) / 2), floored at 1 while removable customers remain
int max_removal(const Solution& sol, const AugmentedNetwork& net);

struct DestroyResult {
    Solution partial;
    std::vector<int> removed; // customer node indices (set P)
};

DestroyResult destroy_random(const Solution& sol, const AugmentedNetwork& net, int beta, Rng& rng);
DestroyResult destroy_cluster(const Solution& sol, const AugmentedNetwork& net, int beta, Rng& rng);

std::optional<Solution> repair_greedy(const Solution& partial, const std::vector<int>& removed,
                                      const AugmentedNetwork& net, const Instance& inst,
                                      const ChargingModel& model, const VariantFlags& flags = {});
std::optional<Solution> repair_nearby(const Solution& partial, const std::vector<int>& removed,
                                      const AugmentedNetwork& net, const Instance& inst,
                                      const ChargingModel& model, const VariantFlags& flags = {});

std::size_t select_operator(const std::vector<OperatorBank::Entry>& bank, Rng& rng);
void update_score(OperatorBank::Entry& entry, const OperatorBank& bank,
                  IterationOutcome outcome, double iter_time_s);
bool accept(double current_cost, double candidate_cost, double temperature, Rng& rng);
double temperature(double t0, double elapsed, double limit);

std::pair<Solution, RunReport> alns_search(const AugmentedNetwork& net, const Instance& inst,
                                           const ChargingModel& model, const SearchConfig& config,
                                           const VariantFlags& flags = {});

// shared by repairs: cheapest feasible route insertion of one customer,
// with station restoration when plain insertion is energy-infeasible
std::optional<Solution> insert_customer_least_cost(const Solution& sol, int customer,
                                                   const AugmentedNetwork& net, const Instance& inst,
                                                   const ChargingModel& model, const VariantFlags& flags);

} // namespace evtspd
