#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evtspd/charging.hpp"
#include "evtspd/network.hpp"

namespace evtspd {

struct VariantFlags {
    bool lrt = false;                // launch/retrieve times S_L, S_R
    std::optional<int> max_leg;     // max customers per truck leg
};

struct Solution {
    std::vector<int> ev_route;  // starts at depot-start, ends at depot-end
    std::vector<Sortie> sorties;
    std::map<int, double> charges; // node -> planned charge (soc fraction)

    std::string to_json() const;
    static Solution from_json(const std::string& text);
    static Solution load(const std::string& path);
    void save(const std::string& path) const;
};

struct Timeline {
    // indexed by augmented-network node; zero for unvisited nodes
    std::vector<double> t_arrive, t_depart, t_drone;
    std::vector<double> soc_arrive, soc_dep_pre, soc_dep_post;
    std::vector<double> wait;
    std::map<int, double> charges; // station node -> charged soc fraction
    double completion = 0.0;
    double total_charge_s = 0.0;

    std::string to_csv(const AugmentedNetwork& net) const;
};

enum class ViolationKind { None, Structure, Energy, DroneRange, MaxLeg };

struct Violation {
    ViolationKind kind = ViolationKind::None;
    std::string detail;
    int arc_from = -1, arc_to = -1; // filled for energy violations
    bool ok() const { return kind == ViolationKind::None; }
};

struct EvalResult {
    Timeline timeline;
    Violation violation;
    bool ok() const { return violation.ok(); }
};

// Forward timeline simulation with the minimal-charging plan. Total on
// structurally valid input; violations are reported, not thrown.
EvalResult evaluate(const Solution& sol, const AugmentedNetwork& net,
                    const Instance& inst, const ChargingModel& model,
                    const VariantFlags& flags = {});

Violation check_feasible(const Solution& sol, const AugmentedNetwork& net,
                         const Instance& inst, const ChargingModel& model,
                         const VariantFlags& flags = {});

// Station-insertion feasibility restoration; nullopt on failure.
std::optional<Solution> restore_feasibility_g(Solution sol,
                                              const AugmentedNetwork& net,
                                              const Instance& inst,
                                              const ChargingModel& model,
                                              const VariantFlags& flags = {},
                                              int backtrack_limit = 3);

} // namespace evtspd
