#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "evtspd/instance.hpp"

namespace evtspd {

enum class NodeRole { DepotStart, Customer, StationCopy, DepotEnd };

struct NetNode {
    NodeRole role;
    int index = 0;       // position in the augmented node list
    double x = 0.0, y = 0.0;
    double service_time_s = 0.0;
    double weight_kg = 0.0;
    bool drone_eligible = false;
    int parent_station = -1; // station list index for copies
    int customer = -1;       // customer list index
};

struct Sortie {
    int launch = -1;
    int customer = -1;
    int retrieve = -1;
    friend bool operator==(const Sortie&, const Sortie&) = default;
};

// Node layout: 0 = depot-start, 1..c = customers, c+1..c+ms = station
// copies (copies of station p at c+1+p, c+1+s+p, ...), c+ms+1 = depot-end.
struct AugmentedNetwork {
    std::vector<NetNode> nodes;
    int n_customers = 0;
    int n_stations = 0;
    int copies_per_station = 1;

    // all in seconds; energies are measured in the same time units as the
    // corresponding travel times (EV: Manhattan, drone: Euclidean)
    std::vector<std::vector<double>> ev_time;
    std::vector<std::vector<double>> drone_time;
    std::vector<std::vector<double>> ev_energy;
    std::vector<std::vector<double>> drone_energy;

    std::vector<Sortie> sorties; // feasible sortie set D
    std::unordered_set<std::uint64_t> sortie_keys;

    double qd_s = 0.0;
    bool has_weight_fn = false;

    int size() const { return static_cast<int>(nodes.size()); }
    int depot_start() const { return 0; }
    int depot_end() const { return size() - 1; }

    bool is_customer(int i) const { return nodes[i].role == NodeRole::Customer; }
    bool is_station(int i) const { return nodes[i].role == NodeRole::StationCopy; }
    bool in_nd(int i) const { return i != depot_end(); }
    bool in_na(int i) const { return i != depot_start(); }

    // drone energy budget for serving customer node j (weight-dependent
    // when the instance carries a weight_range_fn)
    double budget(int j) const { return budgets_.empty() ? qd_s : budgets_[j]; }

    bool sortie_in_d(int i, int j, int k) const {
        return sortie_keys.count(key(i, j, k)) > 0;
    }

    static std::uint64_t key(int i, int j, int k) {
        return (static_cast<std::uint64_t>(i) << 40) |
               (static_cast<std::uint64_t>(j) << 20) |
               static_cast<std::uint64_t>(k);
    }

    std::vector<double> budgets_; // per-node budgets, filled at build
};

AugmentedNetwork build_augmented_network(const Instance& inst, int m);

// Exactly the triples of the set D definition; stored into net as well.
std::vector<Sortie> compute_sortie_set(AugmentedNetwork& net, const Instance& inst);

} // namespace evtspd
