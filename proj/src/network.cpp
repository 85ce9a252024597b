#include "evtspd/network.hpp"

#include <cmath>
#include <stdexcept>

namespace evtspd {

namespace {

double manhattan_km(const NetNode& a, const NetNode& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

double euclidean_km(const NetNode& a, const NetNode& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace

AugmentedNetwork build_augmented_network(const Instance& inst, int m) {
    if (m < 1) throw std::invalid_argument("m must be at least 1");
    inst.validate();

    AugmentedNetwork net;
    net.n_customers = static_cast<int>(inst.customers.size());
    net.n_stations = static_cast<int>(inst.stations.size());
    net.copies_per_station = m;
    net.qd_s = inst.params.qd_s;
    net.has_weight_fn = static_cast<bool>(inst.weight_range_fn);

    NetNode depot;
    depot.role = NodeRole::DepotStart;
    depot.x = inst.depot.x;
    depot.y = inst.depot.y;
    net.nodes.push_back(depot);

    for (int i = 0; i < net.n_customers; ++i) {
        const auto& c = inst.customers[i];
        NetNode n;
        n.role = NodeRole::Customer;
        n.x = c.x;
        n.y = c.y;
        n.service_time_s = c.service_time_s;
        n.weight_kg = c.weight_kg;
        n.drone_eligible = c.drone_eligible;
        n.customer = i;
        net.nodes.push_back(n);
    }
    for (int copy = 0; copy < m; ++copy)
        for (int p = 0; p < net.n_stations; ++p) {
            NetNode n;
            n.role = NodeRole::StationCopy;
            n.x = inst.stations[p].x;
            n.y = inst.stations[p].y;
            n.parent_station = p;
            net.nodes.push_back(n);
        }
    NetNode end = depot;
    end.role = NodeRole::DepotEnd;
    net.nodes.push_back(end);

    int n = net.size();
    for (int i = 0; i < n; ++i) net.nodes[i].index = i;

    double ev_s_per_km = 3600.0 / inst.params.ev_speed_kmh;
    double drone_s_per_km = 3600.0 / inst.params.drone_speed_kmh;
    net.ev_time.assign(n, std::vector<double>(n, 0.0));
    net.drone_time.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            net.ev_time[i][j] = manhattan_km(net.nodes[i], net.nodes[j]) * ev_s_per_km;
            net.drone_time[i][j] = euclidean_km(net.nodes[i], net.nodes[j]) * drone_s_per_km;
        }
    net.ev_energy = net.ev_time;
    net.drone_energy = net.drone_time;

    compute_sortie_set(net, inst);
    return net;
}

std::vector<Sortie> compute_sortie_set(AugmentedNetwork& net, const Instance& inst) {
    int n = net.size();
    net.budgets_.assign(n, inst.params.qd_s);
    if (inst.weight_range_fn)
        for (int j = 0; j < n; ++j)
            if (net.is_customer(j))
                net.budgets_[j] = inst.weight_range_fn(net.nodes[j].weight_kg);

    net.sorties.clear();
    net.sortie_keys.clear();
    for (int i = 0; i < n; ++i) {
        if (!net.in_nd(i)) continue;
        for (int j = 1; j <= net.n_customers; ++j) {
            if (j == i || !net.nodes[j].drone_eligible) continue;
            for (int k = 0; k < n; ++k) {
                if (!net.in_na(k) || k == i || k == j) continue;
                if (net.drone_energy[i][j] + net.drone_energy[j][k] <= net.budget(j)) {
                    net.sorties.push_back({i, j, k});
                    net.sortie_keys.insert(AugmentedNetwork::key(i, j, k));
                }
            }
        }
    }
    return net.sorties;
}

} // namespace evtspd
