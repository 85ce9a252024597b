#include "evtspd/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "evtspd/charging.hpp"
#include "evtspd/heuristics.hpp"
#include "evtspd/network.hpp"
#include "evtspd/rng.hpp"

namespace evtspd {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw InvalidParameters(msg);
}

} // namespace

void Instance::validate() const {
    require(!customers.empty(), "instance needs at least one customer");
    require(params.ev_speed_kmh > 0 && params.drone_speed_kmh > 0, "speeds must be positive");
    require(params.qt_s > 0 && params.qd_s > 0, "energy capacities must be positive");
    require(params.gamma > 0 && params.gamma <= 1, "gamma must lie in (0, 1]");
    require(params.launch_s >= 0 && params.retrieve_s >= 0, "launch/retrieve times must be non-negative");
    require(params.m_copies >= 1, "m_copies must be at least 1");
    std::vector<int> ids;
    for (const auto& c : customers) {
        require(std::isfinite(c.x) && std::isfinite(c.y), "customer coordinates must be finite");
        require(c.service_time_s >= 0, "service time must be non-negative");
        ids.push_back(c.id);
    }
    std::sort(ids.begin(), ids.end());
    require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "customer ids must be unique");
    for (const auto& s : stations)
        require(std::isfinite(s.x) && std::isfinite(s.y), "station coordinates must be finite");
}

std::string Instance::to_json() const {
    nlohmann::json j;
    j["depot"] = {{"x", depot.x}, {"y", depot.y}};
    j["customers"] = nlohmann::json::array();
    for (const auto& c : customers)
        j["customers"].push_back({{"id", c.id}, {"x", c.x}, {"y", c.y},
                                  {"service_time_s", c.service_time_s},
                                  {"weight_kg", c.weight_kg},
                                  {"drone_eligible", c.drone_eligible}});
    j["stations"] = nlohmann::json::array();
    for (const auto& s : stations)
        j["stations"].push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}});
    nlohmann::json p = {{"ev_speed_kmh", params.ev_speed_kmh},
                        {"drone_speed_kmh", params.drone_speed_kmh},
                        {"qt_s", params.qt_s},
                        {"qd_s", params.qd_s},
                        {"gamma", params.gamma},
                        {"launch_s", params.launch_s},
                        {"retrieve_s", params.retrieve_s},
                        {"m_copies", params.m_copies}};
    if (params.max_leg) p["max_leg"] = *params.max_leg;
    j["params"] = p;
    return j.dump(2);
}

Instance Instance::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Instance inst;
    inst.depot.x = j.at("depot").at("x").get<double>();
    inst.depot.y = j.at("depot").at("y").get<double>();
    for (const auto& c : j.at("customers")) {
        NodeRecord r;
        r.id = c.at("id").get<int>();
        r.x = c.at("x").get<double>();
        r.y = c.at("y").get<double>();
        r.service_time_s = c.value("service_time_s", 0.0);
        r.weight_kg = c.value("weight_kg", 0.0);
        r.drone_eligible = c.value("drone_eligible", true);
        inst.customers.push_back(r);
    }
    if (j.contains("stations"))
        for (const auto& s : j.at("stations")) {
            NodeRecord r;
            r.id = s.at("id").get<int>();
            r.x = s.at("x").get<double>();
            r.y = s.at("y").get<double>();
            inst.stations.push_back(r);
        }
    const auto& p = j.at("params");
    inst.params.ev_speed_kmh = p.at("ev_speed_kmh").get<double>();
    inst.params.drone_speed_kmh = p.at("drone_speed_kmh").get<double>();
    inst.params.qt_s = p.at("qt_s").get<double>();
    inst.params.qd_s = p.at("qd_s").get<double>();
    inst.params.gamma = p.value("gamma", 0.4);
    inst.params.launch_s = p.value("launch_s", 100.0);
    inst.params.retrieve_s = p.value("retrieve_s", 20.0);
    inst.params.m_copies = p.value("m_copies", 2);
    if (p.contains("max_leg") && !p.at("max_leg").is_null())
        inst.params.max_leg = p.at("max_leg").get<int>();
    inst.validate();
    return inst;
}

Instance Instance::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void Instance::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << to_json() << '\n';
}

std::function<double(double)> default_weight_range_fn(double qd_s) {
    return [qd_s](double weight_kg) {
        double w = std::clamp(weight_kg, 0.0, 6.0);
        return qd_s * (1.0 - 0.4 * w / 6.0);
    };
}

Instance generate_instance(std::uint64_t seed, int n_customers, int n_stations,
                           const InstanceParams& params, const GenerateOptions& opts) {
    if (n_customers < 1) throw InvalidParameters("n_customers must be at least 1");
    if (n_stations < 0) throw InvalidParameters("n_stations must be non-negative");
    {
        Instance probe;
        probe.customers.push_back({1, 0, 0, 0, 0, true});
        probe.params = params;
        probe.validate(); // rejects bad parameter blocks up front
    }

    Rng rng(seed);
    ChargingModel linear = build_approximation(ChargeCurve::builtin(), 1);

    for (int attempt = 0; attempt < opts.max_regenerations; ++attempt) {
        Instance inst;
        inst.depot = {0, 0.0, 0.0, 0.0, 0.0, false};
        inst.params = params;
        for (int i = 0; i < n_customers; ++i) {
            NodeRecord c;
            c.id = i + 1;
            c.x = rng.uniform(opts.coord_min_km, opts.coord_max_km);
            c.y = rng.uniform(opts.coord_min_km, opts.coord_max_km);
            c.service_time_s = opts.service_time_s;
            // uniform in (0, 6] kg: payload capacity of the drone
            c.weight_kg = opts.random_weights ? 6.0 * (1.0 - rng.uniform()) : 0.0;
            c.drone_eligible = true;
            inst.customers.push_back(c);
        }
        for (int i = 0; i < n_stations; ++i) {
            NodeRecord s;
            s.id = n_customers + i + 1;
            s.x = rng.uniform(opts.coord_min_km, opts.coord_max_km);
            s.y = rng.uniform(opts.coord_min_km, opts.coord_max_km);
            inst.stations.push_back(s);
        }
        inst.validate();

        // EV-only feasibility pre-check: keep only instances MCWS can solve
        AugmentedNetwork net = build_augmented_network(inst, params.m_copies);
        try {
            mcws_initial(net, inst, linear);
            return inst;
        } catch (const ConstructionFailure&) {
            continue;
        }
    }
    throw InfeasibleConfiguration("no EV-feasible instance found within the regeneration limit");
}

} // namespace evtspd
