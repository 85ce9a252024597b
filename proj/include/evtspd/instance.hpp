#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evtspd {

struct NodeRecord {
    int id = 0;
    double x = 0.0; // km
    double y = 0.0; // km
    double service_time_s = 0.0;
    double weight_kg = 0.0;
    bool drone_eligible = true;
};

struct InstanceParams {
    double ev_speed_kmh = 40.0;
    double drone_speed_kmh = 60.0;
    double qt_s = 9000.0;  // EV energy budget, seconds of driving
    double qd_s = 1200.0;  // drone energy budget, seconds of flight
    double gamma = 0.4;    // drone-to-EV energy consumption rate ratio
    double launch_s = 100.0;
    double retrieve_s = 20.0;
    std::optional<int> max_leg;
    int m_copies = 2;
};

struct InvalidParameters : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleConfiguration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Instance {
    NodeRecord depot; // at (0,0) for generated instances
    std::vector<NodeRecord> customers;
    std::vector<NodeRecord> stations;
    InstanceParams params;

    // Optional payload-weight -> drone energy budget (seconds). Empty means
    // the constant budget qd_s applies to every sortie.
    std::function<double(double)> weight_range_fn;

    void validate() const;

    std::string to_json() const;
    static Instance from_json(const std::string& text);
    static Instance load(const std::string& path);
    void save(const std::string& path) const;
};

struct GenerateOptions {
    double coord_min_km = -20.0;
    double coord_max_km = 20.0;
    double service_time_s = 0.0;
    bool random_weights = true; // uniform in (0, 6] kg
    int max_regenerations = 1000;
};

Instance generate_instance(std::uint64_t seed, int n_customers, int n_stations,
                           const InstanceParams& params,
                           const GenerateOptions& opts = {});

// Default weight-dependent flying range used by the Range variant: the
// budget shrinks linearly from the full qd_s at zero payload to 60% of it
// at the 6 kg payload capacity.
std::function<double(double)> default_weight_range_fn(double qd_s);

} // namespace evtspd
