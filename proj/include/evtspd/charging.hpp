#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evtspd {

struct InvalidCurve : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sampled concave time-SoC curve: (0,0) to (t_full, 1), strictly
// increasing, secant slopes non-increasing.
struct ChargeCurve {
    std::vector<std::pair<double, double>> samples; // (time s, soc fraction)

    double t_full() const { return samples.back().first; }
    double soc_at(double t) const;  // linear interpolation between samples
    double time_at(double soc) const;
    void validate(double slope_tol = 1e-9) const;

    // Analytic stand-in for the rescaled 90-minute charging curve:
    // soc(t) = (1 - exp(-lambda t / t_full)) / (1 - exp(-lambda)).
    static ChargeCurve builtin(double t_full_s = 5400.0, int n_samples = 2001,
                               double lambda = 3.0);
    // CSV with header "time_s,soc"
    static ChargeCurve load_csv(const std::string& path);
};

struct ChargeSegment {
    double slope = 0.0;     // soc fraction per second (K_r)
    double intercept = 0.0; // soc fraction (B_r)
};

struct ChargingModel {
    enum class Kind { Linear, Piecewise };
    Kind kind = Kind::Linear;
    std::vector<ChargeSegment> segments;                // R secants
    std::vector<std::pair<double, double>> breakpoints; // R+1, on the curve

    int n_segments() const { return static_cast<int>(segments.size()); }
    double t_full() const { return breakpoints.back().first; }
    // seconds per full soc fraction of the linear model
    double h() const { return 1.0 / segments.front().slope; }
    double soc_at(double t) const; // model's piecewise function
};

// R = 1 gives the linear model (full-range secant); R >= 2 places R+1
// breakpoints on the curve, uniformly spaced in SoC.
ChargingModel build_approximation(const ChargeCurve& curve, int segments);

double soc_to_time(const ChargingModel& model, double soc);
double charge_duration(const ChargingModel& model, double soc_from, double soc_to);

} // namespace evtspd
