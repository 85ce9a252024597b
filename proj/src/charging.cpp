#include "evtspd/charging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace evtspd {

double ChargeCurve::soc_at(double t) const {
    if (t <= samples.front().first) return samples.front().second;
    if (t >= samples.back().first) return samples.back().second;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const auto& s) { return v < s.first; });
    const auto& [t1, s1] = *it;
    const auto& [t0, s0] = *(it - 1);
    return s0 + (s1 - s0) * (t - t0) / (t1 - t0);
}

double ChargeCurve::time_at(double soc) const {
    if (soc <= samples.front().second) return samples.front().first;
    if (soc >= samples.back().second) return samples.back().first;
    auto it = std::upper_bound(samples.begin(), samples.end(), soc,
                               [](double v, const auto& s) { return v < s.second; });
    const auto& [t1, s1] = *it;
    const auto& [t0, s0] = *(it - 1);
    return t0 + (t1 - t0) * (soc - s0) / (s1 - s0);
}

void ChargeCurve::validate(double slope_tol) const {
    if (samples.size() < 2) throw InvalidCurve("curve needs at least two samples");
    if (std::abs(samples.front().first) > 1e-12 || std::abs(samples.front().second) > 1e-12)
        throw InvalidCurve("curve must start at (0, 0)");
    if (std::abs(samples.back().second - 1.0) > 1e-12)
        throw InvalidCurve("curve must end at soc = 1");
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < samples.size(); ++i) {
        double dt = samples[i].first - samples[i - 1].first;
        double ds = samples[i].second - samples[i - 1].second;
        if (dt <= 0 || ds <= 0) throw InvalidCurve("curve must be strictly increasing");
        double slope = ds / dt;
        if (slope > prev_slope + slope_tol)
            throw InvalidCurve("curve must be concave (secant slopes non-increasing)");
        prev_slope = slope;
    }
}

ChargeCurve ChargeCurve::builtin(double t_full_s, int n_samples, double lambda) {
    ChargeCurve curve;
    double denom = 1.0 - std::exp(-lambda);
    curve.samples.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        double t = t_full_s * i / (n_samples - 1);
        double soc = (1.0 - std::exp(-lambda * t / t_full_s)) / denom;
        curve.samples.emplace_back(t, soc);
    }
    curve.samples.front() = {0.0, 0.0};
    curve.samples.back() = {t_full_s, 1.0};
    curve.validate();
    return curve;
}

ChargeCurve ChargeCurve::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file: " + path);
    ChargeCurve curve;
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,soc", 0) != 0)
        throw InvalidCurve("curve CSV must start with header time_s,soc");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double t, s;
        char comma;
        if (!(ss >> t >> comma >> s) || comma != ',')
            throw InvalidCurve("malformed curve CSV row: " + line);
        curve.samples.emplace_back(t, s);
    }
    curve.validate();
    return curve;
}

double ChargingModel::soc_at(double t) const {
    t = std::clamp(t, 0.0, t_full());
    // concave piecewise function: the active secant gives the minimum
    double soc = std::numeric_limits<double>::infinity();
    for (const auto& seg : segments)
        soc = std::min(soc, seg.slope * t + seg.intercept);
    return std::clamp(soc, 0.0, 1.0);
}

ChargingModel build_approximation(const ChargeCurve& curve, int segments) {
    if (segments < 1) throw std::invalid_argument("segment count must be at least 1");
    curve.validate();

    ChargingModel model;
    model.kind = segments == 1 ? ChargingModel::Kind::Linear : ChargingModel::Kind::Piecewise;
    model.breakpoints.reserve(segments + 1);
    // breakpoints uniform in SoC, read off the curve
    for (int r = 0; r <= segments; ++r) {
        double soc = static_cast<double>(r) / segments;
        model.breakpoints.emplace_back(curve.time_at(soc), soc);
    }
    for (int r = 0; r < segments; ++r) {
        const auto& [t0, s0] = model.breakpoints[r];
        const auto& [t1, s1] = model.breakpoints[r + 1];
        ChargeSegment seg;
        seg.slope = (s1 - s0) / (t1 - t0);
        seg.intercept = s0 - seg.slope * t0;
        model.segments.push_back(seg);
    }
    return model;
}

double soc_to_time(const ChargingModel& model, double soc) {
    if (soc < 0.0 || soc > 1.0) throw InvalidRange("soc must lie in [0, 1]");
    if (soc <= 0.0) return 0.0;
    // unique segment r with s_r <= soc <= s_{r+1}
    int r = 0;
    while (r + 1 < model.n_segments() && soc > model.breakpoints[r + 1].second) ++r;
    return (soc - model.segments[r].intercept) / model.segments[r].slope;
}

double charge_duration(const ChargingModel& model, double soc_from, double soc_to) {
    if (soc_from > soc_to) throw InvalidRange("soc_from must not exceed soc_to");
    if (model.kind == ChargingModel::Kind::Linear)
        return model.h() * (soc_to - soc_from);
    return soc_to_time(model, soc_to) - soc_to_time(model, soc_from);
}

} // namespace evtspd
