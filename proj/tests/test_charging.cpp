#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "evtspd/charging.hpp"
#include "evtspd/rng.hpp"

using namespace evtspd;

TEST_CASE("builtin curve endpoints and shape") {
    ChargeCurve curve = ChargeCurve::builtin();
    CHECK(curve.samples.front().first == 0.0);
    CHECK(curve.samples.front().second == 0.0);
    CHECK(curve.t_full() == doctest::Approx(5400.0));
    CHECK(curve.samples.back().second == doctest::Approx(1.0));
    curve.validate();

    // strictly increasing, concave (secant slopes non-increasing)
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < curve.samples.size(); ++i) {
        double dt = curve.samples[i].first - curve.samples[i - 1].first;
        double ds = curve.samples[i].second - curve.samples[i - 1].second;
        CHECK(dt > 0.0);
        CHECK(ds > 0.0);
        double slope = ds / dt;
        CHECK(slope <= prev_slope + 1e-12);
        prev_slope = slope;
    }
}

TEST_CASE("builtin curve matches its closed form") {
    ChargeCurve curve = ChargeCurve::builtin();
    double lambda = 3.0, tf = 5400.0;
    for (double t : {270.0, 1111.0, 2700.0, 4321.0, 5000.0}) {
        double want = (1.0 - std::exp(-lambda * t / tf)) / (1.0 - std::exp(-lambda));
        CHECK(curve.soc_at(t) == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK(curve.soc_at(0.0) == 0.0);
    CHECK(curve.soc_at(tf) == doctest::Approx(1.0));
}

TEST_CASE("curve time_at inverts soc_at") {
    ChargeCurve curve = ChargeCurve::builtin();
    for (double s : {0.05, 0.3, 0.5, 0.77, 0.99}) {
        double t = curve.time_at(s);
        CHECK(curve.soc_at(t) == doctest::Approx(s).epsilon(1e-9));
    }
}

TEST_CASE("linear model is the full-range secant") {
    ChargeCurve curve = ChargeCurve::builtin();
    ChargingModel lin = build_approximation(curve, 1);
    CHECK(lin.kind == ChargingModel::Kind::Linear);
    CHECK(lin.n_segments() == 1);
    REQUIRE(lin.breakpoints.size() == 2);
    CHECK(lin.breakpoints.front().first == 0.0);
    CHECK(lin.breakpoints.front().second == 0.0);
    CHECK(lin.breakpoints.back().first == doctest::Approx(curve.t_full()));
    CHECK(lin.breakpoints.back().second == doctest::Approx(1.0));
    // H = seconds per full soc equals the full charging time for a
    // secant from (0,0) to (t_full,1)
    CHECK(lin.h() == doctest::Approx(curve.t_full()));
}

TEST_CASE("piecewise breakpoints sit on the curve, uniform in soc") {
    ChargeCurve curve = ChargeCurve::builtin();
    for (int r : {2, 4, 6}) {
        ChargingModel m = build_approximation(curve, r);
        CHECK(m.kind == ChargingModel::Kind::Piecewise);
        CHECK(m.n_segments() == r);
        REQUIRE(static_cast<int>(m.breakpoints.size()) == r + 1);
        for (int i = 0; i <= r; ++i) {
            double soc = m.breakpoints[i].second;
            CHECK(soc == doctest::Approx(static_cast<double>(i) / r).epsilon(1e-9));
            CHECK(curve.soc_at(m.breakpoints[i].first) == doctest::Approx(soc).epsilon(1e-9));
        }
        // secant slopes decrease with soc (concavity carries over)
        for (int i = 1; i < r; ++i)
            CHECK(m.segments[i].slope <= m.segments[i - 1].slope + 1e-12);
    }
}

TEST_CASE("model never overestimates the curve") {
    ChargeCurve curve = ChargeCurve::builtin();
    for (int r : {1, 2, 4, 6}) {
        ChargingModel m = build_approximation(curve, r);
        for (int i = 0; i <= 1000; ++i) {
            double t = curve.t_full() * i / 1000.0;
            CHECK(m.soc_at(t) <= curve.soc_at(t) + 1e-12);
        }
    }
}

TEST_CASE("soc_to_time agrees with bisection on the model") {
    ChargeCurve curve = ChargeCurve::builtin();
    for (int r : {1, 3, 6}) {
        ChargingModel m = build_approximation(curve, r);
        Rng rng(42);
        for (int trial = 0; trial < 200; ++trial) {
            double soc = rng.uniform();
            // independent inverse via bisection on the model function
            double lo = 0.0, hi = m.t_full();
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (m.soc_at(mid) < soc ? lo : hi) = mid;
            }
            CHECK(soc_to_time(m, soc) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-7));
        }
    }
}

TEST_CASE("charge_duration is additive and consistent with soc_to_time") {
    ChargeCurve curve = ChargeCurve::builtin();
    for (int r : {1, 4}) {
        ChargingModel m = build_approximation(curve, r);
        Rng rng(7);
        for (int trial = 0; trial < 1000; ++trial) {
            double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
            if (a > b) std::swap(a, b);
            if (b > c) std::swap(b, c);
            if (a > b) std::swap(a, b);
            double lhs = charge_duration(m, a, b) + charge_duration(m, b, c);
            CHECK(lhs == doctest::Approx(charge_duration(m, a, c)).epsilon(1e-9));
            CHECK(charge_duration(m, a, c) ==
                  doctest::Approx(soc_to_time(m, c) - soc_to_time(m, a)).epsilon(1e-9));
        }
        CHECK(charge_duration(m, 0.0, 1.0) == doctest::Approx(m.t_full()));
    }
}

TEST_CASE("csv round trip") {
    ChargeCurve curve = ChargeCurve::builtin(5400.0, 21);
    const char* path = "curve_tmp.csv";
    {
        std::ofstream out(path);
        out << "time_s,soc\n";
        out.precision(17);
        for (auto& [t, s] : curve.samples) out << t << "," << s << "\n";
    }
    ChargeCurve back = ChargeCurve::load_csv(path);
    std::remove(path);
    REQUIRE(back.samples.size() == curve.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i) {
        CHECK(back.samples[i].first == doctest::Approx(curve.samples[i].first));
        CHECK(back.samples[i].second == doctest::Approx(curve.samples[i].second));
    }
}

TEST_CASE("invalid curves are rejected") {
    ChargeCurve bad;
    bad.samples = {{0.0, 0.0}, {10.0, 0.5}, {5.0, 1.0}}; // time not increasing
    CHECK_THROWS_AS(bad.validate(), InvalidCurve);
    bad.samples = {{0.0, 0.0}, {10.0, 0.2}, {20.0, 1.0}}; // convex
    CHECK_THROWS_AS(bad.validate(), InvalidCurve);
    CHECK_THROWS_AS(build_approximation(ChargeCurve::builtin(), 0), std::invalid_argument);
    ChargingModel lin = build_approximation(ChargeCurve::builtin(), 1);
    CHECK_THROWS_AS(soc_to_time(lin, 1.5), InvalidRange);
    CHECK_THROWS_AS(charge_duration(lin, 0.7, 0.2), InvalidRange);
}
