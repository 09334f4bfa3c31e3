#include <catch2/catch.hpp>

#include <filesystem>

#include "tdskit/curve_compare.hpp"
#include "tdskit/release_curve.hpp"

using namespace tdskit;

namespace {

ReleaseCurve triangle_pulse() {
    // unit-height triangle over [0, 4]: area 2
    ReleaseCurve c;
    c.samples = {{0.0, 500.0, 0.0}, {2.0, 510.0, 1.0}, {4.0, 520.0, 0.0}};
    return c;
}

} // namespace

TEST_CASE("curve normalization", "[curve]") {
    SECTION("unit peak is idempotent") {
        auto once = normalize_curve(triangle_pulse(), Normalization::unit_peak);
        auto twice = normalize_curve(once, Normalization::unit_peak);
        REQUIRE(once.samples.size() == twice.samples.size());
        for (std::size_t i = 0; i < once.samples.size(); ++i) {
            CHECK(once.samples[i].rate == twice.samples[i].rate);
        }
        CHECK(once.peak_rate() == 1.0);
        CHECK(once.normalization == Normalization::unit_peak);
    }

    SECTION("positive rescaling of the input leaves the normalized curve unchanged") {
        for (const double c : {0.5, 2.0, 10.0}) {
            auto scaled = triangle_pulse();
            for (auto& s : scaled.samples) s.rate *= c;
            const auto a = normalize_curve(triangle_pulse(), Normalization::unit_peak);
            const auto b = normalize_curve(scaled, Normalization::unit_peak);
            for (std::size_t i = 0; i < a.samples.size(); ++i) {
                CHECK(a.samples[i].rate == Approx(b.samples[i].rate).margin(1e-15));
            }
        }
    }

    SECTION("unit integral divides a pulse of area 2 by 2") {
        const auto n = normalize_curve(triangle_pulse(), Normalization::unit_integral);
        CHECK(n.peak_rate() == Approx(0.5));
        CHECK(n.integral() == Approx(1.0));
    }

    SECTION("times and temperatures are untouched") {
        const auto n = normalize_curve(triangle_pulse(), Normalization::unit_peak);
        CHECK(n.samples[1].time_s == 2.0);
        CHECK(n.samples[1].temperature_K == 510.0);
    }

    SECTION("an all-zero curve cannot be normalized") {
        ReleaseCurve z;
        z.samples = {{0.0, 300.0, 0.0}, {1.0, 301.0, 0.0}};
        CHECK_THROWS_AS(normalize_curve(z, Normalization::unit_peak), std::domain_error);
        CHECK_THROWS_AS(normalize_curve(z, Normalization::unit_integral), std::domain_error);
        ReleaseCurve empty;
        CHECK_THROWS_AS(normalize_curve(empty, Normalization::unit_peak), std::domain_error);
    }
}

TEST_CASE("release curve validation", "[curve]") {
    ReleaseCurve negative;
    negative.samples = {{0.0, 500.0, 0.1}, {1.0, 510.0, -0.5}};
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

    ReleaseCurve slack; // tiny numerical undershoot is tolerated
    slack.samples = {{0.0, 500.0, 0.1}, {1.0, 510.0, -5e-13}};
    CHECK_NOTHROW(slack.validate());

    ReleaseCurve unsorted;
    unsorted.samples = {{1.0, 500.0, 0.1}, {1.0, 510.0, 0.2}};
    CHECK_THROWS_AS(unsorted.validate(), std::invalid_argument);
}

TEST_CASE("release curve CSV round trip", "[curve]") {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "tdskit_release_test.csv";
    const auto curve = normalize_curve(triangle_pulse(), Normalization::unit_peak);
    write_release_csv(curve, p);
    const auto loaded = read_release_csv(p, Normalization::unit_peak);
    REQUIRE(loaded.samples.size() == curve.samples.size());
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        CHECK(loaded.samples[i].time_s == curve.samples[i].time_s);
        CHECK(loaded.samples[i].rate == curve.samples[i].rate);
    }
    fs::remove(p);
}

TEST_CASE("experimental curve interpolation", "[curve]") {
    ExperimentalCurve e;
    e.points = {{500.0, 0.1}, {600.0, 0.5}, {700.0, 0.3}};

    CHECK(interp_experimental(e, 600.0) == 0.5);
    CHECK(interp_experimental(e, 550.0) == Approx(0.3));
    CHECK(interp_experimental(e, 400.0) == 0.1); // clamp below
    CHECK(interp_experimental(e, 900.0) == 0.3); // clamp above

    ExperimentalCurve bad;
    bad.points = {{500.0, 0.1}, {500.0, 0.2}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rmspe", "[curve]") {
    ExperimentalCurve e;
    for (int i = 0; i <= 20; ++i) {
        const double t = 500.0 + 10.0 * i;
        e.points.push_back({t, 0.05 + 0.9 * std::exp(-std::pow((t - 600.0) / 40.0, 2))});
    }

    auto simulated_equal = [&] {
        ReleaseCurve s;
        s.normalization = Normalization::unit_peak;
        for (std::size_t i = 0; i < e.points.size(); ++i) {
            s.samples.push_back({double(i), e.points[i].temperature_K, e.points[i].normalized_rate});
        }
        return s;
    };

    SECTION("identical curves score zero") {
        CHECK(rmspe(simulated_equal(), e) == 0.0);
    }

    SECTION("a constant 10% relative offset scores 10.0") {
        auto s = simulated_equal();
        for (auto& x : s.samples) x.rate *= 1.1;
        CHECK(rmspe(s, e) == Approx(10.0).epsilon(1e-12)); // all e >= floor here
    }

    SECTION("raw curves are rejected; inputs must be pre-normalized") {
        auto s = simulated_equal();
        s.normalization = Normalization::raw;
        CHECK_THROWS_AS(rmspe(s, e), std::invalid_argument);
    }

    SECTION("no overlap is a domain error") {
        ReleaseCurve s;
        s.normalization = Normalization::unit_peak;
        s.samples = {{0.0, 100.0, 0.2}, {1.0, 120.0, 0.4}};
        CHECK_THROWS_AS(rmspe(s, e), std::domain_error);
    }

    SECTION("denominator floor guards vanishing experimental rates") {
        ExperimentalCurve tiny;
        tiny.points = {{500.0, 0.0}, {600.0, 0.0}};
        ReleaseCurve s;
        s.normalization = Normalization::unit_peak;
        s.samples = {{0.0, 550.0, 0.02}};
        // error measured against the floor, not the zero rate
        CHECK(rmspe(s, tiny, 0.01) == Approx(200.0));
    }
}
