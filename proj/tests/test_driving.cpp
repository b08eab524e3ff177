#include <catch_amalgamated.hpp>

#include <cmath>

#include "floq/driving.hpp"

using namespace floq;

namespace {
DrivingSystem torus12() {
    DrivingConfig c;
    c.kind = DrivingKind::torus;
    c.dimension = 2;
    c.frequencies = {1.0, std::sqrt(2.0)};
    return DrivingSystem(c);
}

DrivingSystem periodic(double alpha = 1.0) {
    DrivingConfig c;
    c.kind = DrivingKind::periodic;
    c.dimension = 1;
    c.frequencies = {alpha};
    return DrivingSystem(c);
}
}  // namespace

TEST_CASE("advance follows the rotation") {
    auto sys = periodic();
    auto p = sys.make_point({0.25});
    CHECK(sys.advance(p, 0.5).x[0] == Catch::Approx(0.75).margin(1e-15));
    CHECK(sys.advance(p, 0.0).x[0] == p.x[0]);

    auto sys2 = torus12();
    auto q = sys2.advance(sys2.make_point({0.9, 0.1}), 0.2);
    CHECK(q.x[0] == Catch::Approx(0.1).margin(1e-14));
    CHECK(q.x[1] == Catch::Approx(std::fmod(0.1 + 0.2 * std::sqrt(2.0), 1.0)).margin(1e-15));
    CHECK(q.x[1] == Catch::Approx(0.38284271247461906).margin(1e-12));
}

TEST_CASE("group law and invertibility are exact") {
    auto sys = torus12();
    auto p = sys.make_point({0.37, 0.81});
    const double s = 0.73, t = 1.91;
    auto a = sys.advance(sys.advance(p, s), t);
    auto b = sys.advance(p, s + t);
    REQUIRE(a.x.size() == b.x.size());
    for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);

    auto back = sys.advance(sys.advance(p, t), -t);
    for (std::size_t i = 0; i < p.x.size(); ++i) CHECK(back.x[i] == p.x[i]);
}

TEST_CASE("periodic driving has period one") {
    auto sys = periodic(1.0);
    auto p = sys.make_point({0.625});
    auto q = sys.advance(p, 1.0);
    CHECK(q.x[0] == p.x[0]);
}

TEST_CASE("sampling the invariant measure") {
    auto sys = torus12();
    auto a = sys.sample_point(42), b = sys.sample_point(42), c = sys.sample_point(43);
    CHECK(a.x == b.x);
    CHECK(a.x != c.x);

    double mean0 = 0.0, mean1 = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        auto p = sys.sample_point(1000 + s);
        mean0 += p.x[0];
        mean1 += p.x[1];
    }
    CHECK(mean0 / n == Catch::Approx(0.5).margin(0.02));
    CHECK(mean1 / n == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("coefficient paths compose the table with the flow") {
    auto sys = periodic();
    auto p = sys.make_point({0.2});

    auto constant = coefficient_path(sys, p, [](const DrivingPoint&) { return 3.5; });
    CHECK(constant(-2.3) == 3.5);
    CHECK(constant(17.0) == 3.5);

    auto wave = coefficient_path(sys, p, [](const DrivingPoint& q) {
        return std::sin(2.0 * 3.141592653589793 * q.x[0]);
    });
    for (double t : {-1.4, 0.0, 0.3, 2.7})
        CHECK(wave(t) == Catch::Approx(std::sin(2.0 * 3.141592653589793 * (0.2 + t))).margin(1e-12));
}

TEST_CASE("random-fourier channels are seeded and two-sided") {
    DrivingConfig c;
    c.kind = DrivingKind::random_fourier;
    c.modes = 6;
    c.seed = 99;
    DrivingSystem sys(c);
    DrivingSystem sys2(c);
    auto ch = sys.fourier_channel(0);
    auto ch2 = sys2.fourier_channel(0);
    auto p = sys.sample_point(5);
    for (double t : {-3.7, -0.5, 0.0, 1.1, 8.9})
        CHECK(ch(sys.advance(p, t)) == ch2(sys2.advance(sys2.sample_point(5), t)));
    // distinct channels differ
    auto other = sys.fourier_channel(1);
    CHECK(ch(p) != other(p));
}

TEST_CASE("config validation") {
    DrivingConfig c;
    c.kind = DrivingKind::torus;
    c.dimension = 2;
    c.frequencies = {1.0, 0.5};  // ratio 2/1
    CHECK_THROWS_AS(DrivingSystem(c), ConfigError);

    c.frequencies = {1.0, 1.0 / 3.0 + 1e-12};
    CHECK_THROWS_AS(DrivingSystem(c), ConfigError);

    DrivingConfig d;
    d.kind = DrivingKind::periodic;
    d.dimension = 2;
    d.frequencies = {1.0, 2.0};
    CHECK_THROWS_AS(DrivingSystem(d), ConfigError);
}
