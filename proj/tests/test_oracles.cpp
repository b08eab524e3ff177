#include <catch_amalgamated.hpp>

#include <cmath>

#include "floq/oracles.hpp"
#include "floq/propagators.hpp"
#include "floq/spectral.hpp"
#include "support.hpp"

using namespace floq;
using namespace testsup;

namespace {
constexpr double kPi = 3.141592653589793238;
}

TEST_CASE("dominant characteristic root of autonomous delay systems") {
    SECTION("unit-delay scalar equation") {
        SmallMatrix a(1), b(1);
        b(0, 0) = 1.0;
        const auto root = characteristic_root(a, b);
        CHECK(root.lambda.real() == Catch::Approx(0.5671432904).margin(1e-10));
        CHECK(root.lambda.imag() == 0.0);
        CHECK(root.residual <= 1e-12);
        CHECK(root.perron.size() == 1);
        CHECK(root.perron[0] > 0.0);
    }
    SECTION("no delay reduces to the drift coefficient") {
        SmallMatrix a(1), b(1);
        a(0, 0) = -0.37;
        const auto root = characteristic_root(a, b);
        CHECK(root.lambda.real() == Catch::Approx(-0.37).margin(1e-12));
        CHECK(root.residual <= 1e-12);
    }
    SECTION("all-ones coupling") {
        const auto root = characteristic_root(SmallMatrix(2), SmallMatrix::ones(2));
        CHECK(root.lambda.real() == Catch::Approx(0.8526055020137254).margin(1e-10));
        CHECK(root.residual <= 1e-12);
        REQUIRE(root.perron.size() == 2);
        CHECK(root.perron[0] > 0.0);
        CHECK(root.perron[0] == Catch::Approx(root.perron[1]).margin(1e-10));
    }
    SECTION("no bracket means oracle failure") {
        SmallMatrix a(1), b(1);
        a(0, 0) = 100.0;  // dominant root beyond the bracket
        CHECK_THROWS_AS(characteristic_root(a, b), OracleError);
    }
}

TEST_CASE("principal eigenpair of assembled operators") {
    SECTION("absorbing diffusion operator") {
        auto coc = heat_cocycle(99, 16);
        auto w = coc.driving().sample_point(1);
        const TriDiag op = coc.assemble(w);
        const auto eig = elliptic_principal_eig(op);
        const double h = coc.h();
        const double expect = -(4.0 / (h * h)) * std::pow(std::sin(kPi * h / 2.0), 2);
        CHECK(eig.lambda == Catch::Approx(expect).epsilon(1e-10));
        // eigenvector proportional to the lowest sine mode, strictly positive
        double scale = 0.0;
        for (std::size_t i = 0; i < eig.phi.size(); ++i)
            scale = std::max(scale, std::abs(eig.phi[i]));
        for (int i = 0; i < op.n; ++i) {
            CHECK(eig.phi[i] > 0.0);
            const double x = (i + 1) * h;
            CHECK(eig.phi[i] / scale == Catch::Approx(std::sin(kPi * x)).margin(1e-8));
        }
    }
    SECTION("diagonal shifts move the eigenvalue, not the eigenvector") {
        auto coc = heat_cocycle(31, 16);
        auto w = coc.driving().sample_point(1);
        TriDiag op = coc.assemble(w);
        const auto base = elliptic_principal_eig(op);
        for (int i = 0; i < op.n; ++i) op.di[i] += 2.75;
        const auto shifted = elliptic_principal_eig(op);
        CHECK(shifted.lambda == Catch::Approx(base.lambda + 2.75).margin(1e-9));
        for (int i = 0; i < op.n; ++i)
            CHECK(shifted.phi[i] == Catch::Approx(base.phi[i]).margin(1e-9));
    }
    SECTION("conservative operator has a flat principal mode at rate zero") {
        auto coc = heat_cocycle(31, 16, BoundaryKind::neumann);
        auto w = coc.driving().sample_point(1);
        const auto eig = elliptic_principal_eig(coc.assemble(w));
        CHECK(eig.lambda == Catch::Approx(0.0).margin(1e-10));
        for (int i = 1; i < static_cast<int>(eig.phi.size()); ++i)
            CHECK(eig.phi[i] == Catch::Approx(eig.phi[0]).margin(1e-9));
    }
}

TEST_CASE("period-map growth rates") {
    SECTION("autonomous scalar drift") {
        auto coc = scalar_delay(0.42, 0.0, 32);
        DelayPropagator prop{&coc};
        auto w = coc.driving().sample_point(1);
        CHECK(monodromy_exponent(prop, w, 1.0) == Catch::Approx(0.42).margin(1e-10));
    }
    SECTION("periodic drift averages over one period") {
        DrivingSystem drv = periodic_driving(1.0);
        const double tp = 6.283185307179586477;
        MatrixPath a = [tp](const DrivingPoint& p, SmallMatrix& m) {
            if (m.n != 1) m = SmallMatrix(1);
            m(0, 0) = 0.3 + 0.8 * std::sin(tp * p.x[0]);
        };
        MatrixPath b = [](const DrivingPoint&, SmallMatrix& m) {
            if (m.n != 1) m = SmallMatrix(1);
            m(0, 0) = 0.0;
        };
        DelayCocycle coc(drv, 1, 64, std::move(a), std::move(b));
        DelayPropagator prop{&coc};
        auto w = coc.driving().sample_point(1);
        CHECK(monodromy_exponent(prop, w, 1.0) == Catch::Approx(0.3).margin(1e-10));
    }
    SECTION("agreement with the orbit estimator on a periodic delay system") {
        DrivingSystem drv = periodic_driving(1.0);
        const double tp = 6.283185307179586477;
        MatrixPath a = [tp](const DrivingPoint& p, SmallMatrix& m) {
            if (m.n != 1) m = SmallMatrix(1);
            m(0, 0) = -0.2 + 0.3 * std::sin(tp * p.x[0]);
        };
        MatrixPath b = [tp](const DrivingPoint& p, SmallMatrix& m) {
            if (m.n != 1) m = SmallMatrix(1);
            m(0, 0) = 0.6 + 0.2 * std::cos(tp * p.x[0]);
        };
        DelayCocycle coc(drv, 1, 64, std::move(a), std::move(b));
        DelayPropagator prop{&coc};
        auto w = coc.driving().sample_point(1);
        const double mono = monodromy_exponent(prop, w, 1.0);
        ExponentOptions o;
        o.horizon = 40.0;
        o.burn_in = 10.0;
        const auto est = top_exponent(prop, w, prop.cone_reference(), o);
        CHECK(std::abs(mono - est.lambda) <= 1e-4);
    }
    SECTION("characteristic root and period map agree on an autonomous system") {
        auto coc = constant_delay(SmallMatrix(2), SmallMatrix::ones(2), 48);
        DelayPropagator prop{&coc};
        auto w = coc.driving().sample_point(1);
        const double mono = monodromy_exponent(prop, w, 1.0);
        const auto root = characteristic_root(SmallMatrix(2), SmallMatrix::ones(2));
        CHECK(std::abs(mono - root.lambda.real()) <= 1e-6);
    }
    SECTION("dense cap refusal") {
        auto coc = scalar_delay(0.1, 0.2, 4096);
        DelayPropagator prop{&coc};
        auto w = coc.driving().sample_point(1);
        CHECK_THROWS_AS(monodromy_exponent(prop, w, 1.0), OracleError);
    }
}
