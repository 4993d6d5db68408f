#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "vscsync/control.hpp"
#include "vscsync/integrator.hpp"
#include "vscsync/plant.hpp"

using namespace vscsync;

TEST_CASE("ATAN detector")
{
    CHECK(*phase_detector_atan(Vec2(1.0, 0.0), 0.0, 1e-9) == 0.0);
    for (double d : {-3.0, -1.0, 0.2, 2.5}) {
        for (double phi : {-0.5, 0.0, 0.7}) {
            for (double c : {1e-3, 1.0, 7e5}) {
                const Vec2 x = c * rotation(d).col(0);
                CHECK(*phase_detector_atan(x, phi, 1e-9) == doctest::Approx(wrap_to_pi(d - phi)));
            }
        }
    }
    // Branch jumps are wrapped, not accumulated.
    const double e = *phase_detector_atan(rotation(3.0).col(0), -1.0, 0.0);
    CHECK(e >= -kPi);
    CHECK(e < kPi);
    CHECK_FALSE(phase_detector_atan(Vec2(1e-7, 0.0), 0.0, 1e-6).has_value());
}

TEST_CASE("SRF detector")
{
    CHECK(phase_detector_srf(Vec2(1.0, 0.0), 0.0) == 0.0);
    CHECK(phase_detector_srf(Vec2(0.0, 1.0), 0.0) == 1.0);
    const Vec2 x = 3.0 * rotation(0.9).col(0);
    CHECK(phase_detector_srf(x, 0.4) == doctest::Approx(3.0 * std::sin(0.5)));
    CHECK(std::abs(phase_detector_srf(x, 0.9 - kPi)) < 1e-12);
}

TEST_CASE("baseline detector shares the formula")
{
    const DqVec v{2e5, 3e4};
    CHECK(*baseline_detector(v, 0.1, DetectorKind::Atan, 1.0) ==
          *phase_detector_atan(v.vec(), 0.1, 1.0));
    CHECK(*baseline_detector(v, 0.1, DetectorKind::Srf, 0.0) == phase_detector_srf(v.vec(), 0.1));
}

TEST_CASE("PLL law")
{
    PllGains g;
    const double w = 100 * kPi;
    const PllOutput lock = pll_update(-w / g.ki, 0.0, g);
    CHECK(lock.u1 == doctest::Approx(w));
    CHECK(lock.xc_dot == 0.0);
    CHECK(pll_update(0.0, 0.0, g).u1 == 0.0);
    const PllOutput o = pll_update(0.01, 0.2, g);
    CHECK(o.xc_dot == 0.2);
    CHECK(o.u1 == doctest::Approx(-200.0 * 0.2 - 1000.0 * 0.01));
    g.ki = 0.0;
    CHECK_THROWS(g.validate());
}

TEST_CASE("current controller feedforward")
{
    CurrentGains g;
    ConverterModel m;
    MeasuredOutput y;
    y.v = Vec2(3e5, -1e4);
    y.i = Vec2(1000.0, 200.0);
    const double u1 = 310.0;
    const CurrentOutput out = current_controller(Vec2::Zero(), y, y.i, u1, g, m);
    CHECK(out.xc_dot.isZero());
    const Vec2 ff = y.v + m.r * y.i - m.L * u1 * (kJ * y.i);
    CHECK((out.u - ff).norm() < 1e-9 * ff.norm());
}

TEST_CASE("closed current loop is the second-order system p^2 + K_P p + K_I")
{
    SystemParams p;
    CurrentGains g;
    ConverterModel m{p.r, p.L};
    const Vec2 i_ref(1500.0, -300.0);

    // Converter branch with an arbitrary time-varying PCC voltage and frame speed.
    using Vec4 = Eigen::Vector4d;
    auto f = [&](double t, const Vec4& x) {
        PlantState s;
        s.i = x.head<2>();
        s.v = Vec2(3e5 + 2e4 * std::sin(40 * t), 1e4 * std::cos(70 * t));
        const double u1 = p.omega + 30 * std::sin(11 * t);
        const CurrentOutput c = current_controller(x.tail<2>(), MeasuredOutput::from(s), i_ref, u1, g, m);
        Vec4 d;
        d << plant_deriv_dq(s, {u1, c.u}, p).i, c.xc_dot;
        return d;
    };
    Vec4 x;
    x << 200.0, 100.0, 0.0, 0.0;
    const Vec2 e0 = x.head<2>() - i_ref;

    // e(t) = exp(sigma t)(A cos wd t + B sin wd t), e(0) = e0, e'(0) = -K_P e0.
    const double kp = g.kp(0, 0);
    const double ki = g.ki(0, 0);
    const std::complex<double> root = (-kp + std::sqrt(std::complex<double>(kp * kp - 4 * ki))) / 2.0;
    CHECK(root.real() == doctest::Approx(-125.0));
    CHECK(std::abs(root.imag()) == doctest::Approx(std::sqrt(50000.0 - 125.0 * 125.0)));
    const double sigma = root.real();
    const double wd = std::abs(root.imag());
    auto closed = [&](double t) {
        const Vec2 a = e0;
        const Vec2 b = (-kp * e0 - sigma * a) / wd;
        return Vec2(std::exp(sigma * t) * (a * std::cos(wd * t) + b * std::sin(wd * t)));
    };

    const double h = 1e-5;
    double worst = 0.0;
    double settle = 0.0;
    for (int k = 1; k <= 10000; ++k) {
        x = rk4_step<Vec4>(f, (k - 1) * h, x, h);
        const Vec2 e = x.head<2>() - i_ref;
        worst = std::max(worst, (e - closed(k * h)).norm() / e0.norm());
        if (e.norm() > 0.02 * e0.norm()) {
            settle = k * h;
        }
    }
    CHECK(worst < 1e-8);
    // About 4 / 125 s to the 2 % band.
    CHECK(settle > 0.025);
    CHECK(settle < 0.04);
}

TEST_CASE("current gains must be positive definite")
{
    CurrentGains g;
    CHECK_NOTHROW(g.validate());
    g.kp(0, 0) = -1.0;
    CHECK_THROWS(g.validate());
}
