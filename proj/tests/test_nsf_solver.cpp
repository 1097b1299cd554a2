#include "doctest.h"

#include "bll/errors.hpp"
#include "bll/nsf_solver.hpp"

#include <cmath>
#include <numbers>

using namespace bll;
using std::numbers::pi;

namespace {

NsfScenario base(int nx, int nz, double eps) {
    NsfScenario sc;
    sc.grid = Grid(nx, nz);
    sc.G = ScalarField(sc.grid);
    sc.T0 = ScalarField(sc.grid);
    sc.U0 = VectorField(sc.grid);
    sc.theta_b_bottom.assign(nx, 0.0);
    sc.theta_b_top.assign(nx, 0.0);
    sc.eps = eps;
    sc.t_end = 0.1;
    return sc;
}

void set_potential(NsfScenario& sc, double g) {
    sc.G_fn = [g](double, double z) { return -g * (z - 0.5); };
    sc.G = sample(sc.grid, sc.G_fn);
}

NsfScenario convection(int nx, int nz, double eps) {
    auto sc = base(nx, nz, eps);
    set_potential(sc, 1.0);
    sc.theta_b_bottom.assign(nx, 1.0);
    sc.theta_b_top.assign(nx, -1.0);
    sc.T0 = sample(sc.grid, [](double x, double z) {
        return 1.0 - 2.0 * z + 0.2 * std::cos(2 * pi * x) * std::sin(pi * z);
    });
    return sc;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a.values()[n] - b.values()[n]));
    return m;
}

} // namespace

TEST_CASE("build_initial_nsf") {
    auto sc = base(8, 8, 0.1);
    auto s = build_initial_nsf(sc);
    CHECK(max_abs_diff(s.rho, ScalarField(sc.grid, Staggering::Center, 1.0)) == 0.0);
    CHECK(max_abs_diff(s.theta, ScalarField(sc.grid, Staggering::Center, 1.0)) == 0.0);
    CHECK(s.u.max_abs() == 0.0);

    set_potential(sc, 2.0);
    s = build_initial_nsf(sc);
    for (int k = 0; k < 8; ++k)
        CHECK(s.rho(3, k) == doctest::Approx(1.0 + 0.1 * sc.G(3, k)).epsilon(1e-14));

    auto hot = base(8, 8, 1.0);
    hot.theta_b_bottom.assign(8, -2.0);
    hot.theta_b_top.assign(8, -2.0);
    hot.T0 = ScalarField(hot.grid, Staggering::Center, -2.0);
    try {
        build_initial_nsf(hot);
        FAIL("expected eps-too-large");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
    }
}

TEST_CASE("uniform state is an exact fixed point") {
    auto sc = base(8, 8, 0.1);
    auto s = build_initial_nsf(sc);
    const auto s0 = s;
    for (int n = 0; n < 10; ++n) step_nsf(s, sc, nsf_stable_dt(s, sc));
    CHECK(max_abs_diff(s.rho, s0.rho) == 0.0);
    CHECK(max_abs_diff(s.theta, s0.theta) == 0.0);
    CHECK(s.u.max_abs() == 0.0);
    CHECK(s.w.max_abs() == 0.0);
}

TEST_CASE("mass is conserved to round-off") {
    auto sc = convection(16, 8, 0.1);
    sc.t_end = 0.2;
    const auto run = run_nsf(sc);
    const double m0 = run.log.mass.front();
    for (double m : run.log.mass) CHECK(std::abs(m - m0) <= 1e-12 * m0);
    CHECK(run.final_state.t == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("output times are hit exactly") {
    auto sc = convection(8, 8, 0.2);
    sc.t_end = 0.05;
    sc.cadence = 0.02;
    const auto run = run_nsf(sc);
    REQUIRE(run.snapshots.size() == 4);
    CHECK(run.snapshots[1].t == 0.02);
    CHECK(run.snapshots[2].t == 0.04);
    CHECK(run.snapshots[3].t == 0.05);
}

TEST_CASE("CFL violation is rejected with a suggestion") {
    auto sc = convection(8, 8, 0.1);
    auto s = build_initial_nsf(sc);
    try {
        step_nsf(s, sc, 1.0);
        FAIL("expected CflError");
    } catch (const CflError& e) {
        CHECK(e.suggested_dt() > 0.0);
        CHECK(e.suggested_dt() < 1.0);
    }
    sc.dt = 1.0;
    CHECK_THROWS_AS(run_nsf(sc), CflError);
}

TEST_CASE("hydrostatic oracle") {
    auto sc = base(8, 32, 0.1);
    set_potential(sc, 3.0);
    auto prof = hydrostatic_stationary_1d(sc);
    // Ideal gas with uniform temperature: rho = C exp(eps G / theta_bar).
    double integral = 0.0;
    const double eg = 0.1 * 3.0;
    integral = (std::exp(eg * 0.5) - std::exp(-eg * 0.5)) / eg;
    const double C = 1.0 / integral;
    for (std::size_t k = 0; k < prof.z.size(); ++k) {
        CHECK(prof.rho[k] == doctest::Approx(C * std::exp(0.1 * sc.G_fn(0, prof.z[k]))).epsilon(1e-10));
        CHECK(prof.theta[k] == doctest::Approx(1.0).epsilon(1e-14));
    }

    set_potential(sc, 0.0);
    prof = hydrostatic_stationary_1d(sc);
    for (double r : prof.rho) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));

    // Linear approach to rho_bar as eps -> 0.
    auto dev = [&](double eps) {
        auto s2 = base(8, 16, eps);
        set_potential(s2, 3.0);
        auto p = hydrostatic_stationary_1d(s2);
        double m = 0.0;
        for (double r : p.rho) m = std::max(m, std::abs(r - 1.0));
        return m;
    };
    CHECK(dev(0.02) / dev(0.01) == doctest::Approx(2.0).epsilon(0.02));

    auto bad = base(8, 16, 0.1);
    bad.G_fn = [](double x, double z) { return std::sin(2 * pi * x) * z; };
    bad.G = sample(bad.grid, bad.G_fn);
    CHECK_THROWS_AS(hydrostatic_stationary_1d(bad), Error);
    auto bad_walls = base(8, 16, 0.1);
    bad_walls.theta_b_bottom[2] = 0.5;
    CHECK_THROWS_AS(hydrostatic_stationary_1d(bad_walls), Error);
}

TEST_CASE("hydrostatic oracle with heated walls and radiation") {
    auto sc = base(8, 64, 0.1);
    set_potential(sc, 2.0);
    sc.eos.a = 0.5;
    sc.eos.p_inf = 0.3;
    sc.theta_b_bottom.assign(8, 1.0);
    sc.theta_b_top.assign(8, -1.0);
    const auto prof = hydrostatic_stationary_1d(sc);
    // Check grad p = eps rho grad G by differencing the sampled profile.
    for (std::size_t k = 1; k + 1 < prof.z.size(); ++k) {
        const double pm = thermo::pressure({prof.rho[k - 1], prof.theta[k - 1]}, sc.eos);
        const double pp = thermo::pressure({prof.rho[k + 1], prof.theta[k + 1]}, sc.eos);
        const double dpdz = (pp - pm) / (prof.z[k + 1] - prof.z[k - 1]);
        CHECK(dpdz == doctest::Approx(0.1 * prof.rho[k] * -2.0).epsilon(1e-3));
    }
    double mass = 0.0;
    for (double r : prof.rho) mass += r / 64.0;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("hydrostatic balance drifts at O(h^2)") {
    auto drift = [](int nx, int nz) {
        auto sc = base(nx, nz, 0.1);
        set_potential(sc, 3.0);
        sc.t_end = 0.3;
        const auto prof = hydrostatic_stationary_1d(sc);
        auto s = build_initial_nsf(sc);
        for (int k = 0; k < nz; ++k)
            for (int i = 0; i < nx; ++i) s.rho(i, k) = prof.rho[k];
        while (s.t < sc.t_end - 1e-12) step_nsf(s, sc, std::min(nsf_stable_dt(s, sc), sc.t_end - s.t));
        double m = 0.0;
        for (int k = 0; k < nz; ++k)
            for (int i = 0; i < nx; ++i) m = std::max(m, std::abs(s.rho(i, k) - prof.rho[k]));
        return m;
    };
    const double d1 = drift(8, 16), d2 = drift(8, 32);
    MESSAGE("hydrostatic drift " << d1 << " " << d2);
    CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("acoustic pulse travels at the scaled sound speed") {
    auto sc = base(128, 4, 0.1);
    sc.eos.kappa0 = 1e-4;
    sc.eos.mu0 = 1e-4;
    auto s = build_initial_nsf(sc);
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 128; ++i) {
            const double x = sc.grid.x_center(i);
            s.rho(i, k) *= 1.0 + 1e-3 * std::exp(-std::pow((x - 0.5) / 0.04, 2));
        }
    auto peak = [&]() {
        // Right-moving pulse: maximum of p over x > 0.5, refined by a parabola.
        int best = 64;
        double pbest = -1.0;
        for (int i = 64; i < 128; ++i) {
            const double p = thermo::pressure({s.rho(i, 1), s.theta(i, 1)}, sc.eos);
            if (p > pbest) {
                pbest = p;
                best = i;
            }
        }
        auto pv = [&](int i) { return thermo::pressure({s.rho(i, 1), s.theta(i, 1)}, sc.eos); };
        const double a = pv(best - 1), b = pv(best), c = pv(best + 1);
        const double off = 0.5 * (a - c) / (a - 2 * b + c);
        return sc.grid.x_center(best) + off * sc.grid.dx;
    };
    auto advance = [&](double t) {
        while (s.t < t - 1e-14) step_nsf(s, sc, std::min(nsf_stable_dt(s, sc), t - s.t));
    };
    advance(0.006);
    const double x1 = peak();
    advance(0.024);
    const double x2 = peak();
    const double measured = (x2 - x1) / 0.018;
    const double expected = std::sqrt(thermo::sound_speed_sq({1.0, 1.0}, sc.eos)) / 0.1;
    MESSAGE("acoustic speed " << measured << " expected " << expected);
    CHECK(std::abs(measured / expected - 1.0) <= 0.1);
}

TEST_CASE("x-mirror symmetry") {
    auto sc = convection(16, 8, 0.2);
    sc.t_end = 0.05;
    // Asymmetric initial data, and its mirror image about x = 1/2.
    sc.T0 = sample(sc.grid, [](double x, double z) {
        return 1.0 - 2.0 * z + 0.2 * std::sin(2 * pi * x) * std::sin(pi * z) + 0.1 * std::cos(4 * pi * x) * std::sin(pi * z);
    });
    auto mir = sc;
    mir.T0 = sample(mir.grid, [](double x, double z) {
        const double xm = 1.0 - x;
        return 1.0 - 2.0 * z + 0.2 * std::sin(2 * pi * xm) * std::sin(pi * z) + 0.1 * std::cos(4 * pi * xm) * std::sin(pi * z);
    });
    const auto a = run_nsf(sc).final_state;
    const auto b = run_nsf(mir).final_state;
    double worst = 0.0;
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 16; ++i) {
            const int j = 15 - i;
            worst = std::max({worst, std::abs(a.rho(i, k) - b.rho(j, k)), std::abs(a.theta(i, k) - b.theta(j, k)),
                              std::abs(a.u(i, k) + b.u(j, k)), std::abs(a.w(i, k) - b.w(j, k))});
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("step count scales like 1/eps") {
    auto a = convection(16, 8, 0.1);
    a.t_end = 0.05;
    auto b = a;
    b.eps = 0.05;
    const auto ra = run_nsf(a), rb = run_nsf(b);
    const double ratio = static_cast<double>(rb.steps) / static_cast<double>(ra.steps);
    MESSAGE("steps " << ra.steps << " " << rb.steps);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
}

TEST_CASE("ballistic energy") {
    auto sc = base(8, 8, 0.1);
    auto s = build_initial_nsf(sc);
    const ScalarField tt(sc.grid, Staggering::Center, 1.0);
    // Ideal gas with s0 = 0 has s(1, 1) = 0, so the integrand is rho e = 1.5.
    CHECK(ballistic_energy(s, tt, sc) == doctest::Approx(1.5).epsilon(1e-14));
    s.u.fill(0.3);
    const double with_u = ballistic_energy(s, tt, sc);
    s.u.fill(0.6);
    const double with_2u = ballistic_energy(s, tt, sc);
    CHECK(with_2u - 1.5 == doctest::Approx(4 * (with_u - 1.5)).epsilon(1e-12));
    CHECK_THROWS_AS(ballistic_energy(s, ScalarField(sc.grid, Staggering::Center, 2.0), sc), Error);
}
