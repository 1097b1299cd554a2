#include "doctest.h"

#include "bll/errors.hpp"
#include "bll/ob_solver.hpp"

#include <cmath>
#include <numbers>

using namespace bll;
using std::numbers::pi;

namespace {

ObScenario base(int nx, int nz) {
    ObScenario sc;
    sc.grid = Grid(nx, nz);
    sc.G = ScalarField(sc.grid);
    sc.T0 = ScalarField(sc.grid);
    sc.U0 = VectorField(sc.grid);
    sc.theta_b_bottom.assign(nx, 0.0);
    sc.theta_b_top.assign(nx, 0.0);
    sc.dt = 1e-2;
    sc.t_end = 0.1;
    return sc;
}

void set_walls(ObScenario& sc, double bottom, double top) {
    sc.theta_b_bottom.assign(sc.grid.nx, bottom);
    sc.theta_b_top.assign(sc.grid.nx, top);
}

ObScenario rayleigh_benard(int nx, int nz, double dt, double t_end) {
    auto sc = base(nx, nz);
    sc.G = sample(sc.grid, [](double, double z) { return -5.0 * (z - 0.5); });
    set_walls(sc, 1.0, -1.0);
    sc.T0 = sample(sc.grid, [](double x, double z) {
        return 1.0 - 2.0 * z + 0.1 * std::cos(2 * pi * x) * std::sin(pi * z);
    });
    sc.eos.mu0 = 5e-3;
    sc.eos.kappa0 = 5e-3;
    sc.dt = dt;
    sc.t_end = t_end;
    return sc;
}

// Discrete curl of psi = sin(2 pi x) sin^2(pi z), sampled at cell corners.
VectorField curl_field(const Grid& g, double amp) {
    auto psi = [](double x, double z) { return std::sin(2 * pi * x) * std::pow(std::sin(pi * z), 2); };
    VectorField U(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i)
            U.u(i, k) = amp * (psi(g.x_face(i), g.z_face(k + 1)) - psi(g.x_face(i), g.z_face(k))) / g.dz;
    for (int k = 0; k <= g.nz; ++k)
        for (int i = 0; i < g.nx; ++i)
            U.w(i, k) = -amp * (psi(g.x_face(i + 1), g.z_face(k)) - psi(g.x_face(i), g.z_face(k))) / g.dx;
    return U;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a.values()[n] - b.values()[n]));
    return m;
}

} // namespace

TEST_CASE("build_initial_ob") {
    auto sc = base(16, 8);
    const auto s = build_initial_ob(sc);
    CHECK(s.U.max_abs() == 0.0);
    CHECK(s.temp.max_abs() == 0.0);

    sc.U0 = curl_field(sc.grid, 0.3);
    CHECK(div(build_initial_ob(sc).U).max_abs() <= 1e-12);

    auto bad = base(16, 8);
    bad.T0 = ScalarField(bad.grid, Staggering::Center, 1.0);
    try {
        build_initial_ob(bad);
        FAIL("expected a compatibility error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Compatibility);
    }

    auto g_bad = base(16, 8);
    g_bad.G = ScalarField(g_bad.grid, Staggering::Center, 1.0);
    CHECK_THROWS_AS(build_initial_ob(g_bad), Error);
}

TEST_CASE("quiescent state is stationary in both frames") {
    auto sc = base(16, 8);
    sc.G = sample(sc.grid, [](double x, double z) { return std::sin(2 * pi * x) * (z - 0.5); });
    for (auto frame : {Frame::T, Frame::Theta}) {
        ObState s = build_initial_ob(sc);
        s.frame = frame;
        ObSolver solver(sc, frame);
        for (int n = 0; n < 5; ++n) solver.step(s, sc.dt);
        CHECK(s.U.max_abs() <= 1e-14);
        CHECK(s.temp.max_abs() <= 1e-14);
    }
}

TEST_CASE("non-local steady state") {
    for (double lam : {0.1, 0.4, 0.9}) {
        auto sc = base(16, 8);
        sc.lambda_override = lam;
        sc.eos.kappa0 = 0.2;
        set_walls(sc, 0.7, 0.7);
        sc.T0 = ScalarField(sc.grid, Staggering::Center, 0.7);
        sc.dt = 0.05;
        ObState th = transform_frame(build_initial_ob(sc), Frame::Theta, lam);
        // Start away from equilibrium: a mean-free disturbance in Theta.
        th.temp.add_scaled(0.3, sample(sc.grid, [](double, double z) { return std::sin(pi * z) - 2 / pi; }));
        ObSolver solver(sc, Frame::Theta);
        for (int n = 0; n < 4000; ++n) solver.step(th, sc.dt);
        CHECK(max_diff(th.temp, ScalarField(sc.grid, Staggering::Center, (1 - lam) * 0.7)) <= 1e-8);
        CHECK(max_diff(transform_frame(th, Frame::T, lam).temp, ScalarField(sc.grid, Staggering::Center, 0.7)) <= 1e-8);
    }
}

TEST_CASE("transform_frame") {
    Grid g(8, 8);
    ObState s;
    s.U = VectorField(g);
    s.Pi = ScalarField(g);
    s.temp = ScalarField(g, Staggering::Center, 1.0);
    const auto th = transform_frame(s, Frame::Theta, 0.4);
    CHECK(th.temp(3, 3) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(transform_frame(th, Frame::T, 0.4).temp(2, 5) == doctest::Approx(1.0).epsilon(1e-15));
    s.temp = ScalarField(g);
    CHECK(transform_frame(s, Frame::Theta, 0.4).temp.max_abs() == 0.0);
    s.temp = sample(g, [](double x, double) { return std::cos(2 * pi * x); });
    CHECK(max_diff(transform_frame(s, Frame::Theta, 0.4).temp, s.temp) <= 1e-15);
}

TEST_CASE("density deviation recovery") {
    auto sc = base(16, 8);
    sc.G = sample(sc.grid, [](double, double z) { return 0.5 - z; });
    const auto T = sample(sc.grid, [](double x, double z) { return z * z + std::sin(2 * pi * x); });
    const auto r = recover_density_deviation(T, sc);
    const double mT = mean(T);
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 16; ++i) CHECK(r(i, k) == doctest::Approx(sc.G(i, k) + mT - T(i, k)).epsilon(1e-14));
    CHECK(std::abs(mean(r)) <= 1e-12);
    CHECK(recover_density_deviation(sc.G, sc).max_abs() <= 1e-15);
    auto flat = base(16, 8);
    CHECK(recover_density_deviation(ScalarField(flat.grid, Staggering::Center, 2.0), flat).max_abs() == 0.0);
}

TEST_CASE("lambda diagnostics") {
    ObModel m;
    m.lambda = 0.4;
    m.coeff.rho_bar = 1.0;
    m.coeff.c_p = 2.5;
    m.D = 0.1;
    Grid g(8, 8);
    CHECK_THROWS_AS(lambda_diagnostics({{0.0, 1.0, 0.0}}, m, g), Error);
    const auto tr = lambda_diagnostics({{0.0, 1.0, 0.0}, {0.1, 1.0, 0.0}, {0.2, 1.0, 0.0}}, m, g);
    CHECK(tr.Lambda.size() == 2);
    CHECK(tr.Lambda[1] == 0.0);
    CHECK(tr.heat_balance_residual[1] == 0.0);
}

TEST_CASE("symmetric heating keeps the mean at zero") {
    auto sc = base(16, 16);
    sc.G = sample(sc.grid, [](double, double z) { return -(z - 0.5); });
    set_walls(sc, 1.0, -1.0);
    sc.T0 = sample(sc.grid, [](double, double z) { return 1.0 - 2.0 * z; });
    sc.eos.kappa0 = 0.05;
    sc.dt = 0.01;
    sc.t_end = 0.5;
    const auto run = run_ob(sc, Frame::T);
    for (double v : run.trace.mean_T) CHECK(std::abs(v) <= 1e-12);
    for (double v : run.trace.Lambda) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("projection keeps U divergence free and no-slip") {
    const auto sc = rayleigh_benard(32, 16, 5e-3, 0.2);
    const auto run = run_ob(sc, Frame::T);
    for (const auto& c : run.conservation) {
        CHECK(c.max_div <= 1e-10);
        CHECK(std::abs(c.mean_r) <= 1e-12);
    }
    const auto& U = run.final_state.U;
    for (int i = 0; i < sc.grid.nx; ++i) {
        CHECK(U.w(i, 0) == 0.0);
        CHECK(U.w(i, sc.grid.nz) == 0.0);
    }
    CHECK(U.max_abs() > 0.0);
}

TEST_CASE("frames agree under the change of variables") {
    const auto sc = rayleigh_benard(32, 16, 5e-3, 0.3);
    const auto a = run_ob(sc, Frame::T);
    const auto b = run_ob(sc, Frame::Theta);
    REQUIRE(a.snapshots_T.size() == b.snapshots_T.size());
    const auto& Ta = a.snapshots_T.back();
    const auto& Tb = b.snapshots_T.back();
    CHECK(max_diff(Ta, Tb) <= 1e-9);
    CHECK(max_diff(a.final_state.U.u, b.final_state.U.u) <= 1e-9);
}

TEST_CASE("lambda = 0 reduces to the classical Dirichlet problem") {
    auto sc = rayleigh_benard(16, 16, 5e-3, 0.1);
    sc.lambda_override = 0.0;
    const auto t = run_ob(sc, Frame::T);
    const auto th = run_ob(sc, Frame::Theta);
    CHECK(max_diff(t.snapshots_T.back(), th.snapshots_T.back()) <= 1e-12);

    // Reference classical step: plain Dirichlet Helmholtz with no coupling.
    ObState s = build_initial_ob(sc);
    const auto model = ob_model(sc);
    ScalarField ref = helmholtz_solve(s.temp, sc.dt * model.D, sc.temperature_bc());
    auto flat = sc;
    flat.G = ScalarField(sc.grid);
    ObState s0 = build_initial_ob(flat);
    const auto stepped = step_ob_tframe(s0, flat, sc.dt);
    CHECK(max_diff(stepped.temp, ref) <= 1e-13);
}

TEST_CASE("degenerate closure guard") {
    auto sc = base(8, 8);
    CHECK_THROWS_AS(
        [&] {
            sc.lambda_override = 1.0;
            sc.validate();
        }(),
        Error);
}

TEST_CASE("manufactured solution: time order 1 and space order 2") {
    // T* = sin(pi z)(1 + t^2) + 0.3 t cos(2 pi x) sin(pi z); zero wall data.
    auto make = [](int n, double dt, double t_end) {
        auto sc = base(n, n);
        sc.eos.kappa0 = 0.25;
        sc.dt = dt;
        sc.t_end = t_end;
        const auto model = ob_model(sc);
        const double D = model.D, lam = model.lambda;
        sc.T0 = sample(sc.grid, [](double x, double z) { return std::sin(pi * z) + 0 * x; });
        sc.source = [D, lam](double x, double z, double t) {
            const double s = std::sin(pi * z), c = std::cos(2 * pi * x);
            const double dTdt = s * 2 * t + 0.3 * c * s;
            const double lap = -pi * pi * s * (1 + t * t) - 0.3 * t * c * s * (4 * pi * pi + pi * pi);
            return dTdt - D * lap - lam * (2 / pi) * 2 * t;
        };
        return sc;
    };
    auto error = [](const ObScenario& sc) {
        const auto run = run_ob(sc, Frame::T);
        const double t = sc.t_end;
        const auto exact = sample(sc.grid, [t](double x, double z) {
            return std::sin(pi * z) * (1 + t * t) + 0.3 * t * std::cos(2 * pi * x) * std::sin(pi * z);
        });
        return max_diff(run.snapshots_T.back(), exact);
    };
    // The initial data is only O(h^2) compatible with the discrete problem; a
    // fine grid isolates the time error.
    const double e1 = error(make(64, 0.04, 0.8)), e2 = error(make(64, 0.02, 0.8)), e3 = error(make(64, 0.01, 0.8));
    MESSAGE("time errors " << e1 << " " << e2 << " " << e3);
    CHECK(std::log2(e1 / e2) >= 0.9);
    CHECK(std::log2(e2 / e3) >= 0.9);
    const double h1 = error(make(8, 0.4 / 64, 0.2)), h2 = error(make(16, 0.4 / 256, 0.2)), h3 = error(make(32, 0.4 / 1024, 0.2));
    MESSAGE("space errors " << h1 << " " << h2 << " " << h3);
    CHECK(std::log2(h2 / h3) >= 1.8);
}

TEST_CASE("run_ob CFL guard") {
    auto sc = rayleigh_benard(16, 8, 5.0, 10.0);
    try {
        run_ob(sc, Frame::T);
        FAIL("expected a CFL error");
    } catch (const CflError& e) {
        CHECK(e.suggested_dt() > 0.0);
        CHECK(e.suggested_dt() < 5.0);
    }
}
