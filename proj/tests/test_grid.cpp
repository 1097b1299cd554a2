#include "doctest.h"

#include "bll/errors.hpp"
#include "bll/field_io.hpp"
#include "bll/grid.hpp"
#include "bll/strip_solver.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace bll;
using std::numbers::pi;

namespace {

ScalarField random_field(const Grid& g, Staggering s, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g, s);
    for (double& v : f.values()) v = u(rng);
    return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a.values()[n] - b.values()[n]));
    return m;
}

} // namespace

TEST_CASE("grid invariants") {
    Grid g(16, 8, 2.0);
    CHECK(g.dx == doctest::Approx(0.125));
    CHECK(g.dz == doctest::Approx(0.125));
    CHECK_THROWS_AS(Grid(2, 8), Error);
    CHECK_THROWS_AS(Grid(8, 3), Error);
    CHECK_THROWS_AS(Grid(8, 8, 0.0), Error);
    CHECK(ScalarField(g, Staggering::ZFace).rows() == 9);
}

TEST_CASE("grad of a constant vanishes") {
    Grid g(8, 8);
    const auto v = grad(ScalarField(g, Staggering::Center, 3.5));
    CHECK(v.max_abs() == 0.0);
    const auto vd = grad(ScalarField(g, Staggering::Center, 2.0), ZBoundary::dirichlet(g, 2.0, 2.0));
    CHECK(vd.max_abs() == 0.0);
}

TEST_CASE("div grad equals laplacian") {
    Grid g(16, 12);
    const auto f = random_field(g, Staggering::Center, 3);
    const auto lhs = div(grad(f));
    const auto rhs = laplacian(f, ZBoundary::neumann());
    CHECK(max_diff(lhs, rhs) <= 1e-12 * std::max(1.0, rhs.max_abs()));
    const auto bc = ZBoundary::dirichlet(sample_x(g, [](double x) { return std::sin(2 * pi * x); }),
                                         std::vector<double>(g.nx, 0.3));
    CHECK(max_diff(div(grad(f, bc)), laplacian(f, bc)) <= 1e-12 * laplacian(f, bc).max_abs());
}

TEST_CASE("laplacian converges at second order") {
    auto err = [](int n) {
        Grid g(n, n);
        auto f = sample(g, [](double x, double z) { return std::sin(2 * pi * x) * z * (1 - z); });
        auto exact = sample(g, [](double x, double z) {
            return -4 * pi * pi * std::sin(2 * pi * x) * z * (1 - z) - 2 * std::sin(2 * pi * x);
        });
        // Homogeneous Dirichlet data matches the trace of f.
        // The wall rows carry the O(1) ghost truncation error of 2b - f, so the
        // rate is measured on rows away from the walls.
        auto lap = laplacian(f, ZBoundary::dirichlet(g, 0.0, 0.0));
        double m = 0.0;
        for (int k = 1; k < g.nz - 1; ++k)
            for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(lap(i, k) - exact(i, k)));
        return m;
    };
    const double e1 = err(32), e2 = err(64), e3 = err(128);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("staggering mismatch is a shape error") {
    Grid g(8, 8);
    ScalarField c(g), w(g, Staggering::ZFace);
    CHECK_THROWS_AS(c += w, Error);
    CHECK_THROWS_AS(grad(w), Error);
    CHECK_THROWS_AS(mean(w), Error);
    try {
        grad(w);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Shape);
    }
}

TEST_CASE("mean functional") {
    Grid g(16, 10);
    CHECK(mean(ScalarField(g, Staggering::Center, 2.5)) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(std::abs(mean(sample(g, [](double x, double) { return std::sin(2 * pi * x); }))) <= 1e-14);
    CHECK(mean(sample(g, [](double, double z) { return z; })) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("discrete duality") {
    Grid g(16, 12);
    const auto f = random_field(g, Staggering::Center, 5);
    VectorField v(g);
    v.u = random_field(g, Staggering::XFace, 6);
    v.w = random_field(g, Staggering::ZFace, 7);
    for (int i = 0; i < g.nx; ++i) {
        v.w(i, 0) = 0.0;
        v.w(i, g.nz) = 0.0;
    }
    const double lhs = inner(grad(f), v);
    const double rhs = -inner(f, div(v));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("poisson solve") {
    Grid g(32, 24);
    CHECK(poisson_solve(ScalarField(g)).phi.max_abs() == 0.0);

    auto phi_star = sample(g, [](double x, double z) { return std::cos(2 * pi * x) * std::cos(pi * z); });
    const auto rhs = laplacian(phi_star, ZBoundary::neumann());
    auto res = poisson_solve(rhs);
    phi_star.add_scaled(-mean(phi_star), ScalarField(g, Staggering::Center, 1.0));
    CHECK(max_diff(res.phi, phi_star) <= 1e-10);
    CHECK(std::abs(res.removed_mean) <= 1e-12);

    // Residual, and projection round trip through grad/div.
    const auto r = random_field(g, Staggering::Center, 9);
    auto sol = poisson_solve(r);
    auto lap = div(grad(sol.phi));
    ScalarField target = r;
    for (double& v : target.values()) v -= sol.removed_mean;
    CHECK(max_diff(lap, target) <= 1e-10 * target.max_abs());
    CHECK(std::abs(mean(sol.phi)) <= 1e-14);

    ScalarField shifted = rhs;
    for (double& v : shifted.values()) v += 0.7;
    auto sres = poisson_solve(shifted);
    CHECK(sres.removed_mean == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(max_diff(sres.phi, phi_star) <= 1e-10);

    ScalarField bad(g);
    bad(1, 1) = NAN;
    CHECK_THROWS_AS(poisson_solve(bad), Error);
}

TEST_CASE("helmholtz solve") {
    Grid g(32, 24);
    const auto zero = ZBoundary::dirichlet(g, 0.0, 0.0);
    CHECK(helmholtz_solve(ScalarField(g), 0.1, zero).max_abs() == 0.0);

    const double c = 0.05;
    auto g_star = sample(g, [](double x, double z) { return std::sin(2 * pi * x) * std::sin(pi * z); });
    ScalarField f = g_star;
    f.add_scaled(-c, laplacian(g_star, zero));
    CHECK(max_diff(helmholtz_solve(f, c, zero), g_star) <= 1e-10);

    const auto one = helmholtz_solve(ScalarField(g, Staggering::Center, 1.0), 0.3, ZBoundary::dirichlet(g, 1.0, 1.0));
    CHECK(max_diff(one, ScalarField(g, Staggering::Center, 1.0)) <= 1e-12);

    CHECK_THROWS_AS(helmholtz_solve(f, 0.0, zero), Error);
    CHECK_THROWS_AS(helmholtz_solve(f, -1.0, zero), Error);

    // Random data with x-dependent walls: residual of the discrete operator.
    const auto bc = ZBoundary::dirichlet(sample_x(g, [](double x) { return std::cos(2 * pi * x); }),
                                         std::vector<double>(g.nx, -0.5));
    const auto r = random_field(g, Staggering::Center, 4);
    auto sol = helmholtz_solve(r, 0.02, bc);
    ScalarField back = sol;
    back.add_scaled(-0.02, laplacian(sol, bc));
    CHECK(max_diff(back, r) <= 1e-10 * std::max(1.0, r.max_abs()));

    // Nodal z-face field with wall rows as data.
    auto wr = random_field(g, Staggering::ZFace, 8);
    auto wbc = ZBoundary::dirichlet(g, 0.0, 0.0);
    auto wsol = helmholtz_solve(wr, 0.02, wbc);
    ScalarField wback = wsol;
    wback.add_scaled(-0.02, laplacian(wsol, wbc));
    for (int k = 1; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) CHECK(std::abs(wback(i, k) - wr(i, k)) <= 1e-10);
    CHECK(wsol(3, 0) == 0.0);
}

TEST_CASE("harmonic extension") {
    Grid g(16, 16);
    // Linear in z is discretely harmonic for constant wall data.
    const auto h = harmonic_extension(g, ZBoundary::dirichlet(g, 1.0, -1.0));
    const auto lin = sample(g, [](double, double z) { return 1.0 - 2.0 * z; });
    CHECK(max_diff(h, lin) <= 1e-12);
}

TEST_CASE("BLLF round trip") {
    Grid g(8, 6);
    const auto w = random_field(g, Staggering::ZFace, 12);
    const auto path = std::filesystem::temp_directory_path() / "bll_roundtrip.bllf";
    write_bllf(path, w);
    const auto back = read_bllf(path);
    CHECK(back.staggering() == Staggering::ZFace);
    CHECK(back.grid().nx == 8);
    CHECK(back.rows() == 7);
    CHECK(max_diff(back, w) == 0.0);
    std::filesystem::remove(path);
}
