#include "bll/errors.hpp"
#include "bll/nsf_solver.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <sstream>

namespace bll {

namespace {

using State = std::array<double, 3>; // rho, theta, accumulated mass

bool constant(const std::vector<double>& v) {
    for (double x : v)
        if (std::abs(x - v.front()) > 1e-14 * std::max(1.0, std::abs(x))) return false;
    return true;
}

// dG/dz as a function of z alone, checking that G does not depend on x.
std::function<double(double)> vertical_derivative(const NsfScenario& sc) {
    const Grid& g = sc.grid;
    if (sc.G_fn) {
        for (double z : {0.1, 0.37, 0.5, 0.81}) {
            const double ref = sc.G_fn(0.0, z);
            for (double x : {0.13 * g.lx, 0.5 * g.lx, 0.77 * g.lx})
                if (std::abs(sc.G_fn(x, z) - ref) > 1e-12 * std::max(1.0, std::abs(ref)))
                    fail(ErrorKind::Shape, "hydrostatic oracle needs a potential that depends on z only");
        }
        auto G = sc.G_fn;
        return [G](double z) {
            const double h = 1e-4;
            return (-G(0.0, z + 2 * h) + 8 * G(0.0, z + h) - 8 * G(0.0, z - h) + G(0.0, z - 2 * h)) / (12 * h);
        };
    }
    for (int k = 0; k < g.nz; ++k)
        for (int i = 1; i < g.nx; ++i)
            if (std::abs(sc.G(i, k) - sc.G(0, k)) > 1e-12 * std::max(1.0, std::abs(sc.G(0, k))))
                fail(ErrorKind::Shape, "hydrostatic oracle needs a potential that depends on z only");
    std::vector<double> col(g.nz);
    for (int k = 0; k < g.nz; ++k) col[k] = sc.G(0, k);
    const double dz = g.dz;
    // Slope of the piecewise-linear interpolant through the centres.
    return [col, dz](double z) {
        const int n = static_cast<int>(col.size());
        int k = static_cast<int>(std::floor(z / dz - 0.5));
        k = std::clamp(k, 0, n - 2);
        return (col[k + 1] - col[k]) / dz;
    };
}

} // namespace

HydrostaticProfile hydrostatic_stationary_1d(const NsfScenario& sc) {
    sc.validate();
    if (!constant(sc.theta_b_bottom) || !constant(sc.theta_b_top))
        fail(ErrorKind::Shape, "hydrostatic oracle needs Theta_B constant along each wall");
    const auto dG = vertical_derivative(sc);
    const auto& eos = sc.eos;
    const double eps = sc.eps;
    const double th_b = sc.theta_bar + eps * sc.theta_b_bottom.front();
    const double th_t = sc.theta_bar + eps * sc.theta_b_top.front();
    // Kirchhoff transform of the conductivity: K(theta) is linear in z.
    auto K = [&](double th) { return eos.kappa0 * (th + std::pow(th, eos.beta + 1.0) / (eos.beta + 1.0)); };
    const double dK = K(th_t) - K(th_b);

    auto rhs = [&](const State& x, State& dx, double z) {
        const thermo::ThermoPoint pt{x[0], x[1]};
        const auto dp = thermo::pressure_derivatives(pt, eos);
        const double dth = dK / thermo::transport(x[1], eos).kappa;
        dx[0] = (eps * x[0] * dG(z) - dp.d_theta * dth) / dp.d_rho;
        dx[1] = dth;
        dx[2] = x[0];
    };
    namespace ode = boost::numeric::odeint;
    using Stepper = ode::runge_kutta_dopri5<State>;
    const double tol = 1e-13;

    auto shoot = [&](double rho0) {
        State x{rho0, th_b, 0.0};
        ode::integrate_adaptive(ode::make_controlled(tol, tol, Stepper()), rhs, x, 0.0, 1.0, 1e-3);
        return x[2] - sc.rho_bar;
    };
    boost::uintmax_t iters = 200;
    const auto bracket = boost::math::tools::bracket_and_solve_root(
        shoot, sc.rho_bar, 1.5, true, boost::math::tools::eps_tolerance<double>(50), iters);
    const double rho0 = 0.5 * (bracket.first + bracket.second);
    if (!(rho0 > 0.0) || iters >= 200) fail(ErrorKind::Divergence, "hydrostatic shooting did not converge");

    HydrostaticProfile out;
    const Grid& g = sc.grid;
    std::vector<double> times{0.0};
    for (int k = 0; k < g.nz; ++k) times.push_back(g.z_center(k));
    State x{rho0, th_b, 0.0};
    bool first = true;
    ode::integrate_times(ode::make_dense_output(tol, tol, Stepper()), rhs, x, times.begin(), times.end(), 1e-3,
                         [&](const State& y, double z) {
                             if (first) {
                                 first = false;
                                 return;
                             }
                             out.z.push_back(z);
                             out.rho.push_back(y[0]);
                             out.theta.push_back(y[1]);
                         });
    return out;
}

} // namespace bll
