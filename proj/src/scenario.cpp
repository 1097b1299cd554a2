#include "bll/scenario.hpp"

#include "bll/errors.hpp"

#include <cmath>
#include <numbers>

namespace bll {

using std::numbers::pi;

Frame parse_frame(const std::string& name) {
    if (name == "T") return Frame::T;
    if (name == "Theta") return Frame::Theta;
    fail(ErrorKind::Configuration, "unknown frame '" + name + "'");
}

LimitScenario limit_scenario(const ScenarioConfig& c) {
    LimitScenario sc;
    sc.grid = Grid(c.grid.nx, c.grid.nz, c.grid.lx);
    sc.eos = c.eos;
    sc.rho_bar = c.reference.rho_bar;
    sc.theta_bar = c.reference.theta_bar;
    const double g = c.forcing.g;
    sc.G_fn = [g](double, double z) { return -g * (z - 0.5); };
    sc.G = sample(sc.grid, sc.G_fn);

    const double lx = c.grid.lx;
    const auto& f = c.forcing;
    auto wall = [&](double base) {
        return sample_x(sc.grid, [&](double x) {
            return base + f.theta_b_amplitude * std::cos(2 * pi * f.theta_b_mode * x / lx);
        });
    };
    sc.theta_b_bottom = wall(f.theta_b_bottom);
    sc.theta_b_top = wall(f.theta_b_top);

    const auto& in = c.initial;
    sc.T0 = ScalarField(sc.grid);
    for (int k = 0; k < sc.grid.nz; ++k)
        for (int i = 0; i < sc.grid.nx; ++i) {
            const double x = sc.grid.x_center(i), z = sc.grid.z_center(k);
            sc.T0(i, k) = sc.theta_b_bottom[i] * (1 - z) + sc.theta_b_top[i] * z - in.ramp * std::sin(pi * z) +
                          in.perturbation * std::cos(2 * pi * in.perturbation_mode_x * x / lx) *
                              std::sin(in.perturbation_mode_z * pi * z);
        }
    sc.U0 = VectorField(sc.grid);
    sc.t_end = c.nsf.t_end;
    sc.cadence = c.output.cadence;
    sc.ob_dt = c.ob.dt;
    sc.nsf_cfl = c.nsf.cfl;
    return sc;
}

ObScenario ob_scenario(const ScenarioConfig& c) {
    ObScenario o = limit_scenario(c).ob_scenario();
    o.t_end = c.ob.t_end;
    o.lambda_override = c.ob.lambda_override;
    return o;
}

NsfScenario nsf_scenario(const ScenarioConfig& c, double eps) {
    NsfScenario n = limit_scenario(c).nsf_scenario(eps);
    n.dt = c.nsf.dt;
    return n;
}

} // namespace bll
