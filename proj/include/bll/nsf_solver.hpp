#pragma once

// Explicit finite-volume integrator for the scaled compressible
// Navier-Stokes-Fourier system in heat-equation form:
//   rho_t  + div(rho u)                              = 0
//   (rho u)_t + div(rho u (x) u) + grad p / eps^2   = div S + rho grad G / eps
//   (rho e)_t + div(rho e u) + div q                = eps^2 S : grad u - p div u
// on the periodic strip with no-slip walls and wall temperature
// theta_bar + eps Theta_B. Cell-centred (collocated) unknowns, central
// fluxes with upwind convective dissipation and a hydrostatically balanced
// acoustic dissipation in the mass and energy fluxes, SSP-RK2 in time.

#include "bll/grid.hpp"
#include "bll/thermo.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace bll {

struct NsfState {
    ScalarField rho;
    ScalarField theta;
    ScalarField u; // cell-centred velocity components
    ScalarField w;
    double t = 0.0;
    double eps = 1.0;
};

using PotentialFn = std::function<double(double, double)>;

struct NsfScenario {
    Grid grid;
    thermo::EosParams eos;
    double rho_bar = 1.0;
    double theta_bar = 1.0;
    ScalarField G;   // centred potential, mean zero
    PotentialFn G_fn; // optional analytic G(x, z); used by the 1D oracle
    std::vector<double> theta_b_bottom;
    std::vector<double> theta_b_top;
    double eps = 0.1;
    double cfl = 0.4;
    double dt = 0.0; // fixed step; 0 selects the CFL step
    double t_end = 0.1;
    ScalarField T0; // temperature deviation, trace Theta_B
    VectorField U0; // MAC velocity, interpolated to centres

    double cadence = 0.0;
    std::filesystem::path out_dir;
    bool write_fields = true; // BLLF snapshots alongside the CSV log
    std::function<void(const NsfState&)> observer; // initial state and after every step

    void validate() const;
    // Wall temperatures theta_bar + eps Theta_B.
    std::vector<double> wall_theta_bottom() const;
    std::vector<double> wall_theta_top() const;
};

// Well-prepared data: r0 from the linearised Boussinesq relation,
// rho = rho_bar + eps r0, theta = theta_bar + eps T0, u = U0.
NsfState build_initial_nsf(const NsfScenario& sc);

// Largest stable step (acoustic CFL and diffusive limits) at this state.
double nsf_stable_dt(const NsfState& s, const NsfScenario& sc);

// One SSP-RK2 step of size dt. Throws CflError when dt exceeds the bound and
// Divergence when positivity is lost.
void step_nsf(NsfState& s, const NsfScenario& sc, double dt);

struct ConservationLog {
    std::vector<double> t;
    std::vector<double> mass;
    std::vector<double> ballistic;
    std::vector<double> entropy; // total rho s
    std::vector<double> dt;
};

struct NsfRun {
    NsfState final_state;
    std::vector<NsfState> snapshots;
    ConservationLog log;
    std::size_t steps = 0;
    double wall_seconds = 0.0;
};

// Integrates to t_end; every output time (cadence multiples and t_end) is hit
// exactly.
NsfRun run_nsf(const NsfScenario& sc);

double total_mass(const NsfState& s);

// Integral of eps^2 rho|u|^2/2 + rho e - theta_tilde rho s. theta_tilde must
// carry the wall temperature as its trace.
double ballistic_energy(const NsfState& s, const ScalarField& theta_tilde, const NsfScenario& sc);

// theta_bar + eps * harmonic extension of Theta_B.
ScalarField reference_temperature(const NsfScenario& sc);

struct HydrostaticProfile {
    std::vector<double> z;
    std::vector<double> rho;
    std::vector<double> theta;
};

// Stationary 1D solution of grad p = eps rho grad G with conductive
// temperature and total mass rho_bar |Omega|, sampled at the cell centres.
// Requires z-only G and wall-constant Theta_B.
HydrostaticProfile hydrostatic_stationary_1d(const NsfScenario& sc);

} // namespace bll
