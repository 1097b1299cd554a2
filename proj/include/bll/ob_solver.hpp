#pragma once

// Oberbeck-Boussinesq limit system on the MAC grid, in two equivalent
// temperature variables:
//   T-frame:     the deviation T with Dirichlet trace Theta_B and the
//                non-local source lambda * d/dt mean(T),
//   Theta-frame: Theta = T - lambda mean(T) with the non-local wall trace
//                Theta_B - lambda/(1 - lambda) mean(Theta).
// Advection and buoyancy are explicit (AB2), diffusion implicit Euler, and
// incompressibility is enforced by a Chorin projection. The scalar non-local
// coupling is closed implicitly by superposing two Helmholtz solves.

#include "bll/grid.hpp"
#include "bll/strip_solver.hpp"
#include "bll/thermo.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bll {

enum class Frame { T, Theta };
const char* to_string(Frame f);

struct ObState {
    VectorField U;
    ScalarField temp; // T in the T-frame, Theta in the Theta-frame
    ScalarField Pi;
    double t = 0.0;
    Frame frame = Frame::T;
};

// Extra temperature source, f(x, z, t), added to the heat equation.
using SourceFn = std::function<double(double, double, double)>;

struct ObScenario {
    Grid grid;
    thermo::EosParams eos;
    double rho_bar = 1.0;
    double theta_bar = 1.0;
    ScalarField G;                      // centred potential, mean zero
    std::vector<double> theta_b_bottom; // length nx
    std::vector<double> theta_b_top;
    double dt = 1e-3;
    double t_end = 1.0;
    ScalarField T0; // initial deviation in the T-frame
    VectorField U0;

    // Test hooks.
    std::optional<double> lambda_override; // replaces lambda in the closure
    SourceFn source;                       // temperature forcing

    // Output.
    std::filesystem::path out_dir; // empty: no files
    double cadence = 0.0;          // snapshot interval, 0 for final only
    bool write_fields = true;      // BLLF snapshots alongside the CSV logs

    // Throws on violated invariants (mean(G), shapes, dt, t_end).
    void validate() const;
    ZBoundary temperature_bc() const;
};

// Reference coefficients actually used by the solver, with the hook applied.
struct ObModel {
    thermo::ObCoefficients coeff;
    double lambda = 0.0;  // effective mixing weight
    double nu = 0.0;      // mu_bar / rho_bar
    double D = 0.0;       // kappa_bar / (rho_bar c_p)
    double buoy = 0.0;    // alpha
    double adiabat = 0.0; // theta_bar alpha / c_p
};

ObModel ob_model(const ObScenario& sc);

// Projects U0 and checks the trace of T0 against Theta_B. The result is in the
// T-frame.
ObState build_initial_ob(const ObScenario& sc);

ObState transform_frame(const ObState& s, Frame target, double lambda);

// r = (rho_bar G + p_theta mean(T) - p_theta T) / p_rho for a T-frame field.
ScalarField recover_density_deviation(const ScalarField& T, const ObScenario& sc);

// One wall-flux sample: total outward flux of grad T through both walls.
double wall_flux(const ScalarField& T, const ZBoundary& bc);

struct StepRecord {
    double t;
    double mean_T; // T-frame mean
    double flux;   // integral of grad T . n over both walls
};

struct LambdaTrace {
    std::vector<double> t;
    std::vector<double> mean_T;
    std::vector<double> Lambda;
    std::vector<double> flux;
    std::vector<double> heat_balance_residual;
};

// Lambda by backward differences of mean(T) and the integrated heat balance
// residual, pairing the flux at the interval midpoint.
LambdaTrace lambda_diagnostics(const std::vector<StepRecord>& records, const ObModel& model,
                               const Grid& grid);

class ObSolver {
public:
    ObSolver(const ObScenario& sc, Frame frame);

    const ObModel& model() const { return model_; }

    // Advances by dt. The first call (or after reset) uses forward Euler for
    // the explicit terms, later calls AB2.
    void step(ObState& s, double dt);
    void reset_history();

    // Largest dt allowed by the explicit terms at this state.
    double stable_dt(const ObState& s) const;

private:
    // Advection (fu, fw) goes through the viscous solve; buoyancy (bu, bw)
    // is added after it so that its gradient part projects out exactly.
    struct Explicit {
        ScalarField fu, fw, bu, bw, fT;
    };
    Explicit explicit_terms(const ObState& s) const;
    void step_temperature(ObState& s, const ScalarField& rhs_explicit, double dt);
    void step_momentum(ObState& s, const Explicit& e, double dt);

    const ObScenario& sc_;
    Frame frame_;
    ObModel model_;
    StripSolver solver_;
    ZBoundary bc_;
    ScalarField gradG_x_, gradG_z_; // face gradients of G
    std::optional<Explicit> prev_;
    double prev_dt_ = 0.0;
    // Cached unit response of the non-local closure.
    double cached_dt_ = -1.0;
    ScalarField unit_;
    double unit_mean_ = 0.0;
};

// Single-step conveniences (forward Euler start).
ObState step_ob_tframe(const ObState& s, const ObScenario& sc, double dt);
ObState step_ob_thetaframe(const ObState& s, const ObScenario& sc, double dt);

struct ConservationSample {
    double t;
    double max_div;
    double mean_r;
    double kinetic;
};

struct ObRun {
    ObState final_state;      // in the frame that was integrated
    std::vector<double> snapshot_times;
    std::vector<ScalarField> snapshots_T; // T-frame temperature at each snapshot
    std::vector<VectorField> snapshots_U;
    std::vector<StepRecord> records;
    LambdaTrace trace;
    std::vector<ConservationSample> conservation;
    std::size_t steps = 0;
};

// Integrates to t_end. Snapshots follow sc.cadence (the last step lands
// exactly on t_end). Files are written when sc.out_dir is set.
ObRun run_ob(const ObScenario& sc, Frame frame);

} // namespace bll
