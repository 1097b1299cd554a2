#pragma once

// Relative energy, essential/residual splitting, and the low Mach number
// convergence harness comparing compressible runs against the
// Oberbeck-Boussinesq limit.

#include "bll/grid.hpp"
#include "bll/nsf_solver.hpp"
#include "bll/ob_solver.hpp"
#include "bll/thermo.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bll {

struct EssentialSet {
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    double theta_lo = 0.0;
    double theta_hi = 0.0;

    // The dyadic box [rho_bar/2, 2 rho_bar] x [theta_bar/2, 2 theta_bar].
    static EssentialSet around(double rho_bar, double theta_bar);
    void validate(double rho_bar, double theta_bar) const;
    bool contains(double rho, double theta) const;
    bool contains_interior(double rho, double theta) const;
};

// Reference state (rho~, theta~, u~) at cell centres.
struct Reference {
    ScalarField rho;
    ScalarField theta;
    ScalarField u;
    ScalarField w;

    static Reference uniform(const Grid& g, double rho, double theta);
};

// Pointwise relative energy density
//   rho|u - u~|^2/2 + eps^-2 [rho e - theta~(rho s - rho~ s~)
//                             - (e~ - theta~ s~ + p~/rho~)(rho - rho~) - rho~ e~].
double relative_energy_density(thermo::ThermoPoint x, double u, double w, thermo::ThermoPoint ref, double ur,
                               double wr, double eps, const thermo::EosParams& eos);

struct RelativeEnergy {
    ScalarField density;
    double integral = 0.0;
};

RelativeEnergy relative_energy(const NsfState& s, const Reference& ref, const thermo::EosParams& eos);

struct Decomposition {
    ScalarField essential; // 1 where (rho, theta) lies in K, else 0
    ScalarField residual;  // 1 - essential
    double essential_measure = 0.0;
    double residual_measure = 0.0;
};

Decomposition ess_res_decompose(const NsfState& s, const EssentialSet& K);

struct RelEnergyReport {
    double total = 0.0;
    double essential = 0.0;
    double residual = 0.0;
    double residual_measure = 0.0;
    // Integrated right-hand sides of the two coercivity bounds.
    double essential_rhs = 0.0;
    double residual_rhs = 0.0;
    // Largest C for which each bound holds in every cell of its part
    // (infinity when the part is empty or the bound is vacuous).
    double c_essential = 0.0;
    double c_residual = 0.0;
    double C = 0.0; // min of the two
    bool holds = false;
};

// Throws Configuration when the reference leaves the interior of K.
RelEnergyReport coercivity_check(const NsfState& s, const Reference& ref, const EssentialSet& K,
                                 const thermo::EosParams& eos);

// One row of the convergence table: sup over shared snapshots of
//   || (rho - rho_bar)/eps - r ||_L1, || (theta - theta_bar)/eps - T ||_L1,
//   || sqrt(rho) u - sqrt(rho_bar) U ||_L2.
struct ConvergenceRow {
    double eps = 0.0;
    double err_rho = 0.0;
    double err_theta = 0.0;
    double err_mom = 0.0;
    double residual_measure = 0.0; // sup over snapshots, default K
    std::size_t steps = 0;
    double seconds = 0.0;
    bool ok = true;
    std::string failure;
};

// Throws Alignment when the snapshot times differ.
ConvergenceRow error_norms_m7(const std::vector<NsfState>& nsf, const ObRun& ob, double eps, const ObScenario& ob_sc);

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows; // eps descending
    // Least-squares slopes of log(error) against log(eps); NaN with fewer
    // than two successful rows.
    double rate_rho = 0.0;
    double rate_theta = 0.0;
    double rate_mom = 0.0;

    void fit_rates();
    // Every norm strictly decreases from row to row.
    bool monotone() const;
    bool complete() const;
    void write_csv(const std::filesystem::path& path) const;
};

// A scenario posed on both sides of the limit.
struct LimitScenario {
    Grid grid;
    thermo::EosParams eos;
    double rho_bar = 1.0;
    double theta_bar = 1.0;
    ScalarField G;
    PotentialFn G_fn;
    std::vector<double> theta_b_bottom;
    std::vector<double> theta_b_top;
    ScalarField T0;
    VectorField U0;
    double t_end = 0.25;
    double cadence = 0.05;
    double ob_dt = 1e-3;
    double nsf_cfl = 0.4;

    ObScenario ob_scenario() const;
    NsfScenario nsf_scenario(double eps) const;
};

struct SweepOptions {
    std::vector<double> eps_list; // descending
    Frame frame = Frame::T;
    unsigned threads = 1;
    bool naive = false; // also tabulate against the classical OB target
};

struct SweepResult {
    ConvergenceTable modified;
    ConvergenceTable naive; // empty unless requested
    std::size_t ob_steps = 0;
    double residual_rate = 0.0; // fitted exponent of the residual measure
};

// One OB run per target, then one NSF run per eps, concurrently. A member
// that fails is reported with ok = false instead of aborting the table.
SweepResult sweep(const LimitScenario& sc, const SweepOptions& opt);

struct ComparisonReport {
    double eps = 0.0;
    ConvergenceRow modified;
    ConvergenceRow naive;
    double ratio_theta = 0.0; // naive error / modified error
    double ratio_rho = 0.0;
    double ratio_mom = 0.0;
    double target_gap = 0.0; // max |T_modified - T_naive| over snapshots
    double mean_T_range = 0.0; // spread of the wall-driven mean temperature
    bool coincide = false;
    std::string warning;

    void write_csv(const std::filesystem::path& path) const;
    std::string text() const;
};

// Errors of one NSF run against the modified and the naive (lambda = 0) OB
// targets. When the targets coincide the report carries a warning.
ComparisonReport compare_modified_vs_naive(const LimitScenario& sc, double eps, Frame frame = Frame::T,
                                           std::optional<double> modified_lambda = std::nullopt);

// Both sides of the relative energy inequality along an NSF run, against the
// static reference (rho_ref, theta_ref, 0). theta_ref must carry the wall
// temperature as its trace. Hook observe() into NsfScenario::observer; time
// integrals use the trapezoid rule over consecutive observed states.
//   lhs = [E]_0^t + int theta_ref/theta (S:Du + kappa |grad theta|^2 / (eps^2 theta))
//   rhs = int -(rho (s - s_ref) u.grad theta_ref - kappa grad theta.grad theta_ref / theta) / eps^2
//       + rho grad G.u / eps - (rho / rho_ref) u.grad p(rho_ref, theta_ref) / eps^2
// The gap rhs - lhs is logged, never enforced.
class RelEnergyInequalityMonitor {
public:
    struct Log {
        std::vector<double> t;
        std::vector<double> lhs;
        std::vector<double> rhs;
        std::vector<double> gap;
    };

    RelEnergyInequalityMonitor(const NsfScenario& sc, double rho_ref, ScalarField theta_ref);

    void observe(const NsfState& s);
    const Log& log() const { return log_; }
    // Entries with gap < -tol.
    std::size_t violations(double tol) const;
    double min_gap() const;
    void write_csv(const std::filesystem::path& path) const;

private:
    struct Rates {
        double energy = 0.0;
        double dissipation = 0.0;
        double source = 0.0;
    };
    Rates evaluate(const NsfState& s) const;

    Grid grid_;
    thermo::EosParams eos_;
    double eps_;
    ScalarField G_;
    double rho_ref_;
    ScalarField theta_ref_;
    std::vector<double> wall_bottom_, wall_top_;
    Rates first_, last_;
    double t_last_ = 0.0;
    double dissipated_ = 0.0;
    double supplied_ = 0.0;
    Log log_;
};

// Least-squares slope of log(y) against log(x) over positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace bll
