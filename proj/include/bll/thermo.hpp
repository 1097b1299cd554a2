#pragma once

// Constitutive closure of the gas model: a monoatomic pressure law
//   p(rho, theta) = theta^{5/2} P(Z) + (a/3) theta^4,  Z = rho / theta^{3/2},
// with P(Z) = Z + p_inf Z^{5/3}, plus radiation, entropy and transport laws.
// All derivatives are analytic closed forms; finite differences appear only
// in the test suites and in gibbs_residual, which is itself a consistency check.

#include <string>
#include <vector>

namespace bll::thermo {

struct EosParams {
    double p_inf = 0.0;   // Z^{5/3} coefficient in P(Z)
    double a = 0.0;       // radiation constant
    double mu0 = 1e-2;    // viscosity scale
    double eta0 = 0.0;    // bulk viscosity scale
    double kappa0 = 1e-2; // conductivity scale
    double beta = 6.5;    // conductivity exponent
    double s0 = 0.0;      // entropy additive constant

    // Throws ParameterError when an invariant is violated.
    void validate() const;
};

struct ThermoPoint {
    double rho;
    double theta;
};

struct Partials {
    double d_rho;
    double d_theta;
};

struct Transport {
    double mu;
    double eta;
    double kappa;
};

// Profile function and its derivative.
double profile_P(double z, const EosParams& eos);
double profile_dP(double z, const EosParams& eos);
// Entropy profile S(Z) = -ln Z + s0.
double profile_S(double z, const EosParams& eos);

double pressure(ThermoPoint pt, const EosParams& eos);
double internal_energy(ThermoPoint pt, const EosParams& eos);
double entropy(ThermoPoint pt, const EosParams& eos);

Partials pressure_derivatives(ThermoPoint pt, const EosParams& eos);
Partials entropy_derivatives(ThermoPoint pt, const EosParams& eos);
Partials energy_derivatives(ThermoPoint pt, const EosParams& eos);
double energy_dtheta(ThermoPoint pt, const EosParams& eos);

// Adiabatic sound speed squared, p_rho + theta p_theta^2 / (rho^2 e_theta).
double sound_speed_sq(ThermoPoint pt, const EosParams& eos);

// Inverts e(rho, theta) = e_target for theta by safeguarded Newton iteration.
double temperature_from_energy(double rho, double e_target, const EosParams& eos,
                               double theta_guess);

Transport transport(double theta, const EosParams& eos);

struct ObCoefficients {
    double rho_bar = 0.0;
    double theta_bar = 0.0;
    double alpha = 0.0;
    double c_p = 0.0;
    double lambda = 0.0;
    double p_rho = 0.0;
    double p_theta = 0.0;
    double e_theta = 0.0;
    double s_rho = 0.0;
    double s_theta = 0.0;
    double kappa_bar = 0.0;
    double mu_bar = 0.0;
};

// Throws StabilityError if thermodynamic stability or alpha > 0 fails at the reference point.
ObCoefficients ob_coefficients(double rho_bar, double theta_bar, const EosParams& eos);

struct HypothesisResult {
    std::string name;
    bool pass = false;
    // Sampled point that decided the outcome (or the extreme sample).
    double witness_z = 0.0;
    double witness_theta = 0.0;
    double value = 0.0;
    std::string note;
};

struct HypothesisReport {
    std::vector<HypothesisResult> results;
    // Fitted constants on the sampled set.
    double w10_constant = 0.0;
    double energy_lower = 0.0;
    double energy_upper = 0.0;
    double entropy_constant = 0.0;

    const HypothesisResult& get(const std::string& name) const;
};

struct Range {
    double lo;
    double hi;
    int samples = 32;
};

HypothesisReport check_hypotheses(const EosParams& eos, Range z_range, Range theta_range);

struct LimitResiduals {
    double entropy_ratio;
    double diffusivity;
    double unit_factor;
};

// Residuals of the algebraic identities the low Mach limit relies on,
// each normalised by the magnitude of its largest term.
LimitResiduals check_limit_identities(double rho_bar, double theta_bar, const EosParams& eos);

struct GibbsOptions {
    // Test hook: adds slope * rho to the entropy, breaking Gibbs' relation.
    double corrupt_entropy_slope = 0.0;
};

// Max relative residual of theta ds = de + p d(1/rho), derivatives by
// central differences with step 1e-6 * scale.
double gibbs_residual(ThermoPoint pt, const EosParams& eos, GibbsOptions opts = {});

// Relative Maxwell residual |s_rho + p_theta / rho^2| / scale, analytic.
double maxwell_residual(ThermoPoint pt, const EosParams& eos);

} // namespace bll::thermo
