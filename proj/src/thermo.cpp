#include "bll/thermo.hpp"

#include "bll/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bll::thermo {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        fail(ErrorKind::Domain, std::string(what) + " is not finite");
    }
}

void require_point(ThermoPoint pt) {
    require_finite(pt.rho, "rho");
    require_finite(pt.theta, "theta");
    if (pt.rho <= 0.0) fail(ErrorKind::Domain, "rho must be positive");
    if (pt.theta <= 0.0) fail(ErrorKind::Domain, "theta must be positive");
}

double z_of(ThermoPoint pt) { return pt.rho / std::pow(pt.theta, 1.5); }

std::vector<double> log_samples(Range r) {
    std::vector<double> out;
    const int n = std::max(r.samples, 2);
    const double l0 = std::log(r.lo);
    const double l1 = std::log(r.hi);
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(std::exp(l0 + (l1 - l0) * i / (n - 1)));
    return out;
}

double normalised(double t1, double t2) {
    const double scale = std::max(std::abs(t1), std::abs(t2));
    return scale > 0.0 ? (t1 + t2) / scale : 0.0;
}

} // namespace

void EosParams::validate() const {
    auto check = [](bool ok, const char* msg) {
        if (!ok) fail(ErrorKind::Parameter, msg);
    };
    check(std::isfinite(p_inf) && p_inf >= 0.0, "p_inf must be >= 0");
    check(std::isfinite(a) && a >= 0.0, "a must be >= 0");
    check(std::isfinite(mu0) && mu0 > 0.0, "mu0 must be > 0");
    check(std::isfinite(eta0) && eta0 >= 0.0, "eta0 must be >= 0");
    check(std::isfinite(kappa0) && kappa0 > 0.0, "kappa0 must be > 0");
    check(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0");
    check(std::isfinite(s0), "s0 must be finite");
}

double profile_P(double z, const EosParams& eos) { return z + eos.p_inf * std::pow(z, 5.0 / 3.0); }

double profile_dP(double z, const EosParams& eos) {
    return 1.0 + (5.0 / 3.0) * eos.p_inf * std::pow(z, 2.0 / 3.0);
}

double profile_S(double z, const EosParams& eos) { return -std::log(z) + eos.s0; }

double pressure(ThermoPoint pt, const EosParams& eos) {
    require_finite(pt.rho, "rho");
    require_finite(pt.theta, "theta");
    if (pt.theta <= 0.0) fail(ErrorKind::Domain, "theta must be positive");
    if (pt.rho < 0.0) fail(ErrorKind::Domain, "rho must be non-negative");
    const double z = z_of(pt);
    return std::pow(pt.theta, 2.5) * profile_P(z, eos) + eos.a * std::pow(pt.theta, 4) / 3.0;
}

double internal_energy(ThermoPoint pt, const EosParams& eos) {
    require_point(pt);
    const double z = z_of(pt);
    return 1.5 * std::pow(pt.theta, 2.5) * profile_P(z, eos) / pt.rho +
           eos.a * std::pow(pt.theta, 4) / pt.rho;
}

double entropy(ThermoPoint pt, const EosParams& eos) {
    require_point(pt);
    return profile_S(z_of(pt), eos) + (4.0 * eos.a / 3.0) * std::pow(pt.theta, 3) / pt.rho;
}

Partials pressure_derivatives(ThermoPoint pt, const EosParams& eos) {
    require_point(pt);
    const double z = z_of(pt);
    const double P = profile_P(z, eos);
    const double dP = profile_dP(z, eos);
    return {pt.theta * dP,
            2.5 * std::pow(pt.theta, 1.5) * P - 1.5 * pt.rho * dP +
                (4.0 * eos.a / 3.0) * std::pow(pt.theta, 3)};
}

Partials entropy_derivatives(ThermoPoint pt, const EosParams& eos) {
    require_point(pt);
    // S'(Z) = -1/Z for this P family; dZ/drho = Z/rho, dZ/dtheta = -1.5 Z/theta.
    const double t3 = std::pow(pt.theta, 3);
    return {-1.0 / pt.rho - (4.0 * eos.a / 3.0) * t3 / (pt.rho * pt.rho),
            1.5 / pt.theta + 4.0 * eos.a * pt.theta * pt.theta / pt.rho};
}

Partials energy_derivatives(ThermoPoint pt, const EosParams& eos) {
    require_point(pt);
    const double z = z_of(pt);
    const double P = profile_P(z, eos);
    const double dP = profile_dP(z, eos);
    const double t25 = std::pow(pt.theta, 2.5);
    const double t4 = std::pow(pt.theta, 4);
    const double r = pt.rho;
    const double d_rho = 1.5 * t25 * (dP / (std::pow(pt.theta, 1.5) * r) - P / (r * r)) - eos.a * t4 / (r * r);
    const double d_theta =
        1.5 / r * (2.5 * std::pow(pt.theta, 1.5) * P - 1.5 * r * dP) + 4.0 * eos.a * std::pow(pt.theta, 3) / r;
    return {d_rho, d_theta};
}

double energy_dtheta(ThermoPoint pt, const EosParams& eos) { return energy_derivatives(pt, eos).d_theta; }

double sound_speed_sq(ThermoPoint pt, const EosParams& eos) {
    const auto dp = pressure_derivatives(pt, eos);
    const double e_t = energy_dtheta(pt, eos);
    return dp.d_rho + pt.theta * dp.d_theta * dp.d_theta / (pt.rho * pt.rho * e_t);
}

double temperature_from_energy(double rho, double e_target, const EosParams& eos, double theta_guess) {
    require_finite(e_target, "internal energy");
    if (rho <= 0.0) fail(ErrorKind::Domain, "rho must be positive");
    auto f = [&](double th) { return internal_energy({rho, th}, eos) - e_target; };

    // Bracket the root; e is strictly increasing in theta.
    double lo = theta_guess > 0.0 ? theta_guess : 1.0;
    double hi = lo;
    while (f(lo) > 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) fail(ErrorKind::Domain, "internal energy below attainable range");
    }
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e300) fail(ErrorKind::Domain, "internal energy above attainable range");
    }
    double th = std::clamp(theta_guess > 0.0 ? theta_guess : 0.5 * (lo + hi), lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double val = f(th);
        if (val == 0.0) return th;
        if (val > 0.0) hi = th; else lo = th;
        const double slope = energy_dtheta({rho, th}, eos);
        double next = th - val / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - th) <= 1e-15 * th) return next;
        th = next;
    }
    return th;
}

Transport transport(double theta, const EosParams& eos) {
    require_finite(theta, "theta");
    if (theta <= 0.0) fail(ErrorKind::Domain, "theta must be positive");
    return {eos.mu0 * (1.0 + theta), eos.eta0 * (1.0 + theta), eos.kappa0 * (1.0 + std::pow(theta, eos.beta))};
}

ObCoefficients ob_coefficients(double rho_bar, double theta_bar, const EosParams& eos) {
    const ThermoPoint ref{rho_bar, theta_bar};
    require_point(ref);
    const auto dp = pressure_derivatives(ref, eos);
    const auto ds = entropy_derivatives(ref, eos);
    const double e_t = energy_dtheta(ref, eos);
    if (!(dp.d_rho > 0.0) || !(e_t > 0.0)) {
        std::ostringstream os;
        os << "thermodynamic stability violated at reference (p_rho=" << dp.d_rho << ", e_theta=" << e_t << ")";
        fail(ErrorKind::Stability, os.str());
    }
    ObCoefficients c;
    c.rho_bar = rho_bar;
    c.theta_bar = theta_bar;
    c.p_rho = dp.d_rho;
    c.p_theta = dp.d_theta;
    c.e_theta = e_t;
    c.s_rho = ds.d_rho;
    c.s_theta = ds.d_theta;
    c.alpha = c.p_theta / (rho_bar * c.p_rho);
    if (!(c.alpha > 0.0)) fail(ErrorKind::Stability, "thermal expansion coefficient must be positive");
    c.c_p = e_t + theta_bar * c.alpha * c.p_theta / rho_bar;
    c.lambda = theta_bar * c.alpha * c.p_theta / (rho_bar * c.c_p);
    const auto tr = transport(theta_bar, eos);
    c.kappa_bar = tr.kappa;
    c.mu_bar = tr.mu;
    return c;
}

const HypothesisResult& HypothesisReport::get(const std::string& name) const {
    for (const auto& r : results) {
        if (r.name == name) return r;
    }
    fail(ErrorKind::Parameter, "no hypothesis named " + name);
}

HypothesisReport check_hypotheses(const EosParams& eos, Range z_range, Range theta_range) {
    if (!(z_range.lo > 0.0 && z_range.hi >= z_range.lo && theta_range.lo > 0.0 && theta_range.hi >= theta_range.lo)) {
        fail(ErrorKind::Parameter, "hypothesis ranges must be non-empty and positive");
    }
    const auto zs = log_samples(z_range);
    const auto ths = log_samples(theta_range);
    HypothesisReport rep;

    // Thermodynamic stability over the sampled (Z, theta) grid.
    {
        HypothesisResult r{"stability", true, 0.0, 0.0, 0.0, ""};
        double worst = std::numeric_limits<double>::infinity();
        for (double z : zs) {
            for (double th : ths) {
                const ThermoPoint pt{z * std::pow(th, 1.5), th};
                const double m = std::min(pressure_derivatives(pt, eos).d_rho, energy_dtheta(pt, eos));
                if (m < worst) {
                    worst = m;
                    r.witness_z = z;
                    r.witness_theta = th;
                }
            }
        }
        r.value = worst;
        r.pass = worst > 0.0;
        r.note = "min(p_rho, e_theta) over samples";
        rep.results.push_back(r);
    }

    // Pressure profile: P(0) = 0, P' > 0, 0 < (5/3 P - P' Z)/Z <= C.
    {
        HypothesisResult r{"pressure_profile", true, 0.0, 0.0, 0.0, ""};
        r.pass = profile_P(0.0, eos) == 0.0 && profile_dP(0.0, eos) > 0.0;
        double cmax = 0.0;
        for (double z : zs) {
            const double q = (5.0 / 3.0 * profile_P(z, eos) - profile_dP(z, eos) * z) / z;
            if (!(profile_dP(z, eos) > 0.0) || !(q > 0.0)) {
                r.pass = false;
                r.witness_z = z;
            }
            if (q > cmax) {
                cmax = q;
                if (r.pass) r.witness_z = z;
            }
        }
        rep.w10_constant = cmax;
        r.value = cmax;
        r.note = "fitted C = max (5/3 P - P' Z)/Z";
        rep.results.push_back(r);
    }

    // Pressure growth: P/Z^{5/3} decreasing with positive limit p_inf.
    {
        HypothesisResult r{"pressure_growth", true, 0.0, 0.0, 0.0, ""};
        double prev = std::numeric_limits<double>::infinity();
        for (double z : zs) {
            const double q = profile_P(z, eos) / std::pow(z, 5.0 / 3.0);
            if (q > prev) {
                r.pass = false;
                r.witness_z = z;
            }
            prev = q;
        }
        r.value = eos.p_inf;
        if (!(eos.p_inf > 0.0)) {
            r.pass = false;
            r.witness_z = zs.back();
            r.note = "limit of P/Z^{5/3} is p_inf = 0";
        } else {
            r.note = "limit p_inf > 0";
        }
        rep.results.push_back(r);
    }

    // Vanishing entropy: S(Z) -> 0 as Z -> infinity. Fails for S = -ln Z + s0.
    {
        HypothesisResult r{"entropy_vanishing", false, 0.0, 0.0, 0.0, ""};
        r.witness_z = zs.back();
        r.value = profile_S(zs.back(), eos);
        r.note = "S(Z) = -ln Z + s0 is unbounded below as Z grows";
        rep.results.push_back(r);
    }

    // Transport growth: transport bounds with beta > 6.
    {
        HypothesisResult r{"transport_growth", true, 0.0, 0.0, 0.0, ""};
        r.value = eos.beta;
        r.pass = eos.mu0 > 0.0 && eos.kappa0 > 0.0 && eos.eta0 >= 0.0 && eos.beta > 6.0;
        r.note = eos.beta > 6.0 ? "beta > 6" : "beta <= 6 violates conductivity growth";
        rep.results.push_back(r);
    }

    // Energy and entropy bounds: fitted constants on the sampled set.
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        double c5a = 0.0;
        HypothesisResult lower{"energy_bounds", true, 0.0, 0.0, 0.0, ""};
        for (double z : zs) {
            for (double th : ths) {
                const ThermoPoint pt{z * std::pow(th, 1.5), th};
                const double re = pt.rho * internal_energy(pt, eos);
                const double r53 = std::pow(pt.rho, 5.0 / 3.0);
                const double t4 = std::pow(th, 4);
                const double ql = re / (r53 + t4);
                if (ql < lo) {
                    lo = ql;
                    lower.witness_z = z;
                    lower.witness_theta = th;
                }
                hi = std::max(hi, re / (1.0 + r53 + t4));
                const double sm = profile_S(z, eos);
                const double denom = 1.0 + std::abs(std::log(pt.rho)) + std::max(0.0, std::log(th));
                c5a = std::max(c5a, sm / denom);
            }
        }
        rep.energy_lower = lo;
        rep.energy_upper = hi;
        rep.entropy_constant = c5a;
        lower.pass = lo > 0.0 && std::isfinite(hi);
        lower.value = lo;
        lower.note = "fitted lower/upper constants reported";
        rep.results.push_back(lower);
        HypothesisResult entropy_bound{"entropy_bound", std::isfinite(c5a), 0.0, 0.0, 0.0, ""};
        entropy_bound.value = c5a;
        entropy_bound.note = "fitted constant";
        rep.results.push_back(entropy_bound);
    }
    return rep;
}

LimitResiduals check_limit_identities(double rho_bar, double theta_bar, const EosParams& eos) {
    const auto c = ob_coefficients(rho_bar, theta_bar, eos);
    const double entropy_ratio = normalised(-c.s_theta * c.p_rho / c.p_theta,
                                  -c.s_rho * (c.c_p * rho_bar / (theta_bar * c.alpha * c.p_theta) - 1.0));
    const double diffusivity = normalised((c.s_rho * c.p_theta / c.p_rho - c.s_theta) * c.kappa_bar / c.c_p,
                                  c.kappa_bar / theta_bar);
    const double unit_factor = normalised(rho_bar * (c.s_rho - c.s_theta * c.p_rho / c.p_theta) * theta_bar * c.alpha / c.c_p, 1.0);
    return {entropy_ratio, diffusivity, unit_factor};
}

double gibbs_residual(ThermoPoint pt, const EosParams& eos, GibbsOptions opts) {
    require_point(pt);
    auto e = [&](double r, double t) { return internal_energy({r, t}, eos); };
    auto s = [&](double r, double t) { return entropy({r, t}, eos) + opts.corrupt_entropy_slope * r; };
    const double hr = 1e-6 * pt.rho;
    const double ht = 1e-6 * pt.theta;
    const double e_r = (e(pt.rho + hr, pt.theta) - e(pt.rho - hr, pt.theta)) / (2 * hr);
    const double e_t = (e(pt.rho, pt.theta + ht) - e(pt.rho, pt.theta - ht)) / (2 * ht);
    const double s_r = (s(pt.rho + hr, pt.theta) - s(pt.rho - hr, pt.theta)) / (2 * hr);
    const double s_t = (s(pt.rho, pt.theta + ht) - s(pt.rho, pt.theta - ht)) / (2 * ht);
    const double p = pressure(pt, eos);
    const double rr2 = pt.rho * pt.rho;

    const double res_t = pt.theta * s_t - e_t;
    const double scale_t = std::max(std::abs(pt.theta * s_t), std::abs(e_t));
    const double res_r = pt.theta * s_r - e_r + p / rr2;
    const double scale_r = std::max({std::abs(pt.theta * s_r), std::abs(e_r), std::abs(p / rr2)});
    return std::max(std::abs(res_t) / scale_t, std::abs(res_r) / scale_r);
}

double maxwell_residual(ThermoPoint pt, const EosParams& eos) {
    const double s_r = entropy_derivatives(pt, eos).d_rho;
    const double term = pressure_derivatives(pt, eos).d_theta / (pt.rho * pt.rho);
    const double scale = std::max(std::abs(s_r), std::abs(term));
    return std::abs(s_r + term) / scale;
}

} // namespace bll::thermo
