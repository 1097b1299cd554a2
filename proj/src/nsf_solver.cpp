#include "bll/nsf_solver.hpp"

#include "bll/errors.hpp"
#include "bll/field_io.hpp"
#include "bll/strip_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace bll {

namespace {

using thermo::ThermoPoint;

struct Cons {
    std::vector<double> r, mx, mz, E;
    explicit Cons(std::size_t n = 0) : r(n, 0.0), mx(n, 0.0), mz(n, 0.0), E(n, 0.0) {}
};

struct Prim {
    std::vector<double> rho, u, w, theta, p, e, c, mu, eta, kappa;
    explicit Prim(std::size_t n = 0)
        : rho(n), u(n), w(n), theta(n), p(n), e(n), c(n), mu(n), eta(n), kappa(n) {}
};

// Per-scenario constants shared by every stage.
struct Setup {
    const NsfScenario& sc;
    int nx, nz;
    double dx, dz, eps;
    double p_ref;
    std::vector<double> G;             // centres
    std::vector<double> G_wb, G_wt;    // walls, linear extrapolation
    std::vector<double> th_wb, th_wt;  // wall temperatures
    std::vector<thermo::Transport> tr_wb, tr_wt;

    explicit Setup(const NsfScenario& s)
        : sc(s), nx(s.grid.nx), nz(s.grid.nz), dx(s.grid.dx), dz(s.grid.dz), eps(s.eps),
          p_ref(thermo::pressure({s.rho_bar, s.theta_bar}, s.eos)) {
        const auto gv = s.G.values();
        G.assign(gv.begin(), gv.end());
        G_wb.resize(nx);
        G_wt.resize(nx);
        for (int i = 0; i < nx; ++i) {
            G_wb[i] = 1.5 * s.G(i, 0) - 0.5 * s.G(i, 1);
            G_wt[i] = 1.5 * s.G(i, nz - 1) - 0.5 * s.G(i, nz - 2);
            if (s.G_fn) {
                G_wb[i] = s.G_fn(s.grid.x_center(i), 0.0);
                G_wt[i] = s.G_fn(s.grid.x_center(i), 1.0);
            }
        }
        th_wb = s.wall_theta_bottom();
        th_wt = s.wall_theta_top();
        for (int i = 0; i < nx; ++i) {
            tr_wb.push_back(thermo::transport(th_wb[i], s.eos));
            tr_wt.push_back(thermo::transport(th_wt[i], s.eos));
        }
    }
    std::size_t id(int i, int k) const { return static_cast<std::size_t>(k) * nx + ((i % nx + nx) % nx); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * nz; }
};

[[noreturn]] void positivity_lost(std::size_t n, const Setup& su, double rho, double th, const char* stage) {
    std::ostringstream os;
    os << "positivity lost in " << stage << " at cell (" << n % su.nx << ", " << n / su.nx << "): rho = " << rho
       << ", theta = " << th;
    fail(ErrorKind::Divergence, os.str());
}

void fill_thermo(Prim& P, std::size_t n, const Setup& su) {
    const auto& eos = su.sc.eos;
    const ThermoPoint pt{P.rho[n], P.theta[n]};
    P.p[n] = thermo::pressure(pt, eos);
    P.e[n] = thermo::internal_energy(pt, eos);
    P.c[n] = std::sqrt(thermo::sound_speed_sq(pt, eos));
    const auto tr = thermo::transport(P.theta[n], eos);
    P.mu[n] = tr.mu;
    P.eta[n] = tr.eta;
    P.kappa[n] = tr.kappa;
}

Prim primitives_from_state(const NsfState& s, const Setup& su) {
    Prim P(su.size());
    for (std::size_t n = 0; n < su.size(); ++n) {
        P.rho[n] = s.rho.values()[n];
        P.theta[n] = s.theta.values()[n];
        P.u[n] = s.u.values()[n];
        P.w[n] = s.w.values()[n];
        if (!(P.rho[n] > 0.0) || !(P.theta[n] > 0.0)) positivity_lost(n, su, P.rho[n], P.theta[n], "state");
        fill_thermo(P, n, su);
    }
    return P;
}

Cons conserved(const Prim& P) {
    Cons q(P.rho.size());
    for (std::size_t n = 0; n < P.rho.size(); ++n) {
        q.r[n] = P.rho[n];
        q.mx[n] = P.rho[n] * P.u[n];
        q.mz[n] = P.rho[n] * P.w[n];
        q.E[n] = P.rho[n] * P.e[n];
    }
    return q;
}

Prim primitives(const Cons& q, const std::vector<double>& theta_guess, const Setup& su, const char* stage) {
    Prim P(su.size());
    for (std::size_t n = 0; n < su.size(); ++n) {
        const double r = q.r[n];
        if (!(r > 0.0) || !std::isfinite(q.E[n]) || !std::isfinite(q.mx[n]) || !std::isfinite(q.mz[n]))
            positivity_lost(n, su, r, std::numeric_limits<double>::quiet_NaN(), stage);
        P.rho[n] = r;
        P.u[n] = q.mx[n] / r;
        P.w[n] = q.mz[n] / r;
        try {
            P.theta[n] = thermo::temperature_from_energy(r, q.E[n] / r, su.sc.eos, theta_guess[n]);
        } catch (const Error&) {
            positivity_lost(n, su, r, std::numeric_limits<double>::quiet_NaN(), stage);
        }
        if (!(P.theta[n] > 0.0)) positivity_lost(n, su, r, P.theta[n], stage);
        fill_thermo(P, n, su);
    }
    return P;
}

// Spatial operator L(q) for dq/dt = L(q).
Cons rhs(const Prim& P, const Setup& su) {
    const int nx = su.nx, nz = su.nz;
    const double dx = su.dx, dz = su.dz, eps = su.eps, ie2 = 1.0 / (eps * eps);
    const double ez2 = eps * eps;
    const std::size_t N = su.size();
    Cons L(N);

    // Cell-centred velocity gradients with no-slip ghosts at the walls.
    std::vector<double> ux(N), uz(N), wx(N), wz(N);
    for (int k = 0; k < nz; ++k) {
        for (int i = 0; i < nx; ++i) {
            const auto n = su.id(i, k);
            ux[n] = (P.u[su.id(i + 1, k)] - P.u[su.id(i - 1, k)]) / (2 * dx);
            wx[n] = (P.w[su.id(i + 1, k)] - P.w[su.id(i - 1, k)]) / (2 * dx);
            const double ub = k > 0 ? P.u[su.id(i, k - 1)] : -P.u[n];
            const double ut = k < nz - 1 ? P.u[su.id(i, k + 1)] : -P.u[n];
            const double wb = k > 0 ? P.w[su.id(i, k - 1)] : -P.w[n];
            const double wt = k < nz - 1 ? P.w[su.id(i, k + 1)] : -P.w[n];
            uz[n] = (ut - ub) / (2 * dz);
            wz[n] = (wt - wb) / (2 * dz);
        }
    }

    // x-faces between (i-1, k) and (i, k).
    for (int k = 0; k < nz; ++k) {
        for (int i = 0; i < nx; ++i) {
            const auto a = su.id(i - 1, k), b = su.id(i, k);
            const double un = 0.5 * (P.u[a] + P.u[b]);
            const double au = std::abs(un);
            const double rf = 0.5 * (P.rho[a] + P.rho[b]);
            const double cf = 0.5 * (P.c[a] + P.c[b]);
            const double ef = 0.5 * (P.e[a] + P.e[b]);
            const double dG = su.G[b] - su.G[a];
            const double Gf = 0.5 * (su.G[a] + su.G[b]);
            const double acoustic = (P.p[b] - P.p[a] - eps * rf * dG) / (2.0 * eps * cf);

            const double mxa = P.rho[a] * P.u[a], mxb = P.rho[b] * P.u[b];
            const double mza = P.rho[a] * P.w[a], mzb = P.rho[b] * P.w[b];
            const double Ea = P.rho[a] * P.e[a], Eb = P.rho[b] * P.e[b];

            const double th_f = 0.5 * (P.theta[a] + P.theta[b]);
            const auto tr = thermo::transport(th_f, su.sc.eos);
            const double dux = (P.u[b] - P.u[a]) / dx, dwx = (P.w[b] - P.w[a]) / dx;
            const double duz = 0.5 * (uz[a] + uz[b]), dwz = 0.5 * (wz[a] + wz[b]);
            const double Sxx = tr.mu * (dux - dwz) + tr.eta * (dux + dwz);
            const double Szx = tr.mu * (duz + dwx);

            const double Fr = 0.5 * (mxa + mxb) - 0.5 * au * (P.rho[b] - P.rho[a]) - acoustic;
            const double Fmx = 0.5 * (mxa * P.u[a] + mxb * P.u[b]) +
                               0.5 * (P.p[a] + P.p[b] - 2 * su.p_ref) * ie2 - 0.5 * au * (mxb - mxa) - Sxx;
            const double Fmz = 0.5 * (mza * P.u[a] + mzb * P.u[b]) - 0.5 * au * (mzb - mza) - Szx;
            const double FE = 0.5 * (Ea * P.u[a] + Eb * P.u[b]) - 0.5 * au * (Eb - Ea) - ef * acoustic -
                              tr.kappa * (P.theta[b] - P.theta[a]) / dx;

            L.r[a] -= Fr / dx;
            L.r[b] += Fr / dx;
            L.mx[a] -= Fmx / dx;
            L.mx[b] += Fmx / dx;
            L.mz[a] -= Fmz / dx;
            L.mz[b] += Fmz / dx;
            L.E[a] -= FE / dx;
            L.E[b] += FE / dx;
            // Gravity, split over the two half cells of this face.
            L.mx[a] += rf * (Gf - su.G[a]) / (eps * dx);
            L.mx[b] += rf * (su.G[b] - Gf) / (eps * dx);
        }
    }

    // Interior z-faces between (i, k-1) and (i, k).
    for (int k = 1; k < nz; ++k) {
        for (int i = 0; i < nx; ++i) {
            const auto a = su.id(i, k - 1), b = su.id(i, k);
            const double wn = 0.5 * (P.w[a] + P.w[b]);
            const double aw = std::abs(wn);
            const double rf = 0.5 * (P.rho[a] + P.rho[b]);
            const double cf = 0.5 * (P.c[a] + P.c[b]);
            const double ef = 0.5 * (P.e[a] + P.e[b]);
            const double dG = su.G[b] - su.G[a];
            const double Gf = 0.5 * (su.G[a] + su.G[b]);
            const double acoustic = (P.p[b] - P.p[a] - eps * rf * dG) / (2.0 * eps * cf);

            const double mxa = P.rho[a] * P.u[a], mxb = P.rho[b] * P.u[b];
            const double mza = P.rho[a] * P.w[a], mzb = P.rho[b] * P.w[b];
            const double Ea = P.rho[a] * P.e[a], Eb = P.rho[b] * P.e[b];

            const double th_f = 0.5 * (P.theta[a] + P.theta[b]);
            const auto tr = thermo::transport(th_f, su.sc.eos);
            const double duz = (P.u[b] - P.u[a]) / dz, dwz = (P.w[b] - P.w[a]) / dz;
            const double dux = 0.5 * (ux[a] + ux[b]), dwx = 0.5 * (wx[a] + wx[b]);
            const double Szz = tr.mu * (dwz - dux) + tr.eta * (dux + dwz);
            const double Sxz = tr.mu * (duz + dwx);

            const double Fr = 0.5 * (mza + mzb) - 0.5 * aw * (P.rho[b] - P.rho[a]) - acoustic;
            const double Fmx = 0.5 * (mxa * P.w[a] + mxb * P.w[b]) - 0.5 * aw * (mxb - mxa) - Sxz;
            const double Fmz = 0.5 * (mza * P.w[a] + mzb * P.w[b]) +
                               0.5 * (P.p[a] + P.p[b] - 2 * su.p_ref) * ie2 - 0.5 * aw * (mzb - mza) - Szz;
            const double FE = 0.5 * (Ea * P.w[a] + Eb * P.w[b]) - 0.5 * aw * (Eb - Ea) - ef * acoustic -
                              tr.kappa * (P.theta[b] - P.theta[a]) / dz;

            L.r[a] -= Fr / dz;
            L.r[b] += Fr / dz;
            L.mx[a] -= Fmx / dz;
            L.mx[b] += Fmx / dz;
            L.mz[a] -= Fmz / dz;
            L.mz[b] += Fmz / dz;
            L.E[a] -= FE / dz;
            L.E[b] += FE / dz;
            L.mz[a] += rf * (Gf - su.G[a]) / (eps * dz);
            L.mz[b] += rf * (su.G[b] - Gf) / (eps * dz);
        }
    }

    // Walls: no mass or convective flux; hydrostatically extrapolated
    // pressure, no-slip stress and Dirichlet heat flux.
    const double h2 = 0.5 * dz;
    for (int i = 0; i < nx; ++i) {
        {
            const auto b = su.id(i, 0);
            const auto& tr = su.tr_wb[i];
            const double pw = P.p[b] - eps * P.rho[b] * (su.G[b] - su.G_wb[i]);
            const double duz = P.u[b] / h2, dwz = P.w[b] / h2;
            const double Szz = (tr.mu + tr.eta) * dwz;
            const double Sxz = tr.mu * duz;
            const double Fmx = -Sxz;
            const double Fmz = (pw - su.p_ref) * ie2 - Szz;
            const double FE = -tr.kappa * (P.theta[b] - su.th_wb[i]) / h2;
            L.mx[b] += Fmx / dz;
            L.mz[b] += Fmz / dz;
            L.E[b] += FE / dz;
            L.mz[b] += P.rho[b] * (su.G[b] - su.G_wb[i]) / (eps * dz);
        }
        {
            const auto a = su.id(i, nz - 1);
            const auto& tr = su.tr_wt[i];
            const double pw = P.p[a] + eps * P.rho[a] * (su.G_wt[i] - su.G[a]);
            const double duz = -P.u[a] / h2, dwz = -P.w[a] / h2;
            const double Szz = (tr.mu + tr.eta) * dwz;
            const double Sxz = tr.mu * duz;
            const double Fmx = -Sxz;
            const double Fmz = (pw - su.p_ref) * ie2 - Szz;
            const double FE = -tr.kappa * (su.th_wt[i] - P.theta[a]) / h2;
            L.mx[a] -= Fmx / dz;
            L.mz[a] -= Fmz / dz;
            L.E[a] -= FE / dz;
            L.mz[a] += P.rho[a] * (su.G_wt[i] - su.G[a]) / (eps * dz);
        }
    }

    // Volume terms of the heat equation: eps^2 S : grad u - p div u.
    for (std::size_t n = 0; n < N; ++n) {
        const double dv = ux[n] + wz[n];
        const double Sxx = P.mu[n] * (ux[n] - wz[n]) + P.eta[n] * dv;
        const double Szz = P.mu[n] * (wz[n] - ux[n]) + P.eta[n] * dv;
        const double Sxz = P.mu[n] * (uz[n] + wx[n]);
        const double heating = Sxx * ux[n] + Sxz * (uz[n] + wx[n]) + Szz * wz[n];
        L.E[n] += ez2 * heating - P.p[n] * dv;
    }
    return L;
}

double stable_dt_prim(const Prim& P, const Setup& su) {
    const double cfl = su.sc.cfl;
    double ac = 0.0, visc = 0.0, heat = 0.0;
    for (std::size_t n = 0; n < P.rho.size(); ++n) {
        const double a = P.c[n] / su.eps;
        ac = std::max(ac, (std::abs(P.u[n]) + a) / su.dx + (std::abs(P.w[n]) + a) / su.dz);
        visc = std::max(visc, (2.0 * P.mu[n] + P.eta[n]) / P.rho[n]);
        const double e_t = thermo::energy_dtheta({P.rho[n], P.theta[n]}, su.sc.eos);
        heat = std::max(heat, P.kappa[n] / (P.rho[n] * e_t));
    }
    const double lap = 1.0 / (su.dx * su.dx) + 1.0 / (su.dz * su.dz);
    double dt = cfl / ac;
    if (visc > 0.0) dt = std::min(dt, cfl * 0.5 / (visc * lap));
    if (heat > 0.0) dt = std::min(dt, cfl * 0.5 / (heat * lap));
    return dt;
}

void store(NsfState& s, const Prim& P) {
    std::copy(P.rho.begin(), P.rho.end(), s.rho.values().begin());
    std::copy(P.theta.begin(), P.theta.end(), s.theta.values().begin());
    std::copy(P.u.begin(), P.u.end(), s.u.values().begin());
    std::copy(P.w.begin(), P.w.end(), s.w.values().begin());
}

double wall_trace(double f0, double f1, double f2) { return (15.0 * f0 - 10.0 * f1 + 3.0 * f2) / 8.0; }

} // namespace

void NsfScenario::validate() const {
    const int nx = grid.nx;
    if (nx == 0) fail(ErrorKind::Parameter, "scenario grid is not set");
    if (!(G.grid() == grid) || G.staggering() != Staggering::Center) fail(ErrorKind::Shape, "G must be a centred field on the scenario grid");
    if (!(T0.grid() == grid) || T0.staggering() != Staggering::Center) fail(ErrorKind::Shape, "T0 must be a centred field on the scenario grid");
    if (!(U0.grid() == grid) || !(U0.w.grid() == grid)) fail(ErrorKind::Shape, "U0 must live on the scenario grid");
    if (static_cast<int>(theta_b_bottom.size()) != nx || static_cast<int>(theta_b_top.size()) != nx)
        fail(ErrorKind::Shape, "Theta_B profiles must have nx entries");
    if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorKind::Parameter, "eps must lie in (0, 1]");
    if (!(cfl > 0.0 && cfl <= 1.0)) fail(ErrorKind::Parameter, "cfl must lie in (0, 1]");
    if (!(dt >= 0.0) || !std::isfinite(dt)) fail(ErrorKind::Parameter, "dt must be non-negative");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail(ErrorKind::Parameter, "t_end must be non-negative");
    if (!(cadence >= 0.0)) fail(ErrorKind::Parameter, "cadence must be non-negative");
    if (!(rho_bar > 0.0) || !(theta_bar > 0.0)) fail(ErrorKind::Parameter, "reference state must be positive");
    if (std::abs(mean(G)) > 1e-12 * std::max(1.0, G.max_abs())) fail(ErrorKind::Parameter, "potential G must have zero mean");
    eos.validate();
}

std::vector<double> NsfScenario::wall_theta_bottom() const {
    std::vector<double> v(theta_b_bottom.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = theta_bar + eps * theta_b_bottom[i];
    return v;
}

std::vector<double> NsfScenario::wall_theta_top() const {
    std::vector<double> v(theta_b_top.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = theta_bar + eps * theta_b_top[i];
    return v;
}

NsfState build_initial_nsf(const NsfScenario& sc) {
    sc.validate();
    const Grid& g = sc.grid;
    const auto c = thermo::ob_coefficients(sc.rho_bar, sc.theta_bar, sc.eos);
    const double mT = mean(sc.T0);
    NsfState s;
    s.eps = sc.eps;
    s.rho = ScalarField(g);
    s.theta = ScalarField(g);
    s.u = xface_to_center(sc.U0.u);
    s.w = zface_to_center(sc.U0.w);
    for (std::size_t n = 0; n < s.rho.size(); ++n) {
        const double T = sc.T0.values()[n];
        const double r0 = (sc.rho_bar * sc.G.values()[n] + c.p_theta * (mT - T)) / c.p_rho;
        s.rho.values()[n] = sc.rho_bar + sc.eps * r0;
        s.theta.values()[n] = sc.theta_bar + sc.eps * T;
    }
    double min_rho = std::numeric_limits<double>::infinity(), min_th = min_rho;
    for (double v : s.rho.values()) min_rho = std::min(min_rho, v);
    for (double v : s.theta.values()) min_th = std::min(min_th, v);
    for (double v : sc.wall_theta_bottom()) min_th = std::min(min_th, v);
    for (double v : sc.wall_theta_top()) min_th = std::min(min_th, v);
    if (!(min_rho > 0.0) || !(min_th > 0.0)) {
        std::ostringstream os;
        os << "eps = " << sc.eps << " is too large for the given data: min rho = " << min_rho
           << ", min theta = " << min_th;
        fail(ErrorKind::Parameter, os.str());
    }
    return s;
}

double nsf_stable_dt(const NsfState& s, const NsfScenario& sc) {
    const Setup su(sc);
    return stable_dt_prim(primitives_from_state(s, su), su);
}

namespace {

void step_impl(NsfState& s, const Setup& su, double dt, const Prim& P0) {
    const double bound = stable_dt_prim(P0, su);
    if (dt > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " exceeds the CFL bound " << bound << " at t = " << s.t;
        throw CflError(os.str(), bound);
    }
    const Cons q0 = conserved(P0);
    const Cons L0 = rhs(P0, su);
    Cons q1(su.size());
    for (std::size_t n = 0; n < su.size(); ++n) {
        q1.r[n] = q0.r[n] + dt * L0.r[n];
        q1.mx[n] = q0.mx[n] + dt * L0.mx[n];
        q1.mz[n] = q0.mz[n] + dt * L0.mz[n];
        q1.E[n] = q0.E[n] + dt * L0.E[n];
    }
    const Prim P1 = primitives(q1, P0.theta, su, "stage 1");
    const Cons L1 = rhs(P1, su);
    Cons q2(su.size());
    for (std::size_t n = 0; n < su.size(); ++n) {
        q2.r[n] = 0.5 * q0.r[n] + 0.5 * (q1.r[n] + dt * L1.r[n]);
        q2.mx[n] = 0.5 * q0.mx[n] + 0.5 * (q1.mx[n] + dt * L1.mx[n]);
        q2.mz[n] = 0.5 * q0.mz[n] + 0.5 * (q1.mz[n] + dt * L1.mz[n]);
        q2.E[n] = 0.5 * q0.E[n] + 0.5 * (q1.E[n] + dt * L1.E[n]);
    }
    store(s, primitives(q2, P1.theta, su, "stage 2"));
    s.t += dt;
}

} // namespace

void step_nsf(NsfState& s, const NsfScenario& sc, double dt) {
    if (!(dt > 0.0)) fail(ErrorKind::Parameter, "dt must be positive");
    const Setup su(sc);
    step_impl(s, su, dt, primitives_from_state(s, su));
}

double total_mass(const NsfState& s) {
    double m = 0.0;
    for (double v : s.rho.values()) m += v;
    return m * s.rho.grid().cell_volume();
}

ScalarField reference_temperature(const NsfScenario& sc) {
    auto h = harmonic_extension(sc.grid, ZBoundary::dirichlet(sc.theta_b_bottom, sc.theta_b_top));
    for (double& v : h.values()) v = sc.theta_bar + sc.eps * v;
    return h;
}

double ballistic_energy(const NsfState& s, const ScalarField& tt, const NsfScenario& sc) {
    require_compatible(s.rho, tt);
    const Grid& g = sc.grid;
    const auto wb = sc.wall_theta_bottom(), wt = sc.wall_theta_top();
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        worst = std::max(worst, std::abs(wall_trace(tt(i, 0), tt(i, 1), tt(i, 2)) - wb[i]));
        worst = std::max(worst, std::abs(wall_trace(tt(i, g.nz - 1), tt(i, g.nz - 2), tt(i, g.nz - 3)) - wt[i]));
    }
    const double tol = 1e-6 + 5.0 * g.dz * g.dz * tt.max_abs();
    if (worst > tol) {
        std::ostringstream os;
        os << "reference temperature trace differs from the wall data by " << worst;
        fail(ErrorKind::Compatibility, os.str());
    }
    double sum = 0.0;
    const double e2 = s.eps * s.eps;
    for (std::size_t n = 0; n < s.rho.size(); ++n) {
        const double r = s.rho.values()[n];
        const ThermoPoint pt{r, s.theta.values()[n]};
        const double u = s.u.values()[n], w = s.w.values()[n];
        const double th = tt.values()[n];
        if (!(th > 0.0)) fail(ErrorKind::Domain, "reference temperature must be positive");
        sum += 0.5 * e2 * r * (u * u + w * w) + r * thermo::internal_energy(pt, sc.eos) -
               th * r * thermo::entropy(pt, sc.eos);
    }
    return sum * g.cell_volume();
}

namespace {

double total_entropy(const NsfState& s, const thermo::EosParams& eos) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.rho.size(); ++n) {
        const double r = s.rho.values()[n];
        sum += r * thermo::entropy({r, s.theta.values()[n]}, eos);
    }
    return sum * s.rho.grid().cell_volume();
}

} // namespace

NsfRun run_nsf(const NsfScenario& sc) {
    const auto clock0 = std::chrono::steady_clock::now();
    const Setup su(sc);
    NsfRun run;
    NsfState s = build_initial_nsf(sc);
    const ScalarField tt = reference_temperature(sc);
    auto log = [&](double dt) {
        run.log.t.push_back(s.t);
        run.log.mass.push_back(total_mass(s));
        run.log.ballistic.push_back(ballistic_energy(s, tt, sc));
        run.log.entropy.push_back(total_entropy(s, sc.eos));
        run.log.dt.push_back(dt);
    };
    log(0.0);
    if (sc.observer) sc.observer(s);
    run.snapshots.push_back(s);

    const double t_end = sc.t_end;
    const double tiny = 1e-12 * std::max(1.0, t_end);
    double next_out = sc.cadence > 0.0 ? std::min(sc.cadence, t_end) : t_end;
    while (s.t < t_end - tiny) {
        const Prim P = primitives_from_state(s, su);
        double dt = sc.dt > 0.0 ? sc.dt : stable_dt_prim(P, su);
        bool lands = false;
        if (s.t + dt >= next_out - tiny) {
            dt = next_out - s.t;
            lands = true;
        }
        try {
            step_impl(s, su, dt, P);
        } catch (const CflError&) {
            throw;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Divergence) throw;
            std::ostringstream os;
            os << e.what() << " (step " << run.steps + 1 << ", t = " << s.t << ", eps = " << sc.eps << ")";
            fail(ErrorKind::Divergence, os.str());
        }
        ++run.steps;
        if (lands) s.t = next_out;
        log(dt);
        if (sc.observer) sc.observer(s);
        if (lands) {
            run.snapshots.push_back(s);
            next_out = sc.cadence > 0.0 ? std::min(next_out + sc.cadence, t_end) : t_end;
        }
    }
    run.final_state = s;
    run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();

    if (!sc.out_dir.empty()) {
        std::filesystem::create_directories(sc.out_dir);
        for (std::size_t n = 0; sc.write_fields && n < run.snapshots.size(); ++n) {
            char name[32];
            std::snprintf(name, sizeof name, "%04zu", n);
            const auto& sn = run.snapshots[n];
            write_bllf(sc.out_dir / ("rho_" + std::string(name) + ".bllf"), sn.rho);
            write_bllf(sc.out_dir / ("theta_" + std::string(name) + ".bllf"), sn.theta);
            write_bllf(sc.out_dir / ("u_" + std::string(name) + ".bllf"), sn.u);
            write_bllf(sc.out_dir / ("w_" + std::string(name) + ".bllf"), sn.w);
        }
        write_csv(sc.out_dir / "conservation.csv", {"t", "mass", "ballistic_energy", "entropy_proxy", "dt"},
                  {run.log.t, run.log.mass, run.log.ballistic, run.log.entropy, run.log.dt});
    }
    return run;
}

} // namespace bll
