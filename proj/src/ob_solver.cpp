#include "bll/ob_solver.hpp"

#include "bll/errors.hpp"
#include "bll/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace bll {

const char* to_string(Frame f) { return f == Frame::T ? "T" : "Theta"; }

namespace {

ScalarField face_product(const ScalarField& a, const ScalarField& b) {
    ScalarField out = a;
    auto o = out.values();
    const auto bv = b.values();
    for (std::size_t n = 0; n < o.size(); ++n) o[n] *= bv[n];
    return out;
}

ScalarField ones(const Grid& g) { return ScalarField(g, Staggering::Center, 1.0); }

// Momentum advection div(U (x) U) on the MAC grid.
void momentum_advection(const VectorField& U, ScalarField& au, ScalarField& aw) {
    const Grid& g = U.grid();
    const auto& u = U.u;
    const auto& w = U.w;
    au = ScalarField(g, Staggering::XFace);
    aw = ScalarField(g, Staggering::ZFace);
    // Corner flux u*w at (x-face i, z-face k); zero on the walls.
    auto corner = [&](int i, int k) {
        if (k == 0 || k == g.nz) return 0.0;
        const double uc = 0.5 * (u.at_wrap(i, k - 1) + u.at_wrap(i, k));
        const double wc = 0.5 * (w.at_wrap(i - 1, k) + w.at_wrap(i, k));
        return uc * wc;
    };
    for (int k = 0; k < g.nz; ++k) {
        for (int i = 0; i < g.nx; ++i) {
            const double ur = 0.5 * (u(i, k) + u.at_wrap(i + 1, k));
            const double ul = 0.5 * (u.at_wrap(i - 1, k) + u(i, k));
            au(i, k) = (ur * ur - ul * ul) / g.dx + (corner(i, k + 1) - corner(i, k)) / g.dz;
        }
    }
    for (int k = 1; k < g.nz; ++k) {
        for (int i = 0; i < g.nx; ++i) {
            const double wt = 0.5 * (w(i, k) + w(i, k + 1));
            const double wb = 0.5 * (w(i, k - 1) + w(i, k));
            aw(i, k) = (corner(i + 1, k) - corner(i, k)) / g.dx + (wt * wt - wb * wb) / g.dz;
        }
    }
}

// Flux-form scalar advection div(U T); zero flux through the walls.
ScalarField scalar_advection(const VectorField& U, const ScalarField& T) {
    const Grid& g = T.grid();
    VectorField F(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) F.u(i, k) = U.u(i, k) * 0.5 * (T(i, k) + T.at_wrap(i - 1, k));
    for (int k = 1; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) F.w(i, k) = U.w(i, k) * 0.5 * (T(i, k) + T(i, k - 1));
    return div(F);
}

void project(VectorField& U, StripSolver& solver, ScalarField* phi_out) {
    auto res = solver.poisson(div(U));
    const auto gphi = grad(res.phi);
    U.u -= gphi.u;
    U.w -= gphi.w;
    for (int i = 0; i < U.grid().nx; ++i) {
        U.w(i, 0) = 0.0;
        U.w(i, U.grid().nz) = 0.0;
    }
    if (phi_out) *phi_out = std::move(res.phi);
}

// Wall value of a centred column by quadratic extrapolation.
double wall_trace(double f0, double f1, double f2) { return (15.0 * f0 - 10.0 * f1 + 3.0 * f2) / 8.0; }

} // namespace

void ObScenario::validate() const {
    const int nx = grid.nx;
    if (nx == 0) fail(ErrorKind::Parameter, "scenario grid is not set");
    if (!(G.grid() == grid) || G.staggering() != Staggering::Center) fail(ErrorKind::Shape, "G must be a centred field on the scenario grid");
    if (!(T0.grid() == grid) || T0.staggering() != Staggering::Center) fail(ErrorKind::Shape, "T0 must be a centred field on the scenario grid");
    if (!(U0.grid() == grid) || !(U0.w.grid() == grid)) fail(ErrorKind::Shape, "U0 must live on the scenario grid");
    if (static_cast<int>(theta_b_bottom.size()) != nx || static_cast<int>(theta_b_top.size()) != nx)
        fail(ErrorKind::Shape, "Theta_B profiles must have nx entries");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::Parameter, "dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail(ErrorKind::Parameter, "t_end must be non-negative");
    if (!(cadence >= 0.0)) fail(ErrorKind::Parameter, "cadence must be non-negative");
    if (!G.all_finite() || !T0.all_finite() || !U0.u.all_finite() || !U0.w.all_finite())
        fail(ErrorKind::Domain, "scenario fields must be finite");
    const double mg = mean(G);
    if (std::abs(mg) > 1e-12 * std::max(1.0, G.max_abs())) {
        std::ostringstream os;
        os << "potential G must have zero mean, got " << mg;
        fail(ErrorKind::Parameter, os.str());
    }
    if (lambda_override && !(*lambda_override >= 0.0 && *lambda_override < 1.0))
        fail(ErrorKind::Parameter, "lambda override must lie in [0, 1)");
    eos.validate();
}

ZBoundary ObScenario::temperature_bc() const { return ZBoundary::dirichlet(theta_b_bottom, theta_b_top); }

ObModel ob_model(const ObScenario& sc) {
    ObModel m;
    m.coeff = thermo::ob_coefficients(sc.rho_bar, sc.theta_bar, sc.eos);
    m.lambda = sc.lambda_override.value_or(m.coeff.lambda);
    m.nu = m.coeff.mu_bar / sc.rho_bar;
    m.D = m.coeff.kappa_bar / (sc.rho_bar * m.coeff.c_p);
    m.buoy = m.coeff.alpha;
    m.adiabat = sc.theta_bar * m.coeff.alpha / m.coeff.c_p;
    return m;
}

ObState build_initial_ob(const ObScenario& sc) {
    sc.validate();
    const Grid& g = sc.grid;
    const auto& T = sc.T0;
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        const double lo = wall_trace(T(i, 0), T(i, 1), T(i, 2));
        const double hi = wall_trace(T(i, g.nz - 1), T(i, g.nz - 2), T(i, g.nz - 3));
        worst = std::max({worst, std::abs(lo - sc.theta_b_bottom[i]), std::abs(hi - sc.theta_b_top[i])});
    }
    const double tol = 1e-6 + 5.0 * g.dz * g.dz * std::max(1.0, T.max_abs());
    if (worst > tol) {
        std::ostringstream os;
        os << "initial temperature trace differs from Theta_B by " << worst << " (tolerance " << tol << ")";
        fail(ErrorKind::Compatibility, os.str());
    }
    ObState s;
    s.U = sc.U0;
    for (int i = 0; i < g.nx; ++i) {
        s.U.w(i, 0) = 0.0;
        s.U.w(i, g.nz) = 0.0;
    }
    StripSolver solver(g);
    project(s.U, solver, nullptr);
    s.temp = T;
    s.Pi = ScalarField(g);
    s.t = 0.0;
    s.frame = Frame::T;
    return s;
}

ObState transform_frame(const ObState& s, Frame target, double lambda) {
    if (!(lambda >= 0.0 && lambda < 1.0)) fail(ErrorKind::Parameter, "lambda must lie in [0, 1)");
    ObState out = s;
    if (s.frame == target) return out;
    const double m = mean(s.temp);
    const double shift = target == Frame::Theta ? -lambda * m : lambda / (1.0 - lambda) * m;
    for (double& v : out.temp.values()) v += shift;
    out.frame = target;
    return out;
}

ScalarField recover_density_deviation(const ScalarField& T, const ObScenario& sc) {
    const auto c = thermo::ob_coefficients(sc.rho_bar, sc.theta_bar, sc.eos);
    require_compatible(T, sc.G);
    const double m = mean(T);
    ScalarField r(T.grid());
    auto rv = r.values();
    const auto tv = T.values();
    const auto gv = sc.G.values();
    for (std::size_t n = 0; n < rv.size(); ++n) rv[n] = (sc.rho_bar * gv[n] + c.p_theta * (m - tv[n])) / c.p_rho;
    return r;
}

double wall_flux(const ScalarField& T, const ZBoundary& bc) {
    const Grid& g = T.grid();
    if (bc.kind != ZBoundary::Kind::Dirichlet) return 0.0;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        s += (bc.bottom[i] - T(i, 0)) + (bc.top[i] - T(i, g.nz - 1));
    return s * g.dx / (0.5 * g.dz);
}

LambdaTrace lambda_diagnostics(const std::vector<StepRecord>& rec, const ObModel& model, const Grid& grid) {
    if (rec.size() < 2) fail(ErrorKind::InsufficientData, "lambda diagnostics need at least two records");
    LambdaTrace tr;
    const double area = grid.lx;
    const double weight = model.lambda * model.coeff.rho_bar * model.coeff.c_p;
    for (std::size_t n = 1; n < rec.size(); ++n) {
        const double dt = rec[n].t - rec[n - 1].t;
        if (!(dt > 0.0)) fail(ErrorKind::InsufficientData, "records must be strictly increasing in time");
        const double rate = (rec[n].mean_T - rec[n - 1].mean_T) / dt;
        tr.t.push_back(rec[n].t);
        tr.mean_T.push_back(rec[n].mean_T);
        tr.Lambda.push_back(weight * rate);
        tr.flux.push_back(rec[n].flux);
        tr.heat_balance_residual.push_back(area * (1.0 - model.lambda) * rate -
                                  model.D * 0.5 * (rec[n].flux + rec[n - 1].flux));
    }
    return tr;
}

ObSolver::ObSolver(const ObScenario& sc, Frame frame)
    : sc_(sc), frame_(frame), model_(ob_model(sc)), solver_(sc.grid), bc_(sc.temperature_bc()) {
    sc.validate();
    const auto gG = grad(sc.G);
    gradG_x_ = gG.u;
    gradG_z_ = gG.w;
}

void ObSolver::reset_history() { prev_.reset(); }

ObSolver::Explicit ObSolver::explicit_terms(const ObState& s) const {
    const Grid& g = sc_.grid;
    Explicit e;
    // Temperature: -div(U T) + (theta alpha / c_p) grad G . U + source.
    e.fT = scalar_advection(s.U, s.temp);
    e.fT *= -1.0;
    const auto gdotU = xface_to_center(face_product(s.U.u, gradG_x_)) + zface_to_center(face_product(s.U.w, gradG_z_));
    e.fT.add_scaled(model_.adiabat, gdotU);
    if (sc_.source) {
        for (int k = 0; k < g.nz; ++k)
            for (int i = 0; i < g.nx; ++i) e.fT(i, k) += sc_.source(g.x_center(i), g.z_center(k), s.t);
    }

    ScalarField au, aw;
    momentum_advection(s.U, au, aw);
    e.fu = -1.0 * au;
    e.fw = -1.0 * aw;
    // Buoyancy per unit mass on the faces.
    ScalarField b;
    double scale;
    if (frame_ == Frame::T) {
        b = s.temp;
        scale = -model_.buoy;
    } else {
        ScalarField T = s.temp;
        const double q = model_.lambda / (1.0 - model_.lambda);
        const double shift = q * mean(s.temp);
        for (double& v : T.values()) v += shift;
        b = recover_density_deviation(T, sc_);
        scale = 1.0 / sc_.rho_bar;
    }
    e.bu = scale * face_product(center_to_xface(b), gradG_x_);
    e.bw = ScalarField(g, Staggering::ZFace);
    const auto bz = center_to_zface(b, ZBoundary::neumann());
    for (int k = 1; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) e.bw(i, k) = scale * bz(i, k) * gradG_z_(i, k);
    return e;
}

double ObSolver::stable_dt(const ObState& s) const {
    const Grid& g = sc_.grid;
    const double adv = s.U.u.max_abs() / g.dx + s.U.w.max_abs() / g.dz;
    const auto gT = grad(s.temp, frame_ == Frame::T ? bc_ : ZBoundary::neumann());
    const double n2 = model_.buoy * std::max(gradG_x_.max_abs(), gradG_z_.max_abs()) * gT.max_abs();
    const double inf = std::numeric_limits<double>::infinity();
    const double dt_adv = adv > 0.0 ? 0.5 / adv : inf;
    const double dt_buoy = n2 > 0.0 ? 1.0 / std::sqrt(n2) : inf;
    return std::min(dt_adv, dt_buoy);
}

void ObSolver::step_temperature(ObState& s, const ScalarField& f, double dt) {
    const Grid& g = sc_.grid;
    const double c = dt * model_.D;
    ScalarField rhs = s.temp;
    rhs.add_scaled(dt, f);
    const auto A = solver_.helmholtz(rhs, c, bc_);
    if (cached_dt_ != dt) {
        if (frame_ == Frame::T) {
            unit_ = solver_.helmholtz(model_.lambda * ones(g), c, ZBoundary::dirichlet(g, 0.0, 0.0));
        } else {
            const double q = model_.lambda / (1.0 - model_.lambda);
            unit_ = solver_.helmholtz(ScalarField(g), c, ZBoundary::dirichlet(g, -q, -q));
        }
        unit_mean_ = mean(unit_);
        cached_dt_ = dt;
    }
    const double det = 1.0 - unit_mean_;
    if (std::abs(det) < 1e-12) fail(ErrorKind::DegenerateClosure, "non-local closure is singular (|1 - mean B| < 1e-12)");
    const double mA = mean(A);
    if (frame_ == Frame::T) {
        const double m = mean(s.temp);
        const double m_next = (mA - m * unit_mean_) / det;
        s.temp = A;
        s.temp.add_scaled(m_next - m, unit_);
    } else {
        const double M = mA / det;
        s.temp = A;
        s.temp.add_scaled(M, unit_);
    }
}

void ObSolver::step_momentum(ObState& s, const Explicit& e, double dt) {
    const Grid& g = sc_.grid;
    const auto noslip = ZBoundary::dirichlet(g, 0.0, 0.0);
    ScalarField ru = s.U.u;
    ru.add_scaled(dt, e.fu);
    ScalarField rw = s.U.w;
    rw.add_scaled(dt, e.fw);
    VectorField star(g);
    star.u = solver_.helmholtz(ru, dt * model_.nu, noslip);
    star.w = solver_.helmholtz(rw, dt * model_.nu, noslip);
    star.u.add_scaled(dt, e.bu);
    star.w.add_scaled(dt, e.bw);
    ScalarField phi;
    project(star, solver_, &phi);
    s.U = std::move(star);
    s.Pi = (sc_.rho_bar / dt) * phi;
}

void ObSolver::step(ObState& s, double dt) {
    if (s.frame != frame_) fail(ErrorKind::Parameter, "state frame differs from solver frame");
    if (!(dt > 0.0)) fail(ErrorKind::Parameter, "dt must be positive");
    Explicit now = explicit_terms(s);
    Explicit use = now;
    if (prev_) {
        const double r = dt / prev_dt_;
        const double a = 1.0 + 0.5 * r;
        const double b = -0.5 * r;
        use.fT = a * now.fT;
        use.fT.add_scaled(b, prev_->fT);
        use.fu = a * now.fu;
        use.fu.add_scaled(b, prev_->fu);
        use.fw = a * now.fw;
        use.fw.add_scaled(b, prev_->fw);
        use.bu = a * now.bu;
        use.bu.add_scaled(b, prev_->bu);
        use.bw = a * now.bw;
        use.bw.add_scaled(b, prev_->bw);
    }
    prev_ = std::move(now);
    prev_dt_ = dt;
    step_temperature(s, use.fT, dt);
    step_momentum(s, use, dt);
    s.t += dt;
}

ObState step_ob_tframe(const ObState& s, const ObScenario& sc, double dt) {
    ObSolver solver(sc, Frame::T);
    ObState out = s;
    solver.step(out, dt);
    return out;
}

ObState step_ob_thetaframe(const ObState& s, const ObScenario& sc, double dt) {
    ObSolver solver(sc, Frame::Theta);
    ObState out = s;
    solver.step(out, dt);
    return out;
}

namespace {

double max_div(const VectorField& U) { return div(U).max_abs(); }

ScalarField to_tframe(const ObState& s, double lambda) {
    return s.frame == Frame::T ? s.temp : transform_frame(s, Frame::T, lambda).temp;
}

void write_snapshot(const std::filesystem::path& dir, std::size_t idx, const ScalarField& T, const VectorField& U) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu", idx);
    write_bllf(dir / ("T_" + std::string(name) + ".bllf"), T);
    write_bllf(dir / ("u_" + std::string(name) + ".bllf"), U.u);
    write_bllf(dir / ("w_" + std::string(name) + ".bllf"), U.w);
}

} // namespace

ObRun run_ob(const ObScenario& sc, Frame frame) {
    ObSolver solver(sc, frame);
    const double lambda = solver.model().lambda;
    ObState s = transform_frame(build_initial_ob(sc), frame, lambda);
    const ZBoundary bc = sc.temperature_bc();
    ObRun run;

    auto record = [&]() {
        const auto T = to_tframe(s, lambda);
        run.records.push_back({s.t, mean(T), wall_flux(T, bc)});
        run.conservation.push_back({s.t, max_div(s.U), mean(recover_density_deviation(T, sc)),
                                    0.5 * sc.rho_bar * inner(s.U, s.U)});
    };
    auto snapshot = [&]() {
        run.snapshot_times.push_back(s.t);
        run.snapshots_T.push_back(to_tframe(s, lambda));
        run.snapshots_U.push_back(s.U);
    };
    record();
    snapshot();

    const double t_end = sc.t_end;
    const double tiny = 1e-12 * std::max(1.0, t_end);
    double next_out = sc.cadence > 0.0 ? sc.cadence : t_end;
    while (s.t < t_end - tiny) {
        double dt = std::min(sc.dt, next_out - s.t);
        if (next_out - s.t - dt < tiny) dt = next_out - s.t;
        const double bound = solver.stable_dt(s);
        if (sc.dt > bound) {
            std::ostringstream os;
            os << "dt = " << sc.dt << " exceeds the explicit stability bound " << bound << " at t = " << s.t;
            throw CflError(os.str(), 0.9 * bound);
        }
        solver.step(s, dt);
        ++run.steps;
        if (!s.temp.all_finite() || !s.U.u.all_finite() || !s.U.w.all_finite()) {
            std::ostringstream os;
            os << "non-finite values after step " << run.steps << " (t = " << s.t << ")";
            fail(ErrorKind::Divergence, os.str());
        }
        record();
        if (s.t >= next_out - tiny) {
            s.t = next_out;
            run.records.back().t = next_out;
            run.conservation.back().t = next_out;
            snapshot();
            next_out = sc.cadence > 0.0 ? std::min(next_out + sc.cadence, t_end) : t_end;
        }
    }
    if (run.records.size() >= 2) run.trace = lambda_diagnostics(run.records, solver.model(), sc.grid);
    run.final_state = s;

    if (!sc.out_dir.empty()) {
        std::filesystem::create_directories(sc.out_dir);
        for (std::size_t n = 0; sc.write_fields && n < run.snapshot_times.size(); ++n)
            write_snapshot(sc.out_dir, n, run.snapshots_T[n], run.snapshots_U[n]);
        write_csv(sc.out_dir / "snapshot_times.csv", {"index", "t"},
                  {[&] {
                       std::vector<double> v(run.snapshot_times.size());
                       for (std::size_t n = 0; n < v.size(); ++n) v[n] = static_cast<double>(n);
                       return v;
                   }(),
                   run.snapshot_times});
        write_csv(sc.out_dir / "lambda_trace.csv", {"t", "mean_T", "Lambda", "flux", "heat_balance_residual"},
                  {run.trace.t, run.trace.mean_T, run.trace.Lambda, run.trace.flux, run.trace.heat_balance_residual});
        std::vector<double> ct, cd, cr, ck;
        for (const auto& c : run.conservation) {
            ct.push_back(c.t);
            cd.push_back(c.max_div);
            cr.push_back(c.mean_r);
            ck.push_back(c.kinetic);
        }
        write_csv(sc.out_dir / "conservation.csv", {"t", "max_div", "mean_r", "kinetic"}, {ct, cd, cr, ck});
    }
    return run;
}

} // namespace bll
