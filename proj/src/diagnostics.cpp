#include "bll/diagnostics.hpp"

#include "bll/errors.hpp"
#include "bll/field_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>

namespace bll {

EssentialSet EssentialSet::around(double rho_bar, double theta_bar) {
    return {0.5 * rho_bar, 2.0 * rho_bar, 0.5 * theta_bar, 2.0 * theta_bar};
}

void EssentialSet::validate(double rho_bar, double theta_bar) const {
    if (!(rho_lo > 0.0 && rho_lo < rho_bar && rho_bar < rho_hi && theta_lo > 0.0 && theta_lo < theta_bar &&
          theta_bar < theta_hi))
        fail(ErrorKind::Configuration, "essential set must be a positive box around (rho_bar, theta_bar)");
}

bool EssentialSet::contains(double rho, double theta) const {
    return rho >= rho_lo && rho <= rho_hi && theta >= theta_lo && theta <= theta_hi;
}

bool EssentialSet::contains_interior(double rho, double theta) const {
    return rho > rho_lo && rho < rho_hi && theta > theta_lo && theta < theta_hi;
}

Reference Reference::uniform(const Grid& g, double rho, double theta) {
    return {ScalarField(g, Staggering::Center, rho), ScalarField(g, Staggering::Center, theta), ScalarField(g),
            ScalarField(g)};
}

double relative_energy_density(thermo::ThermoPoint x, double u, double w, thermo::ThermoPoint ref, double ur,
                               double wr, double eps, const thermo::EosParams& eos) {
    if (!(ref.rho > 0.0 && ref.theta > 0.0)) fail(ErrorKind::Domain, "reference state must be positive");
    const double e = thermo::internal_energy(x, eos);
    const double s = thermo::entropy(x, eos);
    const double er = thermo::internal_energy(ref, eos);
    const double sr = thermo::entropy(ref, eos);
    const double pr = thermo::pressure(ref, eos);
    const double kinetic = 0.5 * x.rho * ((u - ur) * (u - ur) + (w - wr) * (w - wr));
    const double thermal = x.rho * e - ref.theta * (x.rho * s - ref.rho * sr) -
                           (er - ref.theta * sr + pr / ref.rho) * (x.rho - ref.rho) - ref.rho * er;
    return kinetic + thermal / (eps * eps);
}

RelativeEnergy relative_energy(const NsfState& s, const Reference& ref, const thermo::EosParams& eos) {
    require_compatible(s.rho, ref.rho);
    RelativeEnergy out{ScalarField(s.rho.grid()), 0.0};
    const Grid& g = s.rho.grid();
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) {
            const double d =
                relative_energy_density({s.rho(i, k), s.theta(i, k)}, s.u(i, k), s.w(i, k),
                                        {ref.rho(i, k), ref.theta(i, k)}, ref.u(i, k), ref.w(i, k), s.eps, eos);
            out.density(i, k) = d;
            out.integral += d * g.cell_volume();
        }
    return out;
}

Decomposition ess_res_decompose(const NsfState& s, const EssentialSet& K) {
    const Grid& g = s.rho.grid();
    Decomposition d{ScalarField(g), ScalarField(g), 0.0, 0.0};
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) {
            const bool in = K.contains(s.rho(i, k), s.theta(i, k));
            d.essential(i, k) = in ? 1.0 : 0.0;
            d.residual(i, k) = in ? 0.0 : 1.0;
            (in ? d.essential_measure : d.residual_measure) += g.cell_volume();
        }
    return d;
}

RelEnergyReport coercivity_check(const NsfState& s, const Reference& ref, const EssentialSet& K,
                                 const thermo::EosParams& eos) {
    const Grid& g = s.rho.grid();
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i)
            if (!K.contains_interior(ref.rho(i, k), ref.theta(i, k)))
                fail(ErrorKind::Configuration, "reference state leaves the interior of the essential set");

    const auto E = relative_energy(s, ref, eos);
    const double inf = std::numeric_limits<double>::infinity();
    const double e2 = s.eps * s.eps;
    RelEnergyReport r;
    r.c_essential = inf;
    r.c_residual = inf;
    const double vol = g.cell_volume();
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) {
            const double rho = s.rho(i, k), th = s.theta(i, k);
            const double du = s.u(i, k) - ref.u(i, k), dw = s.w(i, k) - ref.w(i, k);
            const double lhs = E.density(i, k);
            double rhs;
            if (K.contains(rho, th)) {
                const double dr = rho - ref.rho(i, k), dt = th - ref.theta(i, k);
                rhs = (dr * dr + dt * dt) / e2 + du * du + dw * dw;
                r.essential += lhs * vol;
                r.essential_rhs += rhs * vol;
                if (rhs > 0.0) r.c_essential = std::min(r.c_essential, lhs / rhs);
            } else {
                const thermo::ThermoPoint pt{rho, th};
                const double uu = s.u(i, k) * s.u(i, k) + s.w(i, k) * s.w(i, k);
                rhs = (1.0 + rho * thermo::internal_energy(pt, eos) + rho * std::abs(thermo::entropy(pt, eos))) / e2 +
                      rho * uu;
                r.residual += lhs * vol;
                r.residual_measure += vol;
                r.residual_rhs += rhs * vol;
                r.c_residual = std::min(r.c_residual, lhs / rhs);
            }
        }
    r.total = r.essential + r.residual;
    r.C = std::min(r.c_essential, r.c_residual);
    r.holds = r.C > 0.0;
    return r;
}

ObScenario LimitScenario::ob_scenario() const {
    ObScenario o;
    o.grid = grid;
    o.eos = eos;
    o.rho_bar = rho_bar;
    o.theta_bar = theta_bar;
    o.G = G;
    o.theta_b_bottom = theta_b_bottom;
    o.theta_b_top = theta_b_top;
    o.dt = ob_dt;
    o.t_end = t_end;
    o.T0 = T0;
    o.U0 = U0;
    o.cadence = cadence;
    return o;
}

NsfScenario LimitScenario::nsf_scenario(double eps) const {
    NsfScenario n;
    n.grid = grid;
    n.eos = eos;
    n.rho_bar = rho_bar;
    n.theta_bar = theta_bar;
    n.G = G;
    n.G_fn = G_fn;
    n.theta_b_bottom = theta_b_bottom;
    n.theta_b_top = theta_b_top;
    n.eps = eps;
    n.cfl = nsf_cfl;
    n.t_end = t_end;
    n.T0 = T0;
    n.U0 = U0;
    n.cadence = cadence;
    return n;
}

ConvergenceRow error_norms_m7(const std::vector<NsfState>& nsf, const ObRun& ob, double eps, const ObScenario& ob_sc) {
    if (nsf.size() != ob.snapshot_times.size())
        fail(ErrorKind::Alignment, "trajectories have different snapshot counts (" + std::to_string(nsf.size()) +
                                       " vs " + std::to_string(ob.snapshot_times.size()) + ")");
    const Grid& g = ob_sc.grid;
    ConvergenceRow row;
    row.eps = eps;
    const auto K = EssentialSet::around(ob_sc.rho_bar, ob_sc.theta_bar);
    const double vol = g.cell_volume();
    const double sqrt_rb = std::sqrt(ob_sc.rho_bar);
    for (std::size_t n = 0; n < nsf.size(); ++n) {
        const auto& s = nsf[n];
        const double t = ob.snapshot_times[n];
        if (std::abs(s.t - t) > 1e-9 * std::max(1.0, std::abs(t)))
            fail(ErrorKind::Alignment, "snapshot times differ at index " + std::to_string(n));
        if (!(s.rho.grid() == g)) fail(ErrorKind::Alignment, "trajectories live on different grids");
        const ScalarField& T = ob.snapshots_T[n];
        const ScalarField r = recover_density_deviation(T, ob_sc);
        const ScalarField Uc = xface_to_center(ob.snapshots_U[n].u);
        const ScalarField Wc = zface_to_center(ob.snapshots_U[n].w);
        double er = 0.0, et = 0.0, em = 0.0;
        for (int k = 0; k < g.nz; ++k)
            for (int i = 0; i < g.nx; ++i) {
                er += std::abs((s.rho(i, k) - ob_sc.rho_bar) / eps - r(i, k));
                et += std::abs((s.theta(i, k) - ob_sc.theta_bar) / eps - T(i, k));
                const double sr = std::sqrt(s.rho(i, k));
                const double mu = sr * s.u(i, k) - sqrt_rb * Uc(i, k);
                const double mw = sr * s.w(i, k) - sqrt_rb * Wc(i, k);
                em += mu * mu + mw * mw;
            }
        row.err_rho = std::max(row.err_rho, er * vol);
        row.err_theta = std::max(row.err_theta, et * vol);
        row.err_mom = std::max(row.err_mom, std::sqrt(em * vol));
        row.residual_measure = std::max(row.residual_measure, ess_res_decompose(s, K).residual_measure);
    }
    return row;
}

namespace {

// Centred z-difference; at a wall row either a Dirichlet ghost 2b - f or,
// without wall data, the one-sided difference.
double ddz(const ScalarField& f, int i, int k, const std::vector<double>* bottom, const std::vector<double>* top) {
    const Grid& g = f.grid();
    const int nz = g.nz;
    if (k > 0 && k < nz - 1) return (f(i, k + 1) - f(i, k - 1)) / (2.0 * g.dz);
    if (k == 0) {
        if (bottom) return (f(i, 1) + f(i, 0) - 2.0 * (*bottom)[i]) / (2.0 * g.dz);
        return (f(i, 1) - f(i, 0)) / g.dz;
    }
    if (top) return (2.0 * (*top)[i] - f(i, nz - 1) - f(i, nz - 2)) / (2.0 * g.dz);
    return (f(i, nz - 1) - f(i, nz - 2)) / g.dz;
}

double ddx(const ScalarField& f, int i, int k) {
    return (f.at_wrap(i + 1, k) - f.at_wrap(i - 1, k)) / (2.0 * f.grid().dx);
}

} // namespace

RelEnergyInequalityMonitor::RelEnergyInequalityMonitor(const NsfScenario& sc, double rho_ref, ScalarField theta_ref)
    : grid_(sc.grid), eos_(sc.eos), eps_(sc.eps), G_(sc.G), rho_ref_(rho_ref), theta_ref_(std::move(theta_ref)),
      wall_bottom_(sc.wall_theta_bottom()), wall_top_(sc.wall_theta_top()) {
    require_compatible(G_, theta_ref_);
    if (!(rho_ref_ > 0.0)) fail(ErrorKind::Domain, "reference density must be positive");
    for (double v : theta_ref_.values())
        if (!(v > 0.0)) fail(ErrorKind::Domain, "reference temperature must be positive");
}

RelEnergyInequalityMonitor::Rates RelEnergyInequalityMonitor::evaluate(const NsfState& s) const {
    require_compatible(s.rho, theta_ref_);
    const Grid& g = grid_;
    const double e2 = eps_ * eps_;
    const std::vector<double> no_slip(static_cast<std::size_t>(g.nx), 0.0);
    Rates r;
    for (int k = 0; k < g.nz; ++k) {
        for (int i = 0; i < g.nx; ++i) {
            const double rho = s.rho(i, k), th = s.theta(i, k), u = s.u(i, k), w = s.w(i, k);
            const double tr = theta_ref_(i, k);
            const thermo::ThermoPoint x{rho, th}, ref{rho_ref_, tr};
            r.energy += relative_energy_density(x, u, w, ref, 0.0, 0.0, eps_, eos_);

            const double ux = ddx(s.u, i, k), wx = ddx(s.w, i, k);
            const double uz = ddz(s.u, i, k, &no_slip, &no_slip), wz = ddz(s.w, i, k, &no_slip, &no_slip);
            const double thx = ddx(s.theta, i, k), thz = ddz(s.theta, i, k, &wall_bottom_, &wall_top_);
            const double trx = ddx(theta_ref_, i, k), trz = ddz(theta_ref_, i, k, &wall_bottom_, &wall_top_);
            const double Gx = ddx(G_, i, k), Gz = ddz(G_, i, k, nullptr, nullptr);

            const auto tp = thermo::transport(th, eos_);
            const double dv = ux + wz;
            const double Sxx = tp.mu * (ux - wz) + tp.eta * dv;
            const double Szz = tp.mu * (wz - ux) + tp.eta * dv;
            const double Sxz = tp.mu * (uz + wx);
            const double SD = Sxx * ux + Szz * wz + Sxz * (uz + wx);
            r.dissipation += tr / th * (SD + tp.kappa * (thx * thx + thz * thz) / (e2 * th));

            const double ds = thermo::entropy(x, eos_) - thermo::entropy(ref, eos_);
            const double p_th = thermo::pressure_derivatives(ref, eos_).d_theta;
            const double u_dtr = u * trx + w * trz;
            r.source += -(rho * ds * u_dtr - tp.kappa * (thx * trx + thz * trz) / th) / e2 +
                        rho * (Gx * u + Gz * w) / eps_ - rho / rho_ref_ * p_th * u_dtr / e2;
        }
    }
    const double vol = g.cell_volume();
    r.energy *= vol;
    r.dissipation *= vol;
    r.source *= vol;
    return r;
}

void RelEnergyInequalityMonitor::observe(const NsfState& s) {
    const Rates r = evaluate(s);
    if (log_.t.empty()) {
        first_ = r;
    } else {
        const double dt = s.t - t_last_;
        dissipated_ += 0.5 * dt * (last_.dissipation + r.dissipation);
        supplied_ += 0.5 * dt * (last_.source + r.source);
    }
    last_ = r;
    t_last_ = s.t;
    const double lhs = r.energy - first_.energy + dissipated_;
    log_.t.push_back(s.t);
    log_.lhs.push_back(lhs);
    log_.rhs.push_back(supplied_);
    log_.gap.push_back(supplied_ - lhs);
}

std::size_t RelEnergyInequalityMonitor::violations(double tol) const {
    return static_cast<std::size_t>(std::count_if(log_.gap.begin(), log_.gap.end(), [&](double v) { return v < -tol; }));
}

double RelEnergyInequalityMonitor::min_gap() const {
    return log_.gap.empty() ? 0.0 : *std::min_element(log_.gap.begin(), log_.gap.end());
}

void RelEnergyInequalityMonitor::write_csv(const std::filesystem::path& path) const {
    bll::write_csv(path, {"t", "lhs", "rhs", "gap"}, {log_.t, log_.lhs, log_.rhs, log_.gap});
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

void ConvergenceTable::fit_rates() {
    std::vector<double> e, a, b, c;
    for (const auto& r : rows)
        if (r.ok) {
            e.push_back(r.eps);
            a.push_back(r.err_rho);
            b.push_back(r.err_theta);
            c.push_back(r.err_mom);
        }
    rate_rho = loglog_slope(e, a);
    rate_theta = loglog_slope(e, b);
    rate_mom = loglog_slope(e, c);
}

bool ConvergenceTable::complete() const {
    return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.ok; });
}

bool ConvergenceTable::monotone() const {
    if (!complete()) return false;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        const auto &p = rows[n - 1], &q = rows[n];
        if (!(q.err_rho < p.err_rho && q.err_theta < p.err_theta && q.err_mom < p.err_mom)) return false;
    }
    return true;
}

void ConvergenceTable::write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
    f << std::setprecision(17);
    f << "eps,err_rho,err_theta,err_mom,residual_measure,steps,status\n";
    for (const auto& r : rows)
        f << r.eps << ',' << r.err_rho << ',' << r.err_theta << ',' << r.err_mom << ',' << r.residual_measure << ','
          << r.steps << ',' << (r.ok ? "ok" : "failed: " + r.failure) << '\n';
    f << "# rate_rho," << rate_rho << "\n# rate_theta," << rate_theta << "\n# rate_mom," << rate_mom << '\n';
}

namespace {

// Runs tasks on at most `threads` concurrent workers.
void run_pool(std::vector<std::function<void()>>& tasks, unsigned threads) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t n; (n = next++) < tasks.size();) tasks[n]();
    };
    const unsigned nw = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
    std::vector<std::future<void>> futures;
    for (unsigned w = 1; w < nw; ++w) futures.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : futures) f.get();
}

ObScenario with_lambda(ObScenario o, std::optional<double> lambda) {
    o.lambda_override = lambda;
    return o;
}

struct Member {
    double eps;
    NsfRun run;
    bool ok = false;
    std::string failure;
};

Member run_member(const LimitScenario& sc, double eps) {
    Member m{eps, {}, false, {}};
    try {
        m.run = run_nsf(sc.nsf_scenario(eps));
        m.ok = true;
    } catch (const Error& e) {
        m.failure = std::string(to_string(e.kind())) + ": " + e.what();
    }
    return m;
}

ConvergenceRow row_for(const Member& m, const ObRun& ob, const ObScenario& o) {
    if (!m.ok) {
        ConvergenceRow r;
        r.eps = m.eps;
        r.ok = false;
        r.failure = m.failure;
        return r;
    }
    ConvergenceRow r = error_norms_m7(m.run.snapshots, ob, m.eps, o);
    r.steps = m.run.steps;
    r.seconds = m.run.wall_seconds;
    return r;
}

} // namespace

SweepResult sweep(const LimitScenario& sc, const SweepOptions& opt) {
    if (opt.eps_list.empty()) fail(ErrorKind::Parameter, "eps list is empty");
    for (std::size_t n = 1; n < opt.eps_list.size(); ++n)
        if (!(opt.eps_list[n] < opt.eps_list[n - 1])) fail(ErrorKind::Parameter, "eps list must be strictly descending");

    const ObScenario base = sc.ob_scenario();
    const ObScenario naive_sc = with_lambda(base, 0.0);
    ObRun ob, ob_naive;
    std::vector<Member> members(opt.eps_list.size());
    std::vector<std::function<void()>> tasks;
    tasks.emplace_back([&] { ob = run_ob(base, opt.frame); });
    if (opt.naive) tasks.emplace_back([&] { ob_naive = run_ob(naive_sc, opt.frame); });
    for (std::size_t n = 0; n < members.size(); ++n)
        tasks.emplace_back([&, n] { members[n] = run_member(sc, opt.eps_list[n]); });
    // OB failures propagate: there is no table without a target.
    run_pool(tasks, opt.threads);

    SweepResult out;
    out.ob_steps = ob.steps;
    std::vector<double> eps, meas;
    for (const auto& m : members) {
        out.modified.rows.push_back(row_for(m, ob, base));
        if (opt.naive) out.naive.rows.push_back(row_for(m, ob_naive, naive_sc));
        if (out.modified.rows.back().ok) {
            eps.push_back(m.eps);
            meas.push_back(out.modified.rows.back().residual_measure);
        }
    }
    out.modified.fit_rates();
    if (opt.naive) out.naive.fit_rates();
    out.residual_rate = loglog_slope(eps, meas);
    return out;
}

ComparisonReport compare_modified_vs_naive(const LimitScenario& sc, double eps, Frame frame,
                                           std::optional<double> modified_lambda) {
    const ObScenario mod_sc = with_lambda(sc.ob_scenario(), modified_lambda);
    const ObScenario naive_sc = with_lambda(sc.ob_scenario(), 0.0);
    ObRun mod, naive;
    Member member;
    std::vector<std::function<void()>> tasks{[&] { mod = run_ob(mod_sc, frame); },
                                             [&] { naive = run_ob(naive_sc, frame); },
                                             [&] { member = run_member(sc, eps); }};
    run_pool(tasks, 3);
    if (!member.ok) fail(ErrorKind::Divergence, "compressible run failed: " + member.failure);

    ComparisonReport rep;
    rep.eps = eps;
    rep.modified = row_for(member, mod, mod_sc);
    rep.naive = row_for(member, naive, naive_sc);
    auto ratio = [](double a, double b) { return a == b ? 1.0 : a / b; };
    rep.ratio_theta = ratio(rep.naive.err_theta, rep.modified.err_theta);
    rep.ratio_rho = ratio(rep.naive.err_rho, rep.modified.err_rho);
    rep.ratio_mom = ratio(rep.naive.err_mom, rep.modified.err_mom);

    double scale = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t n = 0; n < mod.snapshots_T.size(); ++n) {
        rep.target_gap = std::max(rep.target_gap, (mod.snapshots_T[n] - naive.snapshots_T[n]).max_abs());
        scale = std::max(scale, mod.snapshots_T[n].max_abs());
        const double m = mean(mod.snapshots_T[n]);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    rep.mean_T_range = hi - lo;
    rep.coincide = rep.target_gap <= 1e-9 * std::max(1.0, scale);
    if (rep.coincide)
        rep.warning = "modified and naive targets coincide (mean temperature does not evolve); the ratio carries "
                      "no information";
    return rep;
}

void ComparisonReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::Io, "cannot write " + path.string());
    f << std::setprecision(17);
    f << "target,eps,err_rho,err_theta,err_mom\n";
    f << "modified," << eps << ',' << modified.err_rho << ',' << modified.err_theta << ',' << modified.err_mom << '\n';
    f << "naive," << eps << ',' << naive.err_rho << ',' << naive.err_theta << ',' << naive.err_mom << '\n';
    f << "# ratio_theta," << ratio_theta << "\n# ratio_rho," << ratio_rho << "\n# ratio_mom," << ratio_mom << '\n';
    f << "# target_gap," << target_gap << "\n# mean_T_range," << mean_T_range << '\n';
    if (coincide) f << "# warning," << warning << '\n';
}

std::string ComparisonReport::text() const {
    std::ostringstream o;
    o << std::setprecision(6);
    o << "eps = " << eps << '\n';
    o << "  temperature error vs modified OB: " << modified.err_theta << '\n';
    o << "  temperature error vs naive OB:    " << naive.err_theta << '\n';
    o << "  ratio naive/modified: theta " << ratio_theta << ", rho " << ratio_rho << ", momentum " << ratio_mom
      << '\n';
    o << "  max target gap " << target_gap << ", mean temperature range " << mean_T_range << '\n';
    if (coincide) o << "  warning: " << warning << '\n';
    return o.str();
}

} // namespace bll
