#include "bll/app.hpp"

#include "bll/config.hpp"
#include "bll/diagnostics.hpp"
#include "bll/field_io.hpp"
#include "bll/scenario.hpp"
#include "bll/thermo.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace bll {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"thermo-check", "run-ob", "run-nsf", "sweep", "compare", "hydrostatic"};
    return names;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Configuration: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Domain: return 4;
    case ErrorKind::Shape: return 5;
    case ErrorKind::Parameter: return 6;
    case ErrorKind::Compatibility: return 7;
    case ErrorKind::DegenerateClosure: return 8;
    case ErrorKind::InsufficientData: return 9;
    case ErrorKind::Divergence: return 10;
    case ErrorKind::Cfl: return 11;
    case ErrorKind::Alignment: return 12;
    case ErrorKind::Stability: return 13;
    }
    return 1;
}

namespace {

struct Context {
    ScenarioConfig cfg;
    fs::path dir;
    unsigned threads;
    std::ostream& out;
    std::ostream& err;
    bool quiet;

    std::ostream& log() {
        static std::ostringstream sink;
        sink.str("");
        return quiet ? sink : out;
    }
};

std::ofstream open_file(const fs::path& p) {
    std::ofstream f(p);
    if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
    f << std::setprecision(17);
    return f;
}

// gnuplot-friendly columns.
void write_dat(const fs::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& cols) {
    auto f = open_file(p);
    f << '#';
    for (const auto& h : header) f << ' ' << h;
    f << '\n';
    const std::size_t n = cols.empty() ? 0 : cols.front().size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) f << (c ? " " : "") << cols[c][r];
        f << '\n';
    }
}

std::vector<double> z_centres(const Grid& g) {
    std::vector<double> z(g.nz);
    for (int k = 0; k < g.nz; ++k) z[k] = g.z_center(k);
    return z;
}

void thermo_check(Context& cx) {
    const auto& c = cx.cfg;
    const auto rep = thermo::check_hypotheses(c.eos, {1e-3, 1e3}, {0.1, 10.0});
    const auto lim = thermo::check_limit_identities(c.reference.rho_bar, c.reference.theta_bar, c.eos);

    std::ostringstream text;
    text << std::setprecision(6);
    text << "hypotheses on Z in [1e-3, 1e3], theta in [0.1, 10]\n";
    for (const auto& h : rep.results)
        text << "  " << std::left << std::setw(5) << h.name << ' ' << (h.pass ? "pass" : "FAIL") << "  value "
             << h.value << "  at (Z, theta) = (" << h.witness_z << ", " << h.witness_theta << ")"
             << (h.note.empty() ? "" : "  " + h.note) << '\n';
    text << "limit identities at (rho_bar, theta_bar) = (" << c.reference.rho_bar << ", " << c.reference.theta_bar
         << ")\n";
    text << "  entropy_ratio " << lim.entropy_ratio << "\n  diffusivity " << lim.diffusivity << "\n  unit_factor " << lim.unit_factor << '\n';
    try {
        const auto k = thermo::ob_coefficients(c.reference.rho_bar, c.reference.theta_bar, c.eos);
        text << "coefficients\n  alpha " << k.alpha << "\n  c_p " << k.c_p << "\n  lambda " << k.lambda << '\n';
        if (c.has_format("csv"))
            write_csv(cx.dir / "coefficients.csv", {"alpha", "c_p", "lambda", "p_rho", "p_theta", "e_theta"},
                      {{k.alpha}, {k.c_p}, {k.lambda}, {k.p_rho}, {k.p_theta}, {k.e_theta}});
    } catch (const Error& e) {
        text << "coefficients unavailable: " << e.what() << '\n';
        cx.err << "warning: " << e.what() << '\n';
    }
    if (c.has_format("csv")) {
        auto f = open_file(cx.dir / "hypotheses.csv");
        f << "name,pass,value,witness_z,witness_theta,note\n";
        for (const auto& h : rep.results)
            f << h.name << ',' << (h.pass ? 1 : 0) << ',' << h.value << ',' << h.witness_z << ',' << h.witness_theta
              << ',' << h.note << '\n';
        auto g = open_file(cx.dir / "identities.csv");
        g << "identity,residual\nr26," << lim.entropy_ratio << "\nr27," << lim.diffusivity << "\nr29," << lim.unit_factor << '\n';
    }
    open_file(cx.dir / "thermo_report.txt") << text.str();
    cx.log() << text.str();
}

void run_ob_cmd(Context& cx) {
    auto sc = ob_scenario(cx.cfg);
    sc.out_dir = cx.dir;
    sc.write_fields = cx.cfg.has_format("bllf");
    const auto frame = parse_frame(cx.cfg.ob.frame);
    const auto run = run_ob(sc, frame);
    const auto& T = run.snapshots_T.back();
    if (cx.cfg.has_format("dat")) {
        write_dat(cx.dir / "profile.dat", {"z", "mean_T"}, {z_centres(sc.grid), horizontal_profile(T)});
        write_dat(cx.dir / "lambda_trace.dat", {"t", "mean_T", "Lambda", "flux", "heat_balance_residual"},
                  {run.trace.t, run.trace.mean_T, run.trace.Lambda, run.trace.flux, run.trace.heat_balance_residual});
    }
    cx.log() << "run-ob: " << run.steps << " steps in the " << to_string(frame) << " frame to t = "
             << run.final_state.t << ", mean T " << mean(T) << ", max |div U| "
             << run.conservation.back().max_div << '\n';
}

void run_nsf_cmd(Context& cx) {
    auto sc = nsf_scenario(cx.cfg, cx.cfg.nsf.eps);
    sc.out_dir = cx.dir;
    sc.write_fields = cx.cfg.has_format("bllf");
    RelEnergyInequalityMonitor mon(sc, sc.rho_bar, reference_temperature(sc));
    sc.observer = [&](const NsfState& s) { mon.observe(s); };
    const auto run = run_nsf(sc);
    if (cx.cfg.has_format("csv")) mon.write_csv(cx.dir / "rel_energy_inequality.csv");
    if (cx.cfg.has_format("dat")) {
        const auto& s = run.final_state;
        write_dat(cx.dir / "profile.dat", {"z", "mean_rho", "mean_theta"},
                  {z_centres(sc.grid), horizontal_profile(s.rho), horizontal_profile(s.theta)});
        write_dat(cx.dir / "conservation.dat", {"t", "mass", "ballistic_energy", "entropy_proxy", "dt"},
                  {run.log.t, run.log.mass, run.log.ballistic, run.log.entropy, run.log.dt});
    }
    const double m0 = run.log.mass.front(), m1 = run.log.mass.back();
    cx.log() << "run-nsf: eps " << sc.eps << ", " << run.steps << " steps to t = " << run.final_state.t
             << ", relative mass drift " << std::abs(m1 - m0) / m0 << ", " << run.wall_seconds << " s\n";
    cx.log() << "relative energy inequality: min gap " << mon.min_gap() << ", final gap " << mon.log().gap.back()
             << ", steps with gap below -1e-12: " << mon.violations(1e-12) << '\n';
}

void write_table(const ConvergenceTable& t, const fs::path& stem, const ScenarioConfig& c) {
    if (c.has_format("csv")) t.write_csv(stem.string() + ".csv");
    if (c.has_format("dat")) {
        std::vector<double> e, a, b, m;
        for (const auto& r : t.rows)
            if (r.ok) {
                e.push_back(r.eps);
                a.push_back(r.err_rho);
                b.push_back(r.err_theta);
                m.push_back(r.err_mom);
            }
        write_dat(stem.string() + ".dat", {"eps", "err_rho", "err_theta", "err_mom"}, {e, a, b, m});
    }
}

void print_table(std::ostream& o, const ConvergenceTable& t, const std::string& title) {
    o << title << '\n' << "  eps        err_rho      err_theta    err_mom      steps\n";
    for (const auto& r : t.rows) {
        o << "  " << std::left << std::setw(10) << r.eps;
        if (r.ok)
            o << ' ' << std::setw(12) << r.err_rho << ' ' << std::setw(12) << r.err_theta << ' ' << std::setw(12)
              << r.err_mom << ' ' << r.steps << '\n';
        else
            o << " failed: " << r.failure << '\n';
    }
    o << std::right << "  rates (log-log): rho " << t.rate_rho << ", theta " << t.rate_theta << ", momentum "
      << t.rate_mom << "\n  monotone decrease: " << (t.monotone() ? "yes" : "no") << '\n';
}

int sweep_cmd(Context& cx) {
    const auto sc = limit_scenario(cx.cfg);
    SweepOptions opt{cx.cfg.nsf.eps_list, parse_frame(cx.cfg.ob.frame), cx.threads, cx.cfg.sweep.naive};
    const auto res = sweep(sc, opt);
    write_table(res.modified, cx.dir / "convergence", cx.cfg);
    if (opt.naive) write_table(res.naive, cx.dir / "convergence_naive", cx.cfg);
    auto& o = cx.log();
    o << std::setprecision(5);
    print_table(o, res.modified, "against the modified OB limit");
    if (opt.naive) print_table(o, res.naive, "against the naive OB limit");
    o << "residual-set measure exponent " << res.residual_rate << '\n';
    if (!res.modified.complete()) {
        cx.err << "error: some sweep members failed\n";
        return exit_code(ErrorKind::Divergence);
    }
    return 0;
}

void compare_cmd(Context& cx) {
    const auto rep = compare_modified_vs_naive(limit_scenario(cx.cfg), cx.cfg.nsf.eps, parse_frame(cx.cfg.ob.frame),
                                               cx.cfg.ob.lambda_override);
    if (cx.cfg.has_format("csv")) rep.write_csv(cx.dir / "comparison.csv");
    open_file(cx.dir / "comparison.txt") << rep.text();
    cx.log() << rep.text();
    if (rep.coincide) cx.err << "warning: " << rep.warning << '\n';
}

void hydrostatic_cmd(Context& cx) {
    const auto sc = nsf_scenario(cx.cfg, cx.cfg.nsf.eps);
    const auto prof = hydrostatic_stationary_1d(sc);
    if (cx.cfg.has_format("csv")) write_csv(cx.dir / "hydrostatic.csv", {"z", "rho", "theta"}, {prof.z, prof.rho, prof.theta});
    if (cx.cfg.has_format("dat")) write_dat(cx.dir / "hydrostatic.dat", {"z", "rho", "theta"}, {prof.z, prof.rho, prof.theta});
    cx.log() << "hydrostatic: eps " << sc.eps << ", rho from " << prof.rho.front() << " (bottom) to "
             << prof.rho.back() << " (top)\n";
}

} // namespace

int run_app(const AppOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        ScenarioConfig cfg = load_config(opt.config_path);
        if (opt.out_dir) cfg.output.directory = *opt.out_dir;
        Context cx{cfg, fs::path(cfg.output.directory), std::max(1u, opt.threads), out, err, opt.quiet};
        std::error_code ec;
        fs::create_directories(cx.dir, ec);
        if (ec) fail(ErrorKind::Io, "cannot create " + cx.dir.string() + ": " + ec.message());
        {
            auto m = open_file(cx.dir / "manifest.ini");
            m << "# command = " << opt.command << "\n# config = " << opt.config_path << "\n# threads = " << cx.threads
              << "\n\n"
              << echo(cfg);
        }
        const auto t0 = std::chrono::steady_clock::now();
        int status = 0;
        if (opt.command == "thermo-check")
            thermo_check(cx);
        else if (opt.command == "run-ob")
            run_ob_cmd(cx);
        else if (opt.command == "run-nsf")
            run_nsf_cmd(cx);
        else if (opt.command == "sweep")
            status = sweep_cmd(cx);
        else if (opt.command == "compare")
            compare_cmd(cx);
        else if (opt.command == "hydrostatic")
            hydrostatic_cmd(cx);
        else
            fail(ErrorKind::Configuration, "unknown subcommand '" + opt.command + "'");
        cx.log() << opt.command << " finished in "
                 << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s, output in "
                 << cx.dir.string() << '\n';
        return status;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace bll
