#include "bll/config.hpp"

#include "bll/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bll {

bool ScenarioConfig::has_format(const std::string& f) const {
    return std::find(output.formats.begin(), output.formats.end(), f) != output.formats.end();
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
    return out;
}

[[noreturn]] void config_error(int line, const std::string& msg) {
    fail(ErrorKind::Configuration, (line > 0 ? "line " + std::to_string(line) + ": " : "") + msg);
}

double to_double(const std::string& v, int line) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || v.empty()) config_error(line, "expected a number, got '" + v + "'");
    return x;
}

int to_int(const std::string& v, int line) {
    int x = 0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || v.empty()) config_error(line, "expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    config_error(line, "expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t n = 0; n < v.size(); ++n) s += (n ? ", " : "") + fmt(v[n]);
    return s;
}

std::string fmt_list(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t n = 0; n < v.size(); ++n) s += (n ? ", " : "") + v[n];
    return s;
}

struct Key {
    std::function<void(const std::string&, int)> set;
    std::function<std::string()> get;
};

using Registry = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Key>>>>;

Key num(double& x) {
    return {[&x](const std::string& v, int l) { x = to_double(v, l); }, [&x] { return fmt(x); }};
}
Key integer(int& x) {
    return {[&x](const std::string& v, int l) { x = to_int(v, l); }, [&x] { return std::to_string(x); }};
}
Key text(std::string& x) {
    return {[&x](const std::string& v, int) { x = v; }, [&x] { return x; }};
}
Key flag(bool& x) {
    return {[&x](const std::string& v, int l) { x = to_bool(v, l); }, [&x] { return std::string(x ? "true" : "false"); }};
}
Key numbers(std::vector<double>& x) {
    return {[&x](const std::string& v, int l) {
                x.clear();
                for (const auto& item : split_list(v)) x.push_back(to_double(item, l));
            },
            [&x] { return fmt_list(x); }};
}
Key words(std::vector<std::string>& x) {
    return {[&x](const std::string& v, int) { x = split_list(v); }, [&x] { return fmt_list(x); }};
}
Key optional_num(std::optional<double>& x) {
    return {[&x](const std::string& v, int l) {
                if (v == "none")
                    x.reset();
                else
                    x = to_double(v, l);
            },
            [&x] { return x ? fmt(*x) : std::string("none"); }};
}

Registry registry(ScenarioConfig& c) {
    return {
        {"eos",
         {{"p_inf", num(c.eos.p_inf)},
          {"a", num(c.eos.a)},
          {"mu0", num(c.eos.mu0)},
          {"eta0", num(c.eos.eta0)},
          {"kappa0", num(c.eos.kappa0)},
          {"beta", num(c.eos.beta)},
          {"s0", num(c.eos.s0)}}},
        {"grid", {{"nx", integer(c.grid.nx)}, {"nz", integer(c.grid.nz)}, {"lx", num(c.grid.lx)}}},
        {"reference", {{"rho_bar", num(c.reference.rho_bar)}, {"theta_bar", num(c.reference.theta_bar)}}},
        {"forcing",
         {{"g", num(c.forcing.g)},
          {"theta_b_bottom", num(c.forcing.theta_b_bottom)},
          {"theta_b_top", num(c.forcing.theta_b_top)},
          {"theta_b_amplitude", num(c.forcing.theta_b_amplitude)},
          {"theta_b_mode", integer(c.forcing.theta_b_mode)}}},
        {"initial",
         {{"ramp", num(c.initial.ramp)},
          {"perturbation", num(c.initial.perturbation)},
          {"perturbation_mode_x", integer(c.initial.perturbation_mode_x)},
          {"perturbation_mode_z", integer(c.initial.perturbation_mode_z)}}},
        {"nsf",
         {{"eps", num(c.nsf.eps)},
          {"eps_list", numbers(c.nsf.eps_list)},
          {"cfl", num(c.nsf.cfl)},
          {"dt", num(c.nsf.dt)},
          {"t_end", num(c.nsf.t_end)}}},
        {"ob",
         {{"frame", text(c.ob.frame)},
          {"dt", num(c.ob.dt)},
          {"t_end", num(c.ob.t_end)},
          {"lambda_override", optional_num(c.ob.lambda_override)}}},
        {"sweep", {{"naive", flag(c.sweep.naive)}}},
        {"output",
         {{"directory", text(c.output.directory)},
          {"cadence", num(c.output.cadence)},
          {"formats", words(c.output.formats)}}},
    };
}

void validate(const ScenarioConfig& c, const std::map<std::string, int>& lines) {
    auto check = [&](bool ok, const std::string& key, const std::string& msg) {
        if (ok) return;
        const auto it = lines.find(key);
        config_error(it == lines.end() ? 0 : it->second, key + ": " + msg);
    };
    try {
        c.eos.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Configuration, std::string("[eos]: ") + e.what());
    }
    check(c.grid.nx >= 2, "grid.nx", "must be at least 2");
    check(c.grid.nz >= 2, "grid.nz", "must be at least 2");
    check(c.grid.lx > 0.0, "grid.lx", "must be positive");
    check(c.reference.rho_bar > 0.0, "reference.rho_bar", "must be positive");
    check(c.reference.theta_bar > 0.0, "reference.theta_bar", "must be positive");
    check(c.forcing.theta_b_mode >= 0, "forcing.theta_b_mode", "must be non-negative");
    check(c.initial.perturbation_mode_x >= 0, "initial.perturbation_mode_x", "must be non-negative");
    check(c.initial.perturbation_mode_z >= 1, "initial.perturbation_mode_z", "must be at least 1");
    check(c.nsf.eps > 0.0 && c.nsf.eps <= 1.0, "nsf.eps", "must lie in (0, 1]");
    check(!c.nsf.eps_list.empty(), "nsf.eps_list", "must not be empty");
    for (std::size_t n = 0; n < c.nsf.eps_list.size(); ++n) {
        check(c.nsf.eps_list[n] > 0.0 && c.nsf.eps_list[n] <= 1.0, "nsf.eps_list", "entries must lie in (0, 1]");
        check(n == 0 || c.nsf.eps_list[n] < c.nsf.eps_list[n - 1], "nsf.eps_list", "must be strictly descending");
    }
    check(c.nsf.cfl > 0.0 && c.nsf.cfl <= 1.0, "nsf.cfl", "must lie in (0, 1]");
    check(c.nsf.dt >= 0.0, "nsf.dt", "must be non-negative");
    check(c.nsf.t_end > 0.0, "nsf.t_end", "must be positive");
    check(c.ob.frame == "T" || c.ob.frame == "Theta", "ob.frame", "must be T or Theta");
    check(c.ob.dt > 0.0, "ob.dt", "must be positive");
    check(c.ob.t_end > 0.0, "ob.t_end", "must be positive");
    check(!c.ob.lambda_override || (*c.ob.lambda_override >= 0.0 && *c.ob.lambda_override < 1.0),
          "ob.lambda_override", "must lie in [0, 1) or be none");
    check(!c.output.directory.empty(), "output.directory", "must not be empty");
    check(c.output.cadence >= 0.0, "output.cadence", "must be non-negative");
    for (const auto& f : c.output.formats)
        check(f == "csv" || f == "dat" || f == "bllf", "output.formats", "unknown format '" + f + "'");
}

} // namespace

ScenarioConfig parse_config(const std::string& input) {
    ScenarioConfig c;
    const auto reg = registry(c);
    std::map<std::string, int> lines;
    const std::vector<std::pair<std::string, Key>>* section = nullptr;
    std::string section_name;
    std::istringstream in(input);
    int line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(line_no, "malformed section header");
            section_name = trim(line.substr(1, line.size() - 2));
            const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& s) { return s.first == section_name; });
            if (it == reg.end()) config_error(line_no, "unknown section [" + section_name + "]");
            section = &it->second;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) config_error(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!section) config_error(line_no, "key '" + key + "' outside any section");
        const auto it = std::find_if(section->begin(), section->end(), [&](const auto& k) { return k.first == key; });
        if (it == section->end()) config_error(line_no, "unknown key '" + key + "' in [" + section_name + "]");
        const std::string full = section_name + "." + key;
        if (lines.count(full)) config_error(line_no, "duplicate key '" + key + "' in [" + section_name + "]");
        it->second.set(value, line_no);
        lines[full] = line_no;
    }
    validate(c, lines);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::Io, "cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string echo(const ScenarioConfig& c) {
    ScenarioConfig copy = c;
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, keys] : registry(copy)) {
        out << (first ? "" : "\n") << '[' << name << "]\n";
        first = false;
        for (const auto& [key, k] : keys) out << key << " = " << k.get() << '\n';
    }
    return out.str();
}

} // namespace bll
