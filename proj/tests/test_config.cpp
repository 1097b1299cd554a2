#include "doctest.h"

#include "bll/config.hpp"
#include "bll/errors.hpp"
#include "bll/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

using namespace bll;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Configuration);
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("minimal config fills defaults and echoes") {
    const auto c = parse_config("[grid]\nnx = 16\nnz = 8\n");
    CHECK(c.grid.nx == 16);
    CHECK(c.grid.nz == 8);
    CHECK(c.nsf.eps == 0.1);
    CHECK(c.ob.frame == "T");
    CHECK(c.eos.beta == 6.5);
    CHECK_FALSE(c.ob.lambda_override.has_value());
    const std::string e = echo(c);
    CHECK(e.find("[eos]") != std::string::npos);
    CHECK(e.find("nx = 16") != std::string::npos);
    CHECK(echo(parse_config(e)) == e);
    // An empty file is the all-default configuration.
    CHECK(echo(parse_config("")) == echo(ScenarioConfig{}));
}

TEST_CASE("comments, lists and optional values") {
    const auto c = parse_config(R"(
# scenario
[nsf]
eps_list = 0.4, 0.2 ,0.1   ; descending
[ob]
frame = Theta
lambda_override = 0.25
[output]
formats = csv
[sweep]
naive = false
)");
    CHECK(c.nsf.eps_list == std::vector<double>{0.4, 0.2, 0.1});
    CHECK(c.ob.frame == "Theta");
    REQUIRE(c.ob.lambda_override.has_value());
    CHECK(*c.ob.lambda_override == 0.25);
    CHECK(c.has_format("csv"));
    CHECK_FALSE(c.has_format("bllf"));
    CHECK_FALSE(c.sweep.naive);
    CHECK_FALSE(parse_config("[ob]\nlambda_override = none\n").ob.lambda_override.has_value());
}

TEST_CASE("forcing spec round-trips") {
    const auto c = parse_config("[forcing]\ntheta_b_bottom = 1\ntheta_b_top = -1\ntheta_b_amplitude = 0.5\n");
    const auto again = parse_config(echo(c));
    CHECK(again.forcing.theta_b_bottom == 1.0);
    CHECK(again.forcing.theta_b_top == -1.0);
    CHECK(again.forcing.theta_b_amplitude == 0.5);
    CHECK(echo(again) == echo(c));

    // Awkward doubles survive the text form bit for bit.
    ScenarioConfig d;
    d.eos.kappa0 = 0.1 + 0.2;
    d.nsf.t_end = 1.0 / 3.0;
    d.nsf.eps_list = {std::nextafter(0.2, 1.0), 1e-7};
    const auto r = parse_config(echo(d));
    CHECK(r.eos.kappa0 == d.eos.kappa0);
    CHECK(r.nsf.t_end == d.nsf.t_end);
    CHECK(r.nsf.eps_list == d.nsf.eps_list);
}

TEST_CASE("errors carry the offending line") {
    CHECK(error_of("[nsf]\n\neps = -0.1\n").find("line 3") != std::string::npos);
    CHECK(error_of("[nsf]\nepsilon = 0.1\n").find("unknown key 'epsilon'") != std::string::npos);
    CHECK(error_of("[nsf]\nepsilon = 0.1\n").find("line 2") != std::string::npos);
    CHECK(error_of("[solver]\n").find("unknown section") != std::string::npos);
    CHECK(error_of("[grid]\nnx = 1.5\n").find("expected an integer") != std::string::npos);
    CHECK(error_of("[grid]\nlx = abc\n").find("line 2") != std::string::npos);
    CHECK(error_of("nx = 4\n").find("outside any section") != std::string::npos);
    CHECK(error_of("[grid]\nnx 4\n").find("key = value") != std::string::npos);
    CHECK(error_of("[grid]\nnx = 4\nnx = 8\n").find("duplicate") != std::string::npos);
    CHECK(error_of("[nsf]\neps_list = 0.1, 0.2\n").find("descending") != std::string::npos);
    CHECK(error_of("[ob]\nframe = X\n").find("line 2") != std::string::npos);
    CHECK(error_of("[output]\nformats = csv, png\n").find("png") != std::string::npos);
    CHECK(error_of("[sweep]\nnaive = yes\n").find("true or false") != std::string::npos);
    CHECK(error_of("[eos]\nbeta = -1\n").find("[eos]") != std::string::npos);
    CHECK(error_of("[grid\n").find("malformed") != std::string::npos);
}

TEST_CASE("scenarios built from a config") {
    const auto c = parse_config(R"(
[grid]
nx = 16
nz = 8
[forcing]
g = 2
theta_b_bottom = 1
theta_b_top = -1
theta_b_amplitude = 0.5
[initial]
ramp = 0.3
[nsf]
t_end = 0.2
dt = 0.001
[ob]
t_end = 0.5
lambda_override = 0
)");
    const auto sc = limit_scenario(c);
    CHECK(std::abs(mean(sc.G)) <= 1e-15);
    CHECK(sc.G(0, 0) == doctest::Approx(-2.0 * (sc.grid.z_center(0) - 0.5)));
    CHECK(sc.theta_b_bottom[0] == doctest::Approx(1.0 + 0.5 * std::cos(std::numbers::pi / 16)));
    // The initial temperature carries the wall data as its trace.
    for (int i = 0; i < 16; ++i) {
        const double bottom = 1.5 * sc.T0(i, 0) - 0.5 * sc.T0(i, 1);
        CHECK(bottom == doctest::Approx(sc.theta_b_bottom[i]).epsilon(0.05));
    }
    CHECK(sc.t_end == 0.2);
    const auto o = ob_scenario(c);
    CHECK(o.t_end == 0.5);
    CHECK(o.lambda_override == 0.0);
    CHECK_NOTHROW(build_initial_ob(o));
    const auto n = nsf_scenario(c, 0.05);
    CHECK(n.eps == 0.05);
    CHECK(n.dt == 0.001);
    CHECK(parse_frame("Theta") == Frame::Theta);
    CHECK_THROWS_AS(parse_frame("theta"), Error);
}
