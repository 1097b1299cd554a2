#pragma once

// Scenario configuration: a line-oriented INI dialect.
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Lists are comma separated. Unknown sections and keys, malformed values and
// violated invariants are reported as Configuration errors naming the line.

#include "bll/thermo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bll {

struct ScenarioConfig {
    thermo::EosParams eos;

    struct GridSection {
        int nx = 64;
        int nz = 32;
        double lx = 1.0;
    } grid;

    struct ReferenceSection {
        double rho_bar = 1.0;
        double theta_bar = 1.0;
    } reference;

    // G = -g (z - 1/2); wall data Theta_B = c + amplitude cos(2 pi mode x / lx).
    struct ForcingSection {
        double g = 1.0;
        double theta_b_bottom = 1.0;
        double theta_b_top = -1.0;
        double theta_b_amplitude = 0.0;
        int theta_b_mode = 1;
    } forcing;

    // T0 = wall blend - ramp sin(pi z)
    //      + perturbation cos(2 pi mode_x x / lx) sin(mode_z pi z); U0 = 0.
    struct InitialSection {
        double ramp = 0.0;
        double perturbation = 0.2;
        int perturbation_mode_x = 1;
        int perturbation_mode_z = 1;
    } initial;

    struct NsfSection {
        double eps = 0.1;
        std::vector<double> eps_list{0.2, 0.1, 0.05};
        double cfl = 0.4;
        double dt = 0.0; // 0: CFL-selected step
        double t_end = 0.25;
    } nsf;

    struct ObSection {
        std::string frame = "T"; // T or Theta
        double dt = 1e-3;
        double t_end = 0.25;
        std::optional<double> lambda_override;
    } ob;

    struct SweepSection {
        bool naive = true; // also tabulate against the classical OB target
    } sweep;

    struct OutputSection {
        std::string directory = "bll_out";
        double cadence = 0.05;
        std::vector<std::string> formats{"csv", "dat", "bllf"};
    } output;

    bool has_format(const std::string& f) const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Fully resolved configuration in the input dialect; parse_config(echo(c))
// reproduces c exactly.
std::string echo(const ScenarioConfig& c);

} // namespace bll
