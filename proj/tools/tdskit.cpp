// SPDX-License-Identifier: Apache-2.0
//
// tdskit: thermal-desorption simulation, calibration, and commit-provenance
// checks behind one deterministic command-line tool.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tdskit/config_params.hpp"
#include "tdskit/curve_compare.hpp"
#include "tdskit/git_reader.hpp"
#include "tdskit/grain_calibration.hpp"
#include "tdskit/provenance.hpp"

namespace fs = std::filesystem;
using namespace tdskit;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

Config load_config(const std::string& path) {
    return path.empty() ? Config{} : Config::parse_file(path);
}

fs::path ensure_out_dir(const std::string& out) {
    const fs::path dir = out.empty() ? fs::current_path() : fs::path(out);
    fs::create_directories(dir);
    return dir;
}

int run_simulate_grain(const std::string& config_path, const std::string& out) {
    const auto cfg = load_config(config_path);
    const auto params = grain_params_from_config(cfg);
    const auto result = simulate_grain_tds(params, grain_mesh_from_config(cfg),
                                           controller_from_config(cfg, grain_default_controller()));
    const fs::path dir = ensure_out_dir(out);
    write_release_csv(result.release, dir / "release.csv");
    write_release_csv(normalize_curve(result.release, Normalization::unit_peak),
                      dir / "release_normalized.csv");
    std::cout << "peak " << io::format_double(result.release.peak_temperature()) << " K, "
              << result.release.samples.size() << " samples -> " << (dir / "release.csv").string()
              << "\n";
    return exit_ok;
}

int run_simulate_slab(const std::string& config_path, const std::string& out, double oxide_nm) {
    auto cfg = load_config(config_path);
    if (oxide_nm > 0.0) cfg.set("slab", "l_ox_nm", io::format_double(oxide_nm));
    const auto params = slab_params_from_config(cfg);
    const auto controller = controller_from_config(cfg, slab_default_controller());
    const auto result = simulate_slab_tds(params, std::nullopt, controller);

    const fs::path dir = ensure_out_dir(out);
    write_slab_release_csv(result, dir / "release.csv");
    write_slab_inventory_csv(result, dir / "inventory.csv");
    const auto mesh = build_slab_mesh(default_slab_regions(params));
    write_slab_profile_csv(init_slab_state(params, mesh), mesh, params,
                           dir / "profile_initial.csv");
    write_slab_profile_csv(result.final_state, mesh, params, dir / "profile.csv");

    std::cout << "oxide " << io::format_double(params.oxide_thickness_m * 1e9) << " nm: D2 peak "
              << io::format_double(result.d2.peak_temperature()) << " K, final oxygen "
              << io::format_double(result.trace.back().oxygen_inventory) << " atoms/m^2 -> "
              << (dir / "release.csv").string() << "\n";
    return exit_ok;
}

int run_calibrate(const std::string& config_path, const std::string& out, std::uint64_t seed) {
    const auto cfg = load_config(config_path);
    if (!cfg.has("calibration", "fixture")) {
        throw ConfigError("calibrate requires [calibration] fixture = <experimental csv>");
    }
    const auto fixture = load_experimental_csv(cfg.get_string("calibration", "fixture"));
    const auto base = grain_params_from_config(cfg);
    const auto objective = make_grain_objective(base, fixture, objective_options_from_config(cfg));
    const auto result =
        optimize(objective, grain_parameter_space(), optimize_options_from_config(cfg, seed));

    const fs::path dir = ensure_out_dir(out);
    write_history_csv(result, grain_parameter_space(), dir / "history.csv");
    write_best_parameters(result, grain_parameter_space(), dir / "best_parameters.conf");
    std::cout << "best score " << io::format_double(result.best_score) << " after "
              << result.history.size() << " evaluations -> " << (dir / "history.csv").string()
              << "\n";
    return exit_ok;
}

/// Loads either curve layout by sniffing the header.
ReleaseCurve load_curve_for_compare(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open curve CSV: " + path.string());
    std::string header;
    std::getline(in, header);
    header = io::strip(header);
    if (header == "time_s,temperature_K,release_rate") {
        return read_release_csv(path, Normalization::unit_peak);
    }
    if (header == "temperature_K,normalized_rate") {
        const auto exp_curve = load_experimental_csv(path);
        ReleaseCurve curve;
        curve.normalization = Normalization::unit_peak;
        for (std::size_t i = 0; i < exp_curve.points.size(); ++i) {
            curve.samples.push_back({double(i), exp_curve.points[i].temperature_K,
                                     exp_curve.points[i].normalized_rate});
        }
        return curve;
    }
    throw ConfigError("unrecognized curve header in " + path.string());
}

ExperimentalCurve load_experimental_for_compare(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open curve CSV: " + path.string());
    std::string header;
    std::getline(in, header);
    header = io::strip(header);
    if (header == "temperature_K,normalized_rate") return load_experimental_csv(path);
    if (header == "time_s,temperature_K,release_rate") {
        const auto curve = read_release_csv(path, Normalization::unit_peak);
        ExperimentalCurve exp_curve;
        exp_curve.source = path.string();
        for (const auto& s : curve.samples) {
            exp_curve.points.push_back({s.temperature_K, s.rate});
        }
        exp_curve.validate();
        return exp_curve;
    }
    throw ConfigError("unrecognized curve header in " + path.string());
}

int run_compare(const std::string& simulated, const std::string& experimental,
                double denominator_floor) {
    const auto sim = load_curve_for_compare(simulated);
    const auto exp_curve = load_experimental_for_compare(experimental);
    std::cout << io::format_double(rmspe(sim, exp_curve, denominator_floor)) << "\n";
    return exit_ok;
}

int run_provenance(const std::string& config_path, const std::string& rev_range, bool json,
                   const std::string& repo) {
    const auto policy = provenance::load_policy(load_config(config_path));
    const provenance::GitReader reader(repo.empty() ? fs::current_path() : fs::path(repo), policy);
    const auto report = provenance::run_checks(rev_range, reader, policy);
    if (json) {
        std::cout << provenance::report_to_json(report).dump(2) << "\n";
    } else {
        std::cout << provenance::report_to_text(report);
    }
    return report.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermal desorption simulation, calibration, and provenance toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 42;
    app.add_option("--config", config_path, "parameter/policy config file");
    app.add_option("--out", out_dir, "output directory (default: current directory)");
    app.add_option("--seed", seed, "seed for every random choice (default 42)");

    auto* grain = app.add_subcommand("simulate-grain", "tritium TDS from a spherical grain");
    auto* slab = app.add_subcommand("simulate-slab", "deuterium TDS from oxide-coated tungsten");
    double oxide_nm = 0.0;
    slab->add_option("--oxide-nm", oxide_nm, "override the oxide thickness in nm");
    auto* calibrate = app.add_subcommand("calibrate", "GP/EI calibration of the grain model");
    auto* compare = app.add_subcommand("compare", "RMSPE between two release-curve CSVs");
    std::string sim_csv, exp_csv;
    double floor_value = 0.01;
    compare->add_option("simulated", sim_csv, "simulated curve CSV")->required();
    compare->add_option("experimental", exp_csv, "experimental curve CSV")->required();
    compare->add_option("--floor", floor_value, "denominator floor (default 0.01)");
    auto* prov = app.add_subcommand("provenance", "commit-level governance checks");
    std::string rev_range = "HEAD";
    std::string repo_root;
    bool json_output = false;
    prov->add_option("--rev-range", rev_range, "revision range to check (default HEAD)");
    prov->add_option("--repo", repo_root, "repository root (default: current directory)");
    prov->add_flag("--json", json_output, "emit the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return exit_usage;
    }

    try {
        if (grain->parsed()) return run_simulate_grain(config_path, out_dir);
        if (slab->parsed()) return run_simulate_slab(config_path, out_dir, oxide_nm);
        if (calibrate->parsed()) return run_calibrate(config_path, out_dir, seed);
        if (compare->parsed()) return run_compare(sim_csv, exp_csv, floor_value);
        if (prov->parsed()) return run_provenance(config_path, rev_range, json_output, repo_root);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}
