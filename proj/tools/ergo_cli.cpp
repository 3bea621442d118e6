// ergo_cli.cpp — Command-line front end: runs the configured experiments and
// writes CSV output plus a machine-readable run manifest.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-guard abort.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "ergo/experiments.hpp"

namespace {

int run(const std::string& experiment, const std::string& config_path, const std::string& out_path,
        const std::string& preset) {
    try {
        ergo::KeyValueConfig cfg =
            config_path.empty() ? ergo::KeyValueConfig{} : ergo::KeyValueConfig::parse_file(config_path);
        std::string name = experiment;
        if (!preset.empty()) {
            std::string preset_exp = ergo::preset_experiment(preset);
            if (preset_exp != experiment)
                throw ergo::ConfigError("preset '" + preset + "' belongs to the '" + preset_exp +
                                        "' experiment");
            ergo::apply_preset(cfg, preset);
        }
        ergo::ExperimentResult result = ergo::run_experiment(name, std::move(cfg));
        std::string path = out_path.empty() ? name + ".csv" : out_path;
        ergo::write_output(result, path);
        std::fprintf(stdout, "wrote %s (%zu bytes) and %s.manifest.json\n", path.c_str(), result.csv.size(),
                     path.c_str());
        return 0;
    } catch (const ergo::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ergo::TruncationError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    } catch (const ergo::TraceDriftError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    } catch (const ergo::StationarityError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergo: cyclic quantum machine simulations (energy accounting, entropy bounds, "
                 "squeezed-bath cycles, catalyzed engine)"};
    app.require_subcommand(1);

    std::string config_path, out_path, preset;
    for (const char* name : {"relax", "otto", "carnot", "catalysis", "bounds"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--out", out_path, "output CSV path (default: <experiment>.csv)");
        sub->add_option("--preset", preset, "parameter preset: fig5a | fig5b | fig6 | fig7 | fig8");
    }

    CLI11_PARSE(app, argc, argv);
    return run(app.get_subcommands().front()->get_name(), config_path, out_path, preset);
}
