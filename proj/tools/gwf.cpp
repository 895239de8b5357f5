#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "gwf/config.hpp"
#include "gwf/errors.hpp"
#include "gwf/pipeline.hpp"
#include "gwf/version.hpp"

namespace {

int report_error(const std::string& kind, const std::string& message, const nlohmann::json& extra = {}) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    if (extra.is_object())
        for (const auto& [k, v] : extra.items()) j[k] = v;
    std::cerr << j.dump() << "\n";
    return kind == "config_error" || kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic wind speed forecasts from surface and geostrophic wind"};
    app.set_version_flag("--version", std::string(gwf::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out;

    using Stage = void (*)(const gwf::config::RunConfig&, const gwf::pipeline::Log&);
    const std::vector<std::tuple<std::string, std::string, Stage>> stages{
        {"synth", "Generate the synthetic benchmark", gwf::pipeline::run_synth},
        {"geowind", "Estimate hourly geostrophic wind", gwf::pipeline::run_geowind},
        {"train", "Select lags and fit the models on the training period", gwf::pipeline::run_train},
        {"forecast", "Issue rolling forecasts over the test period", gwf::pipeline::run_forecast},
        {"evaluate", "Score the forecasts", gwf::pipeline::run_evaluate},
        {"report", "Render score tables, PIT and correlation data", gwf::pipeline::run_report},
        {"run", "Every stage in order", gwf::pipeline::run_all},
    };
    Stage chosen = nullptr;
    for (const auto& [name, help, fn] : stages) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override the run seed");
        sub->add_option("--jobs", jobs, "Worker threads (GWF_JOBS overrides)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out, "Override the output directory");
        sub->callback([&chosen, f = fn] { chosen = f; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what());
    }

    try {
        auto cfg = gwf::config::load(config_path);
        if (seed) cfg.seed = *seed;
        if (jobs) cfg.jobs = *jobs;
        if (!out.empty()) cfg.output = out;
        cfg.validate();
        chosen(cfg, [](std::string_view s) { std::cerr << s << "\n"; });
    } catch (const gwf::ConfigError& e) {
        return report_error(e.kind(), e.what(), {{"violations", e.violations()}});
    } catch (const gwf::LoadError& e) {
        return report_error(e.kind(), e.what(), e.line() ? nlohmann::json{{"line", e.line()}} : nlohmann::json{});
    } catch (const gwf::Error& e) {
        return report_error(e.kind(), e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return 0;
}
