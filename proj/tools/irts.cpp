#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "irts/commands.hpp"

int main(int argc, char** argv) {
    using namespace irts;
    CLI::App app{"Irregular time series feature extraction and forecasting"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output, variant, external;
    std::size_t jobs = 0;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Run configuration file")->required();
        cmd->add_option("--output", output, "Output file (overrides [output])");
        cmd->add_option("--jobs", jobs, "Worker threads (0 = logical cores)");
        cmd->add_option("--seed", seed, "Seed for every stochastic component");
        cmd->add_option("--variant", variant, "baseline | autofits | merged")
            ->check(CLI::IsMember({"baseline", "autofits", "merged"}));
        cmd->add_option("--external-features", external, "External feature CSV for the merged variant");
    };
    auto* extract = app.add_subcommand("extract", "Write the feature matrix");
    auto* forecast = app.add_subcommand("forecast", "Forecast the next bin of every entity");
    auto* sweep = app.add_subcommand("sweep", "Run the frequency sweep and write the report");
    auto* validate = app.add_subcommand("validate", "Summarize the input series");
    for (auto* cmd : {extract, forecast, sweep, validate}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::config_error;
    }

    cli::Overrides o;
    if (!output.empty()) o.output = output;
    if (!external.empty()) o.external_features = external;
    if (!variant.empty()) o.variant = parse_variant(variant);
    o.jobs = jobs;
    for (auto* cmd : {extract, forecast, sweep, validate})
        if (cmd->count("--seed")) o.seed = seed;

    try {
        const auto cfg = load_run_config(config_path);
        if (*extract) return cli::extract(cfg, o, std::cout);
        if (*forecast) return cli::forecast(cfg, o, std::cout);
        if (*sweep) return cli::sweep(cfg, o, std::cout);
        return cli::validate_data(cfg, o, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::config_error;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return cli::data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::data_error;
    }
}
