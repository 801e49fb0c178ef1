#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "cgm/error.hpp"
#include "cgm/pipeline.hpp"
#include "cgm/scenario.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string stage;
    std::string baselines;
    std::optional<std::size_t> threads;
};

cgm::PipelineConfig resolve(const Options& o) {
    cgm::PipelineConfig c;
    if (!o.config.empty()) {
        c = cgm::load_config(o.config, o.seed);
    } else {
        // Default scene: the standard map with randomly scattered buildings.
        nlohmann::json doc{{"schema_version", cgm::kConfigSchemaVersion},
                           {"environment", {{"random_buildings", nlohmann::json::object()}}}};
        if (o.seed) doc["seed"] = *o.seed;
        c = cgm::config_from_json(doc);
    }
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.baselines == "on") c.baselines.enabled = true;
    if (o.baselines == "off") c.baselines.enabled = false;
    if (o.threads) c.threads = *o.threads;
    return c;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "Config file (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Run directory");
    sub->add_option("--seed", o.seed, "Master seed (overrides config)");
    sub->add_option("--baselines", o.baselines, "Evaluate IDW and Kriging baselines")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Channel gain map construction with subregional CNN models"};
    app.require_subcommand(1);
    Options opt;

    std::vector<std::pair<CLI::App*, std::string>> stage_cmds;
    for (const auto& name : cgm::Pipeline::stage_names()) {
        auto* sub = app.add_subcommand(name, "Run the '" + name + "' stage on the run directory");
        add_common(sub, opt);
        stage_cmds.emplace_back(sub, name);
    }
    auto* full = app.add_subcommand("full-run", "Run every stage in order");
    add_common(full, opt);
    full->add_option("--stage", opt.stage, "Stop after this stage")
        ->check(CLI::IsMember(cgm::Pipeline::stage_names()));

    CLI11_PARSE(app, argc, argv);

    try {
        cgm::Pipeline pipeline(resolve(opt));
        if (full->parsed()) {
            for (const auto& name : cgm::Pipeline::stage_names()) {
                std::cerr << "[cgm] " << name << "\n";
                pipeline.run_stage(name);
                if (name == opt.stage) break;
            }
        } else {
            for (const auto& [sub, name] : stage_cmds)
                if (sub->parsed()) pipeline.run_stage(name);
        }
        std::cerr << "[cgm] done: " << pipeline.config().output_dir.string() << "\n";
    } catch (const cgm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
