#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cgm/composite.hpp"
#include "cgm/predictor.hpp"
#include "cgm/scenario.hpp"

namespace cgm {

inline constexpr int kConfigSchemaVersion = 1;

struct BaselineConfig {
    bool enabled = true;
    double idw_power = 2.0;
    std::size_t kriging_neighbors = 32;
    std::size_t lag_bins = 15;
};

struct PipelineConfig {
    int schema_version = kConfigSchemaVersion;
    std::optional<EnvironmentSpec> environment;  // buildings already resolved
    std::optional<std::filesystem::path> dataset;
    std::size_t m_scgm = 3200;
    std::vector<std::size_t> k_range{1, 2, 3, 4, 5, 6, 7, 8, 9};
    double test_fraction = 0.2;
    Hyperparameters hyper;
    std::optional<std::size_t> further_samples;  // default 0.25 * m_scgm
    double sigma_factor = 0.5;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "run";
    BaselineConfig baselines;
    std::size_t threads = 1;
    std::size_t kmeans_restarts = 10;
    std::size_t min_cluster = 8;

    std::size_t further() const;
    void validate() const;
};

/// Parse a config document. Relative dataset paths resolve against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
/// `seed` replaces the document's master seed before derived seeds are resolved.
PipelineConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = {});
nlohmann::json config_to_json(const PipelineConfig& config);
nlohmann::json environment_to_json(const EnvironmentSpec& spec);

/// Stage runner over one run directory. Every stage reads its inputs from memory
/// when an earlier stage ran in this process, otherwise from the run directory.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);
    ~Pipeline();

    static const std::vector<std::string>& stage_names();

    void run_stage(const std::string& name);
    /// All stages in order; returns the report body.
    nlohmann::json run_all();

    const PipelineConfig& config() const { return config_; }

private:
    struct State;

    void generate();
    void sample();
    void sweep_k();
    void cluster();
    void train();
    void resample();
    void reuse();
    void predict();
    void evaluate();
    void report();

    const Environment& env();
    const GroundTruthMap& truth();
    const Scgm& dataset();
    const TestSet& test_set();
    const Partition& partition();
    const McnnModel& model(const std::string& key);
    bool has_truth() const { return config_.environment && !config_.dataset; }

    std::filesystem::path out(const std::string& name) const { return config_.output_dir / name; }
    void record_timing(const std::string& stage, double seconds);

    PipelineConfig config_;
    std::unique_ptr<State> state_;
};

}  // namespace cgm
