#include "cgm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "cgm/baselines.hpp"
#include "cgm/error.hpp"
#include "cgm/io.hpp"
#include "cgm/optimize.hpp"
#include "cgm/reuse.hpp"
#include "cgm/sampling.hpp"
#include "cgm/seed.hpp"

namespace cgm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::invalid_config, where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!ok.count(key)) throw Error(ErrorCode::invalid_config, where + ": unknown key '" + key + "'");
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

EnvironmentSpec environment_from_json(const json& j, std::uint64_t master_seed) {
    check_keys(j,
               {"width", "height", "grid_step", "bs_position", "bs_power_w", "carrier_frequency_mhz", "sample_height",
                "buildings", "random_buildings", "propagation", "seed"},
               "environment");
    EnvironmentSpec s;
    read_opt(j, "width", s.width);
    read_opt(j, "height", s.height);
    read_opt(j, "grid_step", s.grid_step);
    read_opt(j, "bs_position", s.bs_position);
    read_opt(j, "bs_power_w", s.bs_power_w);
    read_opt(j, "carrier_frequency_mhz", s.carrier_frequency_mhz);
    read_opt(j, "sample_height", s.sample_height);
    s.seed = derive_seed(master_seed, "environment");
    read_opt(j, "seed", s.seed);
    if (j.contains("propagation")) {
        const auto& p = j["propagation"];
        check_keys(p,
                   {"pl0_db", "n_los", "n_nlos", "shadow_sigma_los_db", "shadow_sigma_nlos_db", "shadow_corr_dist"},
                   "environment.propagation");
        read_opt(p, "pl0_db", s.propagation.pl0_db);
        read_opt(p, "n_los", s.propagation.n_los);
        read_opt(p, "n_nlos", s.propagation.n_nlos);
        read_opt(p, "shadow_sigma_los_db", s.propagation.shadow_sigma_los_db);
        read_opt(p, "shadow_sigma_nlos_db", s.propagation.shadow_sigma_nlos_db);
        read_opt(p, "shadow_corr_dist", s.propagation.shadow_corr_dist);
    }
    if (j.contains("buildings")) {
        for (const auto& b : j["buildings"]) {
            check_keys(b, {"x_min", "y_min", "x_max", "y_max", "height"}, "environment.buildings[]");
            Building bd;
            bd.x_min = b.at("x_min").get<double>();
            bd.y_min = b.at("y_min").get<double>();
            bd.x_max = b.at("x_max").get<double>();
            bd.y_max = b.at("y_max").get<double>();
            read_opt(b, "height", bd.height);
            s.buildings.push_back(bd);
        }
    }
    if (j.contains("random_buildings")) {
        const auto& r = j["random_buildings"];
        check_keys(r, {"count", "min_size", "max_size", "min_height", "max_height", "bs_clearance"},
                   "environment.random_buildings");
        BuildingLayout layout;
        read_opt(r, "count", layout.count);
        read_opt(r, "min_size", layout.min_size);
        read_opt(r, "max_size", layout.max_size);
        read_opt(r, "min_height", layout.min_height);
        read_opt(r, "max_height", layout.max_height);
        read_opt(r, "bs_clearance", layout.bs_clearance);
        const auto extra =
            generate_buildings(layout, s.width, s.height, {s.bs_position[0], s.bs_position[1]}, s.seed);
        s.buildings.insert(s.buildings.end(), extra.begin(), extra.end());
    }
    return s;
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "missing artifact " + path.string());
    return json::parse(in);
}

// Dataset CSV that may legitimately hold zero rows.
Scgm read_points(const fs::path& path) {
    try {
        return ingest_dataset(path);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::empty_dataset) return {};
        throw;
    }
}

json optional_array(const std::vector<std::optional<double>>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(x ? json(*x) : json(nullptr));
    return a;
}

double rmse_of(std::span<const double> pred, std::span<const double> truth) {
    return evaluate_rmse(pred, truth).overall;
}

}  // namespace

std::size_t PipelineConfig::further() const {
    return further_samples.value_or(static_cast<std::size_t>(std::llround(0.25 * double(m_scgm))));
}

void PipelineConfig::validate() const {
    auto fail = [](const std::string& w) { throw Error(ErrorCode::invalid_config, w); };
    if (schema_version != kConfigSchemaVersion)
        fail("unsupported schema_version " + std::to_string(schema_version));
    if (!environment && !dataset) fail("either environment or dataset is required");
    if (dataset && !fs::exists(*dataset)) fail("dataset not found: " + dataset->string());
    if (m_scgm == 0 && !dataset) fail("m_scgm must be positive");
    if (k_range.empty()) fail("k_range must be nonempty");
    for (auto k : k_range)
        if (k == 0) fail("k_range entries must be >= 1");
    if (!(test_fraction > 0.0 && test_fraction <= 0.5)) fail("test_fraction must lie in (0, 0.5]");
    if (sigma_factor < 0.0) fail("sigma_factor must be >= 0");
    if (threads == 0) fail("threads must be >= 1");
    hyper.validate();
}

PipelineConfig config_from_json(const json& doc, const fs::path& base_dir) {
    try {
        check_keys(doc,
                   {"schema_version", "environment", "dataset", "m_scgm", "k_range", "test_fraction",
                    "hyperparameters", "further_samples", "sigma_factor", "seed", "output_dir", "baselines",
                    "threads", "kmeans_restarts", "min_cluster"},
                   "config");
        PipelineConfig c;
        if (!doc.contains("schema_version")) throw Error(ErrorCode::invalid_config, "schema_version is required");
        c.schema_version = doc["schema_version"].get<int>();
        if (c.schema_version != kConfigSchemaVersion)
            throw Error(ErrorCode::version_mismatch, "config schema_version " + std::to_string(c.schema_version) +
                                                         " is not supported (expected " +
                                                         std::to_string(kConfigSchemaVersion) + ")");
        read_opt(doc, "seed", c.seed);
        if (doc.contains("environment")) c.environment = environment_from_json(doc["environment"], c.seed);
        if (doc.contains("dataset")) {
            fs::path p = doc["dataset"].get<std::string>();
            c.dataset = p.is_relative() ? base_dir / p : p;
        }
        read_opt(doc, "m_scgm", c.m_scgm);
        read_opt(doc, "k_range", c.k_range);
        read_opt(doc, "test_fraction", c.test_fraction);
        if (doc.contains("hyperparameters")) {
            const auto& h = doc["hyperparameters"];
            check_keys(h, {"learning_rate", "epochs", "max_batch", "beta1", "beta2", "epsilon"}, "hyperparameters");
            read_opt(h, "learning_rate", c.hyper.learning_rate);
            read_opt(h, "epochs", c.hyper.epochs);
            read_opt(h, "max_batch", c.hyper.max_batch);
            read_opt(h, "beta1", c.hyper.beta1);
            read_opt(h, "beta2", c.hyper.beta2);
            read_opt(h, "epsilon", c.hyper.epsilon);
        }
        if (doc.contains("further_samples") && !doc["further_samples"].is_null())
            c.further_samples = doc["further_samples"].get<std::size_t>();
        read_opt(doc, "sigma_factor", c.sigma_factor);
        if (doc.contains("output_dir")) {
            fs::path p = doc["output_dir"].get<std::string>();
            c.output_dir = p.is_relative() ? base_dir / p : p;
        }
        if (doc.contains("baselines")) {
            const auto& b = doc["baselines"];
            check_keys(b, {"enabled", "idw_power", "kriging_neighbors", "lag_bins"}, "baselines");
            read_opt(b, "enabled", c.baselines.enabled);
            read_opt(b, "idw_power", c.baselines.idw_power);
            read_opt(b, "kriging_neighbors", c.baselines.kriging_neighbors);
            read_opt(b, "lag_bins", c.baselines.lag_bins);
        }
        read_opt(doc, "threads", c.threads);
        read_opt(doc, "kmeans_restarts", c.kmeans_restarts);
        read_opt(doc, "min_cluster", c.min_cluster);
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, e.what());
    }
}

PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, path.string() + ": " + e.what());
    }
    if (seed && doc.is_object()) doc["seed"] = *seed;
    return config_from_json(doc, path.parent_path());
}

json environment_to_json(const EnvironmentSpec& s) {
    json b = json::array();
    for (const auto& x : s.buildings)
        b.push_back({{"x_min", x.x_min}, {"y_min", x.y_min}, {"x_max", x.x_max}, {"y_max", x.y_max}, {"height", x.height}});
    const auto& p = s.propagation;
    return {{"width", s.width},
            {"height", s.height},
            {"grid_step", s.grid_step},
            {"bs_position", s.bs_position},
            {"bs_power_w", s.bs_power_w},
            {"carrier_frequency_mhz", s.carrier_frequency_mhz},
            {"sample_height", s.sample_height},
            {"buildings", b},
            {"propagation",
             {{"pl0_db", p.pl0_db},
              {"n_los", p.n_los},
              {"n_nlos", p.n_nlos},
              {"shadow_sigma_los_db", p.shadow_sigma_los_db},
              {"shadow_sigma_nlos_db", p.shadow_sigma_nlos_db},
              {"shadow_corr_dist", p.shadow_corr_dist}}},
            {"seed", s.seed}};
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    if (c.environment) j["environment"] = environment_to_json(*c.environment);
    if (c.dataset) j["dataset"] = c.dataset->filename().string();
    j["m_scgm"] = c.m_scgm;
    j["k_range"] = c.k_range;
    j["test_fraction"] = c.test_fraction;
    j["hyperparameters"] = {{"learning_rate", c.hyper.learning_rate}, {"epochs", c.hyper.epochs},
                            {"max_batch", c.hyper.max_batch},         {"beta1", c.hyper.beta1},
                            {"beta2", c.hyper.beta2},                 {"epsilon", c.hyper.epsilon}};
    j["further_samples"] = c.further();
    j["sigma_factor"] = c.sigma_factor;
    j["seed"] = c.seed;
    j["baselines"] = {{"enabled", c.baselines.enabled},
                      {"idw_power", c.baselines.idw_power},
                      {"kriging_neighbors", c.baselines.kriging_neighbors},
                      {"lag_bins", c.baselines.lag_bins}};
    j["kmeans_restarts"] = c.kmeans_restarts;
    j["min_cluster"] = c.min_cluster;
    return j;
}

// ---------------------------------------------------------------------------

struct Pipeline::State {
    std::optional<Environment> env;
    std::optional<GroundTruthMap> map;
    std::optional<Scgm> dataset;
    std::optional<TestSet> test;
    std::optional<SweepResult> sweep;
    std::optional<Partition> partition;
    std::map<std::string, McnnModel> models;
    std::optional<Scgm> new_uneven;
    std::optional<Scgm> new_even;
    json timings = json::object();
};

namespace {

struct Seeds {
    std::uint64_t sample, test, sweep, resample_uneven, resample_even, retrain;
};

Seeds seeds_for(std::uint64_t master) {
    return {derive_seed(master, "sample"),          derive_seed(master, "test-set"),
            derive_seed(master, "sweep"),           derive_seed(master, "resample-uneven"),
            derive_seed(master, "resample-even"),   derive_seed(master, "retrain")};
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), state_(std::make_unique<State>()) {
    config_.validate();
    fs::create_directories(config_.output_dir);
    const auto tpath = out("timings.json");
    if (fs::exists(tpath)) {
        try {
            state_->timings = read_json_file(tpath);
        } catch (...) {
            state_->timings = json::object();
        }
    }
}

Pipeline::~Pipeline() = default;

const std::vector<std::string>& Pipeline::stage_names() {
    static const std::vector<std::string> names{"generate", "sample",  "sweep-k", "cluster",  "train",
                                                "resample", "reuse",   "predict", "evaluate", "report"};
    return names;
}

void Pipeline::record_timing(const std::string& stage, double seconds) {
    state_->timings[stage] = seconds;
    write_json(out("timings.json"), state_->timings);
}

void Pipeline::run_stage(const std::string& name) {
    using Fn = void (Pipeline::*)();
    static const std::map<std::string, Fn> table{
        {"generate", &Pipeline::generate}, {"sample", &Pipeline::sample},     {"sweep-k", &Pipeline::sweep_k},
        {"cluster", &Pipeline::cluster},   {"train", &Pipeline::train},       {"resample", &Pipeline::resample},
        {"reuse", &Pipeline::reuse},       {"predict", &Pipeline::predict},   {"evaluate", &Pipeline::evaluate},
        {"report", &Pipeline::report}};
    const auto it = table.find(name);
    if (it == table.end()) throw Error(ErrorCode::invalid_config, "unknown stage '" + name + "'");
    const double t0 = now_seconds();
    try {
        (this->*(it->second))();
    } catch (const Error& e) {
        throw Error(ErrorCode::stage_failure, "stage '" + name + "': " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::stage_failure, "stage '" + name + "': " + e.what());
    }
    record_timing(name, now_seconds() - t0);
}

json Pipeline::run_all() {
    for (const auto& s : stage_names()) run_stage(s);
    return read_json_file(out("report.json"));
}

// --- lazy inputs -----------------------------------------------------------

const Environment& Pipeline::env() {
    if (!state_->env) {
        if (!config_.environment) throw Error(ErrorCode::invalid_config, "this stage needs an environment");
        state_->env = build_environment(*config_.environment);
    }
    return *state_->env;
}

const GroundTruthMap& Pipeline::truth() {
    if (!state_->map) state_->map = compute_ground_truth(env());
    return *state_->map;
}

const Scgm& Pipeline::dataset() {
    if (!state_->dataset) state_->dataset = ingest_dataset(out("dataset.csv"));
    return *state_->dataset;
}

const TestSet& Pipeline::test_set() {
    if (!state_->test) state_->test = TestSet{ingest_dataset(out("test_set.csv"))};
    return *state_->test;
}

const Partition& Pipeline::partition() {
    if (!state_->partition) state_->partition = load_partition(out("partition.json"));
    return *state_->partition;
}

const McnnModel& Pipeline::model(const std::string& key) {
    auto it = state_->models.find(key);
    if (it == state_->models.end()) it = state_->models.emplace(key, load_model(out("model_" + key))).first;
    return it->second;
}

void Pipeline::generate() {
    if (!config_.environment) {
        write_json(out("environment.json"), json{{"skipped", "no environment configured"}});
        return;
    }
    write_json(out("environment.json"), environment_to_json(*config_.environment));
    if (!has_truth()) return;
    const auto& map = truth();
    export_heatmap(ground_truth_grid(map), out("ground_truth"));
}

void Pipeline::sample() {
    const Seeds s = seeds_for(config_.seed);
    Scgm train_set;
    TestSet test;
    if (has_truth()) {
        const auto& map = truth();
        train_set = random_sample(map, config_.m_scgm, s.sample);
        test = make_test_set(map, train_set, config_.test_fraction, s.test);
    } else {
        const Environment* scene = config_.environment ? &env() : nullptr;
        Scgm all = ingest_dataset(*config_.dataset, scene);
        std::vector<std::size_t> idx(all.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(s.test);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto m_test = static_cast<std::size_t>(std::llround(config_.test_fraction * double(all.size())));
        if (m_test == 0 || m_test >= all.size())
            throw Error(ErrorCode::insufficient_data, "dataset too small to hold out a test set");
        std::vector<bool> is_test(all.size(), false);
        for (std::size_t i = 0; i < m_test; ++i) is_test[idx[i]] = true;
        for (std::size_t i = 0; i < all.size(); ++i) (is_test[i] ? test.points : train_set).push_back(all[i]);
    }
    write_dataset(out("dataset.csv"), train_set);
    write_dataset(out("test_set.csv"), test.points);
    state_->dataset = std::move(train_set);
    state_->test = std::move(test);
}

void Pipeline::sweep_k() {
    const Seeds s = seeds_for(config_.seed);
    const Scgm& data = dataset();
    const TestSet& test = test_set();
    SweepOptions opt;
    opt.min_cluster = config_.min_cluster;
    opt.restarts = config_.kmeans_restarts;
    opt.threads = config_.threads;
    auto result = select_k(data, test, config_.k_range, config_.hyper, s.sweep, opt);
    json rows = json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"k", r.k},
                        {"rmse", r.rmse ? json(*r.rmse) : json(nullptr)},
                        {"status", r.status},
                        {"cluster_sizes", r.cluster_sizes},
                        {"cluster_rmse", optional_array(r.cluster_rmse)}});
    }
    write_json(out("sweep_k.json"), {{"k_star", result.k_star}, {"rows", rows}, {"test_size", test.points.size()}});
    state_->sweep = std::move(result);
}

namespace {

std::size_t read_k_star(const fs::path& p) { return read_json_file(p).at("k_star").get<std::size_t>(); }

}  // namespace

void Pipeline::cluster() {
    const Seeds s = seeds_for(config_.seed);
    const Scgm& data = dataset();
    const std::size_t k = state_->sweep ? state_->sweep->k_star : read_k_star(out("sweep_k.json"));
    Partition part = (state_->sweep && state_->sweep->models.count(k))
                         ? state_->sweep->models.at(k).partition
                         : partition_for_k(data, k, s.sweep, config_.kmeans_restarts);
    if (config_.environment) part.bounds = env().bounds();
    save_partition(part, out("partition.json"));
    state_->partition = std::move(part);
}

void Pipeline::train() {
    const Seeds s = seeds_for(config_.seed);
    const Scgm& data = dataset();
    const Partition& part = partition();
    TrainOptions topt;
    topt.threads = config_.threads;

    auto from_sweep_or_train = [&](std::size_t k, const Partition& p) {
        if (state_->sweep && state_->sweep->models.count(k)) {
            McnnModel m = state_->sweep->models.at(k);
            m.partition = p;
            return m;
        }
        return train_subnetworks(data, p, config_.hyper, derive_seed(s.sweep, "train", k), topt);
    };

    McnnModel initial = from_sweep_or_train(part.k, part);
    save_model(initial, out("model_initial"));
    state_->models["initial"] = std::move(initial);

    Partition single = (state_->sweep && state_->sweep->models.count(1))
                           ? state_->sweep->models.at(1).partition
                           : partition_for_k(data, 1, s.sweep, config_.kmeans_restarts);
    single.bounds = part.bounds;
    McnnModel fnn = from_sweep_or_train(1, single);
    save_model(fnn, out("model_fnn"));
    state_->models["fnn"] = std::move(fnn);
}

namespace {

json plan_json(const SamplingPlan& p) { return {{"rates", p.rates}, {"counts", p.counts}, {"total", p.total}}; }

}  // namespace

void Pipeline::resample() {
    if (!has_truth()) {
        write_json(out("sampling_plan.json"), json{{"skipped", "no ground truth to draw further samples from"}});
        return;
    }
    const Seeds s = seeds_for(config_.seed);
    const Scgm& data = dataset();
    const TestSet& test = test_set();
    const Partition& part = partition();
    const McnnModel& initial = model("initial");
    const auto& map = truth();

    const std::size_t n = config_.further();
    const auto rk = subregion_rmse(initial, test);
    bool fell_back = false;
    const SamplingPlan uneven = uneven_plan(data, part, rk, n, &fell_back);
    const SamplingPlan even = even_plan(part.k, n);
    const auto stats = cluster_stats(data, part);

    Scgm occupied = data;
    occupied.insert(occupied.end(), test.points.begin(), test.points.end());
    Scgm new_uneven = resample_subregions(map, part, uneven.counts, occupied, s.resample_uneven);
    Scgm new_even = resample_subregions(map, part, even.counts, occupied, s.resample_even);
    write_dataset(out("resampled_uneven.csv"), new_uneven);
    write_dataset(out("resampled_even.csv"), new_even);
    write_json(out("sampling_plan.json"), {{"further_samples", n},
                                           {"subregion_rmse", rk},
                                           {"size_fractions", stats.size_fractions},
                                           {"gain_variances", stats.gain_variances},
                                           {"uneven", plan_json(uneven)},
                                           {"uneven_fell_back_to_even", fell_back},
                                           {"even", plan_json(even)}});

    TrainOptions topt;
    topt.threads = config_.threads;
    const auto aug_even = augment_with(data, part, new_even);
    McnnModel m_even = train_subnetworks(aug_even.scgm, aug_even.partition, config_.hyper, s.retrain, topt);
    save_model(m_even, out("model_even"));
    state_->models["even"] = std::move(m_even);

    const auto aug_uneven = augment_with(data, part, new_uneven);
    McnnModel m_uneven = train_subnetworks(aug_uneven.scgm, aug_uneven.partition, config_.hyper, s.retrain, topt);
    save_model(m_uneven, out("model_uneven"));
    state_->models["uneven"] = std::move(m_uneven);

    state_->new_uneven = std::move(new_uneven);
    state_->new_even = std::move(new_even);
}

void Pipeline::reuse() {
    const Seeds s = seeds_for(config_.seed);
    const Scgm& data = dataset();
    const Partition& part = partition();
    if (has_truth() && !state_->new_uneven) state_->new_uneven = read_points(out("resampled_uneven.csv"));
    const Scgm extra = state_->new_uneven.value_or(Scgm{});
    const auto aug = augment_with(data, part, extra);

    const ReuseConfig rc{config_.sigma_factor};
    const auto sets = reuse_boundary_points(aug.scgm, aug.partition, rc);
    const auto members = aug.partition.members();
    json clusters = json::array();
    for (std::size_t k = 0; k < aug.partition.k; ++k) {
        const double d_k = average_center_distance(aug.scgm, members[k], aug.partition.centers[k], aug.partition.scaler);
        clusters.push_back({{"k", k},
                            {"members", members[k].size()},
                            {"average_center_distance", d_k},
                            {"sigma", rc.sigma_factor * d_k},
                            {"reused", sets[k].size() - members[k].size()},
                            {"training_indices", sets[k]}});
    }
    write_json(out("reuse.json"), {{"sigma_factor", rc.sigma_factor},
                                   {"dataset_size", aug.scgm.size()},
                                   {"includes_resampled_points", !extra.empty()},
                                   {"clusters", clusters}});

    TrainOptions topt;
    topt.threads = config_.threads;
    topt.training_sets = &sets;
    McnnModel optimized = train_subnetworks(aug.scgm, aug.partition, config_.hyper, s.retrain, topt);
    save_model(optimized, out("model_optimized"));
    state_->models["optimized"] = std::move(optimized);
}

void Pipeline::predict() {
    if (!config_.environment) {
        write_json(out("predicted_grid.json"), json{{"skipped", "no environment to predict over"}});
        return;
    }
    const McnnModel& optimized = model("optimized");
    export_heatmap(predict_grid(optimized, env()), out("predicted_grid"));
}

void Pipeline::evaluate() {
    const TestSet& test = test_set();
    const Scgm& data = dataset();
    const auto locs = test.locations();
    const auto truth = test.gains();
    json methods = json::object();
    auto add = [&](const std::string& name, const std::vector<double>& pred, json extra = json::object()) {
        extra["rmse"] = rmse_of(pred, truth);
        extra["nrmse"] = nrmse(pred, truth);
        methods[name] = extra;
    };

    const std::vector<std::pair<std::string, std::string>> variants{
        {"mcnn", "initial"}, {"mcnn_even", "even"}, {"mcnn_uneven", "uneven"}, {"mcnn_optimized", "optimized"},
        {"fnn", "fnn"}};
    for (const auto& [label, key] : variants) {
        if (!state_->models.count(key) && !fs::exists(out("model_" + key))) continue;
        const McnnModel& m = model(key);
        const auto pred = predict_points(m, locs);
        const auto groups = assign_all_geographic(m.partition, locs);
        const auto r = evaluate_rmse(pred, truth, groups, m.k());
        add(label, pred, {{"k", m.k()}, {"training_sizes", m.training_sizes}, {"cluster_rmse", optional_array(r.per_group)}});
    }

    if (config_.baselines.enabled) {
        const auto& b = config_.baselines;
        std::vector<double> idw(locs.size());
        for (std::size_t i = 0; i < locs.size(); ++i) idw[i] = idw_predict(data, locs[i], b.idw_power);
        add("idw", idw, {{"power", b.idw_power}});

        std::optional<Bounds> bounds;
        if (config_.environment) bounds = env().bounds();
        const auto vf = fit_variogram(data, b.lag_bins, bounds);
        std::vector<double> kr(locs.size());
        std::size_t fallbacks = 0;
        for (std::size_t i = 0; i < locs.size(); ++i) {
            const auto r = kriging_predict(data, vf.model, locs[i], b.kriging_neighbors);
            kr[i] = r.value;
            fallbacks += r.idw_fallback ? 1 : 0;
        }
        add("kriging", kr,
            {{"variogram", {{"nugget", vf.model.nugget}, {"sill", vf.model.sill}, {"range", vf.model.range}}},
             {"degenerate_variogram", vf.degenerate},
             {"neighbors", b.kriging_neighbors},
             {"idw_fallbacks", fallbacks}});
    }
    write_json(out("evaluation.json"), {{"test_size", test.points.size()}, {"methods", methods}});
}

void Pipeline::report() {
    const Seeds s = seeds_for(config_.seed);
    json body;
    body["config"] = config_to_json(config_);
    body["seeds"] = {{"master", config_.seed},        {"sample", s.sample},
                     {"test_set", s.test},            {"sweep", s.sweep},
                     {"resample_uneven", s.resample_uneven}, {"resample_even", s.resample_even},
                     {"retrain", s.retrain}};
    const auto sweep = read_json_file(out("sweep_k.json"));
    body["k_star"] = sweep.at("k_star");
    body["rmse_by_k"] = sweep.at("rows");
    body["sampling_plan"] = read_json_file(out("sampling_plan.json"));
    const auto reuse = read_json_file(out("reuse.json"));
    json reuse_summary = json::array();
    for (const auto& c : reuse.at("clusters"))
        reuse_summary.push_back({{"k", c.at("k")},
                                 {"members", c.at("members")},
                                 {"reused", c.at("reused")},
                                 {"average_center_distance", c.at("average_center_distance")}});
    body["reuse"] = {{"sigma_factor", reuse.at("sigma_factor")}, {"clusters", reuse_summary}};
    body["evaluation"] = read_json_file(out("evaluation.json"));
    std::vector<std::string> artifacts;
    for (const auto& e : fs::directory_iterator(config_.output_dir)) artifacts.push_back(e.path().filename().string());
    std::sort(artifacts.begin(), artifacts.end());
    artifacts.erase(std::remove_if(artifacts.begin(), artifacts.end(),
                                   [](const std::string& a) { return a == "report.json" || a == "timings.json"; }),
                    artifacts.end());
    body["artifacts"] = artifacts;
    write_json(out("report.json"), body);
}

}  // namespace cgm
