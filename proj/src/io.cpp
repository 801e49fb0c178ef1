#include "cgm/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "cgm/error.hpp"
#include "cgm/scenario.hpp"

namespace cgm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << body;
    if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

json read_json(const fs::path& path, ErrorCode on_bad) {
    std::ifstream in(path);
    if (!in) throw Error(on_bad == ErrorCode::corrupt_bundle ? on_bad : ErrorCode::io_error,
                         "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(on_bad, path.string() + ": " + e.what());
    }
}

json partition_to_json(const Partition& p) {
    json j;
    j["format"] = "cgm-partition";
    j["version"] = kPartitionFormatVersion;
    j["k"] = p.k;
    j["scaler"] = {{"min", p.scaler.min}, {"max", p.scaler.max}};
    j["centers"] = p.centers;
    j["membership"] = p.membership;
    j["sizes"] = p.sizes;
    j["objective"] = p.objective;
    j["objective_history"] = p.objective_history;
    j["iterations"] = p.iterations;
    if (p.bounds)
        j["bounds"] = {{"width", p.bounds->width}, {"height", p.bounds->height}};
    else
        j["bounds"] = nullptr;
    return j;
}

Partition partition_from_json(const json& j, ErrorCode on_bad) {
    try {
        if (j.at("format").get<std::string>() != "cgm-partition") throw Error(on_bad, "not a partition file");
        const int version = j.at("version").get<int>();
        if (version > kPartitionFormatVersion)
            throw Error(ErrorCode::version_mismatch,
                        "partition format v" + std::to_string(version) + " is newer than supported v" +
                            std::to_string(kPartitionFormatVersion) + "; upgrade the tool");
        Partition p;
        p.k = j.at("k").get<std::size_t>();
        p.scaler.min = j.at("scaler").at("min").get<Feature>();
        p.scaler.max = j.at("scaler").at("max").get<Feature>();
        p.centers = j.at("centers").get<std::vector<Feature>>();
        p.membership = j.at("membership").get<std::vector<std::size_t>>();
        p.sizes = j.at("sizes").get<std::vector<std::size_t>>();
        p.objective = j.at("objective").get<double>();
        p.objective_history = j.at("objective_history").get<std::vector<double>>();
        p.iterations = j.at("iterations").get<std::size_t>();
        if (!j.at("bounds").is_null())
            p.bounds = Bounds{j["bounds"].at("width").get<double>(), j["bounds"].at("height").get<double>()};
        if (p.centers.size() != p.k || p.sizes.size() != p.k)
            throw Error(on_bad, "partition arrays disagree with k");
        for (auto m : p.membership)
            if (m >= p.k) throw Error(on_bad, "membership id out of range");
        return p;
    } catch (const json::exception& e) {
        throw Error(on_bad, std::string("malformed partition: ") + e.what());
    }
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& s, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint64_t get_le(const std::string& s, std::size_t at, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(static_cast<unsigned char>(s[at + i])) << (8 * i);
    return v;
}

}  // namespace

void save_partition(const Partition& partition, const fs::path& path) {
    write_text(path, partition_to_json(partition).dump(1) + "\n");
}

Partition load_partition(const fs::path& path) {
    return partition_from_json(read_json(path, ErrorCode::parse_error), ErrorCode::parse_error);
}

void save_weights(const NetworkParams& params, const fs::path& path) {
    std::string s = "CGMW";
    put_u32(s, kModelFormatVersion);
    const auto& a = params.arch;
    for (auto v : {a.input_len, a.input_maps, a.conv_kernel, a.conv_channels, a.pool_kernel, a.pool_channels,
                   a.fc_neurons, a.output_dim})
        put_u32(s, static_cast<std::uint32_t>(v));
    put_u64(s, params.values.size());
    for (double v : params.values) put_u64(s, std::bit_cast<std::uint64_t>(v));
    write_text(path, s);
}

NetworkParams load_weights(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::corrupt_bundle, "missing weights file " + path.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    constexpr std::size_t header = 4 + 4 + 8 * 4 + 8;
    if (s.size() < 8 || s.compare(0, 4, "CGMW") != 0)
        throw Error(ErrorCode::corrupt_bundle, path.string() + ": bad magic");
    const auto version = get_le(s, 4, 4);
    if (version > static_cast<std::uint64_t>(kModelFormatVersion))
        throw Error(ErrorCode::version_mismatch, path.string() + ": weights format v" + std::to_string(version) +
                                                     " is newer than supported v" +
                                                     std::to_string(kModelFormatVersion) + "; upgrade the tool");
    if (s.size() < header) throw Error(ErrorCode::corrupt_bundle, path.string() + ": truncated header");
    NetworkParams p;
    std::size_t at = 8;
    for (std::size_t* f : {&p.arch.input_len, &p.arch.input_maps, &p.arch.conv_kernel, &p.arch.conv_channels,
                           &p.arch.pool_kernel, &p.arch.pool_channels, &p.arch.fc_neurons, &p.arch.output_dim}) {
        *f = get_le(s, at, 4);
        at += 4;
    }
    const auto count = get_le(s, at, 8);
    at += 8;
    try {
        p.arch.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::corrupt_bundle, path.string() + ": " + e.what());
    }
    if (count != NetworkParams::count(p.arch) || s.size() != header + 8 * count)
        throw Error(ErrorCode::corrupt_bundle, path.string() + ": size does not match architecture");
    p.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) p.values[i] = std::bit_cast<double>(get_le(s, at + 8 * i, 8));
    return p;
}

void save_model(const McnnModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    json m;
    m["format"] = "cgm-model";
    m["version"] = kModelFormatVersion;
    m["k"] = model.k();
    m["seed"] = model.seed;
    m["bs"] = {model.bs.x, model.bs.y};
    const auto& h = model.hyper;
    m["hyperparameters"] = {{"learning_rate", h.learning_rate}, {"epochs", h.epochs}, {"max_batch", h.max_batch},
                            {"beta1", h.beta1},                 {"beta2", h.beta2},   {"epsilon", h.epsilon},
                            {"seed", h.seed}};
    m["partition"] = "partition.json";
    json subnets = json::array();
    for (std::size_t k = 0; k < model.k(); ++k) {
        const std::string file = "subnet_" + std::to_string(k) + ".bin";
        save_weights(model.subnets[k], dir / file);
        const auto& ts = model.target_scalers[k];
        subnets.push_back({{"file", file},
                           {"training_size", model.training_sizes[k]},
                           {"target_mean", ts.mean},
                           {"target_std", ts.std},
                           {"constant", ts.constant}});
    }
    m["subnets"] = subnets;
    save_partition(model.partition, dir / "partition.json");
    write_text(dir / "manifest.json", m.dump(1) + "\n");
}

McnnModel load_model(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::io_error, "no model bundle at " + dir.string());
    const json m = read_json(dir / "manifest.json", ErrorCode::corrupt_bundle);
    try {
        if (m.at("format").get<std::string>() != "cgm-model")
            throw Error(ErrorCode::corrupt_bundle, "manifest is not a cgm-model");
        const int version = m.at("version").get<int>();
        if (version > kModelFormatVersion)
            throw Error(ErrorCode::version_mismatch, "model bundle format v" + std::to_string(version) +
                                                         " is newer than supported v" +
                                                         std::to_string(kModelFormatVersion) + "; upgrade the tool");
        McnnModel model;
        model.seed = m.at("seed").get<std::uint64_t>();
        model.bs = {m.at("bs").at(0).get<double>(), m.at("bs").at(1).get<double>()};
        const auto& h = m.at("hyperparameters");
        model.hyper.learning_rate = h.at("learning_rate").get<double>();
        model.hyper.epochs = h.at("epochs").get<std::size_t>();
        model.hyper.max_batch = h.at("max_batch").get<std::size_t>();
        model.hyper.beta1 = h.at("beta1").get<double>();
        model.hyper.beta2 = h.at("beta2").get<double>();
        model.hyper.epsilon = h.at("epsilon").get<double>();
        model.hyper.seed = h.at("seed").get<std::uint64_t>();
        model.partition = partition_from_json(
            read_json(dir / m.at("partition").get<std::string>(), ErrorCode::corrupt_bundle),
            ErrorCode::corrupt_bundle);
        const auto k = m.at("k").get<std::size_t>();
        const auto& subs = m.at("subnets");
        if (subs.size() != k || model.partition.k != k)
            throw Error(ErrorCode::corrupt_bundle, "manifest, partition and subnet count disagree");
        for (const auto& s : subs) {
            model.subnets.push_back(load_weights(dir / s.at("file").get<std::string>()));
            model.training_sizes.push_back(s.at("training_size").get<std::size_t>());
            model.target_scalers.push_back(
                {s.at("target_mean").get<double>(), s.at("target_std").get<double>(), s.at("constant").get<bool>()});
        }
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::corrupt_bundle, std::string("malformed manifest: ") + e.what());
    }
}

void write_grid_csv(const GainGrid& grid, const fs::path& path) {
    std::string body = "x,y,gain_db\n";
    char buf[64];
    auto num = [&](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        body.append(buf, ptr);
    };
    for (std::size_t iy = 0; iy < grid.gains_db.ny(); ++iy) {
        for (std::size_t ix = 0; ix < grid.gains_db.nx(); ++ix) {
            if (grid.blocked(ix, iy)) continue;
            const Location c = grid.cell_center(ix, iy);
            num(c.x);
            body += ',';
            num(c.y);
            body += ',';
            num(grid.gains_db(ix, iy));
            body += '\n';
        }
    }
    write_text(path, body);
}

std::vector<GridRow> read_grid_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y,gain_db") throw Error(ErrorCode::schema_mismatch, "expected header x,y,gain_db");
    std::vector<GridRow> rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        GridRow r;
        double* out[3] = {&r.x, &r.y, &r.gain_db};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int f = 0; f < 3; ++f) {
            auto [ptr, ec] = std::from_chars(p, end, *out[f]);
            if (ec != std::errc{} || (f < 2 && (ptr == end || *ptr != ',')) || (f == 2 && ptr != end))
                throw Error(ErrorCode::parse_error, path.string() + " row " + std::to_string(row));
            p = ptr + 1;
        }
        rows.push_back(r);
    }
    return rows;
}

void write_heatmap_ppm(const GainGrid& grid, const fs::path& path) {
    const std::size_t nx = grid.gains_db.nx();
    const std::size_t ny = grid.gains_db.ny();
    if (nx == 0 || ny == 0) throw Error(ErrorCode::empty_input, "empty grid");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < grid.gains_db.size(); ++i) {
        if (grid.blocked[i]) continue;
        lo = std::min(lo, grid.gains_db[i]);
        hi = std::max(hi, grid.gains_db[i]);
    }
    std::string body = "P6\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
    body.reserve(body.size() + 3 * nx * ny);
    for (std::size_t row = 0; row < ny; ++row) {
        const std::size_t iy = ny - 1 - row;
        for (std::size_t ix = 0; ix < nx; ++ix) {
            unsigned char level = 0;
            if (!grid.blocked(ix, iy)) {
                level = hi > lo ? static_cast<unsigned char>(1 + std::lround(254.0 * (grid.gains_db(ix, iy) - lo) / (hi - lo)))
                                : 128;
            }
            body.append(3, static_cast<char>(level));
        }
    }
    write_text(path, body);
}

void export_heatmap(const GainGrid& grid, const fs::path& stem) {
    if (grid.gains_db.size() == 0) throw Error(ErrorCode::empty_input, "empty grid");
    write_grid_csv(grid, fs::path(stem).replace_extension(".csv"));
    write_heatmap_ppm(grid, fs::path(stem).replace_extension(".ppm"));
}

}  // namespace cgm
