#include "cgm/scenario.hpp"

#include <fftw3.h>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "cgm/error.hpp"
#include "cgm/seed.hpp"

namespace cgm {

namespace {

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw Error(ErrorCode::invalid_spec, std::string(field) + ": " + what);
}

void validate(const EnvironmentSpec& s) {
    require(s.width > 0, "width", "must be positive");
    require(s.height > 0, "height", "must be positive");
    require(s.grid_step > 0.0 && std::isfinite(s.grid_step), "grid_step", "must be positive");
    require(s.bs_position[0] >= 0.0 && s.bs_position[0] <= s.width, "bs_position",
            "x outside [0,width]");
    require(s.bs_position[1] >= 0.0 && s.bs_position[1] <= s.height, "bs_position",
            "y outside [0,height]");
    require(s.bs_power_w > 0.0, "bs_power", "must be positive");
    require(s.carrier_frequency_mhz > 0.0, "carrier_frequency", "must be positive");
    for (std::size_t i = 0; i < s.buildings.size(); ++i) {
        const auto& b = s.buildings[i];
        const std::string at = "building " + std::to_string(i);
        require(b.x_min < b.x_max, "buildings", at + ": x_min must be < x_max");
        require(b.y_min < b.y_max, "buildings", at + ": y_min must be < y_max");
        require(b.height > 0.0, "buildings", at + ": height must be positive");
    }
    const auto& p = s.propagation;
    require(p.n_los > 0.0, "propagation.n_los", "must be positive");
    require(p.n_nlos >= p.n_los, "propagation.n_nlos", "must be >= n_los");
    require(p.shadow_sigma_los_db >= 0.0, "propagation.shadow_sigma_los_db", "must be >= 0");
    require(p.shadow_sigma_nlos_db >= 0.0, "propagation.shadow_sigma_nlos_db", "must be >= 0");
    require(p.shadow_corr_dist > 0.0, "propagation.shadow_corr_dist", "must be positive");
}

bool inside(const Building& b, Location p) {
    return p.x >= b.x_min && p.x < b.x_max && p.y >= b.y_min && p.y < b.y_max;
}

// Liang-Barsky clip against the open rectangle; true when a positive-length
// piece of the segment lies in the building interior.
bool segment_crosses(const Building& b, Location a, Location c) {
    const double dx = c.x - a.x;
    const double dy = c.y - a.y;
    double t0 = 0.0;
    double t1 = 1.0;
    auto clip = [&](double p, double q) {
        if (p == 0.0) return q > 0.0;
        const double r = q / p;
        if (p < 0.0) {
            t0 = std::max(t0, r);
        } else {
            t1 = std::min(t1, r);
        }
        return true;
    };
    if (!clip(-dx, a.x - b.x_min)) return false;
    if (!clip(dx, b.x_max - a.x)) return false;
    if (!clip(-dy, a.y - b.y_min)) return false;
    if (!clip(dy, b.y_max - a.y)) return false;
    return t1 - t0 > 1e-12;
}

}  // namespace

std::vector<Building> generate_buildings(const BuildingLayout& layout, int width, int height,
                                         Location bs, std::uint64_t seed) {
    if (layout.count < 0 || layout.min_size <= 0.0 || layout.max_size < layout.min_size)
        throw Error(ErrorCode::invalid_spec, "building layout: bad count or size range");
    std::mt19937_64 rng(derive_seed(seed, "buildings"));
    std::uniform_real_distribution<double> size(layout.min_size, layout.max_size);
    std::uniform_real_distribution<double> tall(layout.min_height, layout.max_height);
    std::vector<Building> out;
    std::size_t attempts = 0;
    while (out.size() < static_cast<std::size_t>(layout.count)) {
        if (++attempts > 100000)
            throw Error(ErrorCode::invalid_spec, "building layout: cannot place buildings");
        const double w = std::round(size(rng));
        const double h = std::round(size(rng));
        if (w >= width || h >= height) continue;
        std::uniform_real_distribution<double> ux(0.0, width - w);
        std::uniform_real_distribution<double> uy(0.0, height - h);
        Building b;
        b.x_min = std::round(ux(rng));
        b.y_min = std::round(uy(rng));
        b.x_max = b.x_min + w;
        b.y_max = b.y_min + h;
        b.height = std::round(tall(rng));
        const double cx = std::clamp(bs.x, b.x_min, b.x_max);
        const double cy = std::clamp(bs.y, b.y_min, b.y_max);
        if (std::hypot(bs.x - cx, bs.y - cy) < layout.bs_clearance) continue;
        out.push_back(b);
    }
    return out;
}

Location Environment::cell_center(std::size_t ix, std::size_t iy) const {
    const double s = spec_.grid_step;
    return {std::min((ix + 0.5) * s, double(spec_.width)),
            std::min((iy + 0.5) * s, double(spec_.height))};
}

std::optional<std::array<std::size_t, 2>> Environment::cell_of(Location p) const {
    if (!bounds().contains(p)) return std::nullopt;
    const auto ix = std::min(static_cast<std::size_t>(p.x / spec_.grid_step), nx() - 1);
    const auto iy = std::min(static_cast<std::size_t>(p.y / spec_.grid_step), ny() - 1);
    return std::array<std::size_t, 2>{ix, iy};
}

bool Environment::line_of_sight(Location p) const {
    const Location bs_xy = bs();
    for (const auto& b : spec_.buildings) {
        if (segment_crosses(b, bs_xy, p)) return false;
    }
    return true;
}

Environment build_environment(const EnvironmentSpec& spec) {
    validate(spec);
    Environment env;
    env.spec_ = spec;
    const auto nx = static_cast<std::size_t>(std::ceil(spec.width / spec.grid_step));
    const auto ny = static_cast<std::size_t>(std::ceil(spec.height / spec.grid_step));
    env.blocked_ = Grid2D<bool>(nx, ny, false);
    std::size_t free_cells = 0;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const Location c = env.cell_center(ix, iy);
            const bool hit = std::any_of(spec.buildings.begin(), spec.buildings.end(),
                                         [&](const Building& b) { return inside(b, c); });
            env.blocked_(ix, iy) = hit;
            if (!hit) ++free_cells;
        }
    }
    env.unblocked_ = free_cells;
    return env;
}

namespace {

std::size_t fft_size(std::size_t n) {
    // Smallest 2^a 3^b 5^c not below n.
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2, 3, 5})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

}  // namespace

Grid2D<double> shadowing_field(const Environment& env) {
    const std::size_t nx = env.nx();
    const std::size_t ny = env.ny();
    const double step = env.step();
    const double corr = env.spec().propagation.shadow_corr_dist;

    // Circulant embedding on a torus at least twice the grid in each direction.
    const std::size_t px = fft_size(2 * nx);
    const std::size_t py = fft_size(2 * ny);
    const std::size_t n = px * py;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf) throw std::bad_alloc();
    const fftw_plan plan = fftw_plan_dft_2d(int(py), int(px), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);

    for (std::size_t j = 0; j < py; ++j) {
        const double dy = double(std::min(j, py - j)) * step;
        for (std::size_t i = 0; i < px; ++i) {
            const double dx = double(std::min(i, px - i)) * step;
            buf[j * px + i][0] = std::exp(-std::hypot(dx, dy) / corr);
            buf[j * px + i][1] = 0.0;
        }
    }
    fftw_execute(plan);
    std::vector<double> amplitude(n);
    for (std::size_t i = 0; i < n; ++i) amplitude[i] = std::sqrt(std::max(buf[i][0], 0.0) / double(n));

    std::mt19937_64 rng(derive_seed(env.spec().seed, "shadowing"));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = amplitude[i] * normal(rng);
        buf[i][1] = amplitude[i] * normal(rng);
    }
    fftw_execute(plan);

    Grid2D<double> field(nx, ny, 0.0);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) field(ix, iy) = buf[iy * px + ix][0];
    fftw_destroy_plan(plan);
    fftw_free(buf);

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!env.blocked()[i]) {
            sum += field[i];
            ++count;
        }
    }
    if (count == 0) return field;
    const double mean = sum / double(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (!env.blocked()[i]) ss += (field[i] - mean) * (field[i] - mean);
    }
    const double sd = std::sqrt(ss / double(count));
    for (std::size_t i = 0; i < field.size(); ++i) {
        field[i] = sd > 0.0 ? (field[i] - mean) / sd : 0.0;
    }
    return field;
}

SamplePoint GroundTruthMap::sample_at(std::size_t ix, std::size_t iy) const {
    const Location c = env.cell_center(ix, iy);
    const Location b = env.bs();
    return {b.x, b.y, c.x, c.y, gains_db(ix, iy)};
}

GroundTruthMap compute_ground_truth(const Environment& env) {
    const auto& spec = env.spec();
    const auto& prop = spec.propagation;
    const std::size_t nx = env.nx();
    const std::size_t ny = env.ny();

    const bool shadowed = prop.shadow_sigma_los_db > 0.0 || prop.shadow_sigma_nlos_db > 0.0;
    const Grid2D<double> z = shadowed ? shadowing_field(env) : Grid2D<double>(nx, ny, 0.0);

    GroundTruthMap map{env, Grid2D<double>(nx, ny, std::numeric_limits<double>::quiet_NaN()),
                       env.blocked(), Grid2D<bool>(nx, ny, false)};
    const double dz = spec.bs_position[2] - spec.sample_height;
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const Location c = env.cell_center(ix, iy);
            const bool los = env.line_of_sight(c);
            map.los(ix, iy) = los;
            if (env.is_blocked(ix, iy)) continue;
            const double dx = c.x - spec.bs_position[0];
            const double dy = c.y - spec.bs_position[1];
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            const double n = los ? prop.n_los : prop.n_nlos;
            const double sigma = los ? prop.shadow_sigma_los_db : prop.shadow_sigma_nlos_db;
            const double path_loss = prop.pl0_db + 10.0 * n * std::log10(std::max(d, 1.0));
            map.gains_db(ix, iy) = -(path_loss + sigma * z(ix, iy));
        }
    }
    return map;
}

namespace {

std::string trim_eol(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s;
}

bool parse_double(std::string_view field, double& out) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end && !field.empty() && std::isfinite(out);
}

}  // namespace

Scgm ingest_dataset(const std::filesystem::path& path, const Environment* env) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::empty_dataset, path.string() + " is empty");
    line = trim_eol(line);
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line != "bs_x,bs_y,x,y,gain_db")
        throw Error(ErrorCode::schema_mismatch, "expected header bs_x,bs_y,x,y,gain_db, got '" + line + "'");

    Scgm out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        line = trim_eol(line);
        if (line.empty()) continue;
        std::array<double, 5> v{};
        std::size_t field = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            const auto piece = std::string_view(line).substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            if (field >= 5 || !parse_double(piece, v[field]))
                throw Error(ErrorCode::parse_error,
                            "row " + std::to_string(row) + ": bad field " + std::to_string(field + 1));
            ++field;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (field != 5)
            throw Error(ErrorCode::parse_error, "row " + std::to_string(row) + ": expected 5 fields");
        SamplePoint p{v[0], v[1], v[2], v[3], v[4]};
        if (env) {
            const auto cell = env->cell_of({p.x, p.y});
            if (!cell)
                throw Error(ErrorCode::out_of_bounds, "row " + std::to_string(row) + ": outside map");
            if (env->is_blocked((*cell)[0], (*cell)[1]))
                throw Error(ErrorCode::out_of_bounds,
                            "row " + std::to_string(row) + ": location inside a building");
        }
        out.push_back(p);
    }
    if (out.empty()) throw Error(ErrorCode::empty_dataset, path.string() + " has no rows");
    return out;
}

namespace {

void append_number(std::string& s, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    s.append(buf, ptr);
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Scgm& scgm) {
    std::string body = "bs_x,bs_y,x,y,gain_db\n";
    for (const auto& p : scgm) {
        const auto f = p.features();
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (i) body += ',';
            append_number(body, f[i]);
        }
        body += '\n';
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << body;
    if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

}  // namespace cgm
