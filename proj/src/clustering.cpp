#include "cgm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cgm/error.hpp"
#include "cgm/seed.hpp"

namespace cgm {

Feature Scaler::transform(const SamplePoint& p) const {
    const Feature f = p.features();
    Feature out{};
    for (std::size_t d = 0; d < 5; ++d) out[d] = scale(d, f[d]);
    return out;
}

std::array<double, 4> Scaler::transform_input(double bs_x, double bs_y, double x, double y) const {
    return {scale(0, bs_x), scale(1, bs_y), scale(2, x), scale(3, y)};
}

Scaler fit_scaler(const Scgm& scgm) {
    if (scgm.empty()) throw Error(ErrorCode::empty_input, "cannot fit a scaler on an empty SCGM");
    Scaler s;
    s.min = scgm.front().features();
    s.max = s.min;
    for (const auto& p : scgm) {
        const auto f = p.features();
        for (std::size_t d = 0; d < 5; ++d) {
            s.min[d] = std::min(s.min[d], f[d]);
            s.max[d] = std::max(s.max[d], f[d]);
        }
    }
    return s;
}

std::vector<std::vector<std::size_t>> Partition::members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < membership.size(); ++i) out[membership[i]].push_back(i);
    return out;
}

double squared_distance(const Feature& a, const Feature& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < 5; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
}

std::size_t nearest_center(const Feature& v, const std::vector<Feature>& centers) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = squared_distance(v, centers[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

namespace {

struct LloydRun {
    std::vector<Feature> centers;
    std::vector<std::size_t> membership;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::vector<double> history;
};

double assign_all(const std::vector<Feature>& x, const std::vector<Feature>& centers,
                  std::vector<std::size_t>& membership, bool& changed) {
    changed = false;
    double obj = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t c = nearest_center(x[i], centers);
        if (c != membership[i]) changed = true;
        membership[i] = c;
        obj += squared_distance(x[i], centers[c]);
    }
    return obj;
}

// Empty clusters are reseated at the sample farthest from its own center.
void repair_empty(const std::vector<Feature>& x, std::vector<Feature>& centers,
                  std::vector<std::size_t>& membership) {
    const std::size_t k = centers.size();
    while (true) {
        std::vector<std::size_t> counts(k, 0);
        for (auto m : membership) ++counts[m];
        const auto empty = std::find(counts.begin(), counts.end(), 0);
        if (empty == counts.end()) return;
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (counts[membership[i]] <= 1) continue;
            const double d = squared_distance(x[i], centers[membership[i]]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far_d < 0.0) return;  // cannot happen while k <= n
        const auto c = static_cast<std::size_t>(empty - counts.begin());
        centers[c] = x[far];
        membership[far] = c;
    }
}

void update_centers(const std::vector<Feature>& x, const std::vector<std::size_t>& membership,
                    std::vector<Feature>& centers) {
    const std::size_t k = centers.size();
    std::vector<Feature> sum(k, Feature{});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& s = sum[membership[i]];
        for (std::size_t d = 0; d < 5; ++d) s[d] += x[i][d];
        ++count[membership[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] == 0) continue;
        for (std::size_t d = 0; d < 5; ++d) centers[c][d] = sum[c][d] / double(count[c]);
    }
}

LloydRun lloyd(const std::vector<Feature>& x, std::size_t k, std::uint64_t seed,
               const KMeansOptions& opt) {
    const std::size_t n = x.size();
    std::mt19937_64 rng(seed);
    LloydRun run;
    run.centers.reserve(k);
    // D^2-weighted seeding over data points; when every remaining sample coincides
    // with a chosen one, pick uniformly among the samples not chosen yet.
    std::vector<bool> chosen(n, false);
    std::vector<double> d2(n, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t pick = n;
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        if (c > 0 && total > 0.0) {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                pick = i;
                if (u < d2[i]) break;
                u -= d2[i];
            }
        } else {
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) free.push_back(i);
            pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
        }
        chosen[pick] = true;
        run.centers.push_back(x[pick]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = chosen[i] ? 0.0 : (c == 0 ? squared_distance(x[i], x[pick]) : std::min(d2[i], squared_distance(x[i], x[pick])));
    }
    run.membership.assign(n, std::numeric_limits<std::size_t>::max());

    bool changed = false;
    assign_all(x, run.centers, run.membership, changed);
    repair_empty(x, run.centers, run.membership);
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += squared_distance(x[i], run.centers[run.membership[i]]);
    run.history.push_back(obj);

    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        const auto old = run.centers;
        update_centers(x, run.membership, run.centers);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            shift = std::max(shift, std::sqrt(squared_distance(old[c], run.centers[c])));
        obj = assign_all(x, run.centers, run.membership, changed);
        repair_empty(x, run.centers, run.membership);
        if (changed) {
            obj = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                obj += squared_distance(x[i], run.centers[run.membership[i]]);
        }
        run.history.push_back(obj);
        run.iterations = it;
        // converged only when the reassignment after a small shift is also stable
        if (shift < opt.tol && !changed) break;
    }
    run.objective = run.history.back();
    return run;
}

}  // namespace

Partition kmeans_partition(const Scgm& scgm, const KMeansOptions& options) {
    if (scgm.empty()) throw Error(ErrorCode::empty_input, "empty SCGM");
    if (options.k < 1 || options.k > scgm.size())
        throw Error(ErrorCode::invalid_k, "k=" + std::to_string(options.k) + " not in [1, " +
                                              std::to_string(scgm.size()) + "]");
    Partition part;
    part.k = options.k;
    part.scaler = fit_scaler(scgm);
    std::vector<Feature> x(scgm.size());
    for (std::size_t i = 0; i < scgm.size(); ++i) x[i] = part.scaler.transform(scgm[i]);

    const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
    LloydRun best;
    bool have = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        LloydRun run = lloyd(x, options.k, derive_seed(options.seed, "kmeans-restart", r), options);
        if (!have || run.objective < best.objective) {
            best = std::move(run);
            have = true;
        }
    }
    part.centers = std::move(best.centers);
    part.membership = std::move(best.membership);
    part.objective = best.objective;
    part.iterations = best.iterations;
    part.objective_history = std::move(best.history);
    part.sizes.assign(part.k, 0);
    for (auto m : part.membership) ++part.sizes[m];
    return part;
}

std::size_t assign_geographic(Location location, const Partition& partition) {
    if (partition.k == 0 || partition.centers.empty())
        throw Error(ErrorCode::empty_input, "partition has no centers");
    if (partition.bounds && !partition.bounds->contains(location))
        throw Error(ErrorCode::out_of_bounds, "location (" + std::to_string(location.x) + ", " +
                                                  std::to_string(location.y) + ") outside the map");
    const double gx = partition.scaler.scale(2, location.x);
    const double gy = partition.scaler.scale(3, location.y);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < partition.centers.size(); ++c) {
        const double dx = gx - partition.centers[c][2];
        const double dy = gy - partition.centers[c][3];
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace cgm
