#include "cgm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "cgm/error.hpp"
#include "cgm/seed.hpp"

namespace cgm {

namespace {

// Draw `m` distinct entries of `pool` uniformly (partial Fisher-Yates).
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool, std::size_t m,
                                                  std::mt19937_64& rng) {
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(m);
    return pool;
}

}  // namespace

Scgm random_sample(const GroundTruthMap& map, std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> free_cells;
    free_cells.reserve(map.env.unblocked_count());
    for (std::size_t i = 0; i < map.blocked.size(); ++i)
        if (!map.blocked[i]) free_cells.push_back(i);
    if (m > free_cells.size())
        throw Error(ErrorCode::oversample, "requested " + std::to_string(m) + " samples but only " +
                                               std::to_string(free_cells.size()) + " cells are free");
    std::mt19937_64 rng(seed);
    const auto picked = draw_without_replacement(std::move(free_cells), m, rng);
    Scgm out;
    out.reserve(m);
    const std::size_t nx = map.blocked.nx();
    for (auto i : picked) out.push_back(map.sample_at(i % nx, i / nx));
    return out;
}

ClusterStats cluster_stats(const Scgm& scgm, const Partition& partition) {
    ClusterStats st;
    st.size_fractions.assign(partition.k, 0.0);
    st.gain_variances.assign(partition.k, 0.0);
    std::vector<double> sum(partition.k, 0.0);
    for (std::size_t i = 0; i < scgm.size(); ++i) sum[partition.membership[i]] += scgm[i].gain_db;
    std::vector<double> mean(partition.k, 0.0);
    for (std::size_t k = 0; k < partition.k; ++k)
        if (partition.sizes[k] > 0) mean[k] = sum[k] / double(partition.sizes[k]);
    for (std::size_t i = 0; i < scgm.size(); ++i) {
        const auto k = partition.membership[i];
        const double d = scgm[i].gain_db - mean[k];
        st.gain_variances[k] += d * d;
    }
    for (std::size_t k = 0; k < partition.k; ++k) {
        if (partition.sizes[k] > 0) st.gain_variances[k] /= double(partition.sizes[k]);
        st.size_fractions[k] = double(partition.sizes[k]) / double(scgm.size());
    }
    return st;
}

std::vector<double> compute_sampling_rates(std::span<const double> sizes,
                                           std::span<const double> variances,
                                           std::span<const double> rmses) {
    if (sizes.empty() || sizes.size() != variances.size() || sizes.size() != rmses.size())
        throw Error(ErrorCode::length_mismatch, "sizes, variances and rmses must share length K >= 1");
    std::vector<double> w(sizes.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!(sizes[k] >= 0.0 && variances[k] >= 0.0 && rmses[k] >= 0.0))
            throw Error(ErrorCode::degenerate, "negative or non-finite input at k=" + std::to_string(k));
        w[k] = sizes[k] * variances[k] * rmses[k];
        total += w[k];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw Error(ErrorCode::degenerate, "all size*variance*rmse products are zero");
    for (auto& v : w) v /= total;
    return w;
}

std::vector<double> even_rates(std::size_t k) {
    return std::vector<double>(k, 1.0 / double(k));
}

std::vector<std::size_t> allocate_counts(std::size_t n, std::span<const double> rates) {
    const std::size_t k = rates.size();
    std::vector<std::size_t> counts(k, 0);
    if (k == 0) return counts;
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = double(n) * rates[i];
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - double(counts[i]);
        assigned += counts[i];
    }
    // Guard against rates summing slightly above 1.
    while (assigned > n) {
        const auto it = std::max_element(counts.begin(), counts.end());
        --*it;
        --assigned;
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < n; i = (i + 1) % k) {
        ++counts[order[i]];
        ++assigned;
    }
    return counts;
}

SamplingPlan make_plan(std::size_t n, std::vector<double> rates) {
    SamplingPlan plan;
    plan.counts = allocate_counts(n, rates);
    plan.rates = std::move(rates);
    plan.total = n;
    return plan;
}

Grid2D<std::size_t> subregion_map(const Environment& env, const Partition& partition) {
    Grid2D<std::size_t> out(env.nx(), env.ny(), std::numeric_limits<std::size_t>::max());
    for (std::size_t iy = 0; iy < env.ny(); ++iy)
        for (std::size_t ix = 0; ix < env.nx(); ++ix)
            if (!env.is_blocked(ix, iy)) out(ix, iy) = assign_geographic(env.cell_center(ix, iy), partition);
    return out;
}

Scgm resample_subregions(const GroundTruthMap& map, const Partition& partition,
                         std::span<const std::size_t> counts, const Scgm& existing,
                         std::uint64_t seed) {
    if (counts.size() != partition.k)
        throw Error(ErrorCode::length_mismatch, "counts length must equal K");
    const Environment& env = map.env;
    std::unordered_set<std::size_t> taken;
    for (const auto& p : existing) {
        if (const auto cell = env.cell_of({p.x, p.y})) taken.insert(map.blocked.index((*cell)[0], (*cell)[1]));
    }
    const auto regions = subregion_map(env, partition);
    std::vector<std::vector<std::size_t>> pools(partition.k);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (map.blocked[i] || taken.count(i)) continue;
        pools[regions[i]].push_back(i);
    }
    Scgm out;
    const std::size_t nx = env.nx();
    for (std::size_t k = 0; k < partition.k; ++k) {
        if (counts[k] > pools[k].size())
            throw Error(ErrorCode::subregion_exhausted,
                        "subregion " + std::to_string(k) + " has " + std::to_string(pools[k].size()) +
                            " free cells, short by " + std::to_string(counts[k] - pools[k].size()));
    }
    for (std::size_t k = 0; k < partition.k; ++k) {
        std::mt19937_64 rng(derive_seed(seed, "resample", k));
        for (auto i : draw_without_replacement(std::move(pools[k]), counts[k], rng))
            out.push_back(map.sample_at(i % nx, i / nx));
    }
    return out;
}

}  // namespace cgm
