#include "cgm/optimize.hpp"

#include "cgm/error.hpp"

namespace cgm {

std::vector<double> subregion_rmse(const McnnModel& model, const TestSet& test) {
    const auto locs = test.locations();
    const auto pred = predict_points(model, locs);
    const auto groups = assign_all_geographic(model.partition, locs);
    const auto report = evaluate_rmse(pred, test.gains(), groups, model.k());
    std::vector<double> out(model.k());
    for (std::size_t k = 0; k < model.k(); ++k) out[k] = report.per_group[k].value_or(report.overall);
    return out;
}

SamplingPlan uneven_plan(const Scgm& scgm, const Partition& partition, std::span<const double> rmses,
                         std::size_t n, bool* fell_back) {
    const auto stats = cluster_stats(scgm, partition);
    std::vector<double> rates;
    bool fallback = false;
    try {
        rates = compute_sampling_rates(stats.size_fractions, stats.gain_variances, rmses);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate) throw;
        rates = even_rates(partition.k);
        fallback = true;
    }
    if (fell_back) *fell_back = fallback;
    return make_plan(n, std::move(rates));
}

SamplingPlan even_plan(std::size_t k, std::size_t n) {
    return make_plan(n, even_rates(k));
}

AugmentedSet augment_with(const Scgm& base, const Partition& partition, const Scgm& new_points) {
    AugmentedSet out{base, partition};
    out.scgm.insert(out.scgm.end(), new_points.begin(), new_points.end());
    for (const auto& p : new_points) {
        const auto k = assign_geographic({p.x, p.y}, partition);
        out.partition.membership.push_back(k);
        ++out.partition.sizes[k];
    }
    return out;
}

}  // namespace cgm
