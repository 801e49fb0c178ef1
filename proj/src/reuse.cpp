#include "cgm/reuse.hpp"

#include <cmath>
#include <string>

#include "cgm/error.hpp"

namespace cgm {

double average_center_distance(const Scgm& scgm, std::span<const std::size_t> members,
                               const Feature& center, const Scaler& scaler) {
    if (members.empty()) throw Error(ErrorCode::empty_cluster, "cluster has no members");
    double sum = 0.0;
    for (auto i : members) sum += std::sqrt(squared_distance(scaler.transform(scgm[i]), center));
    return sum / double(members.size());
}

std::vector<std::vector<std::size_t>> reuse_boundary_points(const Scgm& scgm, const Partition& partition,
                                                            const ReuseConfig& config) {
    if (config.sigma_factor < 0.0) throw Error(ErrorCode::invalid_config, "sigma_factor must be >= 0");
    if (partition.membership.size() != scgm.size())
        throw Error(ErrorCode::length_mismatch, "partition does not cover the SCGM");
    std::vector<Feature> x(scgm.size());
    for (std::size_t i = 0; i < scgm.size(); ++i) x[i] = partition.scaler.transform(scgm[i]);
    const auto members = partition.members();

    std::vector<std::vector<std::size_t>> out(partition.k);
    for (std::size_t k = 0; k < partition.k; ++k) {
        if (members[k].empty()) throw Error(ErrorCode::empty_cluster, "cluster " + std::to_string(k) + " is empty");
        const auto& center = partition.centers[k];
        double d_k = 0.0;
        for (auto i : members[k]) d_k += std::sqrt(squared_distance(x[i], center));
        d_k /= double(members[k].size());
        const double sigma = config.sigma_factor * d_k;
        for (std::size_t i = 0; i < scgm.size(); ++i) {
            if (partition.membership[i] == k) {
                out[k].push_back(i);
                continue;
            }
            const double d = std::sqrt(squared_distance(x[i], center));
            if (d - d_k < sigma) out[k].push_back(i);
        }
    }
    return out;
}

}  // namespace cgm
