#include "cgm/seed.hpp"

#include "cgm/error.hpp"

namespace cgm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ fnv1a(stage)) + splitmix64(index + 0x51ed270b27a5e3c1ULL));
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::schema_mismatch: return "schema-mismatch";
    case ErrorCode::empty_dataset: return "empty-dataset";
    case ErrorCode::out_of_bounds: return "out-of-bounds";
    case ErrorCode::oversample: return "oversample";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::subregion_exhausted: return "subregion-exhausted";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::invalid_k: return "invalid-k";
    case ErrorCode::invalid_architecture: return "invalid-architecture";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::non_finite_loss: return "non-finite-loss";
    case ErrorCode::empty_cluster: return "empty-cluster";
    case ErrorCode::empty_group: return "empty-group";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::degenerate_range: return "degenerate-range";
    case ErrorCode::bounds_mismatch: return "bounds-mismatch";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::corrupt_bundle: return "corrupt-bundle";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::stage_failure: return "stage-failure";
    }
    return "unknown";
}

}  // namespace cgm
