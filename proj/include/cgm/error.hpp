#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cgm {

enum class ErrorCode {
    invalid_spec,
    parse_error,
    schema_mismatch,
    empty_dataset,
    out_of_bounds,
    oversample,
    degenerate,
    subregion_exhausted,
    empty_input,
    invalid_k,
    invalid_architecture,
    shape_mismatch,
    length_mismatch,
    non_finite_loss,
    empty_cluster,
    empty_group,
    insufficient_data,
    singular_system,
    degenerate_range,
    bounds_mismatch,
    io_error,
    version_mismatch,
    corrupt_bundle,
    invalid_config,
    stage_failure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cgm
