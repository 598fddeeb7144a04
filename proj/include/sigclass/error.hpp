#pragma once

#include <stdexcept>
#include <string>

namespace sigclass {

enum class Errc {
    invalid_argument,
    rank_too_large,
    non_finite_input,
    negative_input,
    degenerate_input,
    dimension_mismatch,
    zero_column,
    inconsistent_shapes,
    empty_cluster,
    ensemble_degenerate,
    label_mismatch,
    degenerate_build,
    empty_archive,
    schema_version,
    corrupt_file,
    io,
    parse,
    id_mismatch,
    missing_column,
    empty_input,
    unknown_class,
    class_emptied,
    infeasible_spec,
};

const char* to_string(Errc code) noexcept;

// Validation failures map to CLI exit code 2, everything else to 1.
bool is_usage_error(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace sigclass
