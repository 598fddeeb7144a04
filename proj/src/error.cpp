#include "sigclass/error.hpp"

namespace sigclass {

const char* to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::rank_too_large: return "rank-too-large";
    case Errc::non_finite_input: return "non-finite-input";
    case Errc::negative_input: return "negative-input";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::zero_column: return "zero-column";
    case Errc::inconsistent_shapes: return "inconsistent-shapes";
    case Errc::empty_cluster: return "empty-cluster";
    case Errc::ensemble_degenerate: return "ensemble-degenerate";
    case Errc::label_mismatch: return "label-mismatch";
    case Errc::degenerate_build: return "degenerate-build";
    case Errc::empty_archive: return "empty-archive";
    case Errc::schema_version: return "schema-version";
    case Errc::corrupt_file: return "corrupt-file";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::id_mismatch: return "id-mismatch";
    case Errc::missing_column: return "missing-column";
    case Errc::empty_input: return "empty-input";
    case Errc::unknown_class: return "unknown-class";
    case Errc::class_emptied: return "class-emptied";
    case Errc::infeasible_spec: return "infeasible-spec";
    }
    return "unknown";
}

bool is_usage_error(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument:
    case Errc::negative_input:
    case Errc::non_finite_input:
    case Errc::label_mismatch:
    case Errc::parse:
    case Errc::id_mismatch:
    case Errc::missing_column:
    case Errc::empty_input:
    case Errc::unknown_class:
    case Errc::class_emptied:
    case Errc::infeasible_spec:
        return true;
    default:
        return false;
    }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace sigclass
