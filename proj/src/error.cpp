#include "exboot/error.hpp"

namespace exboot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::MissingCell: return "missing_cell";
    case ErrorCode::DuplicateIndex: return "duplicate_index";
    case ErrorCode::RaggedRow: return "ragged_row";
    case ErrorCode::NonNumeric: return "non_numeric";
    case ErrorCode::SelfLoop: return "self_loop";
    case ErrorCode::TooFewUnits: return "too_few_units";
    case ErrorCode::DegenerateScale: return "degenerate_scale";
    case ErrorCode::DegenerateData: return "degenerate_data";
    case ErrorCode::ZeroMassOnly: return "zero_mass_only";
    case ErrorCode::ModeMismatch: return "mode_mismatch";
    case ErrorCode::SupportTooLarge: return "support_too_large";
  }
  return "unknown";
}

}  // namespace exboot
