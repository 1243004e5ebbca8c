#include "pamforge/error.hpp"

namespace pamforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedContainer: return "MalformedContainer";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::MultichannelInput: return "MultichannelInput";
    case ErrorCode::NonIntegerRecordLength: return "NonIntegerRecordLength";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ClippingRequested: return "ClippingRequested";
    case ErrorCode::RecordTooShort: return "RecordTooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TolWindowTooShort: return "TolWindowTooShort";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::ParamsMismatch: return "ParamsMismatch";
    case ErrorCode::RecordCountMismatch: return "RecordCountMismatch";
    case ErrorCode::SinkFailure: return "SinkFailure";
    case ErrorCode::BlockTooSmall: return "BlockTooSmall";
    case ErrorCode::PoolInitFailure: return "PoolInitFailure";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::InsufficientDisk: return "InsufficientDisk";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
  }
  return "Unknown";
}

}  // namespace pamforge
