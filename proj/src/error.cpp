#include "freqcross/error.hpp"

namespace freqcross {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedImage: return "MalformedImage";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NotCentered: return "NotCentered";
    case ErrorKind::MismatchedBins: return "MismatchedBins";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NoTape: return "NoTape";
    case ErrorKind::NonDeterministicFragment: return "NonDeterministicFragment";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::VersionUnsupported: return "VersionUnsupported";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicatePath: return "DuplicatePath";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::UnknownSplit: return "UnknownSplit";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::NoPositives: return "NoPositives";
    case ErrorKind::DegenerateRank: return "DegenerateRank";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace freqcross
