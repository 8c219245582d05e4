#pragma once

#include <stdexcept>
#include <string>

namespace stylevec {

// Error taxonomy. Exit-code mapping used by the CLI:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };

// textcodec
struct InvalidUtf8 : DataError { using DataError::DataError; };

// lm
struct ConfigInvalid : UsageError { using UsageError::UsageError; };
struct SeqTooLong : DataError { using DataError::DataError; };
struct LayerOutOfRange : DataError { using DataError::DataError; };

// extract / analysis
struct EmptyHistory : DataError { using DataError::DataError; };
struct DegenerateSeparation : NumericError { using NumericError::NumericError; };
struct ZeroVariance : NumericError { using NumericError::NumericError; };
struct TooFewSamples : DataError { using DataError::DataError; };
struct TooFewUsers : DataError { using DataError::DataError; };
struct EmptyInput : DataError { using DataError::DataError; };
struct DimensionMismatch : DataError { using DataError::DataError; };
struct MixedMetrics : DataError { using DataError::DataError; };

// store
struct IoError : DataError { using DataError::DataError; };
struct BadMagic : DataError { using DataError::DataError; };
struct VersionUnsupported : DataError { using DataError::DataError; };
struct TruncatedFile : DataError { using DataError::DataError; };
struct AllLinesMalformed : DataError { using DataError::DataError; };

} // namespace stylevec
