#pragma once

#include <stdexcept>
#include <string>

namespace smart {

// CLI exit-code families. Library code throws, the CLI maps.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dataset
struct MissingFileError : DataError { using DataError::DataError; };
struct DuplicateColumnError : DataError { using DataError::DataError; };
struct RaggedRowError : DataError { using DataError::DataError; };
struct MissingValueError : DataError { using DataError::DataError; };
struct UnknownColumnError : DataError { using DataError::DataError; };
struct BadSplitFractionError : ConfigError { using ConfigError::ConfigError; };

// predicate
struct PredicateSyntaxError : DataError {
    PredicateSyntaxError(const std::string& msg, std::size_t offset)
        : DataError(msg), byte_offset(offset) {}
    std::size_t byte_offset;
};
struct PredicateTypeError : DataError { using DataError::DataError; };

// model
struct SingleClassError : DataError { using DataError::DataError; };

// hypothesis / provider
struct ParseFailure : ProviderError {
    ParseFailure(const std::string& msg, std::string raw)
        : ProviderError(msg), raw_response(std::move(raw)) {}
    std::string raw_response;
};
struct AdjustmentFailure : ProviderError {
    AdjustmentFailure(const std::string& msg, std::string candidate)
        : ProviderError(msg), last_candidate(std::move(candidate)) {}
    std::string last_candidate;
};

// remote
struct MissingCredentialError : ProviderError { using ProviderError::ProviderError; };
struct TransportError : ProviderError { using ProviderError::ProviderError; };
struct BadStatusError : ProviderError { using ProviderError::ProviderError; };
struct MalformedResponseError : ProviderError { using ProviderError::ProviderError; };

// splitter
struct NoValidSplitError : DataError { using DataError::DataError; };

// falsify
struct UndersizedSliceError : DataError { using DataError::DataError; };

// baseline
struct CandidateExplosionError : DataError { using DataError::DataError; };

} // namespace smart
