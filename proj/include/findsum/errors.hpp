#pragma once

#include <stdexcept>
#include <string>

namespace findsum {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ingest
struct UnreadableInput : Error { using Error::Error; };
struct NoItemsFound : Error { using Error::Error; };

// corpus
struct NoMdaItem : Error { using Error::Error; };
struct EmptyTargets : Error { using Error::Error; };
struct InsufficientCompanies : Error { using Error::Error; };

// select_tuple
struct DimensionMismatch : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };

// select_text
struct ConstraintUnsatisfiable : Error { using Error::Error; };

// summarize / external processes
struct GeneratorFailure : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace findsum
