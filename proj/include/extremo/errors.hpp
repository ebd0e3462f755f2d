#pragma once

#include <stdexcept>
#include <string>

namespace extremo {

/// Raised when too many replicates or subsample blocks were dropped for the
/// aggregate result to be trustworthy (maps to a distinct CLI exit code).
struct PartialFailure : std::runtime_error {
  explicit PartialFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace extremo
