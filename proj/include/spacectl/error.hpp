#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spacectl {

enum class Errc {
  EmptyText,
  ZeroVector,
  DimensionMismatch,
  ProviderUnreachable,
  ProviderRejected,
  DuplicateId,
  NotFound,
  EmptyIndex,
  IoError,
  SchemaError,
  EmptyTrainingSet,
  DegenerateClass,
  UniverseMismatch,
  InvalidThreshold,
  ValidationError,
  DuplicateApiId,
  UnknownFixture,
  ConfigError,
  InternalMisconfiguration,
  BindError,
  FixtureLoadError,
};

std::string_view to_string(Errc code);

// Every library failure is thrown as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt);

  Errc code() const noexcept { return code_; }
  // Position of the offending item for batch operations.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

}  // namespace spacectl
