#include "spacectl/error.hpp"

namespace spacectl {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyText: return "EmptyText";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ProviderUnreachable: return "ProviderUnreachable";
    case Errc::ProviderRejected: return "ProviderRejected";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::NotFound: return "NotFound";
    case Errc::EmptyIndex: return "EmptyIndex";
    case Errc::IoError: return "IoError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::DegenerateClass: return "DegenerateClass";
    case Errc::UniverseMismatch: return "UniverseMismatch";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::ValidationError: return "ValidationError";
    case Errc::DuplicateApiId: return "DuplicateApiId";
    case Errc::UnknownFixture: return "UnknownFixture";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InternalMisconfiguration: return "InternalMisconfiguration";
    case Errc::BindError: return "BindError";
    case Errc::FixtureLoadError: return "FixtureLoadError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      index_(index) {}

}  // namespace spacectl
