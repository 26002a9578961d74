#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace spacectl {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  std::uint16_t port = 0;
  std::string target;  // path plus query, always starts with '/'

  // scheme://host:port, the form httplib::Client accepts.
  std::string origin() const;
};

// Accepts absolute http(s) URLs only.
std::optional<Url> parse_absolute_url(std::string_view text);

}  // namespace spacectl
