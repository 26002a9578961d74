#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spacectl/api_registry.hpp"

namespace spacectl {

inline constexpr std::chrono::milliseconds kDefaultCallTimeout{5'000};
inline constexpr std::size_t kMaxResponseBody = 64 * 1024;

enum class CallStatus { success, failed, skipped };

struct CallResult {
  std::size_t call_index = 0;
  CallStatus status = CallStatus::skipped;
  std::optional<int> http_status;
  std::optional<std::string> response_body;
  std::chrono::milliseconds latency{0};
  std::optional<std::string> error;
};

enum class TransactionOutcome { success, partial_failure };

struct TransactionReport {
  std::string api_id;
  std::vector<CallResult> results;
  TransactionOutcome overall = TransactionOutcome::success;
};

// Invoked once per outbound request attempt, before the request is sent.
using AttemptObserver = std::function<void(const ApiCall&)>;

// One HTTP request, never retried. Failures are reported, not thrown.
CallResult execute_call(const ApiCall& call, std::chrono::milliseconds timeout = kDefaultCallTimeout,
                        const AttemptObserver& observer = {});

// Calls run strictly in order; the first failure marks the rest skipped.
TransactionReport execute_transaction(const ApiMetadata& metadata,
                                      std::chrono::milliseconds timeout = kDefaultCallTimeout,
                                      const AttemptObserver& observer = {});

std::string_view to_string(CallStatus status);
std::string_view to_string(TransactionOutcome outcome);
nlohmann::json to_json(const CallResult& result);
nlohmann::json to_json(const TransactionReport& report);

}  // namespace spacectl
