#include "spacectl/dispatch.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "spacectl/url.hpp"

namespace spacectl {

using json = nlohmann::json;

CallResult execute_call(const ApiCall& call, std::chrono::milliseconds timeout,
                        const AttemptObserver& observer) {
  CallResult result;
  result.status = CallStatus::failed;

  const auto url = parse_absolute_url(call.endpoint);
  if (!url) {
    result.error = "invalid endpoint '" + call.endpoint + "'";
    return result;
  }

  httplib::Client client(url->origin());
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_keep_alive(false);

  httplib::Request req;
  req.method = std::string(to_string(call.method));
  req.path = url->target;
  if (!call.body.empty()) {
    req.body = call.body;
    req.set_header("Content-Type", "application/json");
  }

  if (observer) observer(call);
  const auto start = std::chrono::steady_clock::now();
  auto res = client.send(req);
  result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);

  if (!res) {
    result.error = httplib::to_string(res.error());
    return result;
  }
  result.http_status = res->status;
  result.response_body = res->body.substr(0, kMaxResponseBody);
  if (res->status >= 200 && res->status <= 299) {
    result.status = CallStatus::success;
  } else {
    result.error = "HTTP " + std::to_string(res->status);
  }
  return result;
}

TransactionReport execute_transaction(const ApiMetadata& metadata, std::chrono::milliseconds timeout,
                                      const AttemptObserver& observer) {
  TransactionReport report;
  report.api_id = metadata.api_id;
  bool failed = false;
  for (std::size_t i = 0; i < metadata.transaction.size(); ++i) {
    CallResult r;
    if (failed) {
      r.status = CallStatus::skipped;
    } else {
      r = execute_call(metadata.transaction[i], timeout, observer);
      failed = r.status != CallStatus::success;
    }
    r.call_index = i;
    report.results.push_back(std::move(r));
  }
  report.overall = failed ? TransactionOutcome::partial_failure : TransactionOutcome::success;
  return report;
}

std::string_view to_string(CallStatus status) {
  switch (status) {
    case CallStatus::success: return "success";
    case CallStatus::failed: return "failed";
    case CallStatus::skipped: return "skipped";
  }
  return "skipped";
}

std::string_view to_string(TransactionOutcome outcome) {
  return outcome == TransactionOutcome::success ? "success" : "partial_failure";
}

json to_json(const CallResult& r) {
  json out = {{"call_index", r.call_index},
              {"status", to_string(r.status)},
              {"latency_ms", r.latency.count()}};
  out["http_status"] = r.http_status ? json(*r.http_status) : json(nullptr);
  out["response_body"] = r.response_body ? json(*r.response_body) : json(nullptr);
  out["error"] = r.error ? json(*r.error) : json(nullptr);
  return out;
}

json to_json(const TransactionReport& report) {
  json results = json::array();
  for (const auto& r : report.results) results.push_back(to_json(r));
  return {{"api_id", report.api_id},
          {"overall", to_string(report.overall)},
          {"results", std::move(results)}};
}

}  // namespace spacectl
