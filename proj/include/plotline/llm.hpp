#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "plotline/error.hpp"

namespace plotline::llm {

struct LlmConfig {
  std::string endpoint = "http://localhost:8000/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "PLOTLINE_API_KEY";
  int max_tokens = 512;
  double temperature = 0.3;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int max_concurrent_requests = 4;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  double jitter = 0.25;  // up to +25% of each delay
};

enum class ErrorKind { timeout, auth_failure, rate_limited, server_error, client_error, malformed_response, transport };

const char* to_string(ErrorKind kind);

class LlmError : public Error {
 public:
  LlmError(ErrorKind kind, const std::string& what) : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  // Timeouts, rate limits, 5xx and connection failures are retried.
  bool transient() const noexcept;

 private:
  ErrorKind kind_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Network seam. Implementations return any HTTP status they receive and throw
// LlmError(timeout | transport) when no response arrives.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, double timeout_seconds) = 0;
};

std::unique_ptr<Transport> make_http_transport();

// Anything that turns a prompt into model text.
class Completer {
 public:
  virtual ~Completer() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string model_name() const { return "unknown"; }
};

std::string request_body(const LlmConfig& config, const std::string& prompt);
// choices[0].message.content, or LlmError(malformed_response).
std::string parse_completion(const std::string& body);
void raise_for_status(const HttpResponse& response);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Chat-completions client with bounded exponential-backoff retries and a
/// cap on in-flight requests shared by all threads using the client.
class LlmClient : public Completer {
 public:
  LlmClient(LlmConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper = {}, std::uint64_t jitter_seed = 0);

  std::string complete(const std::string& prompt) override;
  std::string model_name() const override { return config_.model; }

  const LlmConfig& config() const { return config_; }
  // Delay before retry number `retry` (1-based) without jitter.
  std::chrono::milliseconds base_delay(int retry) const;
  int peak_in_flight() const;

 private:
  std::chrono::milliseconds delay_with_jitter(int retry);
  std::string attempt(const std::string& body, const std::map<std::string, std::string>& headers);

  LlmConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;

  mutable std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
  std::mt19937_64 jitter_rng_;
};

// One-shot helper over the HTTP transport.
std::string complete(const LlmConfig& config, const std::string& prompt);

}  // namespace plotline::llm
