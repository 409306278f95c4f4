#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "plotline/llm.hpp"

namespace plotline::llm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::auth_failure: return "auth failure";
    case ErrorKind::rate_limited: return "rate limited";
    case ErrorKind::server_error: return "server error";
    case ErrorKind::client_error: return "client error";
    case ErrorKind::malformed_response: return "malformed response";
    case ErrorKind::transport: return "transport error";
  }
  return "unknown";
}

bool LlmError::transient() const noexcept {
  switch (kind_) {
    case ErrorKind::timeout:
    case ErrorKind::rate_limited:
    case ErrorKind::server_error:
    case ErrorKind::transport:
      return true;
    default:
      return false;
  }
}

std::string request_body(const LlmConfig& config, const std::string& prompt) {
  nlohmann::json j = {{"model", config.model},
                      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                      {"max_tokens", config.max_tokens},
                      {"temperature", config.temperature}};
  return j.dump();
}

std::string parse_completion(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw LlmError(ErrorKind::malformed_response, "content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(ErrorKind::malformed_response, e.what());
  }
}

void raise_for_status(const HttpResponse& response) {
  const int s = response.status;
  if (s >= 200 && s < 300) return;
  const std::string detail = "HTTP " + std::to_string(s);
  if (s == 401 || s == 403) throw LlmError(ErrorKind::auth_failure, detail);
  if (s == 429) throw LlmError(ErrorKind::rate_limited, detail);
  if (s == 408 || s == 504) throw LlmError(ErrorKind::timeout, detail);
  if (s >= 500) throw LlmError(ErrorKind::server_error, detail);
  throw LlmError(ErrorKind::client_error, detail);
}

LlmClient::LlmClient(LlmConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper, std::uint64_t jitter_seed)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)), jitter_rng_(jitter_seed) {
  if (config_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  if (!(config_.timeout_seconds > 0.0)) throw std::invalid_argument("timeout must be positive");
  if (config_.max_concurrent_requests < 1) config_.max_concurrent_requests = 1;
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds LlmClient::base_delay(int retry) const {
  const double seconds = config_.backoff_base_seconds * std::pow(config_.backoff_factor, retry - 1);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(seconds * 1000.0)));
}

std::chrono::milliseconds LlmClient::delay_with_jitter(int retry) {
  double u = 0.0;
  {
    std::lock_guard lock(mutex_);
    u = static_cast<double>(jitter_rng_() >> 11) * 0x1.0p-53;
  }
  const auto base = base_delay(retry);
  return base + std::chrono::milliseconds(static_cast<long long>(static_cast<double>(base.count()) * config_.jitter * u));
}

int LlmClient::peak_in_flight() const {
  std::lock_guard lock(mutex_);
  return peak_in_flight_;
}

std::string LlmClient::attempt(const std::string& body, const std::map<std::string, std::string>& headers) {
  {
    std::unique_lock lock(mutex_);
    slot_free_.wait(lock, [&] { return in_flight_ < config_.max_concurrent_requests; });
    ++in_flight_;
    peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
  }
  struct Release {
    LlmClient* self;
    ~Release() {
      {
        std::lock_guard lock(self->mutex_);
        --self->in_flight_;
      }
      self->slot_free_.notify_one();
    }
  } release{this};

  const HttpResponse response = transport_->post(config_.endpoint, body, headers, config_.timeout_seconds);
  raise_for_status(response);
  return parse_completion(response.body);
}

std::string LlmClient::complete(const std::string& prompt) {
  std::map<std::string, std::string> headers = {{"Content-Type", "application/json"}};
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers["Authorization"] = std::string("Bearer ") + key;
    }
  }
  const std::string body = request_body(config_, prompt);
  for (int retry = 0;; ++retry) {
    try {
      return attempt(body, headers);
    } catch (const LlmError& e) {
      if (!e.transient() || retry >= config_.max_retries) throw;
    }
    sleeper_(delay_with_jitter(retry + 1));
  }
}

std::string complete(const LlmConfig& config, const std::string& prompt) {
  LlmClient client(config, std::shared_ptr<Transport>(make_http_transport()));
  return client.complete(prompt);
}

}  // namespace plotline::llm
