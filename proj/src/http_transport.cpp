#include <httplib.h>

#include "plotline/llm.hpp"

namespace plotline::llm {

namespace {

// scheme://host[:port]/path -> ("scheme://host[:port]", "/path")
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw LlmError(ErrorKind::transport, "endpoint '" + url + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::string& body, const std::map<std::string, std::string>& headers,
                    double timeout_seconds) override {
    const auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(timeout_seconds);
    const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        h.emplace(k, v);
      }
    }
    auto res = client.Post(path, h, body, content_type);
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
        throw LlmError(ErrorKind::timeout, httplib::to_string(err));
      }
      throw LlmError(ErrorKind::transport, httplib::to_string(err));
    }
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

}  // namespace plotline::llm
