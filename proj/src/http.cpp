#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "socsim/http.hpp"

#include <regex>

namespace socsim {

HttpResponse http_post_json(const std::string& url, const Json& body,
                            const std::map<std::string, std::string>& headers, double timeout_s) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw IoError("malformed URL '" + url + "'");
  const std::string origin = m[1];
  const std::string path = m[2].matched ? std::string(m[2]) : "/";

  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(timeout_s);
  const auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body.dump(), "application/json");
  if (!res) throw IoError("POST " + url + " failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace socsim
