#pragma once

#include <map>
#include <string>

#include "socsim/document.hpp"

namespace socsim {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body to an http:// or https:// URL. Throws IoError on
/// transport failure (not on non-2xx statuses).
HttpResponse http_post_json(const std::string& url, const Json& body,
                            const std::map<std::string, std::string>& headers, double timeout_s);

}  // namespace socsim
