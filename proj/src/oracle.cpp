#include "socsim/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "socsim/http.hpp"

namespace socsim {

namespace {

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Lines of a "[name]" prompt section.
std::vector<std::string> section_lines(const std::string& prompt, const std::string& name) {
  std::vector<std::string> out;
  bool inside = false;
  for (auto& line : lines_of(prompt)) {
    if (!line.empty() && line.front() == '[' && line.back() == ']') {
      inside = line == "[" + name + "]";
      continue;
    }
    if (inside) out.push_back(std::move(line));
  }
  return out;
}

bool is_item_line(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  return i > 0 && line.compare(i, 3, ". [") == 0;
}

const std::vector<std::string>& default_vocabulary() {
  static const std::vector<std::string> words{
      "ai",       "future",   "people",   "policy",    "safety",   "jobs",     "research", "open",
      "risk",     "progress", "community", "data",     "trust",    "today",    "think",    "really",
      "should",   "could",    "never",    "always",    "hope",     "worried",  "excited",  "news",
      "truth",    "question", "answer",   "story",     "change",   "vote",     "world",    "talk",
      "listen",   "share",    "read",     "agree",     "disagree", "maybe",    "clearly",  "honestly"};
  return words;
}

}  // namespace

std::optional<RequestLine> find_request_line(const std::string& prompt) {
  std::optional<RequestLine> found;
  for (const auto& line : lines_of(prompt)) {
    const auto pos = line.find(" REQUEST");
    if (pos == std::string::npos) continue;
    const auto verb = line.substr(0, pos);
    if (verb != "ACTION" && verb != "REASONING" && verb != "PROBE" && verb != "CONSOLIDATE") continue;
    RequestLine r;
    r.verb = verb;
    r.line = line;
    std::istringstream in(line.substr(pos + 8));
    std::string tok;
    while (in >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) r.fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    found = r;
  }
  return found;
}

std::vector<std::string> prompt_item_refs(const std::string& prompt) {
  std::vector<std::string> out;
  for (const auto& line : section_lines(prompt, "observation")) {
    if (!is_item_line(line)) continue;
    const auto open = line.find('['), close = line.find(']', open);
    if (close != std::string::npos) out.push_back(line.substr(open + 1, close - open - 1));
  }
  return out;
}

std::vector<double> prompt_item_beliefs(const std::string& prompt) {
  std::vector<double> out;
  for (const auto& line : section_lines(prompt, "observation")) {
    if (!is_item_line(line)) continue;
    const auto pos = line.find(" belief=");
    if (pos == std::string::npos) continue;
    out.push_back(std::strtod(line.c_str() + pos + 8, nullptr));
  }
  return out;
}

std::optional<double> prompt_self_belief(const std::string& prompt) {
  static const std::string key = "Previous belief: ";
  for (const auto& line : section_lines(prompt, "self_state")) {
    if (line.rfind(key, 0) != 0) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str() + key.size(), &end);
    if (end != line.c_str() + key.size()) return v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

ScriptedOracle::ScriptedOracle(const Json& fixture) {
  if (!fixture.is_object()) throw ConfigError("scripted fixture must be a mapping");
  Fields f(fixture, "/fixture");
  if (f.has("seed")) seed_ = static_cast<std::uint64_t>(f.integer("seed", 0));
  default_ = f.str("default", "");
  if (const Json* rules = f.raw("rules")) {
    if (!rules->is_array()) throw ConfigError("scripted fixture 'rules' must be a list");
    for (std::size_t i = 0; i < rules->size(); ++i) {
      Fields rf((*rules)[i], "/fixture/rules/" + std::to_string(i));
      Rule r;
      r.pattern = rf.require_str("match");
      try {
        r.re = std::regex(r.pattern);
      } catch (const std::regex_error& e) {
        throw ConfigError("bad regex '" + r.pattern + "' in scripted fixture: " + e.what());
      }
      if (rf.has("respond")) r.respond = rf.str("respond", "");
      r.behavior = rf.str("behavior", "");
      if (const Json* p = rf.raw("params")) r.params = *p;
      r.error = rf.str("error", "");
      rf.finish();
      if (!r.error.empty() && r.error != "transient" && r.error != "fatal")
        throw ConfigError("scripted rule error must be 'transient' or 'fatal', got '" + r.error + "'");
      if (!r.behavior.empty() && r.behavior != "random_actor" && r.behavior != "bounded_confidence")
        throw ConfigError("unknown scripted behavior '" + r.behavior + "'");
      if (!r.respond && r.behavior.empty() && r.error.empty())
        throw ConfigError("scripted rule " + std::to_string(i) + " needs respond, behavior or error");
      rules_.push_back(std::move(r));
    }
  }
  f.finish();
}

Completion ScriptedOracle::complete(const std::string& prompt, const DecodeParams&) {
  for (const auto& r : rules_) {
    std::smatch m;
    if (!std::regex_search(prompt, m, r.re)) continue;
    if (!r.error.empty()) throw OracleError("scripted " + r.error + " error (rule '" + r.pattern + "')", r.error == "transient");
    if (r.behavior == "random_actor") return {random_actor(prompt, r.params), nullptr};
    if (r.behavior == "bounded_confidence") return {bounded_confidence(prompt, r.params), nullptr};
    return {render(*r.respond, prompt, m), nullptr};
  }
  std::smatch none;
  return {render(default_, prompt, none), nullptr};
}

std::string ScriptedOracle::render(const std::string& tmpl, const std::string& prompt, const std::smatch& m) const {
  const auto req = find_request_line(prompt);
  const std::string line = req ? req->line : std::string();
  auto field = [&](const std::string& k) {
    if (!req) return std::string();
    auto it = req->fields.find(k);
    return it == req->fields.end() ? std::string() : it->second;
  };
  std::string out;
  std::size_t pos = 0;
  std::uint64_t ordinal = 0;
  while (true) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = tmpl.find("}}", open);
    if (close == std::string::npos) break;
    out += tmpl.substr(pos, open - pos);
    const auto token = tmpl.substr(open + 2, close - open - 2);
    const auto colon = token.find(':');
    const auto name = token.substr(0, colon);
    const auto arg = colon == std::string::npos ? std::string() : token.substr(colon + 1);
    if (name == "agent" || name == "episode" || name == "step" || name == "probe") {
      out += field(name);
    } else if (name == "item") {
      const auto refs = prompt_item_refs(prompt);
      const auto n = std::strtoul(arg.c_str(), nullptr, 10);
      if (n >= 1 && n <= refs.size()) out += refs[n - 1];
    } else if (name == "item_count") {
      out += std::to_string(prompt_item_refs(prompt).size());
    } else if (name == "pick") {
      std::vector<std::string> choices;
      std::string cur;
      for (char c : arg + "|") {
        if (c == '|') {
          choices.push_back(cur);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
      Rng rng(derive_seed(seed_, {fnv1a64(line), ordinal++}));
      out += choices[rng.below(choices.size())];
    } else if (name == "capture") {
      const auto n = std::strtoul(arg.c_str(), nullptr, 10);
      if (n < m.size()) out += m[n].str();
    } else if (name == "self_belief") {
      if (auto b = prompt_self_belief(prompt)) out += format_double(*b);
    } else {
      out += "{{" + token + "}}";
    }
    pos = close + 2;
  }
  out += tmpl.substr(pos);
  return out;
}

// A random but reproducible actor. Only the request line and the fixture seed
// drive the draws, so changing budget text elsewhere in the prompt leaves the
// action sequence unchanged.
std::string ScriptedOracle::random_actor(const std::string& prompt, const Json& params) const {
  const auto req = find_request_line(prompt);
  const std::string line = req ? req->line : std::string();
  const int step = req && req->fields.count("step") ? std::atoi(req->fields.at("step").c_str()) : 0;
  const int max_turn = params.value("max_turn_actions", 3);
  if (step >= max_turn) return R"({"kind":"finish"})";

  std::vector<std::pair<std::string, double>> weights;
  const Json w = params.value("weights", Json{{"post", 3}, {"like", 3}, {"reply", 2}, {"repost", 1}, {"finish", 1}});
  for (const char* k : {"post", "like", "reply", "repost", "finish"})
    if (w.contains(k) && w[k].get<double>() > 0) weights.emplace_back(k, w[k].get<double>());
  double total = 0;
  for (const auto& [_, x] : weights) total += x;

  Rng rng(derive_seed(seed_, {fnv1a64(line)}));
  std::string kind = "post";
  double u = rng.uniform() * total;
  for (const auto& [k, x] : weights) {
    if (u < x) {
      kind = k;
      break;
    }
    u -= x;
  }
  const auto refs = prompt_item_refs(prompt);
  if ((kind == "like" || kind == "reply" || kind == "repost") && refs.empty()) kind = "post";

  std::vector<std::string> vocab;
  if (params.contains("vocabulary"))
    for (const auto& v : params["vocabulary"]) vocab.push_back(v.get<std::string>());
  if (vocab.empty()) vocab = default_vocabulary();
  auto words = [&] {
    const auto n = 4 + rng.below(9);
    std::string t;
    for (std::uint64_t i = 0; i < n; ++i) t += (i ? " " : "") + vocab[rng.below(vocab.size())];
    return t;
  };

  Json out{{"kind", kind}};
  if (kind == "like" || kind == "reply" || kind == "repost") out["target"] = refs[rng.below(refs.size())];
  if (kind == "post" || kind == "reply") out["text"] = words();
  return out.dump();
}

std::string ScriptedOracle::bounded_confidence(const std::string& prompt, const Json& params) const {
  const double eps = params.value("epsilon", 2.0);
  const double mu = params.value("mu", 0.3);
  const double gamma = params.value("gamma", 0.0);
  const double mid = params.value("midpoint", 5.5);
  const double lo = params.value("min", 1.0), hi = params.value("max", 10.0);

  const auto xs = prompt_item_beliefs(prompt);
  double b = mid;
  if (auto self = prompt_self_belief(prompt)) {
    b = *self;
  } else if (!xs.empty()) {
    double s = 0;
    for (double x : xs) s += x;
    b = s / static_cast<double>(xs.size());
  }
  double sum = 0;
  int n = 0;
  bool same_side = true;
  for (double x : xs) {
    if (std::abs(x - b) > eps) continue;
    sum += x;
    ++n;
    if ((x - mid) * (b - mid) <= 0) same_side = false;
  }
  double next = b;
  if (n > 0) {
    next = b + mu * (sum / n - b);
    if (gamma > 0 && same_side && b != mid) next += gamma * (b > mid ? 1.0 : -1.0);
  }
  return format_double(std::clamp(next, lo, hi));
}

// ---------------------------------------------------------------------------

HttpOracle::HttpOracle(ModelSpec spec, std::string base_url, std::string api_key)
    : spec_(std::move(spec)), api_key_(std::move(api_key)) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  const std::string suffix = "/chat/completions";
  url_ = base_url.size() >= suffix.size() && base_url.compare(base_url.size() - suffix.size(), suffix.size(), suffix) == 0
             ? base_url
             : base_url + suffix;
}

Completion HttpOracle::complete(const std::string& prompt, const DecodeParams& params) {
  Json body{{"model", spec_.model},
            {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", params.temperature},
            {"max_tokens", params.max_tokens}};
  if (params.seed) body["seed"] = *params.seed;
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;

  std::string last_error;
  for (int attempt = 0; attempt <= spec_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << std::min(attempt, 5)));
    HttpResponse res;
    try {
      res = http_post_json(url_, body, headers, spec_.timeout_s);
    } catch (const IoError& e) {
      last_error = e.what();
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status < 200 || res.status >= 300)
      throw OracleError("chat endpoint returned HTTP " + std::to_string(res.status) + ": " + res.body, false);
    try {
      const auto j = Json::parse(res.body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      return {content.is_string() ? content.get<std::string>() : std::string(),
              Json{{"url", url_}, {"request", body}, {"response", j}}};
    } catch (const Json::exception& e) {
      throw OracleError(std::string("malformed chat response: ") + e.what(), true);
    }
  }
  throw OracleError("chat endpoint unavailable after " + std::to_string(spec_.retries + 1) + " attempts: " + last_error,
                    true);
}

std::shared_ptr<ModelOracle> make_oracle(const ModelSpec& spec) {
  if (spec.oracle == "scripted") return std::make_shared<ScriptedOracle>(spec.fixture);
  std::string base = spec.base_url;
  if (base.empty())
    if (const char* env = std::getenv("SOCSIM_API_BASE")) base = env;
  if (base.empty()) throw ConfigError("http oracle needs base_url or SOCSIM_API_BASE");
  std::string key;
  if (const char* env = std::getenv(spec.api_key_env.c_str())) key = env;
  return std::make_shared<HttpOracle>(spec, base, key);
}

}  // namespace socsim
