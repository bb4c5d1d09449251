#include "socsim/agents.hpp"

#include <cmath>
#include <regex>

namespace socsim {

const std::string& intervention_text(InterventionPreset p) {
  static const std::string none;
  static const std::string mild =
      "IMPORTANT: Act realistically following your given persona: Consider what actions, and how many of them the "
      "persona you are simulating would take given the timeline observations in the current session. If continuing "
      "a session, also consider the actions you have already taken in the step.";
  static const std::string moderate =
      "IMPORTANT: Act realistically following your given persona: Consider what actions, and how many of them the "
      "persona you are simulating would take given the timeline observations in the current session. Remember that "
      "humans typically take a very limited number of actions on average, so strictly consider your persona and "
      "past behavior when deciding actions. If continuing a session, also consider the actions you have already "
      "taken in the step.";
  static const std::string strict =
      "IMPORTANT: Act realistically following your given persona: Consider what actions, and how many of them the "
      "persona you are simulating would take given the timeline observations in the current session. Remember that "
      "humans typically take a very limited number of actions on average, so strictly consider your persona and "
      "past behavior when deciding actions. If continuing a session, also consider the actions you have already "
      "taken in the step, and ensure the total number of actions given the timeline posts is realistic. Take the "
      "finished step instead of over-interacting/posting when you believe the agent's key desired actions have been "
      "conducted.";
  switch (p) {
    case InterventionPreset::None: return none;
    case InterventionPreset::Mild: return mild;
    case InterventionPreset::Moderate: return moderate;
    case InterventionPreset::Strict: return strict;
  }
  return none;
}

// Not verbatim: only short excerpts of the original goal prompts exist.
const std::string& action_goal_text(ActionPromptPreset p) {
  static const std::string none;
  static const std::string deliberate =
      "Before choosing, weigh what your persona actually believes and how they would put it in their own words. "
      "Prefer a considered, in-character contribution over a quick reaction.";
  static const std::string reactive =
      "Respond on impulse. React to whatever in the timeline catches your eye first, in the moment, without "
      "planning ahead.";
  static const std::string engagement =
      "Aim for reach. Choose the actions and wording most likely to draw replies, likes and reposts from a wide "
      "audience.";
  switch (p) {
    case ActionPromptPreset::None: return none;
    case ActionPromptPreset::Deliberate: return deliberate;
    case ActionPromptPreset::Reactive: return reactive;
    case ActionPromptPreset::Engagement: return engagement;
  }
  return none;
}

AgentState make_agent_state(const AgentSpec& spec, const std::vector<std::string>& memory_seeds) {
  AgentState s;
  s.spec = spec;
  s.memory.config = spec.memory;
  s.last_observation.agent = spec.id;
  for (const auto& m : memory_seeds) {
    if (spec.memory.kind == MemoryKind::List) {
      s.memory.records.push_back({0, m});
    } else {
      if (!s.memory.long_term.empty()) s.memory.long_term += "\n";
      s.memory.long_term += m;
    }
  }
  return s;
}

std::string render_memory(const Memory& m) {
  std::string out;
  if (m.config.kind == MemoryKind::List) {
    const auto n = m.records.size();
    const auto from = n > static_cast<std::size_t>(m.config.retrieve) ? n - static_cast<std::size_t>(m.config.retrieve) : 0;
    for (auto i = from; i < n; ++i) out += "- " + m.records[i].content + "\n";
  } else {
    out += "Long-term summary: " + (m.long_term.empty() ? std::string("(none)") : m.long_term) + "\n";
    for (const auto& r : m.short_term) out += "- " + r.content + "\n";
  }
  if (out.empty()) out = "(none)\n";
  return out;
}

std::string render_self_state(const AgentState& s) {
  if (!s.spec.cognition.self_state_feedback) return {};
  std::string out = "Previous opinion: " + s.last.opinion.value_or("(none)") + "\n";
  out += "Previous belief: " + (s.last.belief ? format_double(*s.last.belief) : std::string("(none)")) + "\n";
  return out;
}

namespace {

void section(std::string& out, const std::string& name, const std::string& body) {
  out += "[" + name + "]\n" + body;
  if (!body.empty() && body.back() != '\n') out += "\n";
}

std::string persona_block(const PersonaCard& p) {
  std::string out = "Name: " + p.name + "\n";
  if (!p.description.empty()) out += p.description + "\n";
  for (const auto& [k, v] : p.attributes) out += k + ": " + v + "\n";
  return out;
}

std::string observation_block(const Observation& o) {
  std::string out = "Episode: " + std::to_string(o.episode) + "\n";
  out += "Remaining actions: " + std::to_string(o.remaining_budget) + "\n";
  if (o.items.empty()) out += "(nothing new)\n";
  for (std::size_t i = 0; i < o.items.size(); ++i) out += std::to_string(i + 1) + ". " + render_item(o.items[i]) + "\n";
  return out;
}

std::string probe_block(const Probe& p) {
  std::string out = "Question: " + p.question + "\n";
  out += p.type == AnswerType::YesNo ? "Answer yes or no.\n" : "Answer with a single number from 1 to 10.\n";
  return out;
}

std::string request_line(const AgentState& s, const PromptRequest& r) {
  const auto base = " REQUEST agent=" + s.spec.id + " episode=" + std::to_string(r.episode);
  switch (r.kind) {
    case RequestKind::Action: return "ACTION" + base + " step=" + std::to_string(r.step);
    case RequestKind::Reasoning: return "REASONING" + base + " step=" + std::to_string(r.step);
    case RequestKind::Probe: return "PROBE" + base + " probe=" + (r.probe ? r.probe->id : std::string());
    case RequestKind::Consolidate: return "CONSOLIDATE" + base;
  }
  return {};
}

std::string clip(const std::string& s, std::size_t n) { return s.size() <= n ? s : s.substr(0, n) + "..."; }

}  // namespace

std::string assemble_prompt(const AgentState& s, const Observation& obs, const PromptRequest& req) {
  std::string out;
  if (!s.spec.instructions.empty()) section(out, "instructions", s.spec.instructions);
  section(out, "persona", persona_block(s.spec.persona));
  if (!obs.context_excerpt.empty()) section(out, "scenario", obs.context_excerpt);
  section(out, "memory", render_memory(s.memory));
  if (s.spec.cognition.self_state_feedback) section(out, "self_state", render_self_state(s));

  if (req.kind == RequestKind::Consolidate) {
    std::string body = "Previous summary digest: " + short_digest(s.memory.long_term) + "\n";
    body += "Summarize the records below together with the long-term summary.\n";
    for (const auto& r : s.memory.short_term) body += "- " + r.content + "\n";
    section(out, "consolidate", body);
    section(out, "request", request_line(s, req));
    return out;
  }

  section(out, "observation", observation_block(obs));
  if (req.kind == RequestKind::Probe) {
    if (req.probe) section(out, "probe", probe_block(*req.probe));
    section(out, "request", request_line(s, req));
    return out;
  }

  std::string taken;
  for (const auto& a : obs.actions_taken) taken += "- " + a + "\n";
  section(out, "actions_taken", taken.empty() ? "(none)\n" : taken);
  if (const auto& g = action_goal_text(s.spec.cognition.action_prompt); !g.empty()) section(out, "goal", g);
  if (const auto& t = intervention_text(s.spec.cognition.intervention); !t.empty()) section(out, "intervention", t);
  if (req.kind == RequestKind::Reasoning) {
    section(out, "task", "Think through which actions, if any, you will take this step and why. Do not act yet.\n");
  } else {
    if (!req.reasoning.empty()) section(out, "reasoning", req.reasoning);
    if (req.schema) {
      section(out, "action_schema",
              req.schema->document().dump() + "\nReply with exactly one JSON object following this schema. Use "
                                              "\"finish\" to end your turn.\n");
    }
    if (!req.retry_reason.empty())
      section(out, "retry", "Your previous reply could not be used: " + req.retry_reason + "\n");
  }
  section(out, "request", request_line(s, req));
  return out;
}

namespace {

Json oracle_record(const AgentState& s, const std::string& request, int episode, const std::string& prompt,
                   const Completion& c) {
  Json r{{"type", "oracle"}, {"episode", episode}, {"agent", s.spec.id}, {"request", request},
         {"prompt", prompt}, {"completion", c.text}};
  if (!c.wire.is_null()) r["wire"] = c.wire;
  return r;
}

std::string verb_of(const std::string& prompt) {
  auto r = find_request_line(prompt);
  return r ? r->line : std::string();
}

}  // namespace

ActOutcome act(AgentState& state, const Observation& obs, const ActionSchema& schema, ModelOracle& oracle,
               const DecodeParams& decode, int step, std::vector<Json>& records) {
  ActOutcome out;
  PromptRequest req;
  req.episode = obs.episode;
  req.step = step;
  req.schema = &schema;
  try {
    if (state.spec.cognition.thinking) {
      PromptRequest rr = req;
      rr.kind = RequestKind::Reasoning;
      const auto prompt = assemble_prompt(state, obs, rr);
      const auto c = oracle.complete(prompt, decode);
      records.push_back(oracle_record(state, verb_of(prompt), obs.episode, prompt, c));
      records.push_back({{"type", "reasoning"}, {"episode", obs.episode}, {"agent", state.spec.id},
                         {"step", step}, {"text", c.text}});
      req.reasoning = c.text;
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
      const auto prompt = assemble_prompt(state, obs, req);
      const auto c = oracle.complete(prompt, decode);
      records.push_back(oracle_record(state, verb_of(prompt), obs.episode, prompt, c));
      auto parsed = parse_intent(c.text, schema, state.spec.id);
      if (auto* intent = std::get_if<IntendedAction>(&parsed)) {
        out.intent = *intent;
        return out;
      }
      const auto& f = std::get<ParseFailure>(parsed);
      records.push_back({{"type", "parse_failure"}, {"episode", obs.episode}, {"agent", state.spec.id},
                         {"step", step}, {"attempt", attempt}, {"reason", f.reason}, {"raw", f.raw_model_output}});
      req.retry_reason = f.reason;
      out.error = f.reason;
    }
    out.status = ActOutcome::Status::ParseFailed;
    return out;
  } catch (const OracleError& e) {
    if (!e.transient()) throw;
    records.push_back({{"type", "oracle_error"}, {"episode", obs.episode}, {"agent", state.spec.id},
                       {"step", step}, {"message", e.what()}});
    out.status = ActOutcome::Status::TransportFailed;
    out.error = e.what();
    return out;
  }
}

std::optional<int> parse_scale_answer(std::string_view text) {
  static const std::regex num(R"([-+]?(\d+(\.\d*)?|\.\d+))");
  std::cmatch m;
  if (!std::regex_search(text.begin(), text.end(), m, num)) return std::nullopt;
  const double v = std::round(std::stod(m.str()));
  if (v < 1 || v > 10) return std::nullopt;
  return static_cast<int>(v);
}

std::optional<bool> parse_yes_no(std::string_view text) {
  static const std::set<std::string> skip{"absolutely", "definitely", "certainly", "surely", "of", "course",
                                          "oh", "well", "um", "uh", "hmm", "i", "think", "would", "say",
                                          "honestly", "probably", "answer", "my", "is", "the"};
  static const std::set<std::string> yes{"yes", "y", "yeah", "yep", "yup", "true", "sure"};
  static const std::set<std::string> no{"no", "n", "nope", "nah", "false", "never"};
  for (const auto& tok : tokenize(text)) {
    if (yes.count(tok)) return true;
    if (no.count(tok)) return false;
    if (!skip.count(tok)) return std::nullopt;
  }
  return std::nullopt;
}

ProbeResponse answer_probe(AgentState& state, const Probe& probe, int episode, ModelOracle& oracle,
                           const DecodeParams& decode, std::vector<Json>& records) {
  ProbeResponse r;
  r.probe_id = probe.id;
  PromptRequest req;
  req.kind = RequestKind::Probe;
  req.episode = episode;
  req.probe = &probe;
  Observation obs = state.last_observation;
  obs.episode = episode;
  obs.remaining_budget = 0;
  obs.actions_taken.clear();
  const auto prompt = assemble_prompt(state, obs, req);
  try {
    const auto c = oracle.complete(prompt, decode);
    records.push_back(oracle_record(state, verb_of(prompt), episode, prompt, c));
    r.raw = c.text;
  } catch (const OracleError& e) {
    if (!e.transient()) throw;
    records.push_back({{"type", "oracle_error"}, {"episode", episode}, {"agent", state.spec.id},
                       {"probe", probe.id}, {"message", e.what()}});
  }
  if (probe.type == AnswerType::YesNo) {
    if (auto b = parse_yes_no(r.raw)) r.value = *b ? 1.0 : 0.0;
  } else if (auto v = parse_scale_answer(r.raw)) {
    r.value = *v;
  }
  Json rec{{"type", "probe"}, {"episode", episode}, {"agent", state.spec.id}, {"probe", probe.id},
           {"answer_type", to_string(probe.type)}, {"raw", r.raw}, {"missing", r.missing()}};
  rec["value"] = r.value ? Json(*r.value) : Json(nullptr);
  records.push_back(rec);
  return r;
}

void consolidate_memory(AgentState& state, int episode, ModelOracle& oracle, const DecodeParams& decode,
                        std::vector<Json>& records) {
  std::string content = "Episode " + std::to_string(episode) + ". Saw:";
  if (state.last_observation.items.empty()) content += " nothing";
  for (const auto& it : state.last_observation.items) content += " " + clip(render_item(it), 80) + ";";
  content += " Did:";
  if (state.episode_actions.empty()) content += " nothing";
  for (const auto& a : state.episode_actions) content += " " + clip(a, 80) + ";";
  state.episode_actions.clear();

  auto& m = state.memory;
  Json rec{{"type", "consolidation"}, {"episode", episode}, {"agent", state.spec.id},
           {"memory", to_string(m.config.kind)}};
  if (m.config.kind == MemoryKind::List) {
    m.records.push_back({episode, content});
    rec["records"] = m.records.size();
    records.push_back(rec);
    return;
  }
  m.short_term.push_back({episode, content});
  if (static_cast<int>(m.short_term.size()) >= m.config.window) {
    const auto prompt = assemble_prompt(state, state.last_observation,
                                        PromptRequest{RequestKind::Consolidate, episode, 0, nullptr, {}, {}, nullptr});
    try {
      const auto c = oracle.complete(prompt, decode);
      records.push_back(oracle_record(state, verb_of(prompt), episode, prompt, c));
      rec["previous_summary_digest"] = short_digest(m.long_term);
      m.long_term = c.text;
      m.short_term.clear();
      rec["consolidated"] = true;
    } catch (const OracleError& e) {
      if (!e.transient()) throw;
      // keep the newest records for the next attempt
      while (static_cast<int>(m.short_term.size()) > m.config.window) m.short_term.erase(m.short_term.begin());
      rec["consolidated"] = false;
      rec["error"] = e.what();
    }
  }
  rec["short_term"] = m.short_term.size();
  records.push_back(rec);
}

}  // namespace socsim
