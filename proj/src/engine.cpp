#include "socsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace socsim {

std::string to_string(BudgetVerdict v) {
  switch (v) {
    case BudgetVerdict::Continue: return "continue";
    case BudgetVerdict::Deny: return "deny";
    case BudgetVerdict::Finished: return "finished";
  }
  return "?";
}

BudgetVerdict budget_step(const BudgetPolicy& policy, const TurnState& t) {
  if (t.finish_requested) return BudgetVerdict::Finished;
  if (t.spent >= policy.bound()) return t.action_pending ? BudgetVerdict::Deny : BudgetVerdict::Finished;
  return BudgetVerdict::Continue;
}

std::vector<AgentId> select_active(const ActivityPolicy& policy, const std::vector<AgentId>& roster, int episode,
                                   std::uint64_t seed) {
  if (roster.empty()) throw SimulationError("empty roster");
  switch (policy.kind) {
    case ActivityPolicy::Kind::All: return roster;
    case ActivityPolicy::Kind::FixedFraction: {
      const auto n = roster.size();
      auto take = static_cast<std::size_t>(std::ceil(policy.fraction * static_cast<double>(n) - 1e-9));
      take = std::clamp<std::size_t>(take, 1, n);
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      Rng rng(derive_seed(seed, {fnv1a64("activity"), static_cast<std::uint64_t>(episode)}));
      for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
      idx.resize(take);
      std::sort(idx.begin(), idx.end());
      std::vector<AgentId> out;
      for (auto i : idx) out.push_back(roster[i]);
      return out;
    }
    case ActivityPolicy::Kind::Scheduled: {
      if (policy.schedule.empty()) return {};
      const auto& listed = policy.schedule[static_cast<std::size_t>(episode) % policy.schedule.size()];
      for (const auto& id : listed)
        if (!std::binary_search(roster.begin(), roster.end(), id))
          throw SimulationError("activity schedule references unknown agent '" + id + "'");
      std::vector<AgentId> out;
      for (const auto& id : roster)
        if (std::find(listed.begin(), listed.end(), id) != listed.end()) out.push_back(id);
      return out;
    }
  }
  return roster;
}

namespace {

std::string describe(const IntendedAction& a) {
  switch (a.kind) {
    case ActionKind::Post: return "post: " + a.text.value_or("");
    case ActionKind::Reply: return "reply to " + a.target.value_or("") + ": " + a.text.value_or("");
    case ActionKind::Repost: return "repost " + a.target.value_or("");
    case ActionKind::Like: return "like " + a.target.value_or("");
    case ActionKind::Finish: return "finish";
  }
  return "?";
}

Json intent_json(const IntendedAction& a, int episode, int step) {
  Json j{{"type", "intent"}, {"episode", episode}, {"agent", a.agent}, {"step", step}, {"kind", to_string(a.kind)}};
  j["target"] = a.target ? Json(*a.target) : Json(nullptr);
  j["text"] = a.text ? Json(*a.text) : Json(nullptr);
  return j;
}

Json resolution_json(const ResolvedAction& r, int episode, int step, const char* stage) {
  return {{"type", "resolution"}, {"episode", episode}, {"agent", r.intent.agent}, {"step", step},
          {"kind", to_string(r.intent.kind)}, {"verdict", r.accepted ? "accepted" : "rejected"},
          {"reason", r.reason}, {"stage", stage}};
}

struct Turn {
  std::vector<Json> buffer;
  std::vector<std::pair<int, IntendedAction>> pending;  // (step, intent) awaiting commit
  int decisions = 0;
  int committed = 0;
  std::vector<std::string> committed_text;
};

// One agent's turn. With `live` set, accepted actions commit immediately
// (sequential dynamics); otherwise they queue for the commit phase.
Turn run_turn(AgentState& st, const GameMaster& view, GameMaster* live, int episode, const BudgetPolicy& policy,
              ModelOracle& oracle, const DecodeParams& decode) {
  Turn t;
  const int bound = policy.bound();
  Observation obs = view.observe(st.spec.id, episode, bound);
  for (auto& n : obs.notes) t.buffer.push_back(std::move(n));
  obs.notes.clear();
  Json refs = Json::array();
  for (const auto& it : obs.items) refs.push_back(it.ref);
  t.buffer.push_back({{"type", "observation"}, {"episode", episode}, {"agent", st.spec.id}, {"items", refs},
                      {"remaining_budget", obs.remaining_budget}, {"error", obs.error}});
  st.last_observation = obs;

  TurnState ts;
  TurnScratch scratch;
  std::string end_reason = "finished";
  for (int step = 0;; ++step) {
    ts.action_pending = false;
    if (budget_step(policy, ts) == BudgetVerdict::Finished) {
      end_reason = ts.finish_requested ? "finish" : "budget";
      break;
    }
    obs.remaining_budget = bound - ts.spent;
    auto outcome = act(st, obs, view.schema(), oracle, decode, step, t.buffer);
    if (outcome.status == ActOutcome::Status::ParseFailed) {
      end_reason = "parse_failure";
      break;
    }
    if (outcome.status == ActOutcome::Status::TransportFailed) {
      end_reason = "oracle_error";
      break;
    }
    const auto& intent = *outcome.intent;
    t.buffer.push_back(intent_json(intent, episode, step));
    if (intent.kind == ActionKind::Finish) {
      ts.finish_requested = true;
      t.buffer.push_back(resolution_json({intent, true, {}}, episode, step, "turn"));
      continue;
    }
    ts.action_pending = true;
    ResolvedAction r = view.validate(intent, bound - ts.spent, scratch);
    if (budget_step(policy, ts) == BudgetVerdict::Deny) r = {intent, false, "budget exhausted"};
    ts.spent += 1;
    t.decisions += 1;
    t.buffer.push_back(resolution_json(r, episode, step, "turn"));
    std::string line = describe(intent);
    if (!r.accepted) {
      line += " (rejected: " + r.reason + ")";
    } else if (live) {
      Json rec = live->commit(intent, episode);
      if (!rec.value("duplicate", false)) t.committed += 1;
      t.buffer.push_back(std::move(rec));
      if (intent.text) t.committed_text.push_back(*intent.text);
    } else {
      t.pending.emplace_back(step, intent);
      if (intent.kind == ActionKind::Like && intent.target) scratch.pending_likes.insert(*intent.target);
    }
    obs.actions_taken.push_back(line);
    st.episode_actions.push_back(line);
  }
  t.buffer.push_back({{"type", "turn_end"}, {"episode", episode}, {"agent", st.spec.id}, {"reason", end_reason},
                      {"decisions", t.decisions}});
  return t;
}

// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the first
// failure in index order.
template <class F>
void fan_out(std::size_t n, int workers, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(workers));
    for (std::size_t w = 0; w < count; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

DecodeParams decode_for(const ResolvedConfig& rc, const AgentSpec& a, int episode) {
  DecodeParams d;
  const auto& m = rc.config.models.at(a.model);
  d.temperature = m.temperature;
  d.max_tokens = m.max_tokens;
  d.seed = derive_seed(rc.seed, {fnv1a64(a.id), static_cast<std::uint64_t>(episode)});
  return d;
}

}  // namespace

RunResult run(const ResolvedConfig& rc, std::unique_ptr<GameMaster> world, std::vector<AgentState> agents,
              const OracleMap& oracles) {
  RunResult res;
  std::sort(agents.begin(), agents.end(), [](const AgentState& a, const AgentState& b) { return a.spec.id < b.spec.id; });
  const auto& eng = rc.config.engine;
  std::vector<AgentId> roster;
  std::map<AgentId, std::size_t> index;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    roster.push_back(agents[i].spec.id);
    index[agents[i].spec.id] = i;
  }
  const std::uint64_t activity_seed = eng.activity.seed.value_or(rc.seed);
  const auto belief_probe = rc.config.environment.opinion.belief_probe;
  auto oracle_of = [&](const AgentState& a) -> ModelOracle& { return *oracles.at(a.spec.model); };

  auto& log = res.log;
  log.append({{"type", "run_start"}, {"config_digest", rc.digest}, {"seed", rc.seed},
              {"simulation", rc.config.name}, {"scenario", rc.scenario.name},
              {"environment", rc.config.environment.component}, {"engine", eng.component},
              {"dynamics", to_string(eng.dynamics)}, {"max_steps", eng.max_steps},
              {"budget", {{"policy", to_string(eng.budget.kind)}, {"bound", eng.budget.bound()}}},
              {"agents", roster}});
  const Json init = world->init_record();
  log.append(init);
  if (init.contains("beliefs"))
    for (std::size_t i = 0; i < init["agents"].size(); ++i) {
      auto it = index.find(init["agents"][i].get<std::string>());
      if (it != index.end()) agents[it->second].last.belief = init["beliefs"][i].get<double>();
    }

  bool aborted = false;
  try {
    for (int e = 0; e < eng.max_steps; ++e) {
      if (eng.abort_at_episode && *eng.abort_at_episode == e) {
        log.append({{"type", "run_error"}, {"episode", e}, {"message", "abort injected"}});
        aborted = true;
        res.error = "abort injected at episode " + std::to_string(e);
        break;
      }
      EpisodeRecord rec;
      rec.episode = e;
      rec.active = select_active(eng.activity, roster, e, activity_seed);
      log.append({{"type", "episode_start"}, {"episode", e}, {"active", rec.active}});
      for (auto& r : world->begin_episode(e)) log.append(std::move(r));

      std::vector<std::size_t> active_idx;
      for (const auto& id : rec.active) active_idx.push_back(index.at(id));
      std::vector<Turn> turns(active_idx.size());

      if (eng.dynamics == Dynamics::Sequential) {
        for (std::size_t k = 0; k < active_idx.size(); ++k) {
          auto& st = agents[active_idx[k]];
          turns[k] = run_turn(st, *world, world.get(), e, eng.budget, oracle_of(st), decode_for(rc, st.spec, e));
          log.append_all(turns[k].buffer);
          if (turns[k].committed > 0) rec.commit_order.push_back(st.spec.id);
          if (!turns[k].committed_text.empty()) st.last.opinion = turns[k].committed_text.back();
        }
      } else {
        const auto snapshot = world->clone();
        const int workers = eng.dynamics == Dynamics::Parallel ? eng.parallelism : 1;
        fan_out(active_idx.size(), workers, [&](std::size_t k) {
          auto& st = agents[active_idx[k]];
          turns[k] = run_turn(st, *snapshot, nullptr, e, eng.budget, oracle_of(st), decode_for(rc, st.spec, e));
        });
        for (auto& t : turns) log.append_all(t.buffer);
        // serialized commits, ascending agent id
        for (std::size_t k = 0; k < active_idx.size(); ++k) {
          auto& st = agents[active_idx[k]];
          for (const auto& [step, intent] : turns[k].pending) {
            ResolvedAction r = world->validate(intent, 1, TurnScratch{});
            if (!r.accepted) {
              log.append(resolution_json(r, e, step, "commit"));
              continue;
            }
            Json crec = world->commit(intent, e);
            if (!crec.value("duplicate", false)) turns[k].committed += 1;
            log.append(std::move(crec));
            if (intent.text) st.last.opinion = *intent.text;
          }
          if (turns[k].committed > 0) rec.commit_order.push_back(st.spec.id);
        }
      }
      for (std::size_t k = 0; k < active_idx.size(); ++k) {
        const auto& id = agents[active_idx[k]].spec.id;
        rec.action_counts[id] = turns[k].committed;
        rec.decisions[id] = turns[k].decisions;
      }

      // probes for every roster agent, after commits
      std::vector<const Probe*> due;
      for (const auto& p : rc.config.evaluation.probes)
        if (p.schedule == ProbeSchedule::PerEpisode || e == eng.max_steps - 1) due.push_back(&p);
      if (!due.empty()) {
        std::vector<std::vector<Json>> pbuf(agents.size());
        std::vector<std::vector<ProbeResponse>> answers(agents.size());
        const int workers = eng.dynamics == Dynamics::Parallel ? eng.parallelism : 1;
        fan_out(agents.size(), workers, [&](std::size_t i) {
          auto& st = agents[i];
          for (const auto* p : due)
            answers[i].push_back(answer_probe(st, *p, e, oracle_of(st), decode_for(rc, st.spec, e), pbuf[i]));
        });
        for (std::size_t i = 0; i < agents.size(); ++i) {
          log.append_all(pbuf[i]);
          auto& st = agents[i];
          for (std::size_t j = 0; j < due.size(); ++j) {
            const auto& ans = answers[i][j];
            rec.probes.push_back({{"agent", st.spec.id}, {"probe", ans.probe_id},
                                  {"value", ans.value ? Json(*ans.value) : Json(nullptr)}});
            for (auto& r : world->after_probe(st.spec.id, *due[j], ans.raw, e)) {
              if (r.value("type", "") == "belief") st.last.belief = r["value"].get<double>();
              log.append(std::move(r));
            }
            if (due[j]->id == belief_probe && rc.config.environment.component != "opinion_graph" && ans.value)
              st.last.belief = *ans.value;
          }
        }
      }

      // memory
      {
        std::vector<std::vector<Json>> mbuf(agents.size());
        const int workers = eng.dynamics == Dynamics::Parallel ? eng.parallelism : 1;
        fan_out(agents.size(), workers, [&](std::size_t i) {
          auto& st = agents[i];
          consolidate_memory(st, e, oracle_of(st), decode_for(rc, st.spec, e), mbuf[i]);
        });
        for (auto& b : mbuf) log.append_all(b);
      }

      world->end_episode(e);
      rec.world_digest = world->digest();
      log.append({{"type", "episode_end"}, {"episode", e}, {"active", rec.active},
                  {"action_counts", rec.action_counts}, {"decisions", rec.decisions},
                  {"commit_order", rec.commit_order}, {"world_digest", rec.world_digest}});
      res.episodes.push_back(std::move(rec));
    }
  } catch (const OracleError& ex) {
    aborted = true;
    res.error = std::string("oracle failure: ") + ex.what();
    log.append({{"type", "run_error"}, {"message", res.error}});
  } catch (const SimulationError& ex) {
    aborted = true;
    res.error = ex.what();
    log.append({{"type", "run_error"}, {"message", res.error}});
  }

  res.complete = !aborted;
  log.append({{"type", "run_end"}, {"complete", res.complete}, {"episodes", res.episodes.size()},
              {"final_digest", world->digest()}});
  res.world = std::move(world);
  res.agents = std::move(agents);
  return res;
}

OracleMap make_oracles(const ResolvedConfig& rc) {
  OracleMap m;
  for (const auto& a : rc.config.agents)
    if (!m.count(a.model)) m[a.model] = make_oracle(rc.config.models.at(a.model));
  return m;
}

RunResult run_simulation(const ResolvedConfig& rc) { return run_simulation(rc, make_oracles(rc)); }

RunResult run_simulation(const ResolvedConfig& rc, const OracleMap& oracles) {
  auto world = make_game_master(rc);
  std::vector<AgentState> agents;
  for (const auto& spec : rc.config.agents) {
    std::vector<std::string> seeds;
    auto it = rc.scenario.initialization.memory_seeds.find(spec.id);
    if (it != rc.scenario.initialization.memory_seeds.end()) seeds = it->second;
    agents.push_back(make_agent_state(spec, seeds));
  }
  return run(rc, std::move(world), std::move(agents), oracles);
}

RunOutputs collect_outputs(const RunResult& r) {
  RunOutputs out;
  out.events = r.log;
  std::string transcripts, answers;
  for (const auto& rec : r.log.records()) {
    const auto type = rec.value("type", std::string());
    if (type == "oracle") transcripts += rec.dump() + "\n";
    else if (type == "probe") answers += rec.dump() + "\n";
  }
  out.probe_files["transcripts.jsonl"] = transcripts;
  out.probe_files["answers.jsonl"] = answers;
  if (r.world) out.extra_files = r.world->exports();
  return out;
}

}  // namespace socsim
