#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socsim/event_log.hpp"
#include "socsim/opinion.hpp"

namespace socsim {

// ---------------------------------------------------------------------------
// Lexical metrics. Every one of them reads tokens through AgentCorpus, which
// runs the shared tokenizer once per post.

struct AgentCorpus {
  AgentId agent;
  std::vector<std::string> posts;                // reposts excluded
  std::vector<std::vector<std::string>> tokens;  // tokens[i] belongs to posts[i]

  static AgentCorpus from_posts(AgentId agent, std::vector<std::string> posts);
  std::size_t token_count() const;
};

using TermFrequency = std::map<std::string, int>;

TermFrequency term_frequency(const AgentCorpus& c);

std::optional<double> ttr(const AgentCorpus& c);
std::optional<double> opener_variety(const AgentCorpus& c, std::size_t prefix_len = 5);
/// Agents with fewer than two posts are left out.
std::optional<double> inter_agent_distinctiveness(const std::vector<AgentCorpus>& corpora);

/// answers[agent] = parsed values; nullopt entries are missing answers.
using ProbeAnswers = std::map<AgentId, std::vector<std::optional<double>>>;
std::optional<double> probe_diversity(const ProbeAnswers& answers);

// ---------------------------------------------------------------------------
// Stance

struct StanceProbs {
  double pro = 0.0;
  double anti = 0.0;
};

class StanceProvider {
 public:
  virtual ~StanceProvider() = default;
  /// nullopt on provider failure.
  virtual std::optional<StanceProbs> classify(const std::string& text, const std::string& claim) = 0;
};

/// Deterministic stub: claim-word overlap sets the mass, a small pro/anti
/// word table splits it.
class LexiconStance : public StanceProvider {
 public:
  std::optional<StanceProbs> classify(const std::string& text, const std::string& claim) override;
};

/// POSTs {premise, hypothesis}; expects {entail, contradict, neutral}.
class HttpStance : public StanceProvider {
 public:
  HttpStance(std::string url, double timeout_s = 30.0) : url_(std::move(url)), timeout_s_(timeout_s) {}
  std::optional<StanceProbs> classify(const std::string& text, const std::string& claim) override;

 private:
  std::string url_;
  double timeout_s_;
};

std::optional<double> stance_score(const std::string& text, const std::string& claim, StanceProvider& provider);

// ---------------------------------------------------------------------------
// Engagement

struct EngagementStats {
  int accepted = 0;
  int active_agent_episodes = 0;  // sum over episodes of the active-agent count
  double total = 0.0;             // accepted / active_agent_episodes
  std::map<std::string, int> counts;
  std::map<std::string, double> composition;
  int posts = 0;         // posts only
  int interactions = 0;  // likes + reposts + replies
  bool partial = false;
  std::map<std::pair<int, AgentId>, int> per_turn;  // (episode, agent) -> accepted
};

EngagementStats engagement_stats(const EventLog& log);

// ---------------------------------------------------------------------------
// Belief metrics

std::optional<double> polarization(const Eigen::VectorXd& beliefs);
/// Isolated nodes are skipped; a warning per node goes to `warnings`.
std::optional<double> global_disagreement(const Graph& g, const Eigen::VectorXd& beliefs,
                                          std::vector<std::string>* warnings = nullptr);
std::optional<double> nci(const Graph& g, const Eigen::VectorXd& beliefs);
std::optional<double> volatility(const BeliefTrajectory& t);

// ---------------------------------------------------------------------------
// Statistics

struct Summary {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;    // population
  double ci95 = 0.0;  // 1.96 * sample sd / sqrt(n); 0 when n < 2
};

Summary summarize(const std::vector<double>& values);

struct WilcoxonResult {
  double p = 1.0;
  double w_plus = 0.0;
  int n_used = 0;  // non-zero differences
  bool exact = true;
  std::string warning;
};

/// Two-sided paired signed-rank test. Exact for up to 20 non-zero
/// differences, normal approximation above. Throws std::invalid_argument
/// when the samples differ in length or have fewer than five pairs.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);

/// Holm step-down, returned in input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

struct PairedSample {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct AdjustedTest {
  std::string label;
  WilcoxonResult test;
  double p_adjusted = 1.0;
};

/// Wilcoxon per comparison, Holm within each family.
std::map<std::string, std::vector<AdjustedTest>> wilcoxon_holm(
    const std::map<std::string, std::vector<PairedSample>>& families);

}  // namespace socsim
