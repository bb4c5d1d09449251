#pragma once

// Shared helpers for the unit tests and the acceptance binary: a small
// random-instance generator and brute-force reference implementations that
// share no code with the library beyond its data types.

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "socsim/config.hpp"
#include "socsim/evaluation.hpp"
#include "socsim/opinion.hpp"
#include "socsim/social.hpp"

namespace tsupport {

// std::mt19937_64 is fully specified; the distributions are not, so draws
// are made by hand.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  int integer(int lo, int hi);  // inclusive
  double real(double lo, double hi);
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

  /// Post text over a small vocabulary, with random case and punctuation so
  /// that tokenization matters.
  std::string text(int min_words, int max_words);

 private:
  std::mt19937_64 eng_;
};

std::filesystem::path data_dir();
std::filesystem::path golden_dir();
/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);
std::string read_file(const std::filesystem::path& p);

/// Config from YAML text; relative fixture paths resolve against data/configs.
socsim::SimulationConfig config_from_yaml(const std::string& yaml);
socsim::SimulationConfig data_config(const std::string& name);

// ---------------------------------------------------------------------------
// Reference implementations

std::vector<std::string> ref_tokenize(const std::string& text);

struct RefCorpus {
  std::string agent;
  std::vector<std::string> posts;
};

std::optional<double> ref_ttr(const RefCorpus& c);
std::optional<double> ref_opener_variety(const RefCorpus& c, std::size_t prefix = 5);
std::optional<double> ref_distinctiveness(const std::vector<RefCorpus>& cs);
std::optional<double> ref_probe_diversity(const socsim::ProbeAnswers& a);

struct RefGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // any order, may repeat
};

std::optional<double> ref_polarization(const std::vector<double>& b);
std::optional<double> ref_global_disagreement(const RefGraph& g, const std::vector<double>& b);
std::optional<double> ref_nci(const RefGraph& g, const std::vector<double>& b);
std::optional<double> ref_volatility(const std::vector<std::vector<double>>& snapshots);

/// Two-sided exact p by enumerating all 2^n sign patterns over midranks.
double ref_wilcoxon_exact_p(const std::vector<double>& x, const std::vector<double>& y);
/// Step-down written out position by position.
std::vector<double> ref_holm(const std::vector<double>& p);

std::vector<socsim::PostId> ref_chronological(const socsim::SocialState& s, const socsim::AgentId& agent, int k);
std::vector<socsim::PostId> ref_recommender(const socsim::SocialState& s, const socsim::AgentId& agent, int k,
                                            int dim, const std::string& persona);

/// Random social world: agents a0.., streams s0.., random follows, posts,
/// reposts, replies and likes. Texts repeat on purpose to produce ties.
socsim::SocialState random_social_state(Gen& g);

socsim::Graph to_graph(const RefGraph& g);
Eigen::VectorXd to_vector(const std::vector<double>& v);

}  // namespace tsupport
