#ifndef UNIREGRET_CLI_HPP
#define UNIREGRET_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "uniregret/adversary.hpp"
#include "uniregret/sequence.hpp"

namespace uniregret::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Flat parameter set shared by all subcommands; unset values fall back to
/// per-command defaults.
struct ExperimentConfig {
  std::string command;
  std::optional<std::uint64_t> seed;
  double delta = 1.0;
  double bound_A = 1.0;
  std::string feature_class = "linear";
  int m = 1;
  int k = 1;
  std::optional<std::size_t> n;
  std::optional<std::size_t> trials;
  std::string out;
  std::string out_rand;
  bool svg = false;
  bool clip = false;

  std::string source = "sinusoid";
  std::string input;
  std::string monomials;
  std::vector<std::size_t> n_grid;
  double beta_C = 1.0;
  double mu = 0.05;
  double period = 32.0;
  double walk_step = 0.1;
  std::size_t mc_trials = 1000;
  unsigned threads = 1;
};

/// Parses "lag:exp,lag:exp/lag:exp" into monomials separated by '/'.
std::vector<Monomial> parse_monomials(const std::string& text);

FeatureSpec feature_spec_from(const ExperimentConfig& cfg);

/// Sequence of length n from the configured source (zero, sinusoid,
/// randomwalk, adversarial, file).
SequenceD build_sequence(const ExperimentConfig& cfg, std::size_t n);

AdversarySpec adversary_from(const ExperimentConfig& cfg, std::size_t n);

/// n_grid if given, else powers of two from 128 up to n.
std::vector<std::size_t> resolve_grid(const ExperimentConfig& cfg, std::size_t default_n);

int cmd_regret(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_lowerbound(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_identity(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Full front end: flags, optional --config file (flags override it),
/// dispatch and exit-code mapping.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uniregret::cli

#endif  // UNIREGRET_CLI_HPP
