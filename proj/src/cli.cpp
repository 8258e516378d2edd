#include "uniregret/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "uniregret/batch.hpp"
#include "uniregret/io.hpp"
#include "uniregret/predictor.hpp"
#include "uniregret/randomized.hpp"
#include "uniregret/rng.hpp"

namespace uniregret::cli {

namespace {

bool source_is_stochastic(const ExperimentConfig& cfg) {
  return cfg.input.empty() && (cfg.source == "randomwalk" || cfg.source == "adversarial");
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw UsageError("--seed is required for stochastic commands and sources");
  return *cfg.seed;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_text_file(path, content);
  }
}

std::string svg_path(const ExperimentConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("--svg needs --out to place the chart next to the CSV");
  return std::filesystem::path(cfg.out).replace_extension(".svg").string();
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("bad " + what + " '" + s + "'");
  }
  if (pos != s.size() || v < 0) throw UsageError("bad " + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<Monomial> parse_monomials(const std::string& text) {
  std::vector<Monomial> monos;
  std::stringstream all(text);
  std::string mono_text;
  while (std::getline(all, mono_text, '/')) {
    Monomial mono;
    std::stringstream factors(mono_text);
    std::string factor;
    while (std::getline(factors, factor, ',')) {
      const auto colon = factor.find(':');
      if (colon == std::string::npos) throw UsageError("monomial factor '" + factor + "' is not lag:exponent");
      const auto lag = parse_size(factor.substr(0, colon), "monomial lag");
      const auto exp = parse_size(factor.substr(colon + 1), "monomial exponent");
      mono.push_back({static_cast<int>(lag), static_cast<int>(exp)});
    }
    if (mono.empty()) throw UsageError("empty monomial in '" + text + "'");
    monos.push_back(std::move(mono));
  }
  if (monos.empty()) throw UsageError("--monomial needs at least one monomial");
  return monos;
}

FeatureSpec feature_spec_from(const ExperimentConfig& cfg) {
  if (cfg.feature_class == "linear") return FeatureSpec::linear_lag(cfg.k, cfg.m);
  if (cfg.feature_class == "univar") return FeatureSpec::univariate_poly(cfg.m);
  if (cfg.feature_class == "monomial") {
    if (cfg.monomials.empty()) throw UsageError("--class monomial needs --monomial");
    return FeatureSpec::multivariate(parse_monomials(cfg.monomials));
  }
  throw UsageError("unknown --class '" + cfg.feature_class + "' (univar|monomial|linear)");
}

AdversarySpec adversary_from(const ExperimentConfig& cfg, std::size_t n) {
  const auto seed = require_seed(cfg);
  if (cfg.feature_class == "monomial") {
    const auto monos = parse_monomials(cfg.monomials);
    return AdversarySpec::sign_flip_monomial(monos.front(), cfg.beta_C, cfg.bound_A, n, seed);
  }
  return AdversarySpec::sign_flip_lag(cfg.k, cfg.beta_C, cfg.bound_A, n, seed);
}

SequenceD build_sequence(const ExperimentConfig& cfg, std::size_t n) {
  if (!cfg.input.empty() || cfg.source == "file") {
    if (cfg.input.empty()) throw UsageError("--source file needs --input");
    return read_sequence_file(cfg.input);
  }
  const double a = cfg.bound_A;
  std::vector<double> x(n, 0.0);
  if (cfg.source == "zero") return SequenceD(std::move(x), a);
  if (cfg.source == "sinusoid") {
    if (!(cfg.period > 0.0)) throw UsageError("--period must be > 0");
    for (std::size_t t = 1; t <= n; ++t) {
      x[t - 1] = std::clamp(a * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / cfg.period), -a, a);
    }
    return SequenceD(std::move(x), a);
  }
  if (cfg.source == "randomwalk") {
    Rng rng(derive_seed(require_seed(cfg), 0));
    double v = 0.0;
    for (auto& xt : x) {
      v = std::clamp(v + cfg.walk_step * a * rng.normal(), -a, a);
      xt = v;
    }
    return SequenceD(std::move(x), a);
  }
  if (cfg.source == "adversarial") {
    const auto spec = adversary_from(cfg, n);
    Rng rng(derive_seed(spec.seed, 0));
    const double theta = sample_theta(spec.beta_C, rng);
    return generate(spec, theta, rng);
  }
  throw UsageError("unknown --source '" + cfg.source + "'");
}

std::vector<std::size_t> resolve_grid(const ExperimentConfig& cfg, std::size_t default_n) {
  if (!cfg.n_grid.empty()) return cfg.n_grid;
  const std::size_t top = cfg.n.value_or(default_n);
  if (top < 128) return {top};
  std::vector<std::size_t> grid;
  for (std::size_t v = 128; v <= top; v *= 2) grid.push_back(v);
  return grid;
}

int cmd_regret(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto spec = feature_spec_from(cfg);
  const auto seq = build_sequence(cfg, cfg.n.value_or(1024));
  const auto online = run_online(spec, seq, cfg.delta, cfg.clip);
  const auto report = regret_report(spec, seq, cfg.delta, online);
  emit(cfg.out, std::string(kRegretCsvHeader) + "\n" + regret_csv_row(report) + "\n", out);

  if (cfg.svg) {
    // Regret against the penalized batch objective on each prefix, next to the bound.
    auto state = init<double>(spec.order_m, cfg.delta);
    double sum_sq = 0.0, seq_loss = 0.0;
    const double a2 = seq.bound() * seq.bound();
    SvgSeries regret{"regret vs ridge objective", {}, {}}, envelope{"A^2 ln det(I+R/delta)", {}, {}};
    for (std::size_t t = 1; t <= seq.size(); ++t) {
      const auto f = features(spec, seq, static_cast<std::ptrdiff_t>(t));
      const double x = seq.at(static_cast<std::ptrdiff_t>(t));
      seq_loss += online.per_step_losses[t - 1];
      sum_sq += x * x;
      state = update(std::move(state), f, x);
      const double objective = sum_sq - state.cross.dot(state.inverse * state.cross);
      regret.x.push_back(static_cast<double>(t));
      regret.y.push_back(seq_loss - objective);
      envelope.x.push_back(static_cast<double>(t));
      envelope.y.push_back(a2 * log_det_regularized(state.gram, cfg.delta));
    }
    write_text_file(svg_path(cfg), svg_line_chart("cumulative regret", "t", "loss", {regret, envelope}));
  }

  if (!report.bound_holds()) {
    err << "regret bound violated: slack " << format_real(report.bound_slack()) << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_lowerbound(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = resolve_grid(cfg, 8192);
  const auto adversary = adversary_from(cfg, grid.back());
  const auto comparator = feature_spec_from(cfg);
  const auto table = estimate_lower_bound(adversary, comparator, grid, cfg.trials.value_or(2000), cfg.threads);
  emit(cfg.out, lower_bound_csv(table), out);

  if (cfg.svg) {
    SvgSeries s{"mean regret", {}, {}};
    for (const auto& row : table.rows) {
      s.x.push_back(std::log(static_cast<double>(row.n)));
      s.y.push_back(row.mean_regret);
    }
    write_text_file(svg_path(cfg), svg_line_chart("lower-bound experiment", "ln n", "mean regret", {s}));
  }

  int status = kExitOk;
  for (const auto& row : table.rows) {
    if (row.mean_regret < -3.0 * row.std_error) {
      err << "mean regret " << format_real(row.mean_regret) << " at n=" << row.n
          << " is below -3 standard errors\n";
      status = kExitCheckFailed;
    }
  }
  return status;
}

int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto spec = feature_spec_from(cfg);
  const auto grid = resolve_grid(cfg, 1024);
  const auto full = build_sequence(cfg, grid.back());
  if (full.size() < grid.back()) throw UsageError("input sequence is shorter than the largest n");
  const bool with_bayes = cfg.input.empty() && cfg.source == "adversarial";

  std::string csv = "algorithm,n,m,class,delta,seq_loss,batch_raw,regret\n";
  int status = kExitOk;
  for (const std::size_t n : grid) {
    const auto seq = full.prefix(n);
    const double batch_raw = batch_solve(spec, seq, 0.0).loss;
    auto row = [&](const std::string& name, double loss) {
      csv += name + "," + std::to_string(n) + "," + std::to_string(spec.order_m) + "," +
             class_name(spec.kind) + "," + format_real(cfg.delta) + "," + format_real(loss) + "," +
             format_real(batch_raw) + "," + format_real(loss - batch_raw) + "\n";
    };
    const auto universal = run_online(spec, seq, cfg.delta, cfg.clip);
    row("universal", universal.cumulative_loss);
    row("lms", run_lms(spec, seq, cfg.mu).cumulative_loss);
    row("rls", run_rls(spec, seq, cfg.delta).cumulative_loss);
    if (with_bayes) {
      BayesPredictor bayes(adversary_from(cfg, n));
      const auto x = seq.values();
      double loss = 0.0;
      for (std::size_t t = 1; t <= n; ++t) {
        const double e = x[t - 1] - bayes.predict(x.first(t - 1));
        loss += e * e;
        bayes.observe(x.first(t));
      }
      row("bayes", loss);
    }
    const auto report = regret_report(spec, seq, cfg.delta, universal);
    if (!report.bound_holds()) {
      err << "universal predictor violates its regret bound at n=" << n << "\n";
      status = kExitCheckFailed;
    }
  }
  emit(cfg.out, csv, out);
  return status;
}

namespace {

RandomizedPredictor random_mixture(const FeatureSpec& base, double bound, Rng& rng,
                                   std::uint64_t seed) {
  RandomizedPredictor rp;
  for (int j = 1; j <= 3; ++j) {
    const auto spec = FeatureSpec::linear_lag(base.lookahead_k, j);
    rp.constituents.push_back(make_universal_constituent(spec, bound, 0.5 + 1.5 * rng.uniform()));
  }
  const double phases[3] = {rng.uniform() * 6.0, rng.uniform() * 6.0, rng.uniform() * 6.0};
  rp.prob_rule = [phases0 = phases[0], phases1 = phases[1], phases2 = phases[2]](
                     std::span<const double> history, std::uint64_t s) {
    const double last = history.empty() ? 0.0 : history.back();
    const double salt = static_cast<double>(s % 1000) * 1e-3;
    const double z[3] = {std::sin(phases0 + 0.3 * static_cast<double>(history.size()) + salt),
                         std::cos(phases1 + 2.0 * last), std::sin(phases2 - last + salt)};
    double w[3], total = 0.0;
    for (int i = 0; i < 3; ++i) total += (w[i] = std::exp(z[i]));
    return std::vector<double>{w[0] / total, w[1] / total, w[2] / total};
  };
  rp.seed = seed;
  return rp;
}

std::vector<double> uniform_samples(std::size_t n, double bound, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = bound * (2.0 * rng.uniform() - 1.0);
  return x;
}

}  // namespace

int cmd_identity(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto seed = require_seed(cfg);
  const auto spec = feature_spec_from(cfg);
  if (spec.order_m != 1) throw UsageError("identity checks need a scalar feature class (--m 1)");
  const std::size_t n = cfg.n.value_or(16);
  const std::size_t instances = cfg.trials.value_or(50);
  const double a = cfg.bound_A;
  int status = kExitOk;

  std::string evidence_csv = "instance,n,h,sigma2,closed_form,sequential,quadrature,rel_err\n";
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, i));
    const SequenceD seq(uniform_samples(n, a, rng), a);
    const double h = a * a * (1.0 + 3.0 * rng.uniform());
    const double sigma2 = 0.5 + 2.0 * rng.uniform();
    const auto ev = mixture_log_evidence(spec, seq, h, sigma2);
    const double quad = mixture_log_evidence_quadrature(spec, seq, h, sigma2);
    const double rel = std::abs(ev.closed_form - quad) / std::max(std::abs(quad), 1e-300);
    evidence_csv += std::to_string(i) + "," + std::to_string(n) + "," + format_real(h) + "," +
                    format_real(sigma2) + "," + format_real(ev.closed_form) + "," +
                    format_real(ev.sequential) + "," + format_real(quad) + "," + format_real(rel) + "\n";
    if (!(rel <= 1e-4)) {
      err << "evidence instance " << i << ": closed form and quadrature differ by " << format_real(rel) << "\n";
      status = kExitCheckFailed;
    }
  }
  emit(cfg.out, evidence_csv, out);

  std::string rand_csv = std::string(kRegretCsvHeader) + ",p_rand_mc,p_rand_analytic,variance_total\n";
  const auto comparator = FeatureSpec::linear_lag(spec.lookahead_k, 3);
  for (std::size_t i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed ^ 0x5a5a5a5aULL, i));
    const SequenceD seq(uniform_samples(n, a, rng), a);
    const auto rp = random_mixture(spec, a, rng, derive_seed(seed, instances + i));
    const auto mc = run_randomized(rp, seq, cfg.mc_trials);
    const auto parts = variance_decomposition(rp, seq);
    const auto det = run_predictor(derandomize(rp), seq);
    const auto report = regret_report(comparator, seq, cfg.delta, det);
    rand_csv += regret_csv_row(report) + "," + format_real(mc.p_rand_mc) + "," +
                format_real(mc.p_rand_analytic) + "," + format_real(parts.variance_total) + "\n";
    const double gap = std::abs(det.cumulative_loss - (mc.p_rand_analytic - parts.variance_total));
    if (gap > 1e-10 || det.cumulative_loss > mc.p_rand_analytic + 1e-10) {
      err << "randomized instance " << i << ": derandomization identity off by " << format_real(gap) << "\n";
      status = kExitCheckFailed;
    }
  }
  std::string rand_path = cfg.out_rand;
  if (rand_path.empty() && !cfg.out.empty()) {
    const std::filesystem::path p(cfg.out);
    rand_path = (p.parent_path() / (p.stem().string() + "_randomized.csv")).string();
  }
  emit(rand_path, rand_csv, out);
  return status;
}

namespace {

/// key=value lines become "--key value" arguments; flags take true/false.
std::vector<std::string> config_arguments(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::string> args;
  std::stringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) throw ParseError(path + ":" + std::to_string(line_no) + ": empty key");
    if (key == "svg" || key == "clip") {
      if (value == "true" || value == "1") {
        args.push_back("--" + key);
      } else if (value != "false" && value != "0") {
        throw ParseError(path + ":" + std::to_string(line_no) + ": flag '" + key + "' takes true/false");
      }
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  CLI::App app{"Universal sequential prediction: regret bounds and lower-bound experiments", "uniregret"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::size_t n = 0, trials = 0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (" + std::string(kRngAlgorithm) + ")");
  app.add_option("--delta", cfg.delta, "ridge regularizer delta > 0");
  app.add_option("--A", cfg.bound_A, "amplitude bound A");
  app.add_option("--class", cfg.feature_class, "feature class")->check(CLI::IsMember({"univar", "monomial", "linear"}));
  app.add_option("--m", cfg.m, "feature order m");
  app.add_option("--k", cfg.k, "lookahead k");
  auto* n_opt = app.add_option("--n", n, "horizon n");
  auto* trials_opt = app.add_option("--trials", trials, "Monte-Carlo trials / instances");
  app.add_option("--out", cfg.out, "output CSV path (default stdout)");
  app.add_option("--out-rand", cfg.out_rand, "identity: CSV for the randomized-predictor rows");
  app.add_flag("--svg", cfg.svg, "also write an SVG chart next to --out");
  app.add_flag("--clip", cfg.clip, "clamp predictions to [-A, A]");
  app.add_option("--source", cfg.source, "sequence source")
      ->check(CLI::IsMember({"zero", "sinusoid", "randomwalk", "adversarial", "file"}));
  app.add_option("--input", cfg.input, "sequence file (one real per line, optional '# A=<bound>')");
  app.add_option("--monomial", cfg.monomials, "monomials as lag:exp,lag:exp/lag:exp");
  std::string grid_text;
  app.add_option("--n-grid", grid_text, "comma-separated horizons");
  app.add_option("--beta-C", cfg.beta_C, "beta(C, C) prior parameter");
  app.add_option("--mu", cfg.mu, "LMS step size");
  app.add_option("--period", cfg.period, "sinusoid period");
  app.add_option("--walk-step", cfg.walk_step, "random-walk step (in units of A)");
  app.add_option("--mc-trials", cfg.mc_trials, "identity: Monte-Carlo trials per randomized instance");
  app.add_option("--threads", cfg.threads, "lowerbound worker threads");

  for (const char* name : {"regret", "lowerbound", "compare", "identity"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("regret")->description("online universal predictor vs batch oracle on one sequence");
  app.get_subcommand("lowerbound")->description("Monte-Carlo lower-bound experiment on the beta-Markov adversary");
  app.get_subcommand("compare")->description("universal vs LMS vs RLS (vs Bayes) over a horizon grid");
  app.get_subcommand("identity")->description("mixture-evidence and derandomization identity checks");

  try {
    std::vector<std::string> args;
    for (std::size_t i = 1; i < raw_args.size(); ++i) {
      const std::string& a = raw_args[i];
      if (a == "--config") {
        if (i + 1 >= raw_args.size()) throw UsageError("--config needs a path");
        const auto extra = config_arguments(raw_args[++i]);
        args.insert(args.begin(), extra.begin(), extra.end());
      } else if (a.rfind("--config=", 0) == 0) {
        const auto extra = config_arguments(a.substr(9));
        args.insert(args.begin(), extra.begin(), extra.end());
      } else {
        args.push_back(a);
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (seed_opt->count() > 0) cfg.seed = seed;
  if (n_opt->count() > 0) cfg.n = n;
  if (trials_opt->count() > 0) cfg.trials = trials;
  try {
    std::stringstream items(grid_text);
    std::string item;
    while (std::getline(items, item, ',')) cfg.n_grid.push_back(parse_size(item, "--n-grid entry"));
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

  try {
    if (cfg.command == "regret") {
      if (source_is_stochastic(cfg)) require_seed(cfg);
      return cmd_regret(cfg, out, err);
    }
    if (cfg.command == "lowerbound") return cmd_lowerbound(cfg, out, err);
    if (cfg.command == "compare") {
      if (source_is_stochastic(cfg)) require_seed(cfg);
      return cmd_compare(cfg, out, err);
    }
    if (cfg.command == "identity") return cmd_identity(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "unknown command\n";
  return kExitUsage;
}

}  // namespace uniregret::cli
