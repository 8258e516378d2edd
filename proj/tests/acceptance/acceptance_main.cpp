// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "uniregret/adversary.hpp"
#include "uniregret/batch.hpp"
#include "uniregret/io.hpp"
#include "uniregret/randomized.hpp"
#include "uniregret/rng.hpp"

using namespace uniregret;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << detail << std::endl;
  if (!ok) ++failures;
}

std::string num(double v) { return format_real(v); }

// ---------------------------------------------------------------------------
// Criteria 1-3: bound suite

struct SuiteCase {
  std::string source;
  double A;
  std::size_t n;
  FeatureSpec spec;
  double delta;
  std::uint64_t seed;
};

SequenceD make_sequence(const SuiteCase& c) {
  Rng rng(c.seed);
  std::vector<double> x(c.n);
  if (c.source == "randomwalk") {
    const double step = c.A * (0.05 + 0.25 * rng.uniform());
    double v = c.A * (2.0 * rng.uniform() - 1.0);
    for (auto& xi : x) {
      v = std::clamp(v + step * rng.normal(), -c.A, c.A);
      xi = v;
    }
    return SequenceD(std::move(x), c.A);
  }
  if (c.source == "sinusoid") {
    const double period = 8.0 + 120.0 * rng.uniform();
    const double phase = 6.283185307179586 * rng.uniform();
    const double amp = c.A * (0.5 + 0.5 * rng.uniform());
    for (std::size_t t = 0; t < c.n; ++t) {
      x[t] = std::clamp(amp * std::sin(6.283185307179586 * double(t + 1) / period + phase), -c.A, c.A);
    }
    return SequenceD(std::move(x), c.A);
  }
  const int k = 1 + static_cast<int>(rng.next_u64() % 2);
  const double C = 0.5 + 4.5 * rng.uniform();
  const auto adv = AdversarySpec::sign_flip_lag(k, C, c.A, c.n, c.seed);
  const double theta = sample_theta(C, rng);
  return generate(adv, theta, rng);
}

std::vector<SuiteCase> suite_cases() {
  const Monomial m1{{1, 1}, {2, 1}}, m2{{1, 2}}, m3{{3, 1}};
  const auto mono = FeatureSpec::multivariate({m1, m2, m3});
  const double deltas[] = {0.1, 1.0, 4.0};
  std::vector<SuiteCase> cases;
  std::uint64_t id = 0;
  for (int rep = 0; rep < 2; ++rep) {
    for (const char* source : {"randomwalk", "sinusoid", "adversarial"}) {
      for (const double A : {0.5, 1.0, 2.0}) {
        for (std::size_t n = 128; n <= 8192; n *= 2) {
          std::vector<FeatureSpec> specs{FeatureSpec::linear_lag(1, 1), FeatureSpec::linear_lag(1, 2),
                                         FeatureSpec::linear_lag(2, 4), FeatureSpec::linear_lag(1, 8), mono};
          if (A <= 1.0) {
            for (int m = 1; m <= 4; ++m) specs.push_back(FeatureSpec::univariate_poly(m));
          }
          for (const auto& spec : specs) {
            cases.push_back({source, A, n, spec, deltas[id % 3], derive_seed(20240601, id)});
            ++id;
          }
        }
      }
    }
  }
  return cases;
}

void bound_suite() {
  const auto start = Clock::now();
  const auto cases = suite_cases();
  std::size_t bound_fail = 0, normalized = 0, simple_fail = 0, equiv_fail = 0;
  double worst_slack = 1e300, worst_equiv = 0.0;
  for (const auto& c : cases) {
    const auto seq = make_sequence(c);
    const auto run = run_online(c.spec, seq, c.delta);
    const auto rep = regret_report(c.spec, seq, c.delta, run);

    worst_slack = std::min(worst_slack, rep.bound_slack());
    if (!(rep.sequential_loss <= rep.batch_loss_ridge + rep.det_bound + kBoundSlack)) ++bound_fail;

    if (normalization_constant(c.spec, c.A) <= c.A) {
      ++normalized;
      if (!(rep.det_bound <= rep.simple_bound)) ++simple_fail;
    }

    // per-step dense solve of (R + f f^T + delta I) against the rank-1 path
    const auto m = c.spec.order_m;
    Matrix<double> gram = Matrix<double>::Zero(m, m);
    Vector<double> cross = Vector<double>::Zero(m);
    for (std::ptrdiff_t t = 1; t <= static_cast<std::ptrdiff_t>(seq.size()); ++t) {
      const Vector<double> f = features(c.spec, seq, t);
      Matrix<double> a = gram + f * f.transpose();
      a.diagonal().array() += c.delta;
      const double q = cross.dot(a.llt().solve(f));
      const double p = run.predictions[static_cast<std::size_t>(t - 1)];
      const double rel = std::abs(p - q) / std::max(std::abs(q), c.A);
      worst_equiv = std::max(worst_equiv, rel);
      if (!(rel <= 1e-8)) ++equiv_fail;
      gram.noalias() += f * f.transpose();
      cross += seq.at(t) * f;
    }
  }
  const double secs = seconds_since(start);
  report(1, cases.size() >= 500 && bound_fail == 0 && secs < 60.0,
         std::to_string(cases.size()) + " sequences, " + std::to_string(bound_fail) +
             " violations, min slack " + num(worst_slack) + ", " + num(secs) + " s (criteria 1-3)");
  report(2, normalized > 0 && simple_fail == 0,
         std::to_string(normalized) + " normalized runs, " + std::to_string(simple_fail) +
             " with det_bound > simple_bound");
  report(3, equiv_fail == 0,
         std::to_string(equiv_fail) + " steps outside 1e-8, worst scaled gap " + num(worst_equiv));
}

// ---------------------------------------------------------------------------
// Criterion 4: lower-bound experiment

void lower_bound_experiment() {
  const auto start = Clock::now();
  const auto spec = AdversarySpec::sign_flip_lag(1, 1.0, 1.0, 8192, 1);
  std::vector<std::size_t> grid;
  for (std::size_t n = 128; n <= 8192; n *= 2) grid.push_back(n);
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  const auto table = estimate_lower_bound(spec, grid, 2000, threads);
  const double secs = seconds_since(start);

  bool all_positive = true;
  std::ostringstream rows;
  for (const auto& r : table.rows) {
    all_positive = all_positive && r.mean_regret > 3.0 * r.std_error;
    rows << " n=" << r.n << ":" << num(r.mean_regret) << "+-" << num(r.std_error);
  }
  const double lo = table.slope_lower_half, hi = table.slope_upper_half;
  const bool halves = hi > 0.0 && std::abs(lo / hi - 1.0) <= 0.3;
  report(4, all_positive && table.fitted_slope_vs_ln_n > 0.0 && halves && secs < 300.0,
         "slope " + num(table.fitted_slope_vs_ln_n) + " (halves " + num(lo) + ", " + num(hi) + "), " +
             num(secs) + " s;" + rows.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: exact small-n enumeration

// E[theta^s (1 - theta)^f] under beta(C, C)
double beta_moment(int s, int f, double C) {
  double v = 1.0;
  for (int i = 0; i < s; ++i) v *= (C + i) / (2.0 * C + i);
  for (int j = 0; j < f; ++j) v *= (C + j) / (2.0 * C + s + j);
  return v;
}

// min_w sum (x - w f)^2 for a scalar feature
double scalar_batch_loss(const std::vector<double>& x, const std::vector<double>& f) {
  double sxx = 0, sxf = 0, sff = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxf += x[i] * f[i];
    sff += f[i] * f[i];
  }
  return sff > 0.0 ? sxx - sxf * sxf / sff : sxx;
}

void exhaustive_nonnegativity() {
  struct Law {
    AdversarySpec spec;
    std::function<double(const std::vector<double>&, std::size_t)> ref;  // 0-based t
  };
  std::vector<Law> laws;
  for (const double C : {0.5, 1.0, 2.0, 5.0}) {
    for (const double A : {0.5, 1.0, 2.0}) {
      for (const int k : {1, 2}) {
        laws.push_back({AdversarySpec::sign_flip_lag(k, C, A, 4, 0),
                        [k](const std::vector<double>& x, std::size_t t) {
                          return t >= std::size_t(k) ? x[t - k] : 0.0;
                        }});
      }
      laws.push_back({AdversarySpec::sign_flip_monomial({{1, 1}, {2, 1}}, C, A, 4, 0),
                      [A](const std::vector<double>& x, std::size_t t) {
                        return t >= 2 ? (x[t - 1] * x[t - 2] > 0 ? A : -A) : 0.0;
                      }});
    }
  }

  double worst = 1e300, worst_mass_err = 0.0;
  std::size_t evaluated = 0;
  for (const auto& law : laws) {
    const double A = law.spec.bound_A;
    const std::size_t mem = static_cast<std::size_t>(law.spec.memory());
    for (std::size_t n = 2; n <= 4; ++n) {
      const std::size_t free = n > mem ? n - mem : 0;
      double L = 0.0, mass = 0.0;
      for (std::size_t code = 0; code < (std::size_t(1) << free); ++code) {
        std::vector<double> x(n, A);
        int stays = 0, flips = 0;
        for (std::size_t t = mem; t < n; ++t) {
          const bool flip = (code >> (t - mem)) & 1;
          const double r = law.ref(x, t);
          x[t] = flip ? -r : r;
          flip ? ++flips : ++stays;
        }
        const double w = beta_moment(stays, flips, law.spec.beta_C);
        mass += w;

        double bayes_loss = 0.0;
        BayesPredictor bp(law.spec);
        for (std::size_t t = 0; t < n; ++t) {
          const std::span<const double> hist(x.data(), t);
          const double e = x[t] - bp.predict(hist);
          bayes_loss += e * e;
          bp.observe(std::span<const double>(x.data(), t + 1));
        }
        std::vector<double> f(n);
        for (std::size_t t = 0; t < n; ++t) {
          if (law.spec.kind == AdversaryKind::SignFlipLag) {
            f[t] = t >= std::size_t(law.spec.lag_k) ? x[t - law.spec.lag_k] : 0.0;
          } else {
            f[t] = t >= 2 ? x[t - 1] * x[t - 2] : 0.0;
          }
        }
        L += w * (bayes_loss - scalar_batch_loss(x, f));
        ++evaluated;
      }
      worst = std::min(worst, L);
      worst_mass_err = std::max(worst_mass_err, std::abs(mass - 1.0));
    }
  }
  report(5, worst >= -1e-12 && worst_mass_err <= 1e-12,
         std::to_string(laws.size()) + " laws x n in {2,3,4}, " + std::to_string(evaluated) +
             " weighted sequences, min L(n) " + num(worst) + ", mass error " + num(worst_mass_err));
}

// ---------------------------------------------------------------------------
// Criterion 6: mixture evidence against Simpson integration

double simpson_evidence(const std::vector<double>& x, const std::vector<double>& f, double h, double s2) {
  double sxx = 0, sxf = 0, sff = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxf += x[i] * f[i];
    sff += f[i] * f[i];
  }
  // log of P_beta * prior density; exact Gaussian in beta
  auto log_g = [&](double b) {
    return -(sxx - 2 * b * sxf + b * b * sff) / (2 * h) - b * b / (2 * s2) - 0.5 * std::log(2 * M_PI * s2);
  };
  const double prec = sff / h + 1.0 / s2;
  const double centre = (sxf / h) / prec, sd = 1.0 / std::sqrt(prec);
  const int N = 4000;
  const double lo = centre - 14 * sd, step = 28 * sd / N;
  const double peak = log_g(centre);
  double sum = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double w = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::exp(log_g(lo + i * step) - peak);
  }
  return -2.0 * h * (peak + std::log(sum * step / 3.0));
}

void mixture_identity() {
  Rng rng(606060);
  const std::vector<FeatureSpec> specs{FeatureSpec::linear_lag(1, 1), FeatureSpec::linear_lag(2, 1),
                                       FeatureSpec::univariate_poly(1),
                                       FeatureSpec::multivariate({Monomial{{1, 1}, {2, 1}}})};
  double worst = 0.0, worst_chain = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + rng.next_u64() % 16;
    const double A = 0.5 + 1.5 * rng.uniform();
    std::vector<double> x(n);
    for (auto& v : x) v = A * (2 * rng.uniform() - 1);
    const SequenceD seq(x, A);
    const auto& spec = specs[static_cast<std::size_t>(i) % specs.size()];
    const double h = 0.1 + 4.9 * rng.uniform();
    const double s2 = 0.1 + 4.9 * rng.uniform();
    std::vector<double> f(n);
    for (std::size_t t = 0; t < n; ++t) f[t] = features(spec, seq, std::ptrdiff_t(t + 1))(0);
    const auto ev = mixture_log_evidence(spec, seq, h, s2);
    const double q = simpson_evidence(x, f, h, s2);
    worst = std::max(worst, std::abs(ev.closed_form - q) / std::abs(q));
    worst_chain = std::max(worst_chain, std::abs(ev.sequential - ev.closed_form) / std::abs(ev.closed_form));
  }
  report(6, worst <= 1e-4 && worst_chain <= 1e-4,
         "50 instances, worst relative error vs Simpson " + num(worst) + ", chain rule " + num(worst_chain));
}

// ---------------------------------------------------------------------------
// Criterion 7: derandomization

void derandomization() {
  Rng rng(777);
  double worst_identity = 0.0;
  std::size_t order_fail = 0;
  for (int pair = 0; pair < 100; ++pair) {
    const std::size_t n = 8 + rng.next_u64() % 57;
    const double A = 0.5 + 1.5 * rng.uniform();
    std::vector<double> x(n);
    double v = 0.0;
    for (auto& xi : x) xi = v = std::clamp(0.7 * v + 0.5 * A * rng.normal(), -A, A);
    const SequenceD seq(x, A);

    const std::size_t K = 2 + rng.next_u64() % 3;
    std::vector<HistoryPredictor> cs;
    for (std::size_t k = 0; k < K; ++k) {
      switch (rng.next_u64() % 3) {
        case 0: {
          const int m = 1 + static_cast<int>(rng.next_u64() % 4);
          cs.push_back(make_universal_constituent(FeatureSpec::linear_lag(1, m), A, 0.1 + rng.uniform()));
          break;
        }
        case 1: {
          const double c = A * (2 * rng.uniform() - 1);
          cs.push_back([c](std::span<const double>) { return c; });
          break;
        }
        default: {
          const double w = 2 * rng.uniform() - 1;
          cs.push_back([w](std::span<const double> h) { return h.empty() ? 0.0 : w * h.back(); });
        }
      }
    }
    ProbabilityRule rule;
    if (rng.uniform() < 0.5) {
      std::vector<double> p(K);
      double s = 0;
      for (auto& pk : p) s += pk = rng.gamma(1.0);
      for (auto& pk : p) pk /= s;
      rule = fixed_probabilities(p);
    } else {
      const double eta = 0.1 + 3 * rng.uniform();
      rule = [cs, eta](std::span<const double> h, std::uint64_t) {
        std::vector<double> loss(cs.size(), 0.0);
        for (std::size_t t = 0; t < h.size(); ++t) {
          for (std::size_t k = 0; k < cs.size(); ++k) {
            const double e = h[t] - cs[k](h.first(t));
            loss[k] += e * e;
          }
        }
        const double lo = *std::min_element(loss.begin(), loss.end());
        std::vector<double> p(cs.size());
        double s = 0;
        for (std::size_t k = 0; k < p.size(); ++k) s += p[k] = std::exp(-eta * (loss[k] - lo));
        for (auto& pk : p) pk /= s;
        return p;
      };
    }
    const RandomizedPredictor rp{cs, rule, rng.next_u64()};
    const double det = run_predictor(derandomize(rp), seq).cumulative_loss;
    const auto run = run_randomized(rp, seq, 1);
    const auto vd = variance_decomposition(rp, seq);
    worst_identity = std::max(worst_identity, std::abs(det - (run.p_rand_analytic - vd.variance_total)));
    if (!(det <= run.p_rand_analytic)) ++order_fail;
  }
  report(7, worst_identity <= 1e-10 && order_fail == 0,
         "100 pairs, worst |det - (P_rand - Var)| " + num(worst_identity) + ", " + std::to_string(order_fail) +
             " with det > P_rand");
}

// ---------------------------------------------------------------------------
// Criterion 8: posterior mean against marginal-likelihood ratios

void posterior_mean() {
  struct Law {
    AdversarySpec spec;
    std::function<double(const std::vector<double>&, std::size_t)> ref;
  };
  std::vector<Law> laws;
  for (const double C : {0.5, 1.0, 3.0}) {
    for (const double A : {1.0, 2.0}) {
      for (const int k : {1, 2, 3}) {
        laws.push_back({AdversarySpec::sign_flip_lag(k, C, A, 12, 0),
                        [k](const std::vector<double>& x, std::size_t t) { return x[t - k]; }});
      }
      laws.push_back({AdversarySpec::sign_flip_monomial({{1, 2}, {3, 1}}, C, A, 12, 0),
                      [A](const std::vector<double>& x, std::size_t t) { return x[t - 3] > 0 ? A : -A; }});
    }
  }
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& law : laws) {
    const double A = law.spec.bound_A, C = law.spec.beta_C;
    const std::size_t mem = static_cast<std::size_t>(law.spec.memory());
    // marginal likelihood of a full +-A history under the beta(C, C) mixture
    auto marginal = [&](const std::vector<double>& x) {
      int s = 0, f = 0;
      for (std::size_t t = mem; t < x.size(); ++t) (x[t] == law.ref(x, t) ? s : f) += 1;
      return beta_moment(s, f, C);
    };
    for (std::size_t len = 0; len < 12; ++len) {
      for (std::size_t code = 0; code < (std::size_t(1) << len); ++code) {
        std::vector<double> x(len);
        for (std::size_t t = 0; t < len; ++t) x[t] = ((code >> t) & 1) ? -A : A;
        double expected = 0.0;
        if (len >= mem) {
          const double base = marginal(x);
          for (const double next : {A, -A}) {
            auto ext = x;
            ext.push_back(next);
            expected += next * marginal(ext) / base;
          }
        }
        const double got = bayes_predict(law.spec, SequenceD(x, A));
        worst = std::max(worst, std::abs(got - expected));
        ++checked;
      }
    }
  }
  report(8, worst <= 1e-12,
         std::to_string(checked) + " histories up to n = 12, worst gap " + num(worst));
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI byte-identical reruns

#ifndef UNIREGRET_CLI_PATH
#define UNIREGRET_CLI_PATH "uniregret"
#endif

void cli_reproducibility() {
  const auto dir = std::filesystem::temp_directory_path() / "uniregret_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"regret", "regret --source adversarial --seed 17 --n 4096 --m 4"},
      {"regret_file_svg", "regret --source randomwalk --seed 3 --n 2048 --class univar --m 3 --svg"},
      {"lowerbound", "lowerbound --seed 17 --trials 100 --n-grid 128,256,512,1024"},
      {"compare", "compare --source adversarial --seed 17 --n-grid 128,512,2048 --m 2"},
      {"identity", "identity --seed 17 --trials 10 --mc-trials 200"}};
  bool ok = true;
  std::size_t compared = 0;
  for (const auto& [name, args] : commands) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto out = (dir / (name + "_" + std::to_string(run) + ".csv")).string();
      const std::string cmd = std::string(UNIREGRET_CLI_PATH) + " " + args + " --out " + out + " > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (status != 0) ok = false;
      outputs[run] = read_text_file(out);
      const std::filesystem::path base(out);
      const auto rand_csv = (base.parent_path() / (base.stem().string() + "_randomized.csv")).string();
      const auto svg = std::filesystem::path(out).replace_extension(".svg").string();
      for (const auto& path : {rand_csv, svg}) {
        if (std::filesystem::exists(path)) outputs[run] += read_text_file(path);
      }
    }
    ok = ok && !outputs[0].empty() && outputs[0] == outputs[1];
    ++compared;
  }
  std::filesystem::remove_all(dir);
  report(9, ok, std::to_string(compared) + " seeded commands rerun, outputs byte-identical: " + (ok ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<const char*, void (*)()>> steps{
      {"bound suite", bound_suite},
      {"lower bound", lower_bound_experiment},
      {"enumeration", exhaustive_nonnegativity},
      {"mixture evidence", mixture_identity},
      {"derandomization", derandomization},
      {"posterior mean", posterior_mean},
      {"cli", cli_reproducibility}};
  for (const auto& [name, fn] : steps) {
    try {
      fn();
    } catch (const std::exception& e) {
      std::cout << "FAIL " << name << ": exception " << e.what() << std::endl;
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << " in "
            << num(seconds_since(start)) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
