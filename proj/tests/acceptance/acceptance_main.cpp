// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmcl/config.hpp"
#include "qmcl/contrastive.hpp"
#include "qmcl/dataset.hpp"
#include "qmcl/gradcheck_suite.hpp"
#include "qmcl/protocol.hpp"
#include "qmcl/statevector.hpp"
#include "qmcl/training.hpp"
#include "qmcl/vqc.hpp"

namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr double kOracleTol = 1e-10;
constexpr double kOracleSeconds = 10.0;
constexpr double kForwardTol = 1e-12;
constexpr double kShiftTol = 1e-10;
constexpr double kGradSuiteSeconds = 120.0;
constexpr double kLossTol = 1e-12;
constexpr double kLossRatio = 0.5;
constexpr double kMinTop1 = 3.0 / 8.0;
constexpr double kLearningSeconds = 600.0;
constexpr double kChanceSigmas = 3.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> length(1, 12);
  std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
  double worst = 0.0;
  int sequences = 0;
  for (int n = 1; n <= 4; ++n) {
    std::uniform_int_distribution<int> qubit(0, n - 1);
    for (int trial = 0; trial < 100; ++trial, ++sequences) {
      std::vector<qmcl::GateOp> ops;
      const std::size_t len = length(rng);
      for (std::size_t k = 0; k < len; ++k) {
        if (n > 1 && rng() % 3 == 0) {
          const int c = qubit(rng);
          int t = qubit(rng);
          while (t == c) t = qubit(rng);
          ops.push_back(qmcl::GateOp::cnot(c, t));
        } else {
          ops.push_back(qmcl::GateOp::ry(qubit(rng), angle(rng)));
        }
      }
      qmcl::StateVector s(n);
      qmcl::apply_gates(s, ops);
      std::vector<qmcl::Complex> e0(std::size_t{1} << n, 0.0);
      e0[0] = 1.0;
      const auto want = qmcl::dense_unitary_oracle(ops, n).apply(e0);
      for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(want[i] - s[i]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kOracleTol && secs < kOracleSeconds,
          fmt("%d sequences, max |dev| %.2e (tol %.0e), %.3f s (limit %.0f s)", sequences, worst,
              kOracleTol, secs, kOracleSeconds)};
}

Outcome vqc_analytic() {
  double fwd = 0.0, grad = 0.0;
  auto p = qmcl::QuantumLayerParams::zeros(1, 1);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double x = -std::numbers::pi + 2 * std::numbers::pi * i / 9.0;
      const double w = -std::numbers::pi + 2 * std::numbers::pi * j / 9.0;
      p.weight(0, 0) = w;
      const std::vector<double> xs = {x};
      fwd = std::max(fwd, std::abs(qmcl::vqc_forward(xs, p)[0] - std::cos(x + w)));
      const auto g = qmcl::vqc_parameter_shift_grad(xs, p);
      grad = std::max(grad, std::abs(g.dw(0, 0, 0) + std::sin(x + w)));
      grad = std::max(grad, std::abs(g.dx(0, 0) + std::sin(x + w)));
    }
  }
  return {fwd <= kForwardTol && grad <= kShiftTol,
          fmt("100-point grid, forward dev %.2e (tol %.0e), shift-rule dev %.2e (tol %.0e)", fwd,
              kForwardTol, grad, kShiftTol)};
}

Outcome gradient_suite(const std::string& cli, const fs::path& work, const fs::path& config) {
  const auto t0 = Clock::now();
  const auto report = qmcl::gradcheck_all(qmcl::RunConfig::load(config));
  const int code = run_cli(cli, "gradcheck --config \"" + config.string() + "\"", work / "gradcheck.log");
  const double secs = seconds_since(t0);
  std::string worst = "-";
  double worst_dev = -1.0;
  for (const auto& r : report.results) {
    const double rel = r.max_scaled_dev / r.tolerance;
    if (rel > worst_dev) {
      worst_dev = rel;
      worst = r.name;
    }
  }
  std::string failing;
  if (auto f = report.first_failure()) failing = ", first failure " + f->name;
  return {report.all_pass() && code == 0 && secs < kGradSuiteSeconds,
          fmt("%zu checks, closest to tolerance %s at %.1e of tol%s; CLI exit %d; %.2f s (limit %.0f s)",
              report.results.size(), worst.c_str(), worst_dev, failing.c_str(), code, secs,
              kGradSuiteSeconds)};
}

Outcome loss_identities() {
  double uniform = 0.0;
  for (std::size_t b : {2u, 4u, 16u})
    for (double v : {0.0, 0.7, -3.0, 14.2857})
      uniform = std::max(uniform, std::abs(qmcl::clip_loss_value(qmcl::Tensor({b, b}, v)) -
                                           std::log(static_cast<double>(b))));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 5.0);
  bool symmetric = true;
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t b = 1 + draw % 16;
    qmcl::Tensor l({b, b}), lt({b, b});
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t c = 0; c < b; ++c) lt.at(c, r) = l.at(r, c) = g(rng);
    symmetric = symmetric && qmcl::clip_loss_value(l) == qmcl::clip_loss_value(lt);
  }

  const double single = qmcl::clip_loss_value(qmcl::Tensor({1, 1}, {2.5}));

  qmcl::Tensor m({4, 4}, 0.0);
  for (std::size_t i = 0; i < 4; ++i) m.at(i, i) = 2.0;
  const double closed = std::abs(qmcl::clip_loss_value(m) - (std::log(std::exp(2.0) + 3.0) - 2.0));

  return {uniform <= kLossTol && symmetric && single == 0.0 && closed <= kLossTol,
          fmt("uniform ln B dev %.2e, transpose exact %s, B=1 loss %g, closed-form dev %.2e (tol %.0e)",
              uniform, symmetric ? "yes" : "no", single, closed, kLossTol)};
}

Outcome hyperparameters(const fs::path& work) {
  const qmcl::RunConfig defaults;
  defaults.save(work / "default_config.json");
  const auto j = nlohmann::json::parse(slurp(work / "default_config.json"));
  const qmcl::RunConfig back = qmcl::RunConfig::load(work / "default_config.json");
  const bool literal = j.at("n_qubits") == 10 && j.at("n_layers") == 4 && j.at("lr") == 0.0002 &&
                       j.at("beta1") == 0.5 && j.at("beta2") == 0.999 && j.at("epochs") == 200 &&
                       j.at("n_runs") == 5 &&
                       std::abs(j.at("tau_init").get<double>() - 2.6593) < 5e-5 &&
                       j.at("tau_init").get<double>() == std::log(1.0 / 0.07);
  const bool round_trip = back.to_json() == defaults.to_json();
  const auto o = back.adam();
  const bool optimiser = o.lr == 0.0002 && o.beta1 == 0.5 && o.beta2 == 0.999;
  return {literal && round_trip && optimiser,
          fmt("serialized n_qubits=%d n_layers=%d lr=%g beta1=%g beta2=%g epochs=%d tau_init=%.4f "
              "n_runs=%d; round trip %s",
              j.at("n_qubits").get<int>(), j.at("n_layers").get<int>(), j.at("lr").get<double>(),
              j.at("beta1").get<double>(), j.at("beta2").get<double>(), j.at("epochs").get<int>(),
              j.at("tau_init").get<double>(), j.at("n_runs").get<int>(),
              round_trip ? "exact" : "differs")};
}

bool is_learning_setup(const qmcl::RunConfig& c) {
  return c.n_train_classes == 16 && c.n_test_classes == 8 && c.samples_per_class == 20 &&
         c.E == 8 && c.T == 64 && c.n_qubits == 4 && c.n_layers == 2 && c.noise_sigma == 0.3 &&
         c.batch_size == 32 && c.epochs <= 100 && c.n_runs == 5 && c.manifest_path.empty();
}

Outcome learning_signal(const qmcl::RunConfig& c, const qmcl::Dataset& data) {
  if (!is_learning_setup(c)) return {false, "acceptance config does not match the required setup"};
  const auto t0 = Clock::now();
  const auto report = qmcl::run_protocol(c, data);
  const double secs = seconds_since(t0);
  bool losses = true;
  std::string per_run;
  for (const auto& r : report.runs) {
    const double ratio = r.final_loss / r.initial_loss;
    losses = losses && ratio < kLossRatio;
    per_run += fmt(" [seed %llu: loss %.3f->%.3f (%.0f%%), top-1 %.3f]",
                   static_cast<unsigned long long>(r.seed), r.initial_loss, r.final_loss,
                   100 * ratio, r.top1);
  }
  return {losses && report.top1.mean >= kMinTop1 && secs < kLearningSeconds,
          fmt("mean top-1 %.3f (need >= %.3f), top-1 %s, top-5 %s, %.1f s (limit %.0f s);",
              report.top1.mean, kMinTop1, qmcl::format_percent(report.top1).c_str(),
              qmcl::format_percent(report.top5).c_str(), secs, kLearningSeconds) +
              per_run};
}

// Pooled over the random initialisations the protocol trains from.
Outcome chance_level(const qmcl::RunConfig& c, const qmcl::Dataset& data) {
  std::size_t hits = 0, queries = 0;
  std::string per_seed;
  for (int r = 0; r < c.n_runs; ++r) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(r);
    auto model = qmcl::Model::init(c, seed);
    const auto s = qmcl::score_zero_shot(model, data);
    const double top1 = qmcl::topk_accuracy(s.scores, s.truth, 1);
    hits += static_cast<std::size_t>(std::lround(top1 * static_cast<double>(s.truth.size())));
    queries += s.truth.size();
    per_seed += fmt(" %.3f", top1);
  }
  const double p = 1.0 / static_cast<double>(data.test_classes.size());
  const double acc = static_cast<double>(hits) / static_cast<double>(queries);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(queries));
  return {std::abs(acc - p) <= kChanceSigmas * se,
          fmt("pooled top-1 %.4f over %zu queries, chance %.4f, SE %.4f, |dev| = %.2f SE (limit %.0f); "
              "per-seed:",
              acc, queries, p, se, std::abs(acc - p) / se, kChanceSigmas) +
              per_seed};
}

Outcome determinism(const std::string& cli, const fs::path& work, const fs::path& config) {
  const fs::path data = work / "data";
  if (run_cli(cli, "gen-data --config \"" + config.string() + "\" --out-dir \"" + data.string() + "\"",
              work / "gen.log") != 0) {
    return {false, "gen-data failed"};
  }
  const fs::path manifest = data / "manifest.json";
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = work / ("metrics_" + std::to_string(i) + ".jsonl");
    codes[i] = run_cli(cli,
                       "train --config \"" + config.string() + "\" --data \"" + manifest.string() +
                           "\" --out \"" + out.string() + "\"",
                       work / ("train_" + std::to_string(i) + ".log"));
  }
  const std::string a = slurp(work / "metrics_0.jsonl");
  const std::string b = slurp(work / "metrics_1.jsonl");
  const std::size_t lines = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
  const bool same_params =
      slurp(work / "metrics_0.jsonl.params.qtns") == slurp(work / "metrics_1.jsonl.params.qtns");
  return {codes[0] == 0 && codes[1] == 0 && !a.empty() && a == b && same_params,
          fmt("two CLI train runs: exit %d/%d, %zu records, %zu bytes, metrics %s, parameters %s",
              codes[0], codes[1], lines, a.size(), a == b ? "identical" : "DIFFER",
              same_params ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  fs::path work = fs::temp_directory_path() / "qmcl_acceptance";
  fs::path configs = fs::path(QMCL_SOURCE_DIR) / "configs";
  app.add_option("--cli", cli, "qmcl executable")->required();
  app.add_option("--work-dir", work, "Scratch directory");
  app.add_option("--configs", configs, "Directory holding acceptance.json and gradcheck.json");
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);

  const fs::path learning_config = configs / "acceptance.json";
  const qmcl::RunConfig config = qmcl::RunConfig::load(learning_config);
  const qmcl::Dataset data = qmcl::dataset_for(config);

  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "statevector matches dense oracle", oracle_equivalence},
      {"AC2", "single-qubit VQC analytic case", vqc_analytic},
      {"AC3", "gradient suite",
       [&] { return gradient_suite(cli, work, configs / "gradcheck.json"); }},
      {"AC4", "clip loss identities", loss_identities},
      {"AC5", "default hyperparameters", [&] { return hyperparameters(work); }},
      {"AC6", "desk-scale learning signal", [&] { return learning_signal(config, data); }},
      {"AC7", "untrained model at chance", [&] { return chance_level(config, data); }},
      {"AC8", "byte-identical metrics stream",
       [&] { return determinism(cli, work, learning_config); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
