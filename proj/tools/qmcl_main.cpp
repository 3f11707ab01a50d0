// Command-line entry point: dataset generation, training, zero-shot
// evaluation, gradient checks and the multi-seed protocol.
//
// Exit codes: 0 success, 1 validation error, 2 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmcl/config.hpp"
#include "qmcl/dataset.hpp"
#include "qmcl/errors.hpp"
#include "qmcl/gradcheck_suite.hpp"
#include "qmcl/protocol.hpp"
#include "qmcl/training.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

class MetricsWriter {
 public:
  explicit MetricsWriter(const fs::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw qmcl::ConfigError("cannot write metrics to " + path.string());
  }
  void operator()(const qmcl::MetricsRecord& r) {
    out_ << r.to_line();
    out_.flush();
  }

 private:
  std::ofstream out_;
};

int cmd_gen_data(const fs::path& config_path, const fs::path& out_dir) {
  const auto config = qmcl::RunConfig::load(config_path);
  const auto manifest = qmcl::gen_synthetic_dataset(qmcl::synthetic_spec(config), out_dir);
  std::cout << "wrote " << (out_dir / "manifest.json").string() << " ("
            << manifest.train_classes.size() << " train classes, " << manifest.test_classes.size()
            << " test classes)\n";
  return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& data, const fs::path& out,
              fs::path params_out) {
  const auto config = qmcl::RunConfig::load(config_path);
  const auto dataset = qmcl::load_dataset(data);
  if (params_out.empty()) params_out = out.string() + ".params.qtns";
  MetricsWriter writer(out);
  auto result = qmcl::train(config, dataset, [&](const qmcl::MetricsRecord& r) { writer(r); });
  qmcl::save_model(params_out, result.model);
  const auto& last = result.metrics.back();
  std::cout << "epoch-0 loss " << result.initial_loss << ", final loss " << result.final_loss
            << ", top-1 " << last.top1 << ", top-5 " << last.top5 << "\n"
            << "parameters: " << params_out.string() << "\n";
  return 0;
}

int cmd_eval(const fs::path& config_path, const fs::path& data, const fs::path& params,
             const fs::path& out) {
  const auto config = qmcl::RunConfig::load(config_path);
  const auto dataset = qmcl::load_dataset(data);
  auto model = qmcl::load_model(params, config);
  const auto record = qmcl::evaluate_zero_shot(model, dataset);
  MetricsWriter writer(out);
  writer(record);
  std::cout << "top-1 " << record.top1 << ", top-5 " << record.top5 << "\n";
  return 0;
}

int cmd_gradcheck(const fs::path& config_path) {
  const auto config = qmcl::RunConfig::load(config_path);
  const auto report = qmcl::gradcheck_all(config);
  std::cout << report.summary();
  if (auto fail = report.first_failure()) {
    std::cerr << "gradient check failed: " << fail->name << " (max scaled deviation "
              << fail->max_scaled_dev << " > " << fail->tolerance << ")\n";
    return kExitNumeric;
  }
  return 0;
}

int cmd_protocol(const fs::path& config_path, const fs::path& out, fs::path metrics) {
  const auto config = qmcl::RunConfig::load(config_path);
  if (metrics.empty()) metrics = out.string() + ".metrics.jsonl";
  MetricsWriter writer(metrics);
  const auto report =
      qmcl::run_protocol(config, [&](const qmcl::MetricsRecord& r) { writer(r); });
  std::ofstream rep(out, std::ios::trunc);
  if (!rep) throw qmcl::ConfigError("cannot write report to " + out.string());
  rep << report.to_json().dump(2) << "\n";
  std::cout << "top-1 " << qmcl::format_percent(report.top1) << "  top-5 "
            << qmcl::format_percent(report.top5) << "  over " << report.runs.size() << " runs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum multimodal contrastive learning: EEG/image encoders with a simulated "
               "variational quantum layer"};
  app.require_subcommand(1);

  fs::path config, out_dir, data, out, params, metrics;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic paired EEG/image dataset");
  gen->add_option("--config", config, "RunConfig JSON")->required();
  gen->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train both encoders and emit per-epoch metrics");
  tr->add_option("--config", config, "RunConfig JSON")->required();
  tr->add_option("--data", data, "Dataset manifest JSON")->required();
  tr->add_option("--out", out, "Metrics JSON-lines output")->required();
  tr->add_option("--params", params, "Parameter file (default: <out>.params.qtns)");

  auto* ev = app.add_subcommand("eval", "Zero-shot top-1/top-5 on the held-out classes");
  ev->add_option("--config", config, "RunConfig JSON")->required();
  ev->add_option("--data", data, "Dataset manifest JSON")->required();
  ev->add_option("--params", params, "Parameter file written by train")->required();
  ev->add_option("--out", out, "Metrics JSON-lines output")->required();

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference checks of every gradient");
  gc->add_option("--config", config, "RunConfig JSON (n_qubits <= 3)")->required();

  auto* pr = app.add_subcommand("protocol", "Train/evaluate n_runs seeds and aggregate");
  pr->add_option("--config", config, "RunConfig JSON")->required();
  pr->add_option("--out", out, "Aggregate report JSON")->required();
  pr->add_option("--metrics", metrics, "Metrics stream (default: <out>.metrics.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) return cmd_gen_data(config, out_dir);
    if (*tr) return cmd_train(config, data, out, params);
    if (*ev) return cmd_eval(config, data, params, out);
    if (*gc) return cmd_gradcheck(config);
    if (*pr) return cmd_protocol(config, out, metrics);
  } catch (const qmcl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const qmcl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
