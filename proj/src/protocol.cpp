#include "qmcl/protocol.hpp"

#include <cmath>
#include <cstdio>

#include "qmcl/errors.hpp"

namespace qmcl {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mean_std of an empty sequence");
  MeanStd m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::string format_percent(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f ± %.1f%%", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

nlohmann::ordered_json ProtocolReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_runs"] = runs.size();
  j["top1_mean"] = top1.mean;
  j["top1_std"] = top1.std;
  j["top5_mean"] = top5.mean;
  j["top5_std"] = top5.std;
  j["top1"] = format_percent(top1);
  j["top5"] = format_percent(top5);
  auto& arr = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    arr.push_back({{"run_id", r.run_id},
                   {"seed", r.seed},
                   {"initial_loss", r.initial_loss},
                   {"final_loss", r.final_loss},
                   {"top1", r.top1},
                   {"top5", r.top5}});
  }
  return j;
}

ProtocolReport run_protocol(const RunConfig& config, const Dataset& data, const MetricsSink& sink) {
  config.validate();
  ProtocolReport report;
  std::vector<double> top1, top5;
  for (int r = 0; r < config.n_runs; ++r) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    const TrainResult t = train(config, data, seed, r, sink);
    const MetricsRecord& last = t.metrics.back();
    report.runs.push_back({r, seed, t.initial_loss, t.final_loss, last.top1, last.top5});
    top1.push_back(last.top1);
    top5.push_back(last.top5);
  }
  report.top1 = mean_std(top1);
  report.top5 = mean_std(top5);
  return report;
}

ProtocolReport run_protocol(const RunConfig& config, const MetricsSink& sink) {
  return run_protocol(config, dataset_for(config), sink);
}

}  // namespace qmcl
