#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmcl/config.hpp"
#include "qmcl/dataset.hpp"
#include "qmcl/training.hpp"

namespace qmcl {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

/// "3.5 ± 1.7%" for fractions 0.035 and 0.017.
std::string format_percent(const MeanStd& m);

struct RunSummary {
  int run_id = 0;
  std::uint64_t seed = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double top1 = 0.0;
  double top5 = 0.0;
};

struct ProtocolReport {
  std::vector<RunSummary> runs;
  MeanStd top1;
  MeanStd top5;

  nlohmann::ordered_json to_json() const;
};

/// Trains and evaluates config.n_runs times with seeds seed, seed+1, ... on
/// the same dataset and aggregates the final top-1/top-5 accuracies.
ProtocolReport run_protocol(const RunConfig& config, const Dataset& data,
                            const MetricsSink& sink = {});

/// Uses dataset_for(config).
ProtocolReport run_protocol(const RunConfig& config, const MetricsSink& sink = {});

}  // namespace qmcl
