#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmcl/config.hpp"
#include "qmcl/gradcheck.hpp"

namespace qmcl {

// Tolerances on the scaled deviation reported by check_gradients.
inline constexpr double kOpTolerance = 1e-6;
inline constexpr double kBatchNormTolerance = 1e-5;
inline constexpr double kPipelineTolerance = 1e-4;

struct NamedCheck {
  std::string name;
  std::function<GradCheckResult()> run;
};

/// Finite-difference checks for every differentiable component, sized from
/// `config`: each diffnet op, the parameter-shift VQC gradient, the clip loss,
/// and both full encoder pipelines. Throws ConfigError unless
/// config.n_qubits <= 3.
std::vector<NamedCheck> default_gradchecks(const RunConfig& config);

struct GradcheckReport {
  std::vector<GradCheckResult> results;
  bool all_pass() const;
  /// First failing result, if any.
  std::optional<GradCheckResult> first_failure() const;
  /// One line per check: name, status, max deviation, tolerance.
  std::string summary() const;
};

GradcheckReport run_gradchecks(const std::vector<NamedCheck>& checks);
GradcheckReport gradcheck_all(const RunConfig& config);

}  // namespace qmcl
