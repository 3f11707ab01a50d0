#include "qmcl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace qmcl {

namespace {

double evaluate(const ScalarGraph& graph) {
  Tape tape;
  return graph(tape).value()[0];
}

}  // namespace

GradCheckResult check_gradients(std::string name, std::span<Tensor* const> wrt,
                                const ScalarGraph& graph, double tolerance, double h) {
  GradCheckResult r;
  r.name = std::move(name);
  r.tolerance = tolerance;

  for (Tensor* t : wrt) t->zero_grad();
  {
    Tape tape;
    tape.backward(graph(tape));
  }
  std::vector<std::vector<double>> analytic;
  for (Tensor* t : wrt) analytic.emplace_back(t->grad().begin(), t->grad().end());

  bool finite = true;
  for (std::size_t p = 0; p < wrt.size(); ++p) {
    Tensor& t = *wrt[p];
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = evaluate(graph);
      t[i] = saved - h;
      const double down = evaluate(graph);
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double abs_dev = std::abs(analytic[p][i] - numeric);
      if (!std::isfinite(abs_dev)) finite = false;
      r.max_abs_dev = std::max(r.max_abs_dev, abs_dev);
      r.max_scaled_dev = std::max(r.max_scaled_dev, abs_dev / std::max(1.0, std::abs(numeric)));
      ++r.entries;
    }
  }
  r.pass = finite && r.max_scaled_dev <= tolerance;
  return r;
}

}  // namespace qmcl
