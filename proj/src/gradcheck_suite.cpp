#include "qmcl/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "qmcl/contrastive.hpp"
#include "qmcl/encoders.hpp"
#include "qmcl/errors.hpp"
#include "qmcl/ops.hpp"
#include "qmcl/training.hpp"
#include "qmcl/vqc.hpp"

namespace qmcl {

namespace {

constexpr std::size_t kBatch = 4;

Tensor randn(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> d(0.0, scale);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

// Wraps an op check: random inputs, a random weighted-sum probe on the output.
template <typename Build>
NamedCheck op_check(std::string name, std::uint64_t seed, std::vector<Shape> shapes,
                    double tolerance, Build build) {
  return {name, [=] {
    std::mt19937_64 rng(seed);
    std::vector<Tensor> inputs;
    for (const auto& s : shapes) inputs.push_back(randn(s, rng));
    std::vector<Tensor*> wrt;
    for (auto& t : inputs) wrt.push_back(&t);
    std::optional<Tensor> probe;
    auto graph = [&](Tape& tape) {
      std::vector<Var> vars;
      for (auto& t : inputs) vars.push_back(tape.parameter(t));
      Var out = build(vars);
      if (!probe) probe = randn(out.shape(), rng);
      return weighted_sum(out, *probe);
    };
    return check_gradients(name, wrt, graph, tolerance);
  }};
}

GradCheckResult vqc_shift_rule_check(const RunConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  constexpr double h = 1e-5;
  GradCheckResult r;
  r.name = "vqc_parameter_shift";
  r.tolerance = kOpTolerance;
  for (int draw = 0; draw < 5; ++draw) {
    QuantumLayerParams p = QuantumLayerParams::zeros(c.n_qubits, c.n_layers);
    for (auto& w : p.weights) w = angle(rng);
    std::vector<double> x(c.n_qubits);
    for (auto& v : x) v = angle(rng);
    const VqcGradient g = vqc_parameter_shift_grad(x, p);
    const int n = c.n_qubits;
    auto record = [&](double* slot, auto analytic_of) {
      const double saved = *slot;
      *slot = saved + h;
      const auto up = vqc_forward(x, p);
      *slot = saved - h;
      const auto down = vqc_forward(x, p);
      *slot = saved;
      for (int j = 0; j < n; ++j) {
        const double numeric = (up[j] - down[j]) / (2.0 * h);
        const double dev = std::abs(analytic_of(j) - numeric);
        r.max_abs_dev = std::max(r.max_abs_dev, dev);
        r.max_scaled_dev = std::max(r.max_scaled_dev, dev / std::max(1.0, std::abs(numeric)));
        ++r.entries;
      }
    };
    for (int i = 0; i < n; ++i) record(&x[i], [&](int j) { return g.dx(i, j); });
    for (int l = 0; l < c.n_layers; ++l)
      for (int i = 0; i < n; ++i) {
        record(&p.weight(l, i), [&](int j) { return g.dw(l, i, j); });
      }
  }
  r.pass = std::isfinite(r.max_scaled_dev) && r.max_scaled_dev <= r.tolerance;
  return r;
}

}  // namespace

std::vector<NamedCheck> default_gradchecks(const RunConfig& c) {
  c.validate();
  if (c.n_qubits > 3) {
    throw ConfigError("gradcheck needs a tiny config (n_qubits <= 3), got n_qubits=" +
                      std::to_string(c.n_qubits));
  }
  const std::uint64_t s = c.seed;
  const std::size_t n = static_cast<std::size_t>(c.n_qubits);
  const std::size_t layers = static_cast<std::size_t>(c.n_layers);
  const std::size_t B = kBatch;
  std::vector<NamedCheck> checks;

  checks.push_back(op_check("linear", s + 1, {{B, 5}, {5, 3}, {3}}, kOpTolerance,
                            [](auto& v) { return linear(v[0], v[1], v[2]); }));
  checks.push_back(op_check("conv_spatial", s + 2, {{B, 1, c.E, 9}, {c.F, 1, c.E, 1}},
                            kOpTolerance, [](auto& v) { return conv_spatial(v[0], v[1]); }));
  checks.push_back(op_check("conv_temporal", s + 3, {{B, 3, 1, 12}, {2, 3, 1, 4}}, kOpTolerance,
                            [](auto& v) { return conv_temporal(v[0], v[1]); }));
  checks.push_back(op_check("conv_temporal_stride2", s + 4, {{B, 3, 1, 13}, {2, 3, 1, 4}},
                            kOpTolerance, [](auto& v) { return conv_temporal(v[0], v[1], 2); }));
  checks.push_back(op_check("batch_norm_train", s + 5, {{B, 3, 1, 5}, {3}, {3}},
                            kBatchNormTolerance, [](auto& v) {
    // Only the forward pass reads the statistics.
    BatchNormStats stats = BatchNormStats::for_channels(3);
    return batch_norm(v[0], v[1], v[2], stats, BatchNormMode::Train);
  }));
  checks.push_back(op_check("batch_norm_eval", s + 6, {{B, 3}, {3}, {3}}, kBatchNormTolerance,
                            [](auto& v) {
    BatchNormStats stats = BatchNormStats::for_channels(3);
    stats.running_mean = Tensor({3}, {0.3, -0.2, 0.1});
    stats.running_var = Tensor({3}, {0.5, 1.5, 2.0});
    return batch_norm(v[0], v[1], v[2], stats, BatchNormMode::Eval);
  }));
  checks.push_back(op_check("elu", s + 7, {{B, 6}}, kOpTolerance,
                            [](auto& v) { return elu(v[0]); }));
  checks.push_back(op_check("l2_normalize", s + 8, {{B, 5}}, kOpTolerance,
                            [](auto& v) { return l2_normalize(v[0]); }));
  checks.push_back(op_check("angle_squash", s + 9, {{B, 3}}, kOpTolerance,
                            [](auto& v) { return angle_squash(v[0]); }));
  checks.push_back(op_check("vqc_layer", s + 10, {{B, n}, {layers, n}}, kOpTolerance,
                            [](auto& v) { return vqc_layer(v[0], v[1]); }));
  checks.push_back({"vqc_parameter_shift", [c, s] { return vqc_shift_rule_check(c, s + 11); }});
  checks.push_back({"clip_loss", [s] {
    std::mt19937_64 rng(s + 12);
    // Unit rows so the check runs where the loss is meant to operate.
    Tensor e = randn({6, 4}, rng), i = randn({6, 4}, rng), tau = Tensor::scalar(std::log(1 / 0.07));
    for (Tensor* t : {&e, &i}) {
      for (std::size_t r = 0; r < 6; ++r) {
        double nrm = 0.0;
        for (std::size_t k = 0; k < 4; ++k) nrm += t->at(r, k) * t->at(r, k);
        for (std::size_t k = 0; k < 4; ++k) t->at(r, k) /= std::sqrt(nrm);
      }
    }
    std::vector<Tensor*> wrt{&e, &i, &tau};
    return check_gradients("clip_loss", wrt, [&](Tape& tape) {
      return clip_loss(clip_logits(tape.parameter(e), tape.parameter(i), tape.parameter(tau)));
    }, kOpTolerance);
  }});
  checks.push_back({"qstconv_pipeline", [c, s] {
    std::mt19937_64 rng(s + 13);
    QstConvConfig cfg = c.eeg_encoder();
    QstConvParams p = QstConvParams::init(cfg, rng);
    Tensor eeg = randn({kBatch, 1, cfg.electrodes, cfg.samples}, rng);
    const Tensor probe = randn({kBatch, cfg.embed_dim}, rng);
    std::vector<Tensor*> wrt;
    for (auto& np : p.trainable()) wrt.push_back(np.tensor);
    wrt.push_back(&eeg);
    return check_gradients("qstconv_pipeline", wrt, [&](Tape& tape) {
      return weighted_sum(qstconv_forward(tape, tape.parameter(eeg), p, cfg, BatchNormMode::Train),
                          probe);
    }, kPipelineTolerance);
  }});
  checks.push_back({"image_head_pipeline", [c, s] {
    std::mt19937_64 rng(s + 14);
    ImageHeadConfig cfg = c.image_head();
    ImageHeadParams p = ImageHeadParams::init(cfg, rng);
    Tensor emb = randn({kBatch, cfg.image_dim}, rng);
    const Tensor probe = randn({kBatch, cfg.embed_dim}, rng);
    std::vector<Tensor*> wrt;
    for (auto& np : p.trainable()) wrt.push_back(np.tensor);
    return check_gradients("image_head_pipeline", wrt, [&](Tape& tape) {
      return weighted_sum(image_head_forward(tape, tape.constant(emb), p, cfg), probe);
    }, kPipelineTolerance);
  }});
  checks.push_back({"contrastive_pipeline", [c, s] {
    std::mt19937_64 rng(s + 15);
    Model m = Model::init(c, s + 15);
    Tensor eeg = randn({kBatch, 1, c.E, c.T}, rng);
    Tensor emb = randn({kBatch, c.D_img}, rng);
    std::vector<Tensor*> wrt;
    for (auto& np : m.trainable()) wrt.push_back(np.tensor);
    return check_gradients("contrastive_pipeline", wrt, [&](Tape& tape) {
      Var e = qstconv_forward(tape, tape.constant(eeg), m.eeg, m.eeg_config, BatchNormMode::Train);
      Var i = image_head_forward(tape, tape.constant(emb), m.image, m.image_config);
      return clip_loss(clip_logits(e, i, tape.parameter(m.log_temperature)));
    }, kPipelineTolerance);
  }});
  return checks;
}

bool GradcheckReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

std::optional<GradCheckResult> GradcheckReport::first_failure() const {
  for (const auto& r : results) {
    if (!r.pass) return r;
  }
  return std::nullopt;
}

std::string GradcheckReport::summary() const {
  std::string out;
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-24s %s  max_abs_dev=%.3e  max_scaled_dev=%.3e  tol=%.0e  n=%zu\n",
                  r.name.c_str(), r.pass ? "PASS" : "FAIL", r.max_abs_dev, r.max_scaled_dev,
                  r.tolerance, r.entries);
    out += buf;
  }
  return out;
}

GradcheckReport run_gradchecks(const std::vector<NamedCheck>& checks) {
  GradcheckReport report;
  for (const auto& c : checks) {
    GradCheckResult r = c.run();
    r.name = c.name;
    report.results.push_back(std::move(r));
  }
  return report;
}

GradcheckReport gradcheck_all(const RunConfig& config) {
  return run_gradchecks(default_gradchecks(config));
}

}  // namespace qmcl
