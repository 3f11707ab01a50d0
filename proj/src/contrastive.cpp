#include "qmcl/contrastive.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "qmcl/errors.hpp"

namespace qmcl {

void ContrastiveBatch::validate() const {
  const Tensor& e = eeg_features;
  const Tensor& i = image_features;
  if (e.rank() != 2 || e.shape() != i.shape()) {
    throw ShapeError("contrastive batch needs two equal [B, D] matrices, got " +
                     shape_string(e.shape()) + " and " + shape_string(i.shape()));
  }
  if (!std::isfinite(log_temperature)) throw NumericError("log-temperature is not finite");
  for (const Tensor* t : {&e, &i}) {
    for (std::size_t r = 0; r < t->dim(0); ++r) {
      double sq = 0.0;
      for (std::size_t c = 0; c < t->dim(1); ++c) sq += t->at(r, c) * t->at(r, c);
      if (std::abs(std::sqrt(sq) - 1.0) > 1e-9) {
        throw NumericError("contrastive batch row " + std::to_string(r) + " is not unit-norm");
      }
    }
  }
}

Var clip_logits(Var eeg_features, Var image_features, Var log_temperature) {
  const Tensor& ev = eeg_features.value();
  const Tensor& iv = image_features.value();
  const Tensor& tv = log_temperature.value();
  if (ev.rank() != 2 || iv.rank() != 2 || ev.dim(1) != iv.dim(1)) {
    throw ShapeError("clip_logits: feature matrices " + shape_string(ev.shape()) + " and " +
                     shape_string(iv.shape()) + " are incompatible");
  }
  if (tv.numel() != 1) throw ShapeError("clip_logits: log-temperature must be a scalar");
  const std::size_t rows = ev.dim(0), cols = iv.dim(0), dim = ev.dim(1);
  const double scale = std::exp(tv[0]);
  Tensor cosine({rows, cols});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc += ev.at(r, k) * iv.at(c, k);
      cosine.at(r, c) = acc;
    }
  Tensor logits(cosine.shape());
  for (std::size_t i = 0; i < logits.numel(); ++i) logits[i] = cosine[i] * scale;

  return eeg_features.tape->record(
      std::move(logits), {eeg_features, image_features, log_temperature},
      [=, cosine = std::move(cosine)](Tape& tape, std::span<const double> g) {
        const Tensor& ev = tape.value(eeg_features);
        const Tensor& iv = tape.value(image_features);
        if (tape.requires_grad(eeg_features)) {
          auto de = tape.grad(eeg_features);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
              const double w = g[r * cols + c] * scale;
              for (std::size_t k = 0; k < dim; ++k) de[r * dim + k] += w * iv.at(c, k);
            }
        }
        if (tape.requires_grad(image_features)) {
          auto di = tape.grad(image_features);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
              const double w = g[r * cols + c] * scale;
              for (std::size_t k = 0; k < dim; ++k) di[c * dim + k] += w * ev.at(r, k);
            }
        }
        if (tape.requires_grad(log_temperature)) {
          // d logits / d tau = logits
          double acc = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * cosine[i] * scale;
          tape.grad(log_temperature)[0] += acc;
        }
      });
}

namespace {

// Mean over rows of -log softmax(row)[diag], written as logsumexp - diag with
// the row max subtracted. Also returns d(mean CE)/d logits when `grad` is set.
double row_cross_entropy(const std::vector<double>& m, std::size_t n, std::vector<double>* grad) {
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = &m[r * n];
    const double mx = *std::max_element(row, row + n);
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) sum += std::exp(row[c] - mx);
    const double lse = mx + std::log(sum);
    total += lse - row[r];
    if (grad) {
      for (std::size_t c = 0; c < n; ++c) {
        const double p = std::exp(row[c] - lse);
        (*grad)[r * n + c] = (p - (c == r ? 1.0 : 0.0)) / static_cast<double>(n);
      }
    }
  }
  return total / static_cast<double>(n);
}

std::vector<double> transpose(std::span<const double> m, std::size_t n) {
  std::vector<double> t(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) t[c * n + r] = m[r * n + c];
  return t;
}

std::size_t check_square(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(0) != logits.dim(1)) {
    throw ShapeError("clip_loss: logits must be square, got " + shape_string(logits.shape()));
  }
  return logits.dim(0);
}

}  // namespace

double clip_loss_value(const Tensor& logits) {
  const std::size_t n = check_square(logits);
  const std::vector<double> rows(logits.data().begin(), logits.data().end());
  const double loss_row = row_cross_entropy(rows, n, nullptr);
  const double loss_col = row_cross_entropy(transpose(logits.data(), n), n, nullptr);
  const double loss = (loss_col + loss_row) / 2.0;
  if (!std::isfinite(loss)) throw NumericError("clip_loss is not finite");
  return loss;
}

Var clip_loss(Var logits) {
  const Tensor& lv = logits.value();
  const std::size_t n = check_square(lv);
  const std::vector<double> rows(lv.data().begin(), lv.data().end());
  std::vector<double> grad_row(n * n), grad_col_t(n * n);
  const double loss_row = row_cross_entropy(rows, n, &grad_row);
  const double loss_col = row_cross_entropy(transpose(lv.data(), n), n, &grad_col_t);
  const double loss = (loss_col + loss_row) / 2.0;
  if (!std::isfinite(loss)) throw NumericError("clip_loss is not finite");

  std::vector<double> dlogits(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      dlogits[r * n + c] = 0.5 * (grad_row[r * n + c] + grad_col_t[c * n + r]);
    }
  return logits.tape->record(Tensor::scalar(loss), {logits},
                             [=, dlogits = std::move(dlogits)](Tape& tape,
                                                              std::span<const double> g) {
    auto dl = tape.grad(logits);
    for (std::size_t i = 0; i < dl.size(); ++i) dl[i] += g[0] * dlogits[i];
  });
}

double topk_accuracy(const Tensor& scores, std::span<const std::size_t> true_class,
                     std::size_t k) {
  if (scores.rank() != 2) throw ShapeError("topk_accuracy: scores must be [N_query, N_class]");
  const std::size_t queries = scores.dim(0), classes = scores.dim(1);
  if (true_class.size() != queries) {
    throw ShapeError("topk_accuracy: " + std::to_string(true_class.size()) + " labels for " +
                     std::to_string(queries) + " queries");
  }
  if (k < 1 || k > classes) {
    throw ConfigError("topk_accuracy: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(classes) + "]");
  }
  std::size_t hits = 0;
  for (std::size_t q = 0; q < queries; ++q) {
    const std::size_t truth = true_class[q];
    if (truth >= classes) throw IndexError("topk_accuracy: label out of range");
    const double s = scores.at(q, truth);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double o = scores.at(q, c);
      if (o > s || (o == s && c < truth)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries);
}

}  // namespace qmcl
