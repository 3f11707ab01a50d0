#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "qmcl/tape.hpp"
#include "qmcl/tensor.hpp"

namespace qmcl {

/// Upper clamp on the log-temperature so the logit scale never exceeds 100.
inline const double kMaxLogTemperature = std::log(100.0);

/// Paired, already-normalised features of one batch.
struct ContrastiveBatch {
  Tensor eeg_features;    // [B, D]
  Tensor image_features;  // [B, D]
  double log_temperature = 0.0;

  /// Both matrices [B, D] with B >= 1, rows unit-norm within 1e-9, finite tau.
  void validate() const;
};

/// logits[i][j] = <eeg_i, image_j> * exp(tau). eeg [B, D], image [M, D],
/// tau a single-element tensor. Returns [B, M].
Var clip_logits(Var eeg_features, Var image_features, Var log_temperature);

/// Symmetric cross-entropy against diagonal targets,
/// (mean row-wise CE + mean column-wise CE) / 2, for square logits.
Var clip_loss(Var logits);

/// Value-only evaluation of clip_loss.
double clip_loss_value(const Tensor& logits);

/// Fraction of rows whose true column is among the k best scores. A tied
/// competitor outranks the true class only if its column index is lower.
double topk_accuracy(const Tensor& scores, std::span<const std::size_t> true_class, std::size_t k);

}  // namespace qmcl
