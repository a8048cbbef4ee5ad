// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vixml/common.hpp"

namespace vixml {

enum class Reduction { kSum, kMean };

/// Queries against a shared pool of candidate labels. positives[i] and
/// negatives[i] index rows of label_embs.
struct TripletBatch {
  Matrix query_embs;  // B x d, unit rows
  Matrix label_embs;  // K x d, unit rows
  std::vector<std::vector<std::size_t>> positives;
  std::vector<std::vector<std::size_t>> negatives;
  /// Hinge margin (unrelated to the image dimension m).
  double margin = 0.3;
  /// kMean divides by the number of triplets.
  Reduction reduction = Reduction::kSum;
};

/// Checks shapes, index ranges, disjointness and unit norms.
void validate(const TripletBatch& b);

/// sum_i sum_{j in P_i} sum_{k in N_i} max(0, q_i.n_k - q_i.p_j + margin),
/// accumulated in i, j, k order.
double triplet_loss(const TripletBatch& b);

struct TripletGrad {
  Matrix d_query;  // B x d
  Matrix d_label;  // K x d
  double loss = 0.0;
  std::size_t active = 0;  // triplets with hinge > 0
  std::size_t total = 0;
};

/// Subgradient of triplet_loss; a hinge at exactly zero contributes nothing.
TripletGrad triplet_grad(const TripletBatch& b);

}  // namespace vixml
