// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "vixml/common.hpp"
#include "vixml/retrieval.hpp"

namespace vixml {

enum class Aggregation { kSum, kMax };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

struct RaiConfig {
  double lambda = 0.9;
  double temperature = 0.05;
  std::size_t k_search = 100;
  Aggregation aggregation = Aggregation::kSum;
  std::size_t output_k = 100;
};

void validate(const RaiConfig& cfg);

/// Intermediate state of one query, exposed for inspection.
struct RaiTrace {
  /// Merged entries: label hits first, then train-query hits, each in rank
  /// order. `from_train_query` marks the second group.
  std::vector<ScoredId> merged;  // weighted scores
  std::vector<bool> from_train_query;
  std::vector<double> mass;  // softmax over `merged`
};

/// Retrieval-augmented prediction for one query: a label search weighted by
/// lambda and a training-query search weighted by (1 - lambda) are merged
/// and softmax-normalized with the given temperature; every training-query
/// entry then hands its mass to each of its positive labels, and masses are
/// aggregated per label.
std::vector<ScoredId> rai_predict(std::span<const double> query, const EmbeddingIndex& label_index,
                                  const EmbeddingIndex& train_query_index, const GroundTruth& train_gt,
                                  const RaiConfig& cfg, RaiTrace* trace = nullptr);

PredictionSet rai_predict_all(const Matrix& queries, const EmbeddingIndex& label_index,
                              const EmbeddingIndex& train_query_index, const GroundTruth& train_gt,
                              const RaiConfig& cfg, unsigned threads = 0);

}  // namespace vixml
