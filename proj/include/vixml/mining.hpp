// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vixml/common.hpp"

namespace vixml {

struct ClusterAssignment {
  std::size_t num_clusters = 0;
  std::vector<std::uint32_t> assignment;  // query -> cluster

  std::vector<std::size_t> sizes() const;
};

/// Balanced spherical k-means. Centers start from a seeded sample of
/// distinct rows; each iteration assigns (query, cluster) pairs greedily by
/// descending similarity under per-cluster capacities that keep sizes within
/// one of each other, then recomputes unit-normalized centers.
ClusterAssignment cluster_queries(const Matrix& embs, std::size_t num_clusters, std::uint64_t seed,
                                  std::size_t iters = 5);

/// Intra-cluster batches of at most batch_size queries. Members are shuffled
/// within each cluster and the batch order is shuffled; short tail batches
/// are kept.
std::vector<std::vector<std::size_t>> make_batches(const ClusterAssignment& c, std::size_t batch_size,
                                                   std::uint64_t seed);

/// The `count` highest-scoring candidates that are not positives, by inner
/// product with the query; ties go to the smaller label id. Returns fewer
/// when not enough candidates remain. `positives` must be sorted.
std::vector<LabelId> select_hard_negatives(std::span<const double> query_emb, const Matrix& candidate_embs,
                                           std::span<const LabelId> candidate_ids,
                                           std::span<const LabelId> positives, std::size_t count);

struct LabelCentroids {
  Matrix centroids;            // L x d
  std::vector<std::uint8_t> valid;

  static LabelCentroids empty(std::size_t num_labels, std::size_t d) {
    return {Matrix(num_labels, d), std::vector<std::uint8_t>(num_labels, 0)};
  }
};

/// Per label: unit-normalized mean of the embeddings of its queries. Labels
/// with no queries, or whose mean is the zero vector, keep `prev`.
LabelCentroids refresh_centroids(const Matrix& query_embs, const GroundTruth& gt, const LabelCentroids& prev);

}  // namespace vixml
