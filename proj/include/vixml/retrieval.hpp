// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "vixml/common.hpp"

namespace vixml {

struct ScoredId {
  LabelId id = 0;
  double score = 0.0;
  bool operator==(const ScoredId&) const = default;
};

/// Ranking order: score descending, then id ascending.
inline bool ranks_before(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

/// Top-k rows per query, ordered by ranks_before.
struct PredictionSet {
  std::size_t k = 0;
  std::vector<std::vector<ScoredId>> rows;
};

/// Exact MIPS over unit-norm rows, scanned block by block.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  /// Throws when a row is not unit-norm within 1e-6.
  static EmbeddingIndex build(const Matrix& embs, std::vector<LabelId> ids, std::size_t block_size = 1024);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t block_size() const { return block_size_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<LabelId>& ids() const { return ids_; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  std::vector<ScoredId> search_topk(std::span<const double> query, std::size_t k) const;

 private:
  std::size_t dim_ = 0;
  std::size_t block_size_ = 1;
  std::vector<Matrix> blocks_;
  std::vector<LabelId> ids_;
};

PredictionSet predict_all(const EmbeddingIndex& idx, const Matrix& queries, std::size_t k, unsigned threads = 0);

/// TSV: "query_index\tid:score,id:score,..." with scores at 6 decimals.
std::string format_predictions(const PredictionSet& ps);
void write_predictions(const std::string& path, const PredictionSet& ps);
/// k is taken as the longest row.
PredictionSet read_predictions(const std::string& path);

}  // namespace vixml
