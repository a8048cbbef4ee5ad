// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/rai.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>

#include "vixml/parallel.hpp"

namespace vixml {
namespace {

std::atomic<bool> g_warned_empty_gt{false};

}  // namespace

std::string_view to_string(Aggregation a) { return a == Aggregation::kSum ? "sum" : "max"; }

Aggregation parse_aggregation(std::string_view s) {
  if (s == "sum") return Aggregation::kSum;
  if (s == "max") return Aggregation::kMax;
  usage_error("unknown aggregation \"" + std::string(s) + "\"");
}

void validate(const RaiConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) usage_error("rai: lambda must be in [0,1]");
  if (!(cfg.temperature > 0.0)) usage_error("rai: temperature must be positive");
  if (cfg.k_search == 0 || cfg.output_k == 0) usage_error("rai: k_search and output_k must be positive");
}

std::vector<ScoredId> rai_predict(std::span<const double> query, const EmbeddingIndex& label_index,
                                  const EmbeddingIndex& train_query_index, const GroundTruth& train_gt,
                                  const RaiConfig& cfg, RaiTrace* trace) {
  validate(cfg);
  if (label_index.size() == 0 || train_query_index.size() == 0) data_error("rai: empty index");

  RaiTrace local;
  RaiTrace& t = trace ? *trace : local;
  t = {};
  // A search whose weight is zero contributes no entries at all.
  if (cfg.lambda > 0.0) {
    for (const auto& s : label_index.search_topk(query, cfg.k_search)) {
      t.merged.push_back({s.id, cfg.lambda * s.score});
      t.from_train_query.push_back(false);
    }
  }
  if (cfg.lambda < 1.0) {
    for (const auto& s : train_query_index.search_topk(query, cfg.k_search)) {
      if (s.id >= train_gt.size()) data_error("rai: train query " + std::to_string(s.id) + " has no ground-truth row");
      t.merged.push_back({s.id, (1.0 - cfg.lambda) * s.score});
      t.from_train_query.push_back(true);
    }
  }

  double mx = -INFINITY;
  for (const auto& e : t.merged) mx = std::max(mx, e.score);
  t.mass.resize(t.merged.size());
  double z = 0.0;
  for (std::size_t i = 0; i < t.merged.size(); ++i) {
    t.mass[i] = std::exp((t.merged[i].score - mx) / cfg.temperature);
    z += t.mass[i];
  }
  for (double& w : t.mass) w /= z;

  std::map<LabelId, double> agg;
  auto give = [&](LabelId l, double w) {
    auto [it, inserted] = agg.try_emplace(l, w);
    if (inserted) return;
    it->second = cfg.aggregation == Aggregation::kSum ? it->second + w : std::max(it->second, w);
  };
  for (std::size_t i = 0; i < t.merged.size(); ++i) {
    if (!t.from_train_query[i]) {
      give(t.merged[i].id, t.mass[i]);
      continue;
    }
    const auto& positives = train_gt[t.merged[i].id];
    if (positives.empty() && !g_warned_empty_gt.exchange(true)) {
      std::cerr << "warning: rai: retrieved a training query with no positive labels; it contributes nothing\n";
    }
    for (LabelId l : positives) give(l, t.mass[i]);
  }

  std::vector<ScoredId> out;
  out.reserve(agg.size());
  for (const auto& [id, score] : agg) out.push_back({id, score});
  const std::size_t keep = std::min(cfg.output_k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), ranks_before);
  out.resize(keep);
  return out;
}

PredictionSet rai_predict_all(const Matrix& queries, const EmbeddingIndex& label_index,
                              const EmbeddingIndex& train_query_index, const GroundTruth& train_gt,
                              const RaiConfig& cfg, unsigned threads) {
  validate(cfg);
  PredictionSet ps;
  ps.k = cfg.output_k;
  ps.rows.resize(queries.rows);
  parallel_for(queries.rows, threads, [&](std::size_t i) {
    ps.rows[i] = rai_predict(queries.row(i), label_index, train_query_index, train_gt, cfg);
  });
  return ps;
}

}  // namespace vixml
