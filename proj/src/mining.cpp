// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/mining.hpp"

#include <algorithm>
#include <numeric>

#include "vixml/rng.hpp"

namespace vixml {

std::vector<std::size_t> ClusterAssignment::sizes() const {
  std::vector<std::size_t> s(num_clusters, 0);
  for (auto c : assignment) ++s[c];
  return s;
}

ClusterAssignment cluster_queries(const Matrix& embs, std::size_t num_clusters, std::uint64_t seed,
                                  std::size_t iters) {
  const std::size_t n = embs.rows;
  const std::size_t d = embs.cols;
  if (num_clusters == 0) usage_error("cluster_queries: num_clusters must be positive");
  if (num_clusters > n) {
    usage_error("cluster_queries: num_clusters " + std::to_string(num_clusters) + " exceeds " + std::to_string(n) +
                " queries");
  }
  ClusterAssignment out;
  out.num_clusters = num_clusters;
  out.assignment.assign(n, 0);

  Matrix centers(num_clusters, d);
  {
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    for (std::size_t c = 0; c < num_clusters; ++c) {
      const auto src = embs.row(order[c]);
      std::copy(src.begin(), src.end(), centers.row(c).begin());
    }
  }

  // floor(n/k) slots everywhere plus n mod k clusters allowed one extra.
  const std::size_t base = n / num_clusters;
  const std::size_t extra = n % num_clusters;

  struct Pair {
    double sim;
    std::uint32_t query;
    std::uint32_t cluster;
  };
  std::vector<Pair> pairs(n * num_clusters);
  const std::size_t rounds = std::max<std::size_t>(iters, 1);
  for (std::size_t it = 0; it < rounds; ++it) {
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t c = 0; c < num_clusters; ++c) {
        pairs[q * num_clusters + c] = {dot(embs.row(q), centers.row(c)), static_cast<std::uint32_t>(q),
                                       static_cast<std::uint32_t>(c)};
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      if (a.query != b.query) return a.query < b.query;
      return a.cluster < b.cluster;
    });
    std::vector<std::size_t> fill(num_clusters, 0);
    std::vector<char> done(n, 0);
    std::size_t extras_used = 0;
    std::size_t assigned = 0;
    for (const Pair& p : pairs) {
      if (assigned == n) break;
      if (done[p.query]) continue;
      std::size_t& f = fill[p.cluster];
      if (f < base) {
        // always room
      } else if (f == base && extras_used < extra) {
        ++extras_used;
      } else {
        continue;
      }
      ++f;
      done[p.query] = 1;
      out.assignment[p.query] = p.cluster;
      ++assigned;
    }

    Matrix next(num_clusters, d);
    for (std::size_t q = 0; q < n; ++q) {
      auto dst = next.row(out.assignment[q]);
      const auto src = embs.row(q);
      for (std::size_t i = 0; i < d; ++i) dst[i] += src[i];
    }
    for (std::size_t c = 0; c < num_clusters; ++c) {
      auto row = next.row(c);
      if (normalize_in_place(row) > 0.0) std::copy(row.begin(), row.end(), centers.row(c).begin());
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(const ClusterAssignment& c, std::size_t batch_size,
                                                   std::uint64_t seed) {
  if (batch_size < 2) usage_error("make_batches: batch_size must be at least 2");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> members(c.num_clusters);
  for (std::size_t q = 0; q < c.assignment.size(); ++q) members[c.assignment[q]].push_back(q);
  std::vector<std::vector<std::size_t>> batches;
  for (auto& m : members) {
    rng.shuffle(std::span(m));
    for (std::size_t start = 0; start < m.size(); start += batch_size) {
      const std::size_t end = std::min(m.size(), start + batch_size);
      batches.emplace_back(m.begin() + static_cast<std::ptrdiff_t>(start), m.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  rng.shuffle(std::span(batches));
  return batches;
}

std::vector<LabelId> select_hard_negatives(std::span<const double> query_emb, const Matrix& candidate_embs,
                                           std::span<const LabelId> candidate_ids,
                                           std::span<const LabelId> positives, std::size_t count) {
  if (candidate_embs.rows != candidate_ids.size()) usage_error("select_hard_negatives: ids do not match candidates");
  std::vector<std::pair<double, LabelId>> scored;
  scored.reserve(candidate_ids.size());
  for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
    if (std::binary_search(positives.begin(), positives.end(), candidate_ids[i])) continue;
    scored.emplace_back(dot(query_emb, candidate_embs.row(i)), candidate_ids[i]);
  }
  auto better = [](const std::pair<double, LabelId>& a, const std::pair<double, LabelId>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  const std::size_t take = std::min(count, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  std::vector<LabelId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  return out;
}

LabelCentroids refresh_centroids(const Matrix& query_embs, const GroundTruth& gt, const LabelCentroids& prev) {
  if (gt.size() != query_embs.rows) usage_error("refresh_centroids: ground truth does not match embeddings");
  if (prev.centroids.cols != query_embs.cols && query_embs.rows) usage_error("refresh_centroids: dimension mismatch");
  const std::size_t d = prev.centroids.cols;
  const std::size_t num_labels = prev.centroids.rows;
  Matrix sums(num_labels, d);
  std::vector<std::size_t> counts(num_labels, 0);
  for (std::size_t q = 0; q < gt.size(); ++q) {
    const auto src = query_embs.row(q);
    for (LabelId l : gt[q]) {
      if (l >= num_labels) usage_error("refresh_centroids: label " + std::to_string(l) + " out of range");
      auto dst = sums.row(l);
      for (std::size_t i = 0; i < d; ++i) dst[i] += src[i];
      ++counts[l];
    }
  }
  LabelCentroids out = prev;
  for (std::size_t l = 0; l < num_labels; ++l) {
    if (counts[l] == 0) continue;
    auto row = sums.row(l);
    for (double& x : row) x /= static_cast<double>(counts[l]);
    if (l2_norm(row) == 0.0) continue;  // degenerate mean keeps the previous centroid
    normalize_in_place(row);
    std::copy(row.begin(), row.end(), out.centroids.row(l).begin());
    out.valid[l] = 1;
  }
  return out;
}

}  // namespace vixml
