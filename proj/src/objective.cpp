// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/objective.hpp"

#include <algorithm>
#include <cmath>

namespace vixml {
namespace {

std::size_t count_triplets(const TripletBatch& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < b.positives.size(); ++i) n += b.positives[i].size() * b.negatives[i].size();
  return n;
}

void check_unit(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (std::abs(l2_norm(m.row(r)) - 1.0) > 1e-6) {
      usage_error(std::string("triplet batch: ") + what + " row " + std::to_string(r) + " is not unit-norm");
    }
  }
}

}  // namespace

void validate(const TripletBatch& b) {
  const std::size_t nq = b.query_embs.rows;
  if (b.positives.size() != nq || b.negatives.size() != nq) usage_error("triplet batch: index lists do not match B");
  if (nq && b.label_embs.rows && b.query_embs.cols != b.label_embs.cols) usage_error("triplet batch: dimension mismatch");
  if (b.margin < 0.0) usage_error("triplet batch: margin must be non-negative");
  for (std::size_t i = 0; i < nq; ++i) {
    for (const auto* list : {&b.positives[i], &b.negatives[i]}) {
      for (std::size_t idx : *list) {
        if (idx >= b.label_embs.rows) {
          usage_error("triplet batch: index " + std::to_string(idx) + " outside pool of " +
                      std::to_string(b.label_embs.rows));
        }
      }
    }
    for (std::size_t p : b.positives[i]) {
      if (std::find(b.negatives[i].begin(), b.negatives[i].end(), p) != b.negatives[i].end()) {
        usage_error("triplet batch: query " + std::to_string(i) + " lists pool row " + std::to_string(p) +
                    " as both positive and negative");
      }
    }
  }
  check_unit(b.query_embs, "query");
  check_unit(b.label_embs, "label");
}

double triplet_loss(const TripletBatch& b) {
  validate(b);
  double loss = 0.0;
  for (std::size_t i = 0; i < b.positives.size(); ++i) {
    const auto q = b.query_embs.row(i);
    for (std::size_t j : b.positives[i]) {
      const double sp = dot(q, b.label_embs.row(j));
      for (std::size_t k : b.negatives[i]) {
        const double sn = dot(q, b.label_embs.row(k));
        loss += std::max(0.0, sn - sp + b.margin);
      }
    }
  }
  if (b.reduction == Reduction::kMean) {
    const std::size_t n = count_triplets(b);
    if (n) loss /= static_cast<double>(n);
  }
  return loss;
}

TripletGrad triplet_grad(const TripletBatch& b) {
  validate(b);
  const std::size_t d = b.query_embs.cols;
  TripletGrad g;
  g.d_query = Matrix(b.query_embs.rows, d);
  g.d_label = Matrix(b.label_embs.rows, d);
  g.total = count_triplets(b);
  const double scale =
      (b.reduction == Reduction::kMean && g.total) ? 1.0 / static_cast<double>(g.total) : 1.0;

  for (std::size_t i = 0; i < b.positives.size(); ++i) {
    const auto q = b.query_embs.row(i);
    auto dq = g.d_query.row(i);
    for (std::size_t j : b.positives[i]) {
      const auto pj = b.label_embs.row(j);
      const double sp = dot(q, pj);
      for (std::size_t k : b.negatives[i]) {
        const auto nk = b.label_embs.row(k);
        const double hinge = dot(q, nk) - sp + b.margin;
        if (!(hinge > 0.0)) continue;
        g.loss += hinge;
        ++g.active;
        auto dp = g.d_label.row(j);
        auto dn = g.d_label.row(k);
        for (std::size_t c = 0; c < d; ++c) {
          dq[c] += scale * (nk[c] - pj[c]);
          dn[c] += scale * q[c];
          dp[c] -= scale * q[c];
        }
      }
    }
  }
  g.loss *= scale;
  return g;
}

}  // namespace vixml
