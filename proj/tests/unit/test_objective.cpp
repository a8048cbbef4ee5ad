// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "vixml/objective.hpp"

using namespace vixml;
using vixml::testing::error_kind_of;
using vixml::testing::random_unit_rows;

namespace {

Matrix rows2(std::initializer_list<std::pair<double, double>> r) {
  Matrix m(r.size(), 2);
  std::size_t i = 0;
  for (auto [a, b] : r) {
    m(i, 0) = a;
    m(i, 1) = b;
    ++i;
  }
  return m;
}

TripletBatch random_batch(Rng& rng, std::size_t d) {
  TripletBatch b;
  const std::size_t nq = 1 + rng.below(4), nl = 3 + rng.below(5);
  b.query_embs = random_unit_rows(nq, d, rng);
  b.label_embs = random_unit_rows(nl, d, rng);
  b.margin = rng.uniform(0.0, 1.0);
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<std::size_t> order(nl);
    for (std::size_t j = 0; j < nl; ++j) order[j] = j;
    rng.shuffle(std::span(order));
    const std::size_t np = 1 + rng.below(2), nn = rng.below(nl - np + 1);
    b.positives.push_back({order.begin(), order.begin() + static_cast<long>(np)});
    b.negatives.push_back({order.begin() + static_cast<long>(np), order.begin() + static_cast<long>(np + nn)});
  }
  return b;
}

// Loss as a function of free (unnormalized) matrices; the objective only
// sees dot products so the rows can leave the unit sphere during FD.
double loss_free(const Matrix& q, const Matrix& l, const TripletBatch& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.rows; ++i)
    for (std::size_t p : b.positives[i])
      for (std::size_t n : b.negatives[i]) {
        double qn = 0.0, qp = 0.0;
        for (std::size_t a = 0; a < q.cols; ++a) {
          qn += q(i, a) * l(n, a);
          qp += q(i, a) * l(p, a);
        }
        s += std::max(0.0, qn - qp + b.margin);
      }
  return s;
}

}  // namespace

TEST_CASE("hand fixtures") {
  TripletBatch b;
  b.query_embs = rows2({{1, 0}});
  b.label_embs = rows2({{1, 0}, {0, 1}});
  b.positives = {{0}};
  b.negatives = {{1}};
  b.margin = 0.3;
  CHECK(triplet_loss(b) == 0.0);

  b.label_embs = rows2({{1, 0}, {1, 0}});
  CHECK(triplet_loss(b) == doctest::Approx(0.3).epsilon(1e-15));
  const auto g = triplet_grad(b);
  CHECK(g.active == 1);
  CHECK(g.d_query(0, 0) == 0.0);
  CHECK(g.d_label(0, 0) == -1.0);
  CHECK(g.d_label(1, 0) == 1.0);

  b.negatives = {{}};
  CHECK(triplet_loss(b) == 0.0);
}

TEST_CASE("satisfied triplets give zero gradient, the kink counts as satisfied") {
  TripletBatch b;
  b.query_embs = rows2({{1, 0}});
  b.label_embs = rows2({{1, 0}, {0.6, 0.8}});
  b.positives = {{0}};
  b.negatives = {{1}};
  b.margin = 0.4;  // 0.6 - 1 + 0.4 = 0 exactly
  const auto g = triplet_grad(b);
  CHECK(g.loss == 0.0);
  CHECK(g.active == 0);
  for (double x : g.d_query.data) CHECK(x == 0.0);
  for (double x : g.d_label.data) CHECK(x == 0.0);
}

TEST_CASE("gradient agrees with central differences") {
  Rng rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const TripletBatch b = random_batch(rng, 4);
    const TripletGrad g = triplet_grad(b);
    CHECK(g.loss == doctest::Approx(triplet_loss(b)).epsilon(1e-14));
    Matrix q = b.query_embs, l = b.label_embs;
    auto check = [&](Matrix& m, const Matrix& grad) {
      for (std::size_t i = 0; i < m.data.size(); ++i) {
        const double o = m.data[i];
        m.data[i] = o + 1e-6;
        const double up = loss_free(q, l, b);
        m.data[i] = o - 1e-6;
        const double dn = loss_free(q, l, b);
        m.data[i] = o;
        const double num = (up - dn) / 2e-6;
        CHECK(std::abs(num - grad.data[i]) <= 1e-6 * std::max({1.0, std::abs(num)}));
      }
    };
    check(q, g.d_query);
    check(l, g.d_label);
  }
}

TEST_CASE("margin changes loss but not active gradients") {
  TripletBatch b;
  b.query_embs = rows2({{1, 0}});
  b.label_embs = rows2({{0.8, 0.6}, {0.6, 0.8}});
  b.positives = {{0}};
  b.negatives = {{1}};
  b.margin = 0.5;
  const auto g1 = triplet_grad(b);
  b.margin = 0.9;
  const auto g2 = triplet_grad(b);
  CHECK(g1.loss != g2.loss);
  CHECK(g1.d_query == g2.d_query);
  CHECK(g1.d_label == g2.d_label);
}

TEST_CASE("loss properties on random batches") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    TripletBatch b = random_batch(rng, 3);
    const double l = triplet_loss(b);
    CHECK(l >= 0.0);
    bool all_satisfied = true;
    for (std::size_t i = 0; i < b.positives.size(); ++i)
      for (std::size_t p : b.positives[i])
        for (std::size_t n : b.negatives[i])
          all_satisfied &= dot(b.query_embs.row(i), b.label_embs.row(p)) - dot(b.query_embs.row(i), b.label_embs.row(n)) >= b.margin;
    CHECK((l == 0.0) == all_satisfied);
    for (auto& neg : b.negatives) std::reverse(neg.begin(), neg.end());
    CHECK(triplet_loss(b) == doctest::Approx(l).epsilon(1e-14));
    b.reduction = Reduction::kMean;
    const auto g = triplet_grad(b);
    if (g.total) CHECK(g.loss == doctest::Approx(l / double(g.total)).epsilon(1e-14));
  }
}

TEST_CASE("batch validation") {
  TripletBatch b;
  b.query_embs = rows2({{1, 0}});
  b.label_embs = rows2({{1, 0}, {0, 1}});
  b.positives = {{0}};
  b.negatives = {{2}};
  CHECK(error_kind_of([&] { triplet_loss(b); }) == 1);
  b.negatives = {{0}};
  CHECK(error_kind_of([&] { triplet_loss(b); }) == 1);
  b.negatives = {{1}};
  b.query_embs(0, 0) = 2.0;
  CHECK(error_kind_of([&] { triplet_loss(b); }) == 1);
}
