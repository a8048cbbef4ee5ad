// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "vixml/common.hpp"
#include "vixml/retrieval.hpp"

namespace vixml {

/// Inverse-propensity model of Jain et al. (the XML repository convention):
/// p_l = 1 / (1 + C * (N_l + B)^-A), C = (ln N - 1) * (B + 1)^A.
struct PropensityModel {
  std::vector<double> propensity;
  double a = 0.55;
  double b = 1.5;
  std::size_t num_train = 0;
};

PropensityModel compute_propensities(std::span<const std::size_t> label_freqs, std::size_t num_train, double a = 0.55,
                                     double b = 1.5);

/// Label frequencies over a ground-truth structure.
std::vector<std::size_t> label_frequencies(const GroundTruth& gt, std::size_t num_labels);

/// Mean over all queries of |top-k ∩ P_i| / k. Queries with no positives
/// count as zero.
double precision_at_k(const PredictionSet& preds, const GroundTruth& gt, std::size_t k);

/// Mean over queries with at least one positive of |top-k ∩ P_i| / |P_i|.
double recall_at_k(const PredictionSet& preds, const GroundTruth& gt, std::size_t k);

/// Sum over queries of propensity-weighted hits in the top k divided by the
/// same sum for the best achievable top k.
double psp_at_k(const PredictionSet& preds, const GroundTruth& gt, const PropensityModel& pm, std::size_t k);

struct MetricRow {
  std::string name;
  double value = 0.0;
};

struct EvalRequest {
  std::vector<std::size_t> precision_k = {1, 5};
  std::vector<std::size_t> recall_k = {10, 100};
  std::vector<std::size_t> psp_k = {1, 5};
};

std::vector<MetricRow> evaluate_all(const PredictionSet& preds, const GroundTruth& gt, const PropensityModel& pm,
                                    const EvalRequest& req);

/// "metric\tvalue" lines, values at 6 decimals.
std::string format_report(const std::vector<MetricRow>& rows);

/// Bar chart of the metric table as a standalone SVG document.
std::string render_svg_bars(const std::vector<MetricRow>& rows, const std::string& title);

}  // namespace vixml
