// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vixml {
namespace {

void check_k(const PredictionSet& preds, const GroundTruth& gt, std::size_t k) {
  if (k == 0) usage_error("metrics: k must be at least 1");
  if (k > preds.k) {
    usage_error("metrics: k=" + std::to_string(k) + " exceeds stored prediction depth " + std::to_string(preds.k));
  }
  if (preds.rows.size() != gt.size()) {
    data_error("metrics: " + std::to_string(preds.rows.size()) + " prediction rows for " + std::to_string(gt.size()) +
               " queries");
  }
}

bool contains(const std::vector<LabelId>& sorted, LabelId l) { return std::binary_search(sorted.begin(), sorted.end(), l); }

std::size_t hits_at(const std::vector<ScoredId>& row, const std::vector<LabelId>& pos, std::size_t k) {
  std::size_t h = 0;
  const std::size_t n = std::min(k, row.size());
  for (std::size_t j = 0; j < n; ++j) h += contains(pos, row[j].id) ? 1 : 0;
  return h;
}

}  // namespace

PropensityModel compute_propensities(std::span<const std::size_t> label_freqs, std::size_t num_train, double a,
                                     double b) {
  if (!(a > 0.0) || !(b >= 0.0)) usage_error("propensity: need A > 0 and B >= 0");
  if (num_train < 3) usage_error("propensity: N_train must be at least 3");
  PropensityModel pm;
  pm.a = a;
  pm.b = b;
  pm.num_train = num_train;
  const double c = (std::log(static_cast<double>(num_train)) - 1.0) * std::pow(b + 1.0, a);
  pm.propensity.reserve(label_freqs.size());
  for (std::size_t f : label_freqs) {
    pm.propensity.push_back(1.0 / (1.0 + c * std::exp(-a * std::log(static_cast<double>(f) + b))));
  }
  return pm;
}

std::vector<std::size_t> label_frequencies(const GroundTruth& gt, std::size_t num_labels) {
  std::vector<std::size_t> f(num_labels, 0);
  for (const auto& row : gt) {
    for (LabelId l : row) {
      if (l >= num_labels) data_error("label_frequencies: label " + std::to_string(l) + " out of range");
      ++f[l];
    }
  }
  return f;
}

double precision_at_k(const PredictionSet& preds, const GroundTruth& gt, std::size_t k) {
  check_k(preds, gt, k);
  if (gt.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    sum += static_cast<double>(hits_at(preds.rows[i], gt[i], k)) / static_cast<double>(k);
  }
  return sum / static_cast<double>(gt.size());
}

double recall_at_k(const PredictionSet& preds, const GroundTruth& gt, std::size_t k) {
  check_k(preds, gt, k);
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i].empty()) continue;
    sum += static_cast<double>(hits_at(preds.rows[i], gt[i], k)) / static_cast<double>(gt[i].size());
    ++counted;
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

double psp_at_k(const PredictionSet& preds, const GroundTruth& gt, const PropensityModel& pm, std::size_t k) {
  check_k(preds, gt, k);
  double num = 0.0;
  double den = 0.0;
  std::vector<double> ideal;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& row = preds.rows[i];
    const std::size_t n = std::min(k, row.size());
    for (std::size_t j = 0; j < n; ++j) {
      if (!contains(gt[i], row[j].id)) continue;
      if (row[j].id >= pm.propensity.size()) data_error("psp: label outside propensity model");
      num += 1.0 / pm.propensity[row[j].id];
    }
    ideal.clear();
    for (LabelId l : gt[i]) {
      if (l >= pm.propensity.size()) data_error("psp: label outside propensity model");
      ideal.push_back(1.0 / pm.propensity[l]);
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const std::size_t m = std::min(k, ideal.size());
    for (std::size_t j = 0; j < m; ++j) den += ideal[j];
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<MetricRow> evaluate_all(const PredictionSet& preds, const GroundTruth& gt, const PropensityModel& pm,
                                    const EvalRequest& req) {
  std::vector<MetricRow> rows;
  for (auto k : req.precision_k) rows.push_back({"P@" + std::to_string(k), precision_at_k(preds, gt, k)});
  for (auto k : req.psp_k) rows.push_back({"PSP@" + std::to_string(k), psp_at_k(preds, gt, pm, k)});
  for (auto k : req.recall_k) rows.push_back({"R@" + std::to_string(k), recall_at_k(preds, gt, k)});
  return rows;
}

std::string format_report(const std::vector<MetricRow>& rows) {
  std::string out;
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.value);
    out += r.name + "\t" + buf + "\n";
  }
  return out;
}

std::string render_svg_bars(const std::vector<MetricRow>& rows, const std::string& title) {
  const int bar_w = 60, gap = 20, plot_h = 240, top = 40, left = 40;
  const int width = left + static_cast<int>(rows.size()) * (bar_w + gap) + gap;
  const int height = top + plot_h + 60;
  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"12\">\n",
                width, height);
  svg += buf;
  std::string escaped;
  for (char c : title) {
    if (c == '<') escaped += "&lt;";
    else if (c == '>') escaped += "&gt;";
    else if (c == '&') escaped += "&amp;";
    else escaped += c;
  }
  std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"20\" font-size=\"14\">%s</text>\n", left, escaped.c_str());
  svg += buf;
  std::snprintf(buf, sizeof(buf), "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", left,
                top + plot_h, width - gap / 2, top + plot_h);
  svg += buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double v = std::clamp(rows[i].value, 0.0, 1.0);
    const int h = static_cast<int>(std::lround(v * plot_h));
    const int x = left + gap + static_cast<int>(i) * (bar_w + gap);
    std::snprintf(buf, sizeof(buf), "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#4a7bb7\"/>\n", x,
                  top + plot_h - h, bar_w, h);
    svg += buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%.4f</text>\n", x + bar_w / 2,
                  top + plot_h - h - 4, rows[i].value);
    svg += buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", x + bar_w / 2,
                  top + plot_h + 18, rows[i].name.c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace vixml
