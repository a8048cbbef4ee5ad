// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <queue>

#include "vixml/parallel.hpp"

namespace vixml {

EmbeddingIndex EmbeddingIndex::build(const Matrix& embs, std::vector<LabelId> ids, std::size_t block_size) {
  if (ids.size() != embs.rows) usage_error("build_index: id map does not match rows");
  if (block_size == 0) usage_error("build_index: block_size must be positive");
  EmbeddingIndex idx;
  idx.dim_ = embs.cols;
  idx.block_size_ = block_size;
  for (std::size_t r = 0; r < embs.rows; ++r) {
    if (std::abs(l2_norm(embs.row(r)) - 1.0) > 1e-6) {
      data_error("build_index: row " + std::to_string(r) + " is not unit-norm");
    }
  }
  for (std::size_t start = 0; start < embs.rows; start += block_size) {
    const std::size_t n = std::min(block_size, embs.rows - start);
    Matrix b(n, embs.cols);
    std::copy_n(embs.data.begin() + static_cast<std::ptrdiff_t>(start * embs.cols), n * embs.cols, b.data.begin());
    idx.blocks_.push_back(std::move(b));
  }
  idx.ids_ = std::move(ids);
  return idx;
}

std::vector<ScoredId> EmbeddingIndex::search_topk(std::span<const double> query, std::size_t k) const {
  if (k == 0) usage_error("search_topk: k must be positive");
  if (query.size() != dim_ && size() > 0) usage_error("search_topk: query dimension mismatch");
  // Max-heap on "worse": the root is the weakest kept entry.
  auto worse = [](const ScoredId& a, const ScoredId& b) { return ranks_before(a, b); };
  std::priority_queue<ScoredId, std::vector<ScoredId>, decltype(worse)> heap(worse);
  std::size_t row = 0;
  for (const Matrix& block : blocks_) {
    for (std::size_t r = 0; r < block.rows; ++r, ++row) {
      const ScoredId cand{ids_[row], dot(query, block.row(r))};
      if (heap.size() < k) {
        heap.push(cand);
      } else if (ranks_before(cand, heap.top())) {
        heap.pop();
        heap.push(cand);
      }
    }
  }
  std::vector<ScoredId> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

PredictionSet predict_all(const EmbeddingIndex& idx, const Matrix& queries, std::size_t k, unsigned threads) {
  if (k == 0) usage_error("predict_all: k must be positive");
  PredictionSet ps;
  ps.k = k;
  ps.rows.resize(queries.rows);
  parallel_for(queries.rows, threads, [&](std::size_t i) { ps.rows[i] = idx.search_topk(queries.row(i), k); });
  return ps;
}

std::string format_predictions(const PredictionSet& ps) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < ps.rows.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    for (std::size_t j = 0; j < ps.rows[i].size(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof(buf), "%u:%.6f", static_cast<unsigned>(ps.rows[i][j].id), ps.rows[i][j].score);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_predictions(const std::string& path, const PredictionSet& ps) { write_file_atomic(path, format_predictions(ps)); }

PredictionSet read_predictions(const std::string& path) {
  const std::string content = read_file(path);
  PredictionSet ps;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) nl = content.size();
    const std::string line = content.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    const std::string ctx = path + ":" + std::to_string(lineno) + ": ";
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) data_error(ctx + "missing tab");
    if (line.substr(0, tab) != std::to_string(lineno - 1)) data_error(ctx + "query index out of order");
    std::vector<ScoredId> row;
    std::size_t pos = tab + 1;
    while (pos < line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string item = line.substr(pos, comma - pos);
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos) data_error(ctx + "malformed entry \"" + item + "\"");
      ScoredId s;
      const auto r1 = std::from_chars(item.data(), item.data() + colon, s.id);
      char* end = nullptr;
      const std::string score_str = item.substr(colon + 1);
      s.score = std::strtod(score_str.c_str(), &end);
      if (r1.ec != std::errc() || r1.ptr != item.data() + colon || score_str.empty() || *end != '\0') {
        data_error(ctx + "malformed entry \"" + item + "\"");
      }
      row.push_back(s);
      pos = comma + 1;
    }
    ps.k = std::max(ps.k, row.size());
    ps.rows.push_back(std::move(row));
  }
  return ps;
}

}  // namespace vixml
