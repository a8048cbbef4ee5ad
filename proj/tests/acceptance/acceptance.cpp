// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. One line per criterion: "A<n> PASS|FAIL <details>".
// Usage: acceptance [WORK_DIR] [A1 A2 ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "vixml/cli.hpp"
#include "vixml/corpus.hpp"
#include "vixml/gradcheck.hpp"
#include "vixml/metrics.hpp"
#include "vixml/mining.hpp"
#include "vixml/rai.hpp"
#include "vixml/retrieval.hpp"
#include "vixml/rng.hpp"
#include "vixml/trainer.hpp"

#ifndef VIXML_CLI_PATH
#define VIXML_CLI_PATH "vixml"
#endif

namespace fs = std::filesystem;
using namespace vixml;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Matrix random_unit_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = rng.normal();
      ss += m(r, c) * m(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= std::sqrt(ss);
  }
  return m;
}

std::vector<LabelId> iota_ids(std::size_t n) {
  std::vector<LabelId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<LabelId>(i);
  return ids;
}

// ---------------------------------------------------------------------------
// A1: analytic gradients through objective and encoder vs central differences.

// Smallest |margin - <q,p> + <q,n>| over all triplets. Central differences
// are only meaningful when no hinge sits within reach of the step.
double closest_kink(const GradcheckFixture& fx) {
  const Matrix q = embed_bank(fx.params, fx.queries, fx.banks(), fx.embed, 1);
  const Matrix l = embed_bank(fx.params, fx.labels, fx.banks(), fx.embed, 1);
  double best = INFINITY;
  for (std::size_t i = 0; i < q.rows; ++i)
    for (std::size_t pj : fx.positives[i])
      for (std::size_t nk : fx.negatives[i])
        best = std::min(best, std::abs(fx.margin - dot(q.row(i), l.row(pj)) + dot(q.row(i), l.row(nk))));
  return best;
}

Outcome a1_gradients() {
  const auto t0 = Clock::now();
  constexpr std::size_t kFixtures = 60;
  constexpr double kStep = 1e-4;
  constexpr double kKinkClearance = 1e-2;
  double worst = 0.0;
  std::size_t entries = 0, skipped = 0, checked = 0;
  bool shapes_ok = true;
  for (std::size_t f = 0; checked < kFixtures; ++f) {
    const std::size_t d = 2 + f % 7;  // 2..8
    const GradcheckFixture fx = make_gradcheck_fixture(d, 1000 + f, 8);
    if (closest_kink(fx) < kKinkClearance) {
      ++skipped;
      continue;
    }
    ++checked;
    for (const auto* seqs : {&fx.queries, &fx.labels})
      for (const auto& s : *seqs) shapes_ok &= s.slots.size() <= 8;
    const GradientSet g = fixture_gradient(fx.params, fx, 1);
    EncoderParams p = fx.params;
    auto pt = p.tensors();
    const auto gt = g.tensors();
    for (std::size_t t = 0; t < pt.size(); ++t) {
      for (std::size_t i = 0; i < pt[t]->data.size(); ++i) {
        const double orig = pt[t]->data[i];
        pt[t]->data[i] = orig + kStep;
        const double up = fixture_loss(p, fx);
        pt[t]->data[i] = orig - kStep;
        const double down = fixture_loss(p, fx);
        pt[t]->data[i] = orig;
        const double numeric = (up - down) / (2 * kStep);
        const double analytic = gt[t]->data[i];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
        ++entries;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {shapes_ok && worst < 1e-4 && secs < 60.0,
          "fixtures=" + std::to_string(checked) + " skipped_near_kink=" + std::to_string(skipped) +
              " entries=" + std::to_string(entries) +
              " max_rel_error=" + fmt("%.3e", worst) + " time=" + fmt("%.1fs", secs)};
}

// ---------------------------------------------------------------------------
// A2: blocked MIPS vs exhaustive sort.

Outcome a2_mips() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t mismatches = 0, queries = 0, max_n = 0;
  for (int f = 0; f < 100; ++f) {
    const std::size_t n = f == 0 ? 10000 : 1 + rng.below(f % 10 == 0 ? 10000 : 2000);
    const std::size_t d = 2 + rng.below(15);
    max_n = std::max(max_n, n);
    Matrix e = random_unit_rows(n, d, rng);
    // Exact duplicates exercise the id tie rule.
    for (std::size_t r = 1; r < n; r += 5) std::copy(e.row(r - 1).begin(), e.row(r - 1).end(), e.row(r).begin());
    auto ids = iota_ids(n);
    rng.shuffle(std::span(ids));
    const Matrix qs = random_unit_rows(3, d, rng);
    const std::size_t ks[] = {1, 1 + rng.below(n), n};
    std::vector<EmbeddingIndex> indexes;
    for (std::size_t bs : {std::size_t{1} + rng.below(16), std::size_t{256}, std::size_t{1024}, n + 1})
      indexes.push_back(EmbeddingIndex::build(e, ids, bs));
    for (std::size_t qi = 0; qi < qs.rows; ++qi) {
      std::vector<std::pair<double, LabelId>> oracle;
      for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += qs(qi, c) * e(r, c);
        oracle.push_back({s, ids[r]});
      }
      std::sort(oracle.begin(), oracle.end(),
                [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
      for (std::size_t k : ks) {
        for (const auto& idx : indexes) {
          ++queries;
          const auto got = idx.search_topk(qs.row(qi), k);
          bool same = got.size() == std::min(k, n);
          for (std::size_t j = 0; same && j < got.size(); ++j)
            same = got[j].id == oracle[j].second && got[j].score == oracle[j].first;
          mismatches += !same;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0,
          "fixtures=100 max_labels=" + std::to_string(max_n) + " searches=" + std::to_string(queries) +
              " mismatches=" + std::to_string(mismatches) + " time=" + fmt("%.1fs", secs)};
}

// ---------------------------------------------------------------------------
// A3: metrics vs brute force.

struct MetricOracle {
  const PredictionSet& ps;
  const GroundTruth& gt;
  std::vector<double> prop;

  bool hit(std::size_t i, LabelId l) const { return std::find(gt[i].begin(), gt[i].end(), l) != gt[i].end(); }

  double precision(std::size_t k) const {
    double tot = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      std::size_t h = 0;
      for (std::size_t j = 0; j < std::min(k, ps.rows[i].size()); ++j) h += hit(i, ps.rows[i][j].id);
      tot += double(h) / double(k);
    }
    return tot / double(gt.size());
  }
  double recall(std::size_t k) const {
    double tot = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i].empty()) continue;
      ++n;
      std::size_t h = 0;
      for (std::size_t j = 0; j < std::min(k, ps.rows[i].size()); ++j) h += hit(i, ps.rows[i][j].id);
      tot += double(h) / double(gt[i].size());
    }
    return n ? tot / double(n) : 0.0;
  }
  double psp(std::size_t k) const {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      for (std::size_t j = 0; j < std::min(k, ps.rows[i].size()); ++j)
        if (hit(i, ps.rows[i][j].id)) num += 1.0 / prop[ps.rows[i][j].id];
      std::vector<double> w;
      for (LabelId l : gt[i]) w.push_back(1.0 / prop[l]);
      std::sort(w.rbegin(), w.rend());
      for (std::size_t j = 0; j < std::min(k, w.size()); ++j) den += w[j];
    }
    return den > 0.0 ? num / den : 0.0;
  }
};

Outcome a3_metrics() {
  Rng rng(303);
  double worst = 0.0;
  std::size_t empty_rows = 0;
  for (int f = 0; f < 100; ++f) {
    const std::size_t nq = 1 + rng.below(1000), nl = 100 + rng.below(400);
    GroundTruth gt(nq);
    for (auto& row : gt) {
      const std::size_t c = rng.below(4) == 0 ? 0 : 1 + rng.below(6);
      std::set<LabelId> s;
      while (s.size() < c) s.insert(static_cast<LabelId>(rng.below(nl)));
      row.assign(s.begin(), s.end());
      empty_rows += row.empty();
    }
    PredictionSet ps;
    ps.k = 100;
    for (std::size_t i = 0; i < nq; ++i) {
      std::vector<LabelId> perm = iota_ids(nl);
      rng.shuffle(std::span(perm));
      // Seed some hits near the top.
      for (std::size_t j = 0; j < gt[i].size() && j < 3; ++j) {
        auto it = std::find(perm.begin(), perm.end(), gt[i][j]);
        std::iter_swap(perm.begin() + long(rng.below(8)), it);
      }
      std::vector<ScoredId> row;
      const std::size_t depth = rng.below(10) == 0 ? 60 : 100;  // some short rows
      for (std::size_t j = 0; j < depth; ++j) row.push_back({perm[j], 1.0 - 0.001 * double(j)});
      ps.rows.push_back(row);
    }
    const std::size_t ntrain = 3 + rng.below(5000);
    std::vector<std::size_t> freq(nl);
    for (auto& x : freq) x = rng.below(50);
    const double a = 0.55, b = 1.5;
    MetricOracle o{ps, gt, {}};
    const double c = (std::log(double(ntrain)) - 1.0) * std::pow(b + 1.0, a);
    for (std::size_t l = 0; l < nl; ++l) o.prop.push_back(1.0 / (1.0 + c * std::exp(-a * std::log(double(freq[l]) + b))));
    const auto pm = compute_propensities(freq, ntrain, a, b);
    for (std::size_t l = 0; l < nl; ++l) worst = std::max(worst, std::abs(pm.propensity[l] - o.prop[l]));
    for (std::size_t k : {1, 5}) {
      worst = std::max(worst, std::abs(precision_at_k(ps, gt, k) - o.precision(k)));
      worst = std::max(worst, std::abs(psp_at_k(ps, gt, pm, k) - o.psp(k)));
    }
    for (std::size_t k : {10, 100}) worst = std::max(worst, std::abs(recall_at_k(ps, gt, k) - o.recall(k)));
  }
  return {worst <= 1e-12 && empty_rows > 0,
          "fixtures=100 empty_rows=" + std::to_string(empty_rows) + " max_abs_diff=" + fmt("%.3e", worst)};
}

// ---------------------------------------------------------------------------
// Shared training setup for A4-A6.

TrainConfig experiment_config(PromptMode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.d = 32;
  cfg.epochs = 30;
  cfg.optimizer.kind = OptimizerKind::kAdam;
  cfg.optimizer.learning_rate = 1e-2;
  cfg.seed = 1;
  return cfg;
}

struct Trained {
  EncoderParams params;
  Vocab vocab;
  TrainConfig cfg;
  Matrix test_q, labels, train_q;
};

Trained train_and_embed(const SynthCorpus& c, const TrainConfig& cfg) {
  Trained t;
  t.cfg = cfg;
  t.vocab = build_vocab(vocab_corpus(c.train.data), cfg.vocab_max_size);
  t.params = round_to_f32(train(c.train, t.vocab, cfg).params);
  const InferenceSetup setup = InferenceSetup::from(cfg);
  auto bank = [](const std::optional<ImageBank>& b) { return b ? &*b : nullptr; };
  t.test_q = embed_texts(t.params, c.test.data.query_texts, BankSide::kQuery, bank(c.test.query_images), t.vocab, setup);
  t.labels = embed_texts(t.params, c.train.data.label_texts, BankSide::kLabel, bank(c.train.label_images), t.vocab, setup);
  t.train_q = embed_texts(t.params, c.train.data.query_texts, BankSide::kQuery, bank(c.train.query_images), t.vocab, setup);
  return t;
}

SynthCorpus experiment_corpus(double ambiguity) {
  SynthConfig sc;  // 2000 train / 500 test queries, 500 labels, 50 clusters
  sc.ambiguity_fraction = ambiguity;
  sc.seed = 1;
  return generate_synthetic(sc);
}

double p_at_1(const PredictionSet& ps, const GroundTruth& gt, const std::vector<bool>* only = nullptr) {
  std::size_t hits = 0, n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (only && !(*only)[i]) continue;
    ++n;
    hits += !ps.rows[i].empty() && std::binary_search(gt[i].begin(), gt[i].end(), ps.rows[i][0].id);
  }
  return n ? double(hits) / double(n) : 0.0;
}

struct A4State {
  SynthCorpus corpus;
  Trained model;
  PredictionSet base;
};
std::optional<A4State> g_a4;

A4State& a4_state() {
  if (!g_a4) {
    A4State s{experiment_corpus(0.0), {}, {}};
    s.model = train_and_embed(s.corpus, experiment_config(PromptMode::kDecoderText));
    s.base = predict_all(EmbeddingIndex::build(s.model.labels, iota_ids(s.model.labels.rows)), s.model.test_q, 100);
    g_a4 = std::move(s);
  }
  return *g_a4;
}

Outcome a4_text_learning() {
  const auto t0 = Clock::now();
  A4State& s = a4_state();
  const double secs = seconds_since(t0);
  const auto& gt = s.corpus.test.data.ground_truth;
  const double p1 = precision_at_k(s.base, gt, 1);
  const double r10 = recall_at_k(s.base, gt, 10);
  return {p1 >= 0.90 && r10 >= 0.95 && secs < 300.0 && s.model.cfg.epochs <= 50,
          "mode=decoder_text epochs=" + std::to_string(s.model.cfg.epochs) + " P@1=" + fmt("%.4f", p1) +
              " R@10=" + fmt("%.4f", r10) + " time=" + fmt("%.1fs", secs)};
}

Outcome a5_multimodal_uplift() {
  const auto t0 = Clock::now();
  const SynthCorpus c = experiment_corpus(0.5);
  double p1[2];
  const PromptMode modes[2] = {PromptMode::kDecoderText, PromptMode::kDecoderFused};
  for (int i = 0; i < 2; ++i) {
    const Trained t = train_and_embed(c, experiment_config(modes[i]));
    const auto ps = predict_all(EmbeddingIndex::build(t.labels, iota_ids(t.labels.rows)), t.test_q, 1);
    p1[i] = p_at_1(ps, c.test.data.ground_truth, &c.test_ambiguous);
  }
  const double gap = 100.0 * (p1[1] - p1[0]);
  std::size_t n_amb = 0;
  for (bool b : c.test_ambiguous) n_amb += b;
  return {gap >= 15.0, "ambiguous_test_queries=" + std::to_string(n_amb) + " text_P@1=" + fmt("%.4f", p1[0]) +
                           " fused_P@1=" + fmt("%.4f", p1[1]) + " gap_points=" + fmt("%.1f", gap) +
                           " time=" + fmt("%.1fs", seconds_since(t0))};
}

Outcome a6_rai() {
  A4State& s = a4_state();
  const auto& tr = s.corpus.train.data;
  const auto label_idx = EmbeddingIndex::build(s.model.labels, iota_ids(s.model.labels.rows));
  const auto train_idx = EmbeddingIndex::build(s.model.train_q, iota_ids(s.model.train_q.rows));
  RaiConfig cfg;
  cfg.lambda = 0.9;
  cfg.temperature = 0.05;
  cfg.k_search = 100;
  cfg.output_k = 100;
  const auto rai = rai_predict_all(s.model.test_q, label_idx, train_idx, tr.ground_truth, cfg);
  const auto& gt = s.corpus.test.data.ground_truth;
  const double base_p1 = p_at_1(s.base, gt), rai_p1 = p_at_1(rai, gt);

  cfg.lambda = 1.0;
  const auto ident = rai_predict_all(s.model.test_q, label_idx, train_idx, tr.ground_truth, cfg);
  std::size_t same = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    bool eq = ident.rows[i].size() == s.base.rows[i].size();
    for (std::size_t j = 0; eq && j < ident.rows[i].size(); ++j) eq = ident.rows[i][j].id == s.base.rows[i][j].id;
    same += eq;
  }
  return {rai_p1 >= base_p1 && same == gt.size(),
          "base_P@1=" + fmt("%.4f", base_p1) + " rai_P@1=" + fmt("%.4f", rai_p1) + " lambda1_identical=" +
              std::to_string(same) + "/" + std::to_string(gt.size())};
}

// ---------------------------------------------------------------------------
// A7: golden slot listings. Vocabulary of the fixture: <pad>=0 <unk>=1
// <|endoftext|>=2, then by frequency: this=3 product=4 text=5 and=6 its=7
// image=8 alpha=9 beta=10 gamma=11. T1 = 3 4 5, T2 = 6 7 5, I1 = 3 4 8,
// I2 = 6 7 8; text E = 9 10 11; images q:0:0 and q:0:1.

std::string with_padding(const std::string& valid, std::size_t n_valid, std::size_t max_len) {
  std::string s = valid;
  for (std::size_t k = n_valid; k < max_len; ++k) s += "pad\t0\t" + std::to_string(k) + "\t0\n";
  return s;
}

Outcome a7_golden() {
  constexpr std::size_t kLen = 16;
  struct Golden {
    const char* mode;
    std::size_t n;
    const char* body;
  };
  const Golden goldens[] = {
      {"encoder_plain", 3, "text\t9\t0\t1\ntext\t10\t1\t1\ntext\t11\t2\t1\n"},
      {"prefix_text", 6,
       "text_prefix\t3\t0\t1\ntext_prefix\t4\t1\t1\ntext_prefix\t5\t2\t1\n"
       "text\t9\t3\t1\ntext\t10\t4\t1\ntext\t11\t5\t1\n"},
      {"decoder_text", 7,
       "text_prefix\t3\t0\t1\ntext_prefix\t4\t1\t1\ntext_prefix\t5\t2\t1\n"
       "text\t9\t3\t1\ntext\t10\t4\t1\ntext\t11\t5\t1\neos\t2\t6\t1\n"},
      {"image_first_eos", 6,
       "image\tq:0:0\t0\t1\nimage\tq:0:1\t1\t1\ntext\t9\t2\t1\ntext\t10\t3\t1\ntext\t11\t4\t1\neos\t2\t5\t1\n"},
      {"image_last_eos", 6,
       "text\t9\t0\t1\ntext\t10\t1\t1\ntext\t11\t2\t1\nimage\tq:0:0\t3\t1\nimage\tq:0:1\t4\t1\neos\t2\t5\t1\n"},
      {"image_prefix_first", 12,
       "image_prefix\t3\t0\t1\nimage_prefix\t4\t1\t1\nimage_prefix\t8\t2\t1\n"
       "image\tq:0:0\t3\t1\nimage\tq:0:1\t4\t1\n"
       "text_prefix\t6\t5\t1\ntext_prefix\t7\t6\t1\ntext_prefix\t5\t7\t1\n"
       "text\t9\t8\t1\ntext\t10\t9\t1\ntext\t11\t10\t1\neos\t2\t11\t1\n"},
      {"decoder_fused", 12,
       "text_prefix\t3\t0\t1\ntext_prefix\t4\t1\t1\ntext_prefix\t5\t2\t1\n"
       "text\t9\t3\t1\ntext\t10\t4\t1\ntext\t11\t5\t1\n"
       "image_prefix\t6\t6\t1\nimage_prefix\t7\t7\t1\nimage_prefix\t8\t8\t1\n"
       "image\tq:0:0\t9\t1\nimage\tq:0:1\t10\t1\neos\t2\t11\t1\n"},
  };
  std::size_t matched = 0;
  std::set<std::string> distinct;
  std::string failures;
  bool ordering = false;
  for (const auto& g : goldens) {
    const std::string got = golden_fixture_listing(g.mode, kLen, 3);
    distinct.insert(got);
    if (got == with_padding(g.body, g.n, kLen)) {
      ++matched;
    } else {
      failures += std::string(" ") + g.mode;
    }
    if (std::string(g.mode) == "decoder_fused") {
      // Text before images before EOS.
      std::istringstream in(got);
      std::string line;
      std::size_t idx = 0, last_text = 0, first_image = SIZE_MAX, eos = 0;
      while (std::getline(in, line)) {
        const std::string kind = line.substr(0, line.find('\t'));
        if (kind == "text") last_text = idx;
        if (kind == "image") first_image = std::min(first_image, idx);
        if (kind == "eos") eos = idx;
        ++idx;
      }
      ordering = last_text < first_image && first_image < eos;
    }
  }
  return {matched == 7 && distinct.size() == 7 && ordering,
          "matched=" + std::to_string(matched) + "/7 distinct=" + std::to_string(distinct.size()) +
              " decoder_fused_ordering=" + (ordering ? "ok" : "violated") + (failures.empty() ? "" : " mismatch:" + failures)};
}

// ---------------------------------------------------------------------------
// A8: CLI determinism across runs and thread counts.

int run_cli_process(const std::vector<std::string>& args) {
  std::string cmd = std::string("'") + VIXML_CLI_PATH + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

Outcome a8_determinism(const fs::path& work) {
  const fs::path dir = work / "a8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  SynthConfig sc;
  sc.num_queries = 600;
  sc.num_test_queries = 100;
  sc.num_labels = 200;
  sc.num_clusters = 20;
  sc.ambiguity_fraction = 0.5;
  sc.seed = 8;
  const SynthCorpus c = generate_synthetic(sc);
  write_split((dir / "train").string(), c.train);
  write_file_atomic((dir / "config.txt").string(),
                    "mode = decoder_fused\nd = 16\nepochs = 7\nrefresh_every = 3\noptimizer = adam\n"
                    "centroid_alpha = 0.9\nseed = 5\n");
  const std::vector<std::pair<std::string, std::string>> runs = {{"run_a", "1"}, {"run_b", "1"}, {"run_t8", "8"}};
  for (const auto& [name, threads] : runs) {
    const int rc = run_cli_process({"train", "--config", (dir / "config.txt").string(), "--data", (dir / "train").string(),
                                    "--out", (dir / name).string(), "--threads", threads});
    if (rc != 0) return {false, "train " + name + " exited with " + std::to_string(rc)};
  }
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir / "run_a")) {
    const std::string n = e.path().filename().string();
    if (n.ends_with(".vixp") || n == "train_log.tsv" || n == "config.txt" || n == "vocab.txt") files.push_back(n);
  }
  std::sort(files.begin(), files.end());
  std::size_t identical = 0;
  std::string diff;
  for (const auto& f : files) {
    const std::string a = read_file((dir / "run_a" / f).string());
    bool ok = true;
    for (const char* other : {"run_b", "run_t8"}) {
      const fs::path p = dir / other / f;
      ok &= fs::exists(p) && read_file(p.string()) == a;
    }
    identical += ok;
    if (!ok) diff += " " + f;
  }
  std::size_t ckpts = 0;
  for (const auto& f : files) ckpts += f.ends_with(".vixp");
  return {identical == files.size() && ckpts == 4,
          "compared=" + std::to_string(files.size()) + " (checkpoints=" + std::to_string(ckpts) +
              ") identical_across_runs_and_threads_1_vs_8=" + std::to_string(identical) + (diff.empty() ? "" : " differ:" + diff)};
}

// ---------------------------------------------------------------------------
// A9: centroid refresh vs naive averaging.

Outcome a9_centroids() {
  Rng rng(909);
  double worst = 0.0;
  std::size_t degenerate = 0, kept_ok = 0, kept_total = 0;
  for (int f = 0; f < 100; ++f) {
    const std::size_t m = 1 + rng.below(200), l = 1 + rng.below(60), d = 1 + rng.below(12);
    const Matrix e = random_unit_rows(m, d, rng);
    Matrix q = e;
    GroundTruth gt(m);
    for (auto& row : gt) {
      std::set<LabelId> s;
      for (std::size_t c = rng.below(4); c > 0; --c) s.insert(static_cast<LabelId>(rng.below(l)));
      row.assign(s.begin(), s.end());
    }
    // Force an antipodal pair onto a fresh label when there is room.
    if (m >= 2 && l >= 2) {
      const LabelId dl = static_cast<LabelId>(l - 1);
      for (auto& row : gt) std::erase(row, dl);
      for (std::size_t c = 0; c < d; ++c) q(1, c) = -q(0, c);
      gt[0].push_back(dl);
      gt[1].push_back(dl);
    }
    LabelCentroids prev = LabelCentroids::empty(l, d);
    const Matrix pr = random_unit_rows(l, d, rng);
    for (std::size_t i = 0; i < l; ++i)
      if (rng.below(2)) {
        std::copy(pr.row(i).begin(), pr.row(i).end(), prev.centroids.row(i).begin());
        prev.valid[i] = 1;
      }
    const LabelCentroids got = refresh_centroids(q, gt, prev);

    for (std::size_t lab = 0; lab < l; ++lab) {
      std::vector<double> sum(d, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (std::find(gt[i].begin(), gt[i].end(), lab) == gt[i].end()) continue;
        ++count;
        for (std::size_t c = 0; c < d; ++c) sum[c] += q(i, c);
      }
      double norm = 0.0;
      for (std::size_t c = 0; c < d; ++c) norm += (sum[c] / double(count)) * (sum[c] / double(count));
      norm = std::sqrt(norm);
      if (count == 0 || norm == 0.0) {
        degenerate += count > 0;
        ++kept_total;
        const bool same = std::equal(got.centroids.row(lab).begin(), got.centroids.row(lab).end(),
                                     prev.centroids.row(lab).begin()) &&
                          got.valid[lab] == prev.valid[lab];
        kept_ok += same;
        continue;
      }
      if (!got.valid[lab]) worst = std::max(worst, 1.0);
      for (std::size_t c = 0; c < d; ++c)
        worst = std::max(worst, std::abs(got.centroids(lab, c) - (sum[c] / double(count)) / norm));
    }
  }
  return {worst <= 1e-12 && kept_ok == kept_total && degenerate > 0,
          "fixtures=100 max_abs_diff=" + fmt("%.3e", worst) + " zero_mean_labels=" + std::to_string(degenerate) +
              " kept_prior=" + std::to_string(kept_ok) + "/" + std::to_string(kept_total)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "vixml_acceptance";
  fs::create_directories(work);
  std::set<std::string> only;
  for (int i = 2; i < argc; ++i) only.insert(argv[i]);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1_gradients},
      {"A2", a2_mips},
      {"A3", a3_metrics},
      {"A4", a4_text_learning},
      {"A5", a5_multimodal_uplift},
      {"A6", a6_rai},
      {"A7", a7_golden},
      {"A8", [&] { return a8_determinism(work); }},
      {"A9", a9_centroids},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
