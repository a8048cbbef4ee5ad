// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "vixml/mining.hpp"
#include "vixml/rng.hpp"

namespace vixml {
namespace {

// Shortest %g form that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Seed stream tags.
constexpr std::uint64_t kInitTag = 10;
constexpr std::uint64_t kClusterTag = 1000000;
constexpr std::uint64_t kBatchTag = 2000000;
constexpr std::uint64_t kPositiveTag = 3000000;

// h <- normalize(alpha * h + (1 - alpha) * c); the pre-normalization norm
// goes to norm_out for the backward pass.
void mix_with_centroid(std::span<double> h, std::span<const double> centroid, double alpha, double& norm_out) {
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = alpha * h[i] + (1.0 - alpha) * centroid[i];
  norm_out = normalize_in_place(h);
  if (!(norm_out > 0.0)) numeric_error("centroid mix produced a zero vector");
}

}  // namespace

OptimizerState make_optimizer_state(const EncoderParams& p) {
  OptimizerState s;
  s.m = p.zeros_like();
  s.v = p.zeros_like();
  return s;
}

void step(EncoderParams& params, const GradientSet& grads, OptimizerState& state, const OptimizerConfig& cfg) {
  auto ps = params.tensors();
  auto gs = grads.tensors();
  for (std::size_t t = 0; t < ParamTensors::kNumTensors; ++t) {
    if (!ps[t]->same_shape(*gs[t])) usage_error(std::string("step: shape mismatch in ") + ParamTensors::tensor_names()[t]);
  }
  if (cfg.kind == OptimizerKind::kSgd) {
    for (std::size_t t = 0; t < ParamTensors::kNumTensors; ++t) {
      auto& p = ps[t]->data;
      const auto& g = gs[t]->data;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * g[i];
      if (!all_finite(p)) numeric_error(std::string("step: non-finite update in ") + ParamTensors::tensor_names()[t]);
    }
    return;
  }
  if (state.m.token_table.rows != params.token_table.rows) state = make_optimizer_state(params);
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  auto ms = state.m.tensors();
  auto vs = state.v.tensors();
  for (std::size_t t = 0; t < ParamTensors::kNumTensors; ++t) {
    auto& p = ps[t]->data;
    const auto& g = gs[t]->data;
    auto& m = ms[t]->data;
    auto& v = vs[t]->data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.learning_rate * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * p[i]);
    }
    if (!all_finite(p)) numeric_error(std::string("step: non-finite update in ") + ParamTensors::tensor_names()[t]);
  }
}

Directionality TrainConfig::resolved_directionality() const {
  if (directionality.empty()) return is_decoder_mode(mode) ? Directionality::kCausal : Directionality::kBidirectional;
  return parse_directionality(directionality);
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { usage_error("train config: " + m); };
  if (epochs < 1) bad("epochs must be at least 1");
  if (d == 0) bad("d must be positive");
  if (max_len == 0) bad("max_len must be positive");
  if (batch_size < 2) bad("batch_size must be at least 2");
  if (refresh_every == 0) bad("refresh_every must be positive");
  if (negatives_per_query == 0) bad("negatives_per_query must be positive");
  if (margin < 0.0) bad("margin must be non-negative");
  if (!(optimizer.learning_rate >= 0.0)) bad("learning_rate must be non-negative");
  if (!(centroid_alpha >= 0.0 && centroid_alpha <= 1.0)) bad("centroid_alpha must be in [0,1]");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    bad("adam betas must be in [0,1)");
  }
  if (vocab_max_size <= Vocab::kNumReserved) bad("vocab_max_size must exceed the reserved ids");
  (void)resolved_directionality();
}

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k = {
      "mode",        "max_len",      "image_cap",     "d",          "m",
      "directionality", "pooling",   "margin",        "loss_reduction", "batch_size",
      "epochs",      "optimizer",    "learning_rate", "beta1",      "beta2",
      "eps",         "weight_decay", "refresh_every", "num_clusters", "cluster_iters",
      "negatives_per_query", "centroid_alpha", "vocab_max_size", "seed", "threads"};
  return k;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) {
  TrainConfig c;
  c.mode = parse_prompt_mode(kv_string(kv, "mode", std::string(to_string(c.mode))));
  c.max_len = kv_size(kv, "max_len", c.max_len);
  c.image_cap = kv_size(kv, "image_cap", c.image_cap);
  c.d = kv_size(kv, "d", c.d);
  c.m = kv_size(kv, "m", c.m);
  c.directionality = kv_string(kv, "directionality", "");
  if (c.directionality == "auto") c.directionality.clear();
  c.pooling = parse_pooling(kv_string(kv, "pooling", "mean"));
  c.margin = kv_double(kv, "margin", c.margin);
  const std::string red = kv_string(kv, "loss_reduction", "sum");
  if (red == "sum") c.reduction = Reduction::kSum;
  else if (red == "mean") c.reduction = Reduction::kMean;
  else usage_error("config key loss_reduction: expected sum or mean");
  c.batch_size = kv_size(kv, "batch_size", c.batch_size);
  c.epochs = kv_size(kv, "epochs", c.epochs);
  const std::string opt = kv_string(kv, "optimizer", "sgd");
  if (opt == "sgd") c.optimizer.kind = OptimizerKind::kSgd;
  else if (opt == "adam") c.optimizer.kind = OptimizerKind::kAdam;
  else usage_error("config key optimizer: expected sgd or adam");
  c.optimizer.learning_rate = kv_double(kv, "learning_rate", c.optimizer.learning_rate);
  c.optimizer.beta1 = kv_double(kv, "beta1", c.optimizer.beta1);
  c.optimizer.beta2 = kv_double(kv, "beta2", c.optimizer.beta2);
  c.optimizer.eps = kv_double(kv, "eps", c.optimizer.eps);
  c.optimizer.weight_decay = kv_double(kv, "weight_decay", c.optimizer.weight_decay);
  c.refresh_every = kv_size(kv, "refresh_every", c.refresh_every);
  c.num_clusters = kv_size(kv, "num_clusters", c.num_clusters);
  c.cluster_iters = kv_size(kv, "cluster_iters", c.cluster_iters);
  c.negatives_per_query = kv_size(kv, "negatives_per_query", c.negatives_per_query);
  c.centroid_alpha = kv_double(kv, "centroid_alpha", c.centroid_alpha);
  c.vocab_max_size = kv_size(kv, "vocab_max_size", c.vocab_max_size);
  c.seed = kv_size(kv, "seed", c.seed);
  c.threads = static_cast<unsigned>(kv_size(kv, "threads", c.threads));
  c.validate();
  return c;
}

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv["mode"] = std::string(to_string(mode));
  kv["max_len"] = std::to_string(max_len);
  kv["image_cap"] = std::to_string(image_cap);
  kv["d"] = std::to_string(d);
  kv["m"] = std::to_string(m);
  kv["directionality"] = std::string(to_string(resolved_directionality()));
  kv["pooling"] = std::string(to_string(pooling));
  kv["margin"] = fmt_double(margin);
  kv["loss_reduction"] = reduction == Reduction::kSum ? "sum" : "mean";
  kv["batch_size"] = std::to_string(batch_size);
  kv["epochs"] = std::to_string(epochs);
  kv["optimizer"] = optimizer.kind == OptimizerKind::kSgd ? "sgd" : "adam";
  kv["learning_rate"] = fmt_double(optimizer.learning_rate);
  kv["beta1"] = fmt_double(optimizer.beta1);
  kv["beta2"] = fmt_double(optimizer.beta2);
  kv["eps"] = fmt_double(optimizer.eps);
  kv["weight_decay"] = fmt_double(optimizer.weight_decay);
  kv["refresh_every"] = std::to_string(refresh_every);
  kv["num_clusters"] = std::to_string(num_clusters);
  kv["cluster_iters"] = std::to_string(cluster_iters);
  kv["negatives_per_query"] = std::to_string(negatives_per_query);
  kv["centroid_alpha"] = fmt_double(centroid_alpha);
  kv["vocab_max_size"] = std::to_string(vocab_max_size);
  kv["seed"] = std::to_string(seed);
  return kv;
}

std::string format_train_log(const TrainLog& log) {
  std::string out = "epoch\tloss\tactive_frac\n";
  char buf[160];
  for (const auto& e : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.9g\t%.6f\n", e.epoch, e.loss, e.active_fraction);
    out += buf;
  }
  return out;
}

std::string format_timing(const TrainLog& log) {
  std::string out = "epoch\tseconds\n";
  char buf[64];
  for (const auto& e : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.3f\n", e.epoch, e.seconds);
    out += buf;
  }
  return out;
}

std::vector<std::string> vocab_corpus(const Dataset& d, const PromptPrefixes& prefixes) {
  std::vector<std::string> corpus = d.query_texts;
  corpus.insert(corpus.end(), d.label_texts.begin(), d.label_texts.end());
  for (const auto* s : {&prefixes.text, &prefixes.text_cont, &prefixes.image, &prefixes.image_cont}) corpus.push_back(*s);
  return corpus;
}

Matrix embed_texts(const EncoderParams& p, const std::vector<std::string>& texts, BankSide side,
                   const ImageBank* bank, const Vocab& vocab, const InferenceSetup& setup) {
  const auto seqs = assemble_all(texts, side, bank, setup.mode, setup.max_len, vocab, setup.image_cap);
  ImageBanks banks;
  (side == BankSide::kQuery ? banks.query : banks.label) = bank;
  return embed_bank(p, seqs, banks, setup.embed, setup.threads);
}

TrainResult train(const SplitData& train_split, const Vocab& vocab, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const Dataset& ds = train_split.data;
  if (ds.split != Split::kTrain) usage_error("train: dataset is not a train split");
  validate_dataset(ds);
  if (ds.num_queries < 2) data_error("train: need at least two train queries");

  const ImageBanks banks = train_split.banks();
  std::size_t m = cfg.m;
  std::size_t bank_dim = 0;
  for (const ImageBank* b : {banks.query, banks.label}) {
    if (b && b->dim() > 0) {
      if (bank_dim && bank_dim != b->dim()) data_error("train: query and label banks differ in dimension");
      bank_dim = b->dim();
    }
  }
  if (m == 0) m = bank_dim ? bank_dim : 1;
  if (bank_dim && m != bank_dim && uses_images(cfg.mode)) {
    usage_error("train: m=" + std::to_string(m) + " does not match image bank dimension " + std::to_string(bank_dim));
  }

  const EmbedOptions eopts = cfg.embed_options();
  const unsigned threads = cfg.threads;
  TrainResult result;
  EncoderParams& params = result.params;
  params = init_params(cfg.d, m, vocab.size(), cfg.resolved_directionality(), mix_seed(cfg.seed, kInitTag));
  OptimizerState opt = make_optimizer_state(params);

  const auto query_seqs =
      assemble_all(ds.query_texts, BankSide::kQuery, banks.query, cfg.mode, cfg.max_len, vocab, cfg.image_cap);
  const auto label_seqs =
      assemble_all(ds.label_texts, BankSide::kLabel, banks.label, cfg.mode, cfg.max_len, vocab, cfg.image_cap);

  const std::size_t num_clusters =
      std::min(ds.num_queries, cfg.num_clusters ? cfg.num_clusters : std::max<std::size_t>(1, ds.num_queries / cfg.batch_size));
  const bool use_centroids = cfg.centroid_alpha < 1.0;
  ClusterAssignment clusters;
  LabelCentroids centroids = LabelCentroids::empty(ds.num_labels, cfg.d);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (epoch % cfg.refresh_every == 0) {
      const Matrix qembs = embed_bank(params, query_seqs, banks, eopts, threads);
      clusters = cluster_queries(qembs, num_clusters, mix_seed(cfg.seed, kClusterTag + epoch), cfg.cluster_iters);
      centroids = refresh_centroids(qembs, ds.ground_truth, centroids);
      const auto sizes = clusters.sizes();
      RefreshLog r;
      r.epoch = epoch;
      r.num_clusters = num_clusters;
      r.min_cluster = *std::min_element(sizes.begin(), sizes.end());
      r.max_cluster = *std::max_element(sizes.begin(), sizes.end());
      r.valid_centroids = static_cast<std::size_t>(std::count(centroids.valid.begin(), centroids.valid.end(), 1));
      result.log.refreshes.push_back(r);
      if (hooks.on_refresh) hooks.on_refresh(epoch, params);
    }

    Rng pos_rng(mix_seed(cfg.seed, kPositiveTag + epoch));
    const auto batches = make_batches(clusters, cfg.batch_size, mix_seed(cfg.seed, kBatchTag + epoch));
    double epoch_loss = 0.0;
    std::size_t epoch_active = 0, epoch_total = 0;

    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      // Candidate pool: every positive of every query in the batch.
      std::vector<LabelId> pool;
      for (std::size_t q : batch) pool.insert(pool.end(), ds.ground_truth[q].begin(), ds.ground_truth[q].end());
      std::sort(pool.begin(), pool.end());
      pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

      std::vector<PromptSequence> seqs;
      seqs.reserve(batch.size() + pool.size());
      for (std::size_t q : batch) seqs.push_back(query_seqs[q]);
      for (LabelId l : pool) seqs.push_back(label_seqs[l]);
      const Matrix embs = embed_bank(params, seqs, banks, eopts, threads);

      TripletBatch tb;
      tb.margin = cfg.margin;
      tb.reduction = cfg.reduction;
      tb.query_embs = Matrix(batch.size(), cfg.d);
      tb.label_embs = Matrix(pool.size(), cfg.d);
      std::copy_n(embs.data.begin(), batch.size() * cfg.d, tb.query_embs.data.begin());
      std::copy(embs.data.begin() + static_cast<std::ptrdiff_t>(batch.size() * cfg.d), embs.data.end(),
                tb.label_embs.data.begin());
      std::vector<double> mix_norm(pool.size(), 1.0);
      std::vector<char> mixed(pool.size(), 0);
      if (use_centroids) {
        for (std::size_t r = 0; r < pool.size(); ++r) {
          if (!centroids.valid[pool[r]]) continue;
          mix_with_centroid(tb.label_embs.row(r), centroids.centroids.row(pool[r]), cfg.centroid_alpha, mix_norm[r]);
          mixed[r] = 1;
        }
      }

      tb.positives.resize(batch.size());
      tb.negatives.resize(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& positives = ds.ground_truth[batch[i]];
        const LabelId chosen = positives[pos_rng.below(positives.size())];
        tb.positives[i] = {static_cast<std::size_t>(std::lower_bound(pool.begin(), pool.end(), chosen) - pool.begin())};
        const auto negs =
            select_hard_negatives(tb.query_embs.row(i), tb.label_embs, pool, positives, cfg.negatives_per_query);
        for (LabelId n : negs) {
          tb.negatives[i].push_back(static_cast<std::size_t>(std::lower_bound(pool.begin(), pool.end(), n) - pool.begin()));
        }
      }

      const TripletGrad tg = triplet_grad(tb);
      if (!std::isfinite(tg.loss)) {
        numeric_error("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      epoch_loss += tg.loss;
      epoch_active += tg.active;
      epoch_total += tg.total;
      if (tg.active == 0) continue;

      Matrix upstream(seqs.size(), cfg.d);
      std::copy(tg.d_query.data.begin(), tg.d_query.data.end(), upstream.data.begin());
      for (std::size_t r = 0; r < pool.size(); ++r) {
        const auto g = tg.d_label.row(r);
        auto dst = upstream.row(batch.size() + r);
        if (!mixed[r]) {
          std::copy(g.begin(), g.end(), dst.begin());
          continue;
        }
        // Through h' = normalize(alpha h + (1-alpha) c) with c held fixed.
        const auto hp = tb.label_embs.row(r);
        const double proj = dot(hp, g);
        for (std::size_t c = 0; c < cfg.d; ++c) {
          dst[c] = cfg.centroid_alpha * (g[c] - hp[c] * proj) / mix_norm[r];
        }
      }
      if (!all_finite(upstream.data)) {
        numeric_error("train: non-finite gradient at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      const GradientSet grads = backward(params, seqs, banks, upstream, eopts, threads);
      step(params, grads, opt, cfg.optimizer);
    }

    EpochLog e;
    e.epoch = epoch;
    e.loss = epoch_loss;
    e.active_fraction = epoch_total ? static_cast<double>(epoch_active) / static_cast<double>(epoch_total) : 0.0;
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.epochs.push_back(e);
    if (hooks.on_epoch) hooks.on_epoch(e);
  }
  return result;
}

}  // namespace vixml
