// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vixml/config.hpp"
#include "vixml/corpus.hpp"
#include "vixml/encoder.hpp"
#include "vixml/objective.hpp"
#include "vixml/prompt.hpp"

namespace vixml {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, Adam only
};

struct OptimizerState {
  std::size_t t = 0;
  ParamTensors m, v;
};

OptimizerState make_optimizer_state(const EncoderParams& p);

/// One update. sgd: p -= lr * g. adam: bias-corrected moments with
/// decoupled weight decay. Throws a numeric error on non-finite results.
void step(EncoderParams& params, const GradientSet& grads, OptimizerState& state, const OptimizerConfig& cfg);

struct TrainConfig {
  PromptMode mode = PromptMode::kDecoderText;
  std::size_t max_len = 32;
  std::size_t image_cap = 3;
  std::size_t d = 32;
  std::size_t m = 0;  // 0: take the image bank dimension (1 without banks)
  /// Empty: causal for decoder templates, bidirectional otherwise.
  std::string directionality;
  Pooling pooling = Pooling::kMean;
  double margin = 0.3;
  Reduction reduction = Reduction::kSum;
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  OptimizerConfig optimizer;
  std::size_t refresh_every = 5;
  std::size_t num_clusters = 0;  // 0: max(1, M / batch_size)
  std::size_t cluster_iters = 5;
  std::size_t negatives_per_query = 5;
  double centroid_alpha = 1.0;
  std::size_t vocab_max_size = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  Directionality resolved_directionality() const;
  EmbedOptions embed_options() const { return {pooling}; }

  /// Throws usage errors on out-of-range values.
  void validate() const;

  /// Keys understood by from_key_values.
  static const std::vector<std::string>& keys();
  static TrainConfig from_key_values(const KeyValues& kv);
  KeyValues to_key_values() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double active_fraction = 0.0;
  double seconds = 0.0;
};

struct RefreshLog {
  std::size_t epoch = 0;
  std::size_t num_clusters = 0;
  std::size_t min_cluster = 0;
  std::size_t max_cluster = 0;
  std::size_t valid_centroids = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::vector<RefreshLog> refreshes;
};

/// "epoch\tloss\tactive_frac" with a header line. Depends only on config
/// and seed, never on timing or thread count.
std::string format_train_log(const TrainLog& log);

/// "epoch\tseconds" wall time per epoch.
std::string format_timing(const TrainLog& log);

struct TrainResult {
  EncoderParams params;
  TrainLog log;
};

struct TrainHooks {
  /// Called after each refresh phase with the current parameters.
  std::function<void(std::size_t epoch, const EncoderParams&)> on_refresh;
  std::function<void(const EpochLog&)> on_epoch;
};

/// Texts used to build the vocabulary: queries, labels, then the prefix
/// strings so the templates tokenize without UNK.
std::vector<std::string> vocab_corpus(const Dataset& d, const PromptPrefixes& prefixes = {});

/// Siamese training with the triplet objective over intra-cluster batches.
/// Every `refresh_every` epochs the train queries are re-embedded,
/// re-clustered, and label centroids are refreshed. Each step samples one
/// positive per query, mines in-batch hard negatives among the positives of
/// the batch, and updates the shared encoder.
TrainResult train(const SplitData& train_split, const Vocab& vocab, const TrainConfig& cfg, const TrainHooks& hooks = {});

/// How texts are turned into sequences at inference time.
struct InferenceSetup {
  PromptMode mode = PromptMode::kDecoderText;
  std::size_t max_len = 32;
  std::size_t image_cap = 3;
  EmbedOptions embed;
  unsigned threads = 0;

  static InferenceSetup from(const TrainConfig& cfg) {
    return {cfg.mode, cfg.max_len, cfg.image_cap, cfg.embed_options(), cfg.threads};
  }
};

Matrix embed_texts(const EncoderParams& p, const std::vector<std::string>& texts, BankSide side,
                   const ImageBank* bank, const Vocab& vocab, const InferenceSetup& setup);

}  // namespace vixml
