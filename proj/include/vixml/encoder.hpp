// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vixml/common.hpp"
#include "vixml/corpus.hpp"
#include "vixml/prompt.hpp"

namespace vixml {

enum class Directionality : std::uint8_t { kBidirectional = 0, kCausal = 1 };
enum class Pooling : std::uint8_t { kMean, kLastToken };

std::string_view to_string(Directionality d);
Directionality parse_directionality(std::string_view s);
std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view s);

/// The trainable tensors, in checkpoint order. Row-vector convention:
/// projections are x * W with W of shape d x d; the image projection maps a
/// bank vector v to W v + b with W of shape d x m.
struct ParamTensors {
  Matrix token_table;   // |V| x d
  Matrix image_proj_w;  // d x m
  Matrix image_proj_b;  // 1 x d
  Matrix attn_wq;       // d x d
  Matrix attn_wk;
  Matrix attn_wv;
  Matrix attn_wo;

  static constexpr std::size_t kNumTensors = 7;
  std::array<Matrix*, kNumTensors> tensors() {
    return {&token_table, &image_proj_w, &image_proj_b, &attn_wq, &attn_wk, &attn_wv, &attn_wo};
  }
  std::array<const Matrix*, kNumTensors> tensors() const {
    return {&token_table, &image_proj_w, &image_proj_b, &attn_wq, &attn_wk, &attn_wv, &attn_wo};
  }
  static const std::array<const char*, kNumTensors>& tensor_names();

  /// Same shapes, all zero.
  ParamTensors zeros_like() const;
  bool operator==(const ParamTensors&) const = default;
};

/// Single-head residual self-attention encoder over token and projected
/// image slots, followed by pooling and L2 normalization.
struct EncoderParams : ParamTensors {
  std::size_t d = 0;
  std::size_t m = 0;
  std::size_t vocab_size = 0;
  Directionality directionality = Directionality::kBidirectional;
  bool operator==(const EncoderParams&) const = default;
};

/// Gradient of a scalar objective w.r.t. every EncoderParams tensor. Image
/// banks are frozen and have no entry here.
struct GradientSet : ParamTensors {
  bool operator==(const GradientSet&) const = default;
};

struct EmbedOptions {
  Pooling pooling = Pooling::kMean;
};

using Embedding = std::vector<double>;

/// Entries i.i.d. uniform in [-0.05, 0.05].
EncoderParams init_params(std::size_t d, std::size_t m, std::size_t vocab_size, Directionality dir,
                          std::uint64_t seed);

/// Intermediate values of one forward pass over the valid slots.
struct ForwardCache {
  std::size_t n = 0;  // valid slots
  Matrix x;           // n x d slot inputs
  Matrix q, k, v;     // n x d
  Matrix attn;        // n x n softmax weights
  Matrix ctx;         // n x d, attn * v
  Matrix z;           // n x d, x + ctx * Wo
  std::vector<double> pooled;
  double pooled_norm = 0.0;
  Embedding h;  // unit-norm output
};

ForwardCache forward(const EncoderParams& p, const PromptSequence& s, const ImageBanks& banks,
                     const EmbedOptions& opts = {});

Embedding embed(const EncoderParams& p, const PromptSequence& s, const ImageBanks& banks,
                const EmbedOptions& opts = {});

/// Row i is embed(sequences[i]).
Matrix embed_bank(const EncoderParams& p, std::span<const PromptSequence> sequences, const ImageBanks& banks,
                  const EmbedOptions& opts = {}, unsigned threads = 0);

/// Exact gradient of sum_i <upstream.row(i), embed(sequences[i])>.
/// Per-sequence contributions are computed in parallel and summed in
/// sequence order, so the result does not depend on `threads`.
GradientSet backward(const EncoderParams& p, std::span<const PromptSequence> sequences, const ImageBanks& banks,
                     const Matrix& upstream, const EmbedOptions& opts = {}, unsigned threads = 0);

/// Checkpoint: "VIXP", u32 version, u32 d, u32 m, u32 vocab_size,
/// u8 directionality, then every tensor row-major as little-endian f32.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::string serialize_checkpoint(const EncoderParams& p);
EncoderParams parse_checkpoint(const std::string& bytes, const std::string& context = "checkpoint");
void save_checkpoint(const std::string& path, const EncoderParams& p);
EncoderParams load_checkpoint(const std::string& path);

/// Rounds every entry to float precision (what a checkpoint round trip does).
EncoderParams round_to_f32(const EncoderParams& p);

}  // namespace vixml
