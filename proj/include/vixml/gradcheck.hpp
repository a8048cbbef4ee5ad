// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "vixml/corpus.hpp"
#include "vixml/encoder.hpp"
#include "vixml/objective.hpp"
#include "vixml/prompt.hpp"

namespace vixml {

/// Small random problem: a handful of query and label sequences (random
/// template, tokens and images), triplet index lists, and parameters drawn
/// at a larger scale than init_params so attention is far from uniform.
struct GradcheckFixture {
  Vocab vocab;
  ImageBank query_bank;
  ImageBank label_bank;
  std::vector<PromptSequence> queries;
  std::vector<PromptSequence> labels;
  std::vector<std::vector<std::size_t>> positives;
  std::vector<std::vector<std::size_t>> negatives;
  double margin = 1.0;
  EmbedOptions embed;
  EncoderParams params;

  ImageBanks banks() const { return {&query_bank, &label_bank}; }
};

GradcheckFixture make_gradcheck_fixture(std::size_t d, std::uint64_t seed, std::size_t max_len = 8);

/// Embeds every sequence with `p` and evaluates the triplet loss.
double fixture_loss(const EncoderParams& p, const GradcheckFixture& f);

/// Analytic gradient: triplet_grad followed by encoder backward.
GradientSet fixture_gradient(const EncoderParams& p, const GradcheckFixture& f, unsigned threads = 1);

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
/// gradient is ~0 from dividing finite-difference noise by ~0.
inline constexpr double kRelErrorFloor = 1e-3;
double relative_error(double analytic, double numeric);

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

/// Central differences with step h over every parameter entry.
GradcheckReport gradcheck(const GradcheckFixture& f, double h = 1e-4);

}  // namespace vixml
