// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "vixml/rng.hpp"

namespace vixml {
namespace {

constexpr PromptMode kAllModes[] = {PromptMode::kEncoderPlain,  PromptMode::kPrefixText,    PromptMode::kDecoderText,
                                    PromptMode::kImageFirstEos, PromptMode::kImageLastEos,  PromptMode::kImagePrefixFirst,
                                    PromptMode::kDecoderFused,  PromptMode::kEncoderFused};

TripletBatch make_batch(const EncoderParams& p, const GradcheckFixture& f) {
  TripletBatch b;
  b.query_embs = embed_bank(p, f.queries, f.banks(), f.embed, 1);
  b.label_embs = embed_bank(p, f.labels, f.banks(), f.embed, 1);
  b.positives = f.positives;
  b.negatives = f.negatives;
  b.margin = f.margin;
  return b;
}

}  // namespace

GradcheckFixture make_gradcheck_fixture(std::size_t d, std::uint64_t seed, std::size_t max_len) {
  Rng rng(mix_seed(seed, 77));
  GradcheckFixture f;
  // Short prefixes keep every template within small max_len.
  PromptPrefixes prefixes{"tp", "tc", "ip", "ic"};
  f.vocab = build_vocab(std::vector<std::string>{"a b c d e", "tp tc ip ic"}, 64, prefixes);
  const std::size_t m = 2 + rng.below(3);
  const auto mode = kAllModes[rng.below(std::size(kAllModes))];
  const auto dir = rng.below(2) ? Directionality::kCausal : Directionality::kBidirectional;
  f.embed.pooling = rng.below(4) == 0 ? Pooling::kLastToken : Pooling::kMean;
  f.query_bank = ImageBank(static_cast<std::uint32_t>(m), BankSide::kQuery);
  f.label_bank = ImageBank(static_cast<std::uint32_t>(m), BankSide::kLabel);

  const std::size_t num_queries = 2 + rng.below(2);
  const std::size_t num_labels = 3 + rng.below(2);
  auto make_side = [&](std::size_t count, BankSide side, ImageBank& bank, std::vector<PromptSequence>& out) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t n_img = rng.below(3);
      std::vector<std::vector<float>> imgs;
      for (std::size_t j = 0; j < n_img; ++j) {
        std::vector<float> v(m);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        imgs.push_back(std::move(v));
      }
      std::vector<ImageRef> refs;
      for (std::size_t j = 0; j < n_img; ++j) refs.push_back({side, i, static_cast<std::uint16_t>(j)});
      if (n_img) bank.add(i, std::move(imgs));
      std::vector<TokenId> toks(1 + rng.below(4));
      for (auto& t : toks) t = static_cast<TokenId>(Vocab::kNumReserved + rng.below(f.vocab.size() - Vocab::kNumReserved));
      const std::size_t need = fixed_overhead(mode, refs.size(), f.vocab);
      std::size_t len = std::max<std::size_t>(max_len, need + 1);
      out.push_back(assemble(toks, refs, mode, len, f.vocab));
    }
  };
  make_side(num_queries, BankSide::kQuery, f.query_bank, f.queries);
  make_side(num_labels, BankSide::kLabel, f.label_bank, f.labels);

  for (std::size_t q = 0; q < num_queries; ++q) {
    std::vector<std::size_t> order(num_labels);
    for (std::size_t i = 0; i < num_labels; ++i) order[i] = i;
    rng.shuffle(std::span(order));
    f.positives.push_back({order[0]});
    f.negatives.push_back({order.begin() + 1, order.begin() + 1 + static_cast<std::ptrdiff_t>(std::min<std::size_t>(2, num_labels - 1))});
  }

  f.params = init_params(d, m, f.vocab.size(), dir, mix_seed(seed, 78));
  for (Matrix* t : f.params.tensors()) {
    for (double& x : t->data) x = rng.uniform(-0.6, 0.6);
  }
  return f;
}

double fixture_loss(const EncoderParams& p, const GradcheckFixture& f) { return triplet_loss(make_batch(p, f)); }

GradientSet fixture_gradient(const EncoderParams& p, const GradcheckFixture& f, unsigned threads) {
  const TripletBatch b = make_batch(p, f);
  const TripletGrad tg = triplet_grad(b);
  std::vector<PromptSequence> seqs = f.queries;
  seqs.insert(seqs.end(), f.labels.begin(), f.labels.end());
  Matrix upstream(seqs.size(), p.d);
  std::copy(tg.d_query.data.begin(), tg.d_query.data.end(), upstream.data.begin());
  std::copy(tg.d_label.data.begin(), tg.d_label.data.end(), upstream.data.begin() + static_cast<std::ptrdiff_t>(tg.d_query.data.size()));
  return backward(p, seqs, f.banks(), upstream, f.embed, threads);
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(const GradcheckFixture& f, double h) {
  const GradientSet g = fixture_gradient(f.params, f);
  EncoderParams p = f.params;
  GradcheckReport rep;
  auto pt = p.tensors();
  auto gt = g.tensors();
  for (std::size_t t = 0; t < ParamTensors::kNumTensors; ++t) {
    for (std::size_t i = 0; i < pt[t]->data.size(); ++i) {
      const double orig = pt[t]->data[i];
      pt[t]->data[i] = orig + h;
      const double up = fixture_loss(p, f);
      pt[t]->data[i] = orig - h;
      const double down = fixture_loss(p, f);
      pt[t]->data[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      rep.max_rel_error = std::max(rep.max_rel_error, relative_error(gt[t]->data[i], numeric));
      ++rep.entries;
    }
  }
  return rep;
}

}  // namespace vixml
