// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "test_support.hpp"
#include "vixml/prompt.hpp"

using namespace vixml;
using vixml::testing::error_kind_of;
using vixml::testing::TempDir;

namespace {

Vocab fixture_vocab() {
  const PromptPrefixes p;
  const std::vector<std::string> corpus = {"t u v", p.text, p.text_cont, p.image, p.image_cont};
  return build_vocab(corpus, 100, p);
}

std::vector<SlotKind> kinds(const PromptSequence& s) {
  std::vector<SlotKind> k;
  for (const auto& slot : s.slots) k.push_back(slot.kind);
  return k;
}

std::vector<ImageRef> refs(std::size_t n, BankSide side = BankSide::kQuery, std::uint64_t item = 0) {
  std::vector<ImageRef> r;
  for (std::size_t i = 0; i < n; ++i) r.push_back({side, item, static_cast<std::uint16_t>(i)});
  return r;
}

}  // namespace

TEST_CASE("build_vocab ranks by frequency then first occurrence") {
  const std::vector<std::string> corpus = {"a b", "b"};
  const Vocab v = build_vocab(corpus, 100);
  CHECK(v.id("b") < v.id("a"));
  CHECK(v.id("b") == 3);
  CHECK(build_vocab(corpus, 4).size() == 4);
  CHECK(build_vocab(corpus, 4).word(3) == "b");
  CHECK(build_vocab(corpus, 100).words() == v.words());
  CHECK(v.word(Vocab::kPad) == "<pad>");
  CHECK(v.word(Vocab::kEos) == "<|endoftext|>");
}

TEST_CASE("tokenize") {
  const std::vector<std::string> corpus = {"a b"};
  const Vocab v = build_vocab(corpus, 100);
  CHECK(tokenize("a b", v) == std::vector<TokenId>{v.id("a"), v.id("b")});
  CHECK(tokenize("zzz", v) == std::vector<TokenId>{Vocab::kUnk});
  CHECK(tokenize("", v).empty());
  CHECK(tokenize("  A\tb  zz ", v).size() == split_words("  A\tb  zz ").size());
  CHECK(tokenize("A", v) == std::vector<TokenId>{v.id("a")});
}

TEST_CASE("vocab file round trip keeps ids and prefixes") {
  TempDir dir;
  const Vocab v = fixture_vocab();
  write_vocab(dir.file("v.txt"), v);
  const Vocab back = load_vocab(dir.file("v.txt"));
  CHECK(back.words() == v.words());
  CHECK(back.text_prefix() == v.text_prefix());
  CHECK(back.image_cont_prefix() == v.image_cont_prefix());
}

TEST_CASE("decoder_text with one token") {
  const Vocab v = fixture_vocab();
  const TokenId t = v.id("t");
  const auto s = assemble(std::vector<TokenId>{t}, {}, PromptMode::kDecoderText, 8, v);
  const auto& tp = v.text_prefix();
  REQUIRE(tp.size() == 3);
  const std::vector<TokenId> want = {tp[0], tp[1], tp[2], t, Vocab::kEos, 0, 0, 0};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(s.slots[i].token == want[i]);
    CHECK(s.position_ids[i] == i);
    CHECK(s.attention_mask[i] == (i < 5 ? 1 : 0));
  }
  CHECK(s.valid_length() == 5);
}

TEST_CASE("encoder_fused puts images before text") {
  const Vocab v = fixture_vocab();
  const std::vector<TokenId> toks = {v.id("t"), v.id("u")};
  const auto s = assemble(toks, refs(2), PromptMode::kEncoderFused, 6, v);
  CHECK(kinds(s) == std::vector<SlotKind>{SlotKind::kImage, SlotKind::kImage, SlotKind::kText, SlotKind::kText,
                                          SlotKind::kPad, SlotKind::kPad});
  CHECK(s.slots[0].image.ordinal == 0);
  CHECK(s.slots[1].image.ordinal == 1);
  CHECK(s.slots[2].token == toks[0]);
}

TEST_CASE("fused templates drop the image prefix without images") {
  const Vocab v = fixture_vocab();
  const std::vector<TokenId> toks = {v.id("t")};
  const auto fused = assemble(toks, {}, PromptMode::kDecoderFused, 10, v);
  const auto text = assemble(toks, {}, PromptMode::kDecoderText, 10, v);
  CHECK(fused.slots == text.slots);
  const auto ipf = assemble(toks, {}, PromptMode::kImagePrefixFirst, 10, v);
  // T2 E EOS
  CHECK(ipf.slots[0].token == v.text_cont_prefix()[0]);
  CHECK(ipf.valid_length() == v.text_cont_prefix().size() + 2);
}

TEST_CASE("assemble_batch applies the image cap in bank order") {
  const Vocab v = fixture_vocab();
  ImageBank bank(2, BankSide::kQuery);
  std::vector<std::vector<float>> five(5, std::vector<float>{0.f, 0.f});
  bank.add(1, five);
  const std::vector<std::string> texts = {"t", "u v"};
  const std::vector<std::size_t> items = {0, 1};
  const auto capped = assemble_batch(texts, items, BankSide::kQuery, &bank, PromptMode::kDecoderFused, 32, v, 3);
  REQUIRE(capped.size() == 2);
  const auto k1 = kinds(capped[1]);
  CHECK(std::count(k1.begin(), k1.end(), SlotKind::kImage) == 3);
  CHECK(capped[1].slots[capped[1].valid_length() - 2].image.ordinal == 2);
  for (const auto& s : capped) CHECK(s.slots.size() == 32);

  const auto none = assemble_batch(texts, items, BankSide::kQuery, &bank, PromptMode::kDecoderFused, 32, v, 0);
  const auto text = assemble_batch(texts, items, BankSide::kQuery, nullptr, PromptMode::kDecoderText, 32, v, 0);
  for (std::size_t i = 0; i < 2; ++i) CHECK(none[i].slots == text[i].slots);
}

TEST_CASE("text is truncated from the tail, fixed parts are kept") {
  const Vocab v = fixture_vocab();
  const std::vector<TokenId> toks = {v.id("t"), v.id("u"), v.id("v")};
  const std::size_t overhead = fixed_overhead(PromptMode::kDecoderFused, 2, v);
  CHECK(overhead == 3 + 3 + 2 + 1);
  const auto s = assemble(toks, refs(2), PromptMode::kDecoderFused, overhead + 1, v);
  CHECK(s.valid_length() == overhead + 1);
  CHECK(s.slots[3].token == toks[0]);
  CHECK(s.slots[4].kind == SlotKind::kImagePrefix);
  CHECK(s.slots.back().kind == SlotKind::kEos);
  CHECK(error_kind_of([&] { assemble(toks, refs(2), PromptMode::kDecoderFused, overhead - 1, v); }) == 1);
}

TEST_CASE("image refs are checked against banks") {
  const Vocab v = fixture_vocab();
  ImageBank qb(2, BankSide::kQuery);
  qb.add(0, {{0.f, 1.f}});
  const ImageBanks banks{&qb, nullptr};
  const std::vector<TokenId> toks = {v.id("t")};
  CHECK(error_kind_of([&] { assemble(toks, refs(1), PromptMode::kEncoderFused, 8, v, &banks); }) == 0);
  CHECK(error_kind_of([&] { assemble(toks, refs(2), PromptMode::kEncoderFused, 8, v, &banks); }) == 2);
  CHECK(error_kind_of([&] { assemble(toks, refs(1, BankSide::kLabel), PromptMode::kEncoderFused, 8, v, &banks); }) == 2);
}

TEST_CASE("structural invariants over random inputs") {
  const Vocab v = fixture_vocab();
  Rng rng(5);
  const PromptMode all[] = {PromptMode::kEncoderPlain,  PromptMode::kPrefixText,       PromptMode::kDecoderText,
                            PromptMode::kImageFirstEos, PromptMode::kImageLastEos,     PromptMode::kImagePrefixFirst,
                            PromptMode::kDecoderFused,  PromptMode::kEncoderFused};
  for (int trial = 0; trial < 400; ++trial) {
    const PromptMode mode = all[rng.below(8)];
    std::vector<TokenId> toks(rng.below(12));
    for (auto& t : toks) t = static_cast<TokenId>(3 + rng.below(v.size() - 3));
    const auto imgs = refs(rng.below(4));
    const std::size_t len = fixed_overhead(mode, imgs.size(), v) + rng.below(10) + 1;
    const auto s = assemble(toks, imgs, mode, len, v);
    CHECK(s.slots.size() == len);
    CHECK(s.position_ids.size() == len);
    CHECK(s.attention_mask.size() == len);
    const std::size_t n = s.valid_length();
    for (std::size_t i = 0; i < len; ++i) {
      CHECK(s.position_ids[i] == i);
      CHECK((s.attention_mask[i] == 1) == (i < n));
      CHECK((s.slots[i].kind == SlotKind::kPad) == (i >= n));
    }
    CHECK(assemble(toks, imgs, mode, len, v) == s);
    if (mode == PromptMode::kDecoderFused && !imgs.empty()) {
      std::size_t last_text = 0, first_img = len, eos = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (s.slots[i].kind == SlotKind::kText) last_text = i;
        if (s.slots[i].kind == SlotKind::kImage) first_img = std::min(first_img, i);
        if (s.slots[i].kind == SlotKind::kEos) eos = i;
      }
      CHECK(last_text < first_img);
      CHECK(first_img < eos);
    }
  }
}

TEST_CASE("mode names round trip") {
  for (PromptMode m : kPromptAblationModes) CHECK(parse_prompt_mode(to_string(m)) == m);
  CHECK(parse_prompt_mode("encoder_fused") == PromptMode::kEncoderFused);
  CHECK(error_kind_of([] { parse_prompt_mode("nope"); }) == 1);
}
