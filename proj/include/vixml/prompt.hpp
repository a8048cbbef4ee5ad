// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vixml/common.hpp"
#include "vixml/corpus.hpp"

namespace vixml {

/// Prefix strings inserted by the structured templates.
struct PromptPrefixes {
  std::string text = "This product text";
  std::string text_cont = "and its text";
  std::string image = "This product image";
  std::string image_cont = "and its image";
};

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kEos = 2;
  static constexpr std::size_t kNumReserved = 3;

  Vocab();

  /// Words in id order; the first kNumReserved entries are the reserved markers.
  explicit Vocab(std::vector<std::string> words, const PromptPrefixes& prefixes = {});

  std::size_t size() const { return words_.size(); }
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }

  const std::vector<TokenId>& text_prefix() const { return text_prefix_; }
  const std::vector<TokenId>& text_cont_prefix() const { return text_cont_prefix_; }
  const std::vector<TokenId>& image_prefix() const { return image_prefix_; }
  const std::vector<TokenId>& image_cont_prefix() const { return image_cont_prefix_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<TokenId> text_prefix_, text_cont_prefix_, image_prefix_, image_cont_prefix_;
};

/// Lowercased, whitespace-delimited words.
std::vector<std::string> split_words(std::string_view text);

/// Words ranked by frequency, ties by first occurrence, truncated to
/// max_size - 3 entries after the reserved ids. Prefix strings are tokenized
/// against the result (words missing from the corpus map to UNK).
Vocab build_vocab(std::span<const std::string> corpus, std::size_t max_size, const PromptPrefixes& prefixes = {});

std::vector<TokenId> tokenize(std::string_view text, const Vocab& v);

/// One word per line in id order.
void write_vocab(const std::string& path, const Vocab& v);
Vocab load_vocab(const std::string& path, const PromptPrefixes& prefixes = {});

/// Sequence templates. Symbols: T1/T2 text prefixes, I1/I2 image prefixes,
/// E text tokens, V image slots.
enum class PromptMode : std::uint8_t {
  kEncoderPlain,      // E
  kPrefixText,        // T1 E
  kDecoderText,       // T1 E EOS
  kImageFirstEos,     // V E EOS
  kImageLastEos,      // E V EOS
  kImagePrefixFirst,  // I1 V T2 E EOS
  kDecoderFused,      // T1 E I2 V EOS
  kEncoderFused,      // V E
};

/// The seven decoder-prompt variants in their reporting order.
inline constexpr PromptMode kPromptAblationModes[] = {
    PromptMode::kEncoderPlain,  PromptMode::kPrefixText,       PromptMode::kDecoderText,
    PromptMode::kImageFirstEos, PromptMode::kImageLastEos,     PromptMode::kImagePrefixFirst,
    PromptMode::kDecoderFused,
};

std::string_view to_string(PromptMode m);
PromptMode parse_prompt_mode(std::string_view s);
bool uses_images(PromptMode m);
bool is_decoder_mode(PromptMode m);

enum class SlotKind : std::uint8_t { kTextPrefix, kImagePrefix, kText, kImage, kEos, kPad };

struct ImageRef {
  BankSide side = BankSide::kQuery;
  std::uint64_t item = 0;
  std::uint16_t ordinal = 0;
  bool operator==(const ImageRef&) const = default;
};

struct Slot {
  SlotKind kind = SlotKind::kPad;
  TokenId token = Vocab::kPad;  // unused for image slots
  ImageRef image;               // unused for token slots
  bool operator==(const Slot&) const = default;

  bool is_token() const { return kind != SlotKind::kImage; }
};

struct PromptSequence {
  std::vector<Slot> slots;
  std::vector<std::uint32_t> position_ids;
  std::vector<std::uint8_t> attention_mask;  // 1 = valid, 0 = pad
  PromptMode mode = PromptMode::kEncoderPlain;

  /// Number of leading valid slots.
  std::size_t valid_length() const;
  bool operator==(const PromptSequence&) const = default;
};

/// Slots that never get truncated: prefixes, EOS and images.
std::size_t fixed_overhead(PromptMode mode, std::size_t num_images, const Vocab& v);

/// Builds the slot sequence for one item. Text is cut from the tail so the
/// fixed parts always fit, then the result is right-padded to max_len.
/// With zero images, fused templates drop both the image slots and the
/// image prefix. When `banks` is given every image ref is checked against it.
PromptSequence assemble(std::span<const TokenId> tokens, std::span<const ImageRef> images, PromptMode mode,
                        std::size_t max_len, const Vocab& v, const ImageBanks* banks = nullptr);

/// Assembles texts[items[i]] for every i, attaching the first image_cap
/// images of each item from `bank` (may be null) in bank order.
std::vector<PromptSequence> assemble_batch(const std::vector<std::string>& texts, std::span<const std::size_t> items,
                                           BankSide side, const ImageBank* bank, PromptMode mode,
                                           std::size_t max_len, const Vocab& v, std::size_t image_cap);

/// Convenience overload over all texts in order.
std::vector<PromptSequence> assemble_all(const std::vector<std::string>& texts, BankSide side, const ImageBank* bank,
                                         PromptMode mode, std::size_t max_len, const Vocab& v,
                                         std::size_t image_cap);

/// Human-readable listing, one slot per line: kind, id or image ref,
/// position, mask (tab separated).
std::string format_slots(const PromptSequence& s);

}  // namespace vixml
