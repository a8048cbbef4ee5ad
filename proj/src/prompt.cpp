// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/prompt.hpp"

#include <algorithm>
#include <cctype>

namespace vixml {
namespace {

const std::vector<std::string> kReservedWords = {"<pad>", "<unk>", "<|endoftext|>"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

Vocab::Vocab() : Vocab(std::vector<std::string>(kReservedWords)) {}

Vocab::Vocab(std::vector<std::string> words, const PromptPrefixes& prefixes) : words_(std::move(words)) {
  if (words_.size() < kNumReserved || !std::equal(kReservedWords.begin(), kReservedWords.end(), words_.begin())) {
    data_error("vocab: the first entries must be the reserved markers <pad>, <unk>, <|endoftext|>");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<TokenId>(i)).second) data_error("vocab: duplicate word \"" + words_[i] + "\"");
  }
  text_prefix_ = tokenize(prefixes.text, *this);
  text_cont_prefix_ = tokenize(prefixes.text_cont, *this);
  image_prefix_ = tokenize(prefixes.image, *this);
  image_cont_prefix_ = tokenize(prefixes.image_cont, *this);
}

TokenId Vocab::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) {
      std::string w(text.substr(i, j - i));
      for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back(std::move(w));
    }
    i = j;
  }
  return out;
}

Vocab build_vocab(std::span<const std::string> corpus, std::size_t max_size, const PromptPrefixes& prefixes) {
  struct Count {
    std::size_t freq = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Count> counts;
  std::vector<std::string> order;
  for (const auto& text : corpus) {
    for (auto& w : split_words(text)) {
      if (std::find(kReservedWords.begin(), kReservedWords.end(), w) != kReservedWords.end()) continue;
      auto [it, inserted] = counts.try_emplace(w, Count{0, order.size()});
      if (inserted) order.push_back(w);
      ++it->second.freq;
    }
  }
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const Count& ca = counts.at(a);
    const Count& cb = counts.at(b);
    if (ca.freq != cb.freq) return ca.freq > cb.freq;
    return ca.first < cb.first;
  });
  const std::size_t keep = max_size > Vocab::kNumReserved ? max_size - Vocab::kNumReserved : 0;
  if (order.size() > keep) order.resize(keep);
  std::vector<std::string> words(kReservedWords);
  words.insert(words.end(), order.begin(), order.end());
  return Vocab(std::move(words), prefixes);
}

std::vector<TokenId> tokenize(std::string_view text, const Vocab& v) {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(v.id(w));
  return ids;
}

void write_vocab(const std::string& path, const Vocab& v) {
  std::string out;
  for (const auto& w : v.words()) {
    out += w;
    out += '\n';
  }
  write_file_atomic(path, out);
}

Vocab load_vocab(const std::string& path, const PromptPrefixes& prefixes) {
  const std::string content = read_file(path);
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) nl = content.size();
    words.emplace_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return Vocab(std::move(words), prefixes);
}

std::string_view to_string(PromptMode m) {
  switch (m) {
    case PromptMode::kEncoderPlain: return "encoder_plain";
    case PromptMode::kPrefixText: return "prefix_text";
    case PromptMode::kDecoderText: return "decoder_text";
    case PromptMode::kImageFirstEos: return "image_first_eos";
    case PromptMode::kImageLastEos: return "image_last_eos";
    case PromptMode::kImagePrefixFirst: return "image_prefix_first";
    case PromptMode::kDecoderFused: return "decoder_fused";
    case PromptMode::kEncoderFused: return "encoder_fused";
  }
  return "?";
}

PromptMode parse_prompt_mode(std::string_view s) {
  for (auto m : {PromptMode::kEncoderPlain, PromptMode::kPrefixText, PromptMode::kDecoderText,
                 PromptMode::kImageFirstEos, PromptMode::kImageLastEos, PromptMode::kImagePrefixFirst,
                 PromptMode::kDecoderFused, PromptMode::kEncoderFused}) {
    if (to_string(m) == s) return m;
  }
  usage_error("unknown prompt mode \"" + std::string(s) + "\"");
}

bool uses_images(PromptMode m) {
  switch (m) {
    case PromptMode::kEncoderPlain:
    case PromptMode::kPrefixText:
    case PromptMode::kDecoderText:
      return false;
    default:
      return true;
  }
}

bool is_decoder_mode(PromptMode m) { return m != PromptMode::kEncoderPlain && m != PromptMode::kEncoderFused; }

std::size_t PromptSequence::valid_length() const {
  std::size_t n = 0;
  while (n < attention_mask.size() && attention_mask[n]) ++n;
  return n;
}

namespace {

// A template is a list of parts; the text part is the only truncatable one.
enum class Part { kT1, kT2, kI1, kI2, kText, kImages, kEos };

std::vector<Part> template_parts(PromptMode mode, bool have_images) {
  using P = Part;
  switch (mode) {
    case PromptMode::kEncoderPlain: return {P::kText};
    case PromptMode::kPrefixText: return {P::kT1, P::kText};
    case PromptMode::kDecoderText: return {P::kT1, P::kText, P::kEos};
    case PromptMode::kImageFirstEos: return {P::kImages, P::kText, P::kEos};
    case PromptMode::kImageLastEos: return {P::kText, P::kImages, P::kEos};
    case PromptMode::kImagePrefixFirst:
      if (!have_images) return {P::kT2, P::kText, P::kEos};
      return {P::kI1, P::kImages, P::kT2, P::kText, P::kEos};
    case PromptMode::kDecoderFused:
      if (!have_images) return {P::kT1, P::kText, P::kEos};
      return {P::kT1, P::kText, P::kI2, P::kImages, P::kEos};
    case PromptMode::kEncoderFused: return {P::kImages, P::kText};
  }
  return {};
}

const std::vector<TokenId>& prefix_of(Part p, const Vocab& v) {
  switch (p) {
    case Part::kT1: return v.text_prefix();
    case Part::kT2: return v.text_cont_prefix();
    case Part::kI1: return v.image_prefix();
    default: return v.image_cont_prefix();
  }
}

std::size_t parts_overhead(const std::vector<Part>& parts, std::size_t num_images, const Vocab& v) {
  std::size_t n = 0;
  for (Part p : parts) {
    switch (p) {
      case Part::kText: break;
      case Part::kImages: n += num_images; break;
      case Part::kEos: n += 1; break;
      default: n += prefix_of(p, v).size(); break;
    }
  }
  return n;
}

}  // namespace

std::size_t fixed_overhead(PromptMode mode, std::size_t num_images, const Vocab& v) {
  if (!uses_images(mode)) num_images = 0;
  return parts_overhead(template_parts(mode, num_images > 0), num_images, v);
}

PromptSequence assemble(std::span<const TokenId> tokens, std::span<const ImageRef> images, PromptMode mode,
                        std::size_t max_len, const Vocab& v, const ImageBanks* banks) {
  if (!uses_images(mode)) images = {};
  if (banks) {
    for (const auto& ref : images) {
      const ImageBank* bank = banks->of(ref.side);
      const ImageBank::Entry* e = bank ? bank->find(ref.item) : nullptr;
      if (!e || ref.ordinal >= e->images.size()) {
        data_error("assemble: image ref (" + std::string(ref.side == BankSide::kQuery ? "query" : "label") +
                   " item " + std::to_string(ref.item) + ", image " + std::to_string(ref.ordinal) +
                   ") has no bank entry");
      }
    }
  }
  const auto parts = template_parts(mode, !images.empty());
  const std::size_t overhead = parts_overhead(parts, images.size(), v);
  if (max_len < overhead) {
    usage_error("assemble: max_len " + std::to_string(max_len) + " is below the fixed overhead " +
                std::to_string(overhead) + " of mode " + std::string(to_string(mode)));
  }
  const std::size_t text_budget = std::min(tokens.size(), max_len - overhead);

  PromptSequence s;
  s.mode = mode;
  s.slots.reserve(max_len);
  for (Part p : parts) {
    switch (p) {
      case Part::kText:
        for (std::size_t i = 0; i < text_budget; ++i) s.slots.push_back({SlotKind::kText, tokens[i], {}});
        break;
      case Part::kImages:
        for (const auto& ref : images) s.slots.push_back({SlotKind::kImage, Vocab::kPad, ref});
        break;
      case Part::kEos:
        s.slots.push_back({SlotKind::kEos, Vocab::kEos, {}});
        break;
      case Part::kT1:
      case Part::kT2:
        for (TokenId t : prefix_of(p, v)) s.slots.push_back({SlotKind::kTextPrefix, t, {}});
        break;
      case Part::kI1:
      case Part::kI2:
        for (TokenId t : prefix_of(p, v)) s.slots.push_back({SlotKind::kImagePrefix, t, {}});
        break;
    }
  }
  const std::size_t valid = s.slots.size();
  s.slots.resize(max_len, Slot{SlotKind::kPad, Vocab::kPad, {}});
  s.position_ids.resize(max_len);
  s.attention_mask.resize(max_len);
  for (std::size_t k = 0; k < max_len; ++k) {
    s.position_ids[k] = static_cast<std::uint32_t>(k);
    s.attention_mask[k] = k < valid ? 1 : 0;
  }
  return s;
}

std::vector<PromptSequence> assemble_batch(const std::vector<std::string>& texts, std::span<const std::size_t> items,
                                           BankSide side, const ImageBank* bank, PromptMode mode,
                                           std::size_t max_len, const Vocab& v, std::size_t image_cap) {
  std::vector<PromptSequence> out;
  out.reserve(items.size());
  std::vector<ImageRef> refs;
  for (std::size_t item : items) {
    if (item >= texts.size()) data_error("assemble_batch: item " + std::to_string(item) + " out of range");
    refs.clear();
    if (bank && uses_images(mode)) {
      const std::size_t n = std::min(bank->image_count(item), image_cap);
      for (std::size_t i = 0; i < n; ++i) refs.push_back({side, item, static_cast<std::uint16_t>(i)});
    }
    const auto tokens = tokenize(texts[item], v);
    out.push_back(assemble(tokens, refs, mode, max_len, v));
  }
  return out;
}

std::vector<PromptSequence> assemble_all(const std::vector<std::string>& texts, BankSide side, const ImageBank* bank,
                                         PromptMode mode, std::size_t max_len, const Vocab& v,
                                         std::size_t image_cap) {
  std::vector<std::size_t> items(texts.size());
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
  return assemble_batch(texts, items, side, bank, mode, max_len, v, image_cap);
}

std::string format_slots(const PromptSequence& s) {
  std::string out;
  for (std::size_t k = 0; k < s.slots.size(); ++k) {
    const Slot& slot = s.slots[k];
    switch (slot.kind) {
      case SlotKind::kTextPrefix: out += "text_prefix\t"; break;
      case SlotKind::kImagePrefix: out += "image_prefix\t"; break;
      case SlotKind::kText: out += "text\t"; break;
      case SlotKind::kImage: out += "image\t"; break;
      case SlotKind::kEos: out += "eos\t"; break;
      case SlotKind::kPad: out += "pad\t"; break;
    }
    if (slot.kind == SlotKind::kImage) {
      out += slot.image.side == BankSide::kQuery ? "q:" : "l:";
      out += std::to_string(slot.image.item) + ":" + std::to_string(slot.image.ordinal);
    } else {
      out += std::to_string(slot.token);
    }
    out += '\t' + std::to_string(s.position_ids[k]) + '\t' + std::to_string(s.attention_mask[k]) + '\n';
  }
  return out;
}

}  // namespace vixml
