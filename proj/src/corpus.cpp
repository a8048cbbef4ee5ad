// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string_view>

#include "vixml/binary_io.hpp"
#include "vixml/rng.hpp"

namespace vixml {
namespace {

constexpr std::string_view kBankMagic = "VIXB";

// Splits LF-terminated content into lines. A single trailing LF terminates
// the last line rather than starting a new empty one.
std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  if (content.empty()) return lines;
  if (content.back() == '\n') content.remove_suffix(1);
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool parse_count(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line) + ": "; }

std::string join_words(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

}  // namespace

const ImageBank::Entry* ImageBank::find(std::uint64_t item) const {
  auto it = index_.find(item);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void ImageBank::add(std::uint64_t item, std::vector<std::vector<float>> images) {
  if (index_.count(item)) data_error("image bank: duplicate item index " + std::to_string(item));
  for (const auto& v : images) {
    if (v.size() != dim_) {
      data_error("image bank: item " + std::to_string(item) + " has a vector of dimension " +
                 std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    }
    for (float x : v) {
      if (!std::isfinite(x)) data_error("image bank: non-finite value in item " + std::to_string(item));
    }
  }
  index_.emplace(item, entries_.size());
  entries_.push_back({item, std::move(images)});
}

std::vector<std::string> read_text_file(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<std::string> texts;
  const auto lines = split_lines(content);
  texts.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) data_error(where(path, i + 1) + "missing tab separator");
    std::uint64_t idx = 0;
    if (!parse_count(line.substr(0, tab), idx)) data_error(where(path, i + 1) + "malformed index");
    if (idx != i) {
      data_error(where(path, i + 1) + "index " + std::to_string(idx) + " out of order, expected " + std::to_string(i));
    }
    texts.emplace_back(line.substr(tab + 1));
  }
  return texts;
}

void write_text_file(const std::string& path, const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].find_first_of("\n\t") != std::string::npos) {
      data_error("text " + std::to_string(i) + " contains a tab or newline");
    }
    out += std::to_string(i);
    out += '\t';
    out += texts[i];
    out += '\n';
  }
  write_file_atomic(path, out);
}

GroundTruthFile read_ground_truth(const std::string& path) {
  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  if (lines.empty()) data_error(where(path, 1) + "missing header");

  GroundTruthFile gt;
  {
    const auto header = lines[0];
    const std::size_t sp = header.find(' ');
    std::uint64_t m = 0, l = 0;
    if (sp == std::string_view::npos || !parse_count(header.substr(0, sp), m) ||
        !parse_count(header.substr(sp + 1), l)) {
      data_error(where(path, 1) + "malformed header, expected \"M L\"");
    }
    gt.num_queries = m;
    gt.num_labels = l;
  }
  if (lines.size() - 1 != gt.num_queries) {
    data_error(path + ": header declares " + std::to_string(gt.num_queries) + " rows, found " +
               std::to_string(lines.size() - 1));
  }
  gt.rows.resize(gt.num_queries);
  for (std::size_t r = 0; r < gt.num_queries; ++r) {
    const std::size_t lineno = r + 2;
    std::string_view line = lines[r + 1];
    auto& row = gt.rows[r];
    if (line.empty()) continue;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const auto tok = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      std::uint64_t v = 0;
      if (!parse_count(tok, v)) data_error(where(path, lineno) + "malformed label index \"" + std::string(tok) + "\"");
      if (v >= gt.num_labels) {
        data_error(where(path, lineno) + "label index " + std::to_string(v) + " out of range [0, " +
                   std::to_string(gt.num_labels) + ")");
      }
      if (!row.empty() && v == row.back()) {
        data_error(where(path, lineno) + "duplicate label index " + std::to_string(v));
      }
      if (!row.empty() && v < row.back()) {
        data_error(where(path, lineno) + "label indices not ascending at " + std::to_string(v));
      }
      row.push_back(static_cast<LabelId>(v));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  return gt;
}

std::string format_ground_truth(const GroundTruth& gt, std::size_t num_labels) {
  std::string out = std::to_string(gt.size()) + " " + std::to_string(num_labels) + "\n";
  for (const auto& row : gt) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(row[j]);
    }
    out += '\n';
  }
  return out;
}

void write_ground_truth(const std::string& path, const GroundTruth& gt, std::size_t num_labels) {
  write_file_atomic(path, format_ground_truth(gt, num_labels));
}

void validate_dataset(const Dataset& d) {
  if (d.query_texts.size() != d.num_queries || d.ground_truth.size() != d.num_queries) {
    data_error("dataset: query count mismatch");
  }
  if (d.label_texts.size() != d.num_labels) data_error("dataset: label count mismatch");
  for (std::size_t i = 0; i < d.ground_truth.size(); ++i) {
    const auto& row = d.ground_truth[i];
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] >= d.num_labels) data_error("dataset: query " + std::to_string(i) + " label out of range");
      if (j && row[j] <= row[j - 1]) data_error("dataset: query " + std::to_string(i) + " row not strictly ascending");
    }
    if (row.empty() && d.split == Split::kTrain) {
      data_error("dataset: train query " + std::to_string(i) + " has no positive labels");
    }
  }
}

Dataset load_dataset(const std::string& query_text_path, const std::string& label_text_path,
                     const std::string& ground_truth_path, Split split) {
  GroundTruthFile gt = read_ground_truth(ground_truth_path);
  if (split == Split::kTrain) {
    for (std::size_t r = 0; r < gt.rows.size(); ++r) {
      if (gt.rows[r].empty()) {
        data_error(where(ground_truth_path, r + 2) + "train query " + std::to_string(r) + " has no positive labels");
      }
    }
  }
  Dataset d;
  d.num_queries = gt.num_queries;
  d.num_labels = gt.num_labels;
  d.ground_truth = std::move(gt.rows);
  d.split = split;
  d.query_texts = read_text_file(query_text_path);
  d.label_texts = read_text_file(label_text_path);
  if (d.query_texts.size() != d.num_queries) {
    data_error(query_text_path + ": " + std::to_string(d.query_texts.size()) + " lines, header declares " +
               std::to_string(d.num_queries) + " queries");
  }
  if (d.label_texts.size() != d.num_labels) {
    data_error(label_text_path + ": " + std::to_string(d.label_texts.size()) + " lines, header declares " +
               std::to_string(d.num_labels) + " labels");
  }
  return d;
}

ImageBank parse_image_bank(const std::string& bytes, BankSide side, std::optional<std::size_t> image_cap,
                           const std::string& context) {
  bin::Reader r(bytes, context);
  if (r.get_bytes(4) != kBankMagic) data_error(context + ": bad magic, expected VIXB");
  const auto version = r.get_uint<std::uint32_t>();
  if (version != kImageBankVersion) data_error(context + ": unsupported version " + std::to_string(version));
  const auto dim = r.get_uint<std::uint32_t>();
  const auto count = r.get_uint<std::uint64_t>();
  ImageBank bank(dim, side);
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto item = r.get_uint<std::uint64_t>();
    const auto n = r.get_uint<std::uint16_t>();
    std::vector<std::vector<float>> images(n, std::vector<float>(dim));
    for (auto& v : images) {
      for (auto& x : v) {
        x = r.get_f32();
        if (!std::isfinite(x)) {
          data_error(context + ": non-finite float in item " + std::to_string(item) + " at byte offset " +
                     std::to_string(r.offset() - 4));
        }
      }
    }
    if (image_cap && images.size() > *image_cap) images.resize(*image_cap);
    bank.add(item, std::move(images));
  }
  if (!r.at_end()) data_error(context + ": trailing bytes after last record");
  return bank;
}

std::string serialize_image_bank(const ImageBank& bank) {
  std::string out(kBankMagic);
  bin::put_uint<std::uint32_t>(out, kImageBankVersion);
  bin::put_uint<std::uint32_t>(out, bank.dim());
  bin::put_uint<std::uint64_t>(out, bank.entries().size());
  for (const auto& e : bank.entries()) {
    bin::put_uint<std::uint64_t>(out, e.item);
    if (e.images.size() > UINT16_MAX) data_error("image bank: too many images for item " + std::to_string(e.item));
    bin::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(e.images.size()));
    for (const auto& v : e.images) {
      for (float x : v) bin::put_f32(out, x);
    }
  }
  return out;
}

ImageBank load_image_bank(const std::string& path, BankSide side, std::optional<std::size_t> image_cap) {
  return parse_image_bank(read_file(path), side, image_cap, path);
}

void write_image_bank(const std::string& path, const ImageBank& bank) {
  write_file_atomic(path, serialize_image_bank(bank));
}

DatasetStats compute_stats(const Dataset& d, const ImageBank* qbank, const ImageBank* lbank) {
  DatasetStats s;
  for (const auto& row : d.ground_truth) s.total_positive_pairs += row.size();
  const double pairs = static_cast<double>(s.total_positive_pairs);
  if (d.num_queries) s.labels_per_query = pairs / static_cast<double>(d.num_queries);
  if (d.num_labels) s.queries_per_label = pairs / static_cast<double>(d.num_labels);

  auto pct = [](const ImageBank* bank, std::size_t n, const char* what) {
    if (!bank || n == 0) return 0.0;
    std::size_t with = 0;
    for (const auto& e : bank->entries()) {
      if (e.item >= n) data_error(std::string("stats: ") + what + " bank references item " + std::to_string(e.item));
      if (!e.images.empty()) ++with;
    }
    return 100.0 * static_cast<double>(with) / static_cast<double>(n);
  };
  s.pct_queries_with_images = pct(qbank, d.num_queries, "query");
  s.pct_labels_with_images = pct(lbank, d.num_labels, "label");
  return s;
}

SplitData load_split(const std::string& dir, Split split) {
  namespace fs = std::filesystem;
  const fs::path p(dir);
  SplitData s;
  s.data = load_dataset((p / "queries.txt").string(), (p / "labels.txt").string(), (p / "gt.txt").string(), split);
  if (fs::exists(p / "query_images.vixb")) {
    s.query_images = load_image_bank((p / "query_images.vixb").string(), BankSide::kQuery);
  }
  if (fs::exists(p / "label_images.vixb")) {
    s.label_images = load_image_bank((p / "label_images.vixb").string(), BankSide::kLabel);
  }
  return s;
}

void write_split(const std::string& dir, const SplitData& s) {
  namespace fs = std::filesystem;
  const fs::path p(dir);
  fs::create_directories(p);
  write_text_file((p / "queries.txt").string(), s.data.query_texts);
  write_text_file((p / "labels.txt").string(), s.data.label_texts);
  write_ground_truth((p / "gt.txt").string(), s.data.ground_truth, s.data.num_labels);
  if (s.query_images) write_image_bank((p / "query_images.vixb").string(), *s.query_images);
  if (s.label_images) write_image_bank((p / "label_images.vixb").string(), *s.label_images);
}

std::string synth_key_word(std::size_t cluster, std::size_t local_label, std::size_t k) {
  return "c" + std::to_string(cluster) + "l" + std::to_string(local_label) + "k" + std::to_string(k);
}

std::string synth_shared_word(std::size_t pair, std::size_t local_label, std::size_t k) {
  return "p" + std::to_string(pair) + "l" + std::to_string(local_label) + "k" + std::to_string(k);
}

std::string synth_noise_word(std::size_t n) { return "n" + std::to_string(n); }

namespace {

struct SynthLayout {
  std::size_t labels_per_cluster = 0;
  std::size_t key_tokens = 0;
  std::size_t num_pairs = 0;
  std::size_t noise_tokens = 0;
};

SynthLayout check_synth(const SynthConfig& cfg) {
  auto bad = [](const std::string& m) { usage_error("synthetic config: " + m); };
  if (cfg.num_clusters == 0 || cfg.num_labels == 0) bad("num_labels and num_clusters must be positive");
  if (cfg.num_labels % cfg.num_clusters != 0) bad("num_clusters must divide num_labels");
  if (cfg.num_queries == 0) bad("num_queries must be positive");
  if (!(cfg.ambiguity_fraction >= 0.0 && cfg.ambiguity_fraction <= 1.0)) bad("ambiguity_fraction must be in [0,1]");
  if (cfg.ambiguity_fraction > 0.0 && cfg.num_clusters % 2 != 0) {
    bad("ambiguity_fraction > 0 needs an even num_clusters (clusters are paired)");
  }
  if (!(cfg.image_availability >= 0.0 && cfg.image_availability <= 1.0)) bad("image_availability must be in [0,1]");
  if (cfg.image_dim > 0 && cfg.max_images_per_item == 0) bad("max_images_per_item must be positive");
  SynthLayout l;
  l.labels_per_cluster = cfg.num_labels / cfg.num_clusters;
  if (cfg.positives_per_query == 0 || cfg.positives_per_query > l.labels_per_cluster) {
    bad("positives_per_query must be in [1, num_labels/num_clusters]");
  }
  l.num_pairs = cfg.num_clusters / 2;
  l.key_tokens = cfg.vocab_size / (2 * cfg.num_labels);
  if (l.key_tokens == 0) bad("vocab_size must be at least 2*num_labels");
  const std::size_t reserved = cfg.num_labels * l.key_tokens + l.num_pairs * l.labels_per_cluster * l.key_tokens;
  l.noise_tokens = cfg.vocab_size - reserved;
  if (cfg.noise_tokens_per_query > 0 && l.noise_tokens == 0) bad("vocab_size leaves no noise words");
  return l;
}

std::vector<float> draw_image(Rng& rng, const std::vector<double>& mean, double noise) {
  std::vector<float> v(mean.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(mean[i] + noise * rng.normal());
  return v;
}

struct QuerySplit {
  SplitData split;
  std::vector<bool> ambiguous;
  std::vector<std::uint32_t> cluster;
};

QuerySplit generate_queries(const SynthConfig& cfg, const SynthLayout& lay, std::size_t n, Split which,
                            const std::vector<std::vector<double>>& means, std::uint64_t seed) {
  Rng rng(seed);
  QuerySplit out;
  out.ambiguous.assign(n, false);
  out.cluster.assign(n, 0);
  {
    const auto num_amb = static_cast<std::size_t>(std::llround(cfg.ambiguity_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    for (std::size_t i = 0; i < num_amb; ++i) out.ambiguous[order[i]] = true;
  }

  Dataset& d = out.split.data;
  d.num_queries = n;
  d.num_labels = cfg.num_labels;
  d.split = which;
  d.query_texts.resize(n);
  d.ground_truth.resize(n);
  ImageBank bank(static_cast<std::uint32_t>(cfg.image_dim), BankSide::kQuery);

  std::vector<std::size_t> locals(lay.labels_per_cluster);
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t c = rng.below(cfg.num_clusters);
    out.cluster[q] = static_cast<std::uint32_t>(c);
    std::iota(locals.begin(), locals.end(), 0);
    // Partial Fisher-Yates: the first positives_per_query entries are a uniform draw.
    for (std::size_t i = 0; i < cfg.positives_per_query; ++i) {
      const std::size_t j = i + rng.below(locals.size() - i);
      std::swap(locals[i], locals[j]);
    }
    std::vector<std::string> words;
    auto& row = d.ground_truth[q];
    for (std::size_t i = 0; i < cfg.positives_per_query; ++i) {
      const std::size_t local = locals[i];
      row.push_back(static_cast<LabelId>(c * lay.labels_per_cluster + local));
      const std::size_t k = rng.below(lay.key_tokens);
      words.push_back(out.ambiguous[q] ? synth_shared_word(c / 2, local, k) : synth_key_word(c, local, k));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < cfg.noise_tokens_per_query; ++i) words.push_back(synth_noise_word(rng.below(lay.noise_tokens)));
    rng.shuffle(std::span(words));
    d.query_texts[q] = join_words(words);

    if (cfg.image_dim > 0 && rng.uniform() < cfg.image_availability) {
      const std::size_t count = 1 + rng.below(cfg.max_images_per_item);
      std::vector<std::vector<float>> imgs;
      for (std::size_t i = 0; i < count; ++i) imgs.push_back(draw_image(rng, means[c], cfg.image_noise));
      bank.add(q, std::move(imgs));
    }
  }
  if (cfg.image_dim > 0) out.split.query_images = std::move(bank);
  return out;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  const SynthLayout lay = check_synth(cfg);

  std::vector<std::vector<double>> means(cfg.num_clusters, std::vector<double>(cfg.image_dim));
  {
    Rng rng(mix_seed(cfg.seed, 0));
    for (auto& m : means) {
      for (auto& x : m) x = rng.normal();
    }
  }

  std::vector<std::string> label_texts(cfg.num_labels);
  ImageBank label_bank(static_cast<std::uint32_t>(cfg.image_dim), BankSide::kLabel);
  {
    Rng rng(mix_seed(cfg.seed, 1));
    for (std::size_t r = 0; r < cfg.num_labels; ++r) {
      const std::size_t c = r / lay.labels_per_cluster;
      const std::size_t local = r % lay.labels_per_cluster;
      std::vector<std::string> words;
      for (std::size_t k = 0; k < lay.key_tokens; ++k) words.push_back(synth_key_word(c, local, k));
      label_texts[r] = join_words(words);
      if (cfg.image_dim > 0 && rng.uniform() < cfg.image_availability) {
        const std::size_t count = 1 + rng.below(cfg.max_images_per_item);
        std::vector<std::vector<float>> imgs;
        for (std::size_t i = 0; i < count; ++i) imgs.push_back(draw_image(rng, means[c], cfg.image_noise));
        label_bank.add(r, std::move(imgs));
      }
    }
  }

  auto train = generate_queries(cfg, lay, cfg.num_queries, Split::kTrain, means, mix_seed(cfg.seed, 2));
  auto test = generate_queries(cfg, lay, cfg.num_test_queries, Split::kTest, means, mix_seed(cfg.seed, 3));

  SynthCorpus out;
  out.key_tokens_per_label = lay.key_tokens;
  out.train = std::move(train.split);
  out.test = std::move(test.split);
  out.train_ambiguous = std::move(train.ambiguous);
  out.test_ambiguous = std::move(test.ambiguous);
  out.train_cluster = std::move(train.cluster);
  out.test_cluster = std::move(test.cluster);
  for (SplitData* s : {&out.train, &out.test}) {
    s->data.label_texts = label_texts;
    if (cfg.image_dim > 0) s->label_images = label_bank;
  }
  return out;
}

}  // namespace vixml
