// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vixml/common.hpp"

namespace vixml {

enum class Split : std::uint8_t { kTrain, kTest };

/// Queries, labels and the sparse query->label relevance structure.
/// Negatives are implicit (every label not listed for a query).
struct Dataset {
  std::size_t num_queries = 0;
  std::size_t num_labels = 0;
  std::vector<std::string> query_texts;
  std::vector<std::string> label_texts;
  GroundTruth ground_truth;
  Split split = Split::kTrain;

  bool operator==(const Dataset&) const = default;
};

enum class BankSide : std::uint8_t { kQuery, kLabel };

/// Frozen image embeddings per item. Items without images are absent.
class ImageBank {
 public:
  struct Entry {
    std::uint64_t item = 0;
    std::vector<std::vector<float>> images;
    bool operator==(const Entry&) const = default;
  };

  ImageBank() = default;
  ImageBank(std::uint32_t dim, BankSide side) : dim_(dim), side_(side) {}

  std::uint32_t dim() const { return dim_; }
  BankSide side() const { return side_; }

  /// Entries in insertion (file) order.
  const std::vector<Entry>& entries() const { return entries_; }

  /// Returns nullptr when the item has no images.
  const Entry* find(std::uint64_t item) const;

  std::size_t image_count(std::uint64_t item) const {
    const Entry* e = find(item);
    return e ? e->images.size() : 0;
  }

  /// Appends an item. Throws on duplicate item, wrong dimension, or
  /// non-finite components.
  void add(std::uint64_t item, std::vector<std::vector<float>> images);

  bool operator==(const ImageBank& o) const {
    return dim_ == o.dim_ && side_ == o.side_ && entries_ == o.entries_;
  }

 private:
  std::uint32_t dim_ = 0;
  BankSide side_ = BankSide::kQuery;
  std::vector<Entry> entries_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Non-owning pair of banks used when resolving image slots.
struct ImageBanks {
  const ImageBank* query = nullptr;
  const ImageBank* label = nullptr;

  const ImageBank* of(BankSide side) const { return side == BankSide::kQuery ? query : label; }
};

struct DatasetStats {
  double queries_per_label = 0.0;
  double labels_per_query = 0.0;
  double pct_queries_with_images = 0.0;
  double pct_labels_with_images = 0.0;
  std::size_t total_positive_pairs = 0;
};

// Text files: "<index>\t<text>" per line, indices 0..N-1 in order.
std::vector<std::string> read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::vector<std::string>& texts);

// Ground truth: "M L" header, then M comma-separated ascending rows.
struct GroundTruthFile {
  std::size_t num_queries = 0;
  std::size_t num_labels = 0;
  GroundTruth rows;
};
GroundTruthFile read_ground_truth(const std::string& path);
std::string format_ground_truth(const GroundTruth& gt, std::size_t num_labels);
void write_ground_truth(const std::string& path, const GroundTruth& gt, std::size_t num_labels);

Dataset load_dataset(const std::string& query_text_path, const std::string& label_text_path,
                     const std::string& ground_truth_path, Split split);

/// Validates every Dataset invariant; throws a data error on violation.
void validate_dataset(const Dataset& d);

// Image bank binary: "VIXB", u32 version, u32 dim, u64 count, then per item
// u64 index, u16 n, n*dim f32 (all little-endian).
inline constexpr std::uint32_t kImageBankVersion = 1;
ImageBank parse_image_bank(const std::string& bytes, BankSide side, std::optional<std::size_t> image_cap = {},
                           const std::string& context = "image bank");
std::string serialize_image_bank(const ImageBank& bank);
ImageBank load_image_bank(const std::string& path, BankSide side, std::optional<std::size_t> image_cap = {});
void write_image_bank(const std::string& path, const ImageBank& bank);

DatasetStats compute_stats(const Dataset& d, const ImageBank* qbank = nullptr, const ImageBank* lbank = nullptr);

/// One split on disk: queries.txt, labels.txt, gt.txt and optional
/// query_images.vixb / label_images.vixb.
struct SplitData {
  Dataset data;
  std::optional<ImageBank> query_images;
  std::optional<ImageBank> label_images;

  ImageBanks banks() const {
    return {query_images ? &*query_images : nullptr, label_images ? &*label_images : nullptr};
  }
};

SplitData load_split(const std::string& dir, Split split);
void write_split(const std::string& dir, const SplitData& s);

struct SynthConfig {
  std::size_t num_queries = 2000;
  std::size_t num_test_queries = 500;
  std::size_t num_labels = 500;
  std::size_t num_clusters = 50;
  std::size_t vocab_size = 2000;
  std::size_t positives_per_query = 2;
  double ambiguity_fraction = 0.0;
  std::size_t image_dim = 16;
  /// Fraction of items that carry at least one image.
  double image_availability = 1.0;
  std::size_t max_images_per_item = 3;
  double image_noise = 0.5;
  std::size_t noise_tokens_per_query = 2;
  std::uint64_t seed = 1;
};

struct SynthCorpus {
  SplitData train;
  SplitData test;
  /// Per query: true when its text was drawn from a cluster-pair shared slice.
  std::vector<bool> train_ambiguous;
  std::vector<bool> test_ambiguous;
  /// Per query: planted cluster id.
  std::vector<std::uint32_t> train_cluster;
  std::vector<std::uint32_t> test_cluster;
  std::size_t key_tokens_per_label = 0;
};

/// Planted-cluster corpus generator. Labels are partitioned into clusters;
/// each label owns key words from its cluster's slice of the vocabulary, and
/// a query's text carries one key word per positive. Ambiguous queries use
/// words shared by a pair of clusters instead, so only their images (drawn
/// around a per-cluster mean) identify the cluster.
SynthCorpus generate_synthetic(const SynthConfig& cfg);

/// Word naming used by the generator, exposed for tests.
std::string synth_key_word(std::size_t cluster, std::size_t local_label, std::size_t k);
std::string synth_shared_word(std::size_t pair, std::size_t local_label, std::size_t k);
std::string synth_noise_word(std::size_t n);

}  // namespace vixml
