// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vixml/cli.hpp"
#include "vixml/corpus.hpp"
#include "vixml/gradcheck.hpp"
#include "vixml/metrics.hpp"
#include "vixml/rai.hpp"
#include "vixml/retrieval.hpp"
#include "vixml/trainer.hpp"

namespace py = pybind11;
using namespace vixml;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), a.mutable_data());
  return a;
}

std::vector<LabelId> iota_ids(std::size_t n) {
  std::vector<LabelId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<LabelId>(i);
  return ids;
}

using Ranking = std::vector<std::vector<std::pair<LabelId, double>>>;

Ranking to_ranking(const PredictionSet& ps) {
  Ranking out;
  for (const auto& row : ps.rows) {
    auto& r = out.emplace_back();
    for (const auto& s : row) r.emplace_back(s.id, s.score);
  }
  return out;
}

PredictionSet from_ids(const std::vector<std::vector<LabelId>>& ids, std::size_t k) {
  PredictionSet ps;
  ps.k = k;
  for (const auto& row : ids) {
    auto& r = ps.rows.emplace_back();
    for (std::size_t j = 0; j < row.size(); ++j) r.push_back({row[j], -double(j)});
  }
  return ps;
}

std::size_t depth_of(const std::vector<std::vector<LabelId>>& ids) {
  std::size_t k = 0;
  for (const auto& row : ids) k = std::max(k, row.size());
  return k;
}

// Trained encoder plus what is needed to embed split texts.
struct Model {
  EncoderParams params;
  Vocab vocab;
  TrainConfig cfg;
  std::string log;

  Array embed(const std::string& dir, const std::string& side, const std::string& split) const {
    const SplitData s = load_split(dir, split == "test" ? Split::kTest : Split::kTrain);
    const bool q = side == "query";
    const auto& texts = q ? s.data.query_texts : s.data.label_texts;
    const auto& bank = q ? s.query_images : s.label_images;
    return to_array(embed_texts(params, texts, q ? BankSide::kQuery : BankSide::kLabel, bank ? &*bank : nullptr, vocab,
                                InferenceSetup::from(cfg)));
  }
};

}  // namespace

PYBIND11_MODULE(_vixml, m) {
  m.doc() = "Siamese multimodal retrieval core";

  py::register_exception<Error>(m, "VixmlError");

  m.def("version", [] { return std::string(kToolVersion); });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a vixml subcommand in process. Returns (exit_code, stdout, stderr).");

  m.def(
      "generate_synthetic",
      [](const std::string& out_dir, std::size_t queries, std::size_t test_queries, std::size_t labels,
         std::size_t clusters, double ambiguity, std::size_t image_dim, std::uint64_t seed) {
        SynthConfig c;
        c.num_queries = queries;
        c.num_test_queries = test_queries;
        c.num_labels = labels;
        c.num_clusters = clusters;
        c.ambiguity_fraction = ambiguity;
        c.image_dim = image_dim;
        c.seed = seed;
        const SynthCorpus sc = generate_synthetic(c);
        write_split(out_dir + "/train", sc.train);
        write_split(out_dir + "/test", sc.test);
        return std::vector<bool>(sc.test_ambiguous.begin(), sc.test_ambiguous.end());
      },
      py::arg("out_dir"), py::arg("queries") = 2000, py::arg("test_queries") = 500, py::arg("labels") = 500,
      py::arg("clusters") = 50, py::arg("ambiguity") = 0.0, py::arg("image_dim") = 16, py::arg("seed") = 1,
      "Writes train/ and test/ splits. Returns the per-test-query ambiguity flags.");

  m.def(
      "gradcheck",
      [](std::size_t d, std::uint64_t seed) {
        const auto r = gradcheck(make_gradcheck_fixture(d, seed));
        return py::make_tuple(r.max_rel_error, r.entries);
      },
      py::arg("d") = 4, py::arg("seed") = 1);

  py::class_<Model>(m, "Model")
      .def("embed", &Model::embed, py::arg("data_dir"), py::arg("side") = "query", py::arg("split") = "test")
      .def("checkpoint", [](const Model& mo) { return py::bytes(serialize_checkpoint(mo.params)); })
      .def_readonly("log", &Model::log);

  m.def(
      "train",
      [](const std::string& train_dir, const KeyValues& config) {
        Model mo;
        mo.cfg = TrainConfig::from_key_values(config);
        const SplitData s = load_split(train_dir, Split::kTrain);
        mo.vocab = build_vocab(vocab_corpus(s.data), mo.cfg.vocab_max_size);
        py::gil_scoped_release release;
        const TrainResult r = train(s, mo.vocab, mo.cfg);
        mo.params = round_to_f32(r.params);
        mo.log = format_train_log(r.log);
        return mo;
      },
      py::arg("train_dir"), py::arg("config") = KeyValues{});

  m.def(
      "search",
      [](const Array& labels, const Array& queries, std::size_t k, std::size_t block_size) {
        const Matrix l = to_matrix(labels);
        const auto idx = EmbeddingIndex::build(l, iota_ids(l.rows), block_size);
        return to_ranking(predict_all(idx, to_matrix(queries), k));
      },
      py::arg("labels"), py::arg("queries"), py::arg("k"), py::arg("block_size") = 1024,
      "Exact top-k inner-product search. Rows must be unit norm.");

  m.def(
      "rai",
      [](const Array& queries, const Array& labels, const Array& train_queries, const GroundTruth& train_gt,
         double lam, double temperature, std::size_t k_search, const std::string& agg, std::size_t k) {
        const Matrix l = to_matrix(labels), t = to_matrix(train_queries);
        RaiConfig cfg;
        cfg.lambda = lam;
        cfg.temperature = temperature;
        cfg.k_search = k_search;
        cfg.aggregation = parse_aggregation(agg);
        cfg.output_k = k;
        return to_ranking(rai_predict_all(to_matrix(queries), EmbeddingIndex::build(l, iota_ids(l.rows)),
                                          EmbeddingIndex::build(t, iota_ids(t.rows)), train_gt, cfg));
      },
      py::arg("queries"), py::arg("labels"), py::arg("train_queries"), py::arg("train_gt"), py::arg("lam") = 0.9,
      py::arg("temperature") = 0.05, py::arg("k_search") = 100, py::arg("agg") = "sum", py::arg("k") = 100);

  m.def(
      "precision_at_k",
      [](const std::vector<std::vector<LabelId>>& preds, const GroundTruth& gt, std::size_t k) {
        return precision_at_k(from_ids(preds, depth_of(preds)), gt, k);
      },
      py::arg("preds"), py::arg("gt"), py::arg("k"));
  m.def(
      "recall_at_k",
      [](const std::vector<std::vector<LabelId>>& preds, const GroundTruth& gt, std::size_t k) {
        return recall_at_k(from_ids(preds, depth_of(preds)), gt, k);
      },
      py::arg("preds"), py::arg("gt"), py::arg("k"));
  m.def(
      "propensities",
      [](const std::vector<std::size_t>& freqs, std::size_t num_train, double a, double b) {
        return compute_propensities(freqs, num_train, a, b).propensity;
      },
      py::arg("freqs"), py::arg("num_train"), py::arg("a") = 0.55, py::arg("b") = 1.5);
  m.def(
      "psp_at_k",
      [](const std::vector<std::vector<LabelId>>& preds, const GroundTruth& gt, const std::vector<double>& propensity,
         std::size_t k) {
        PropensityModel pm;
        pm.propensity = propensity;
        return psp_at_k(from_ids(preds, depth_of(preds)), gt, pm, k);
      },
      py::arg("preds"), py::arg("gt"), py::arg("propensity"), py::arg("k"));

  m.def("golden_listing", &golden_fixture_listing, py::arg("mode"), py::arg("max_len") = 32, py::arg("image_cap") = 3,
        "Slot listing of the 3-token/2-image prompt fixture.");
}
