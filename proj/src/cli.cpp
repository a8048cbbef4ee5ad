// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>

#include "vixml/config.hpp"
#include "vixml/corpus.hpp"
#include "vixml/encoder.hpp"
#include "vixml/gradcheck.hpp"
#include "vixml/metrics.hpp"
#include "vixml/prompt.hpp"
#include "vixml/rai.hpp"
#include "vixml/retrieval.hpp"
#include "vixml/trainer.hpp"

namespace vixml {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kEvalDepth = 100;

// Written next to every output: what ran, with which resolved settings.
struct RunManifest {
  std::string subcommand;
  json config = json::object();
  std::uint64_t seed = 0;
  json inputs = json::object();
  json outputs = json::array();
  Clock::time_point start = Clock::now();

  void write(const std::string& path) const {
    json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["tool_version"] = kToolVersion;
    j["format_versions"] = {{"image_bank", kImageBankVersion}, {"checkpoint", kCheckpointVersion}};
    j["wall_time_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_file_atomic(path, j.dump(2) + "\n");
  }
};

std::string manifest_path_for_file(const std::string& out) { return out + ".manifest.json"; }

std::string sibling(const std::string& file, const std::string& name) {
  return (fs::path(file).parent_path() / name).string();
}

// Resolved training config stored next to checkpoints.
struct ModelBundle {
  EncoderParams params;
  Vocab vocab;
  TrainConfig cfg;
};

ModelBundle load_model(const std::string& ckpt, const std::string& vocab_path, const std::string& config_path,
                       unsigned threads) {
  ModelBundle b;
  b.params = load_checkpoint(ckpt);
  const std::string cfg_path = config_path.empty() ? sibling(ckpt, "config.txt") : config_path;
  KeyValues kv;
  if (fs::exists(cfg_path)) kv = load_key_values(cfg_path);
  b.cfg = TrainConfig::from_key_values(kv);
  b.cfg.threads = threads;
  b.vocab = load_vocab(vocab_path.empty() ? sibling(ckpt, "vocab.txt") : vocab_path);
  if (b.vocab.size() != b.params.vocab_size) {
    data_error("vocabulary has " + std::to_string(b.vocab.size()) + " entries but checkpoint expects " +
               std::to_string(b.params.vocab_size));
  }
  return b;
}

const ImageBank* opt_bank(const std::optional<ImageBank>& b) { return b ? &*b : nullptr; }

// Test-side splits may hold queries without positives.
SplitData load_eval_split(const std::string& dir) { return load_split(dir, Split::kTest); }

PredictionSet predict_split(const ModelBundle& m, const SplitData& split, std::size_t k) {
  const InferenceSetup setup = InferenceSetup::from(m.cfg);
  const Matrix q = embed_texts(m.params, split.data.query_texts, BankSide::kQuery, opt_bank(split.query_images), m.vocab, setup);
  const Matrix l = embed_texts(m.params, split.data.label_texts, BankSide::kLabel, opt_bank(split.label_images), m.vocab, setup);
  std::vector<LabelId> ids(l.rows);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<LabelId>(i);
  const auto idx = EmbeddingIndex::build(l, std::move(ids));
  return predict_all(idx, q, k, setup.threads);
}

std::vector<MetricRow> default_eval(const PredictionSet& ps, const GroundTruth& test_gt, const GroundTruth& train_gt,
                                    std::size_t num_labels) {
  const auto pm = compute_propensities(label_frequencies(train_gt, num_labels), train_gt.size());
  return evaluate_all(ps, test_gt, pm, EvalRequest{});
}

void add_threads(CLI::App* sub, unsigned& threads) {
  sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
}

}  // namespace

std::string golden_fixture_listing(const std::string& mode, std::size_t max_len, std::size_t image_cap) {
  const PromptPrefixes prefixes;
  const std::vector<std::string> corpus = {"alpha beta gamma", prefixes.text, prefixes.text_cont, prefixes.image,
                                           prefixes.image_cont};
  const Vocab v = build_vocab(corpus, 64, prefixes);
  const auto tokens = tokenize("alpha beta gamma", v);
  std::vector<ImageRef> refs = {{BankSide::kQuery, 0, 0}, {BankSide::kQuery, 0, 1}};
  if (refs.size() > image_cap) refs.resize(image_cap);
  return format_slots(assemble(tokens, refs, parse_prompt_mode(mode), max_len, v));
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"vixml: Siamese extreme multi-label training with early image fusion", "vixml"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print tool and file format versions");

  unsigned threads = 0;

  // gen-synth
  SynthConfig synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Generate a planted-cluster synthetic corpus");
  gen->add_option("--out", synth_out, "Output directory")->required();
  gen->add_option("--queries", synth.num_queries, "Train queries");
  gen->add_option("--test-queries", synth.num_test_queries, "Test queries");
  gen->add_option("--labels", synth.num_labels, "Labels");
  gen->add_option("--clusters", synth.num_clusters, "Label clusters");
  gen->add_option("--vocab", synth.vocab_size, "Vocabulary size");
  gen->add_option("--pos-per-query", synth.positives_per_query, "Positive labels per query");
  gen->add_option("--ambiguity", synth.ambiguity_fraction, "Fraction of queries with cluster-ambiguous text");
  gen->add_option("--image-dim", synth.image_dim, "Image embedding dimension (0 = no images)");
  gen->add_option("--image-availability", synth.image_availability, "Fraction of items with images");
  gen->add_option("--max-images", synth.max_images_per_item, "Maximum images per item");
  gen->add_option("--seed", synth.seed, "Seed");

  // build-vocab
  std::string vocab_data, vocab_out;
  std::size_t vocab_max = 100000;
  auto* bv = app.add_subcommand("build-vocab", "Build a vocabulary from a split directory");
  bv->add_option("--data", vocab_data, "Split directory")->required();
  bv->add_option("--max-size", vocab_max, "Maximum vocabulary size including reserved ids");
  bv->add_option("--out", vocab_out, "Output vocabulary file")->required();

  // train
  std::string train_config, train_out, train_data, train_eval;
  std::vector<std::string> train_sets;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::size_t> train_epochs;
  auto* tr = app.add_subcommand("train", "Train an encoder");
  tr->add_option("--config", train_config, "key=value config file")->required();
  tr->add_option("--out", train_out, "Output directory")->required();
  tr->add_option("--data", train_data, "Train split directory (overrides config key data)");
  tr->add_option("--eval-data", train_eval, "Evaluation split directory (overrides eval_data)");
  tr->add_option("--set", train_sets, "key=value override, repeatable");
  tr->add_option("--seed", train_seed, "Seed override");
  tr->add_option("--epochs", train_epochs, "Epoch override");
  add_threads(tr, threads);

  // predict
  std::string pred_ckpt, pred_data, pred_out, pred_vocab, pred_config;
  std::size_t pred_k = 5;
  auto* pr = app.add_subcommand("predict", "Exact top-k label prediction for a split");
  pr->add_option("--ckpt", pred_ckpt, "Checkpoint")->required();
  pr->add_option("--data", pred_data, "Split directory")->required();
  pr->add_option("--k", pred_k, "Predictions per query");
  pr->add_option("--out", pred_out, "Prediction TSV")->required();
  pr->add_option("--vocab", pred_vocab, "Vocabulary (default: vocab.txt next to the checkpoint)");
  pr->add_option("--config", pred_config, "Resolved config (default: config.txt next to the checkpoint)");
  add_threads(pr, threads);

  // evaluate
  std::string ev_preds, ev_gt, ev_train_gt, ev_out, ev_plot;
  std::string ev_k = "1,5", ev_rk = "10,100", ev_psp_k;
  double psp_a = 0.55, psp_b = 1.5;
  auto* ev = app.add_subcommand("evaluate", "P@k, PSP@k and R@k of a prediction file");
  ev->add_option("--preds", ev_preds, "Prediction TSV")->required();
  ev->add_option("--gt", ev_gt, "Ground truth of the predicted split")->required();
  ev->add_option("--train-gt", ev_train_gt, "Ground truth used for label propensities (default: --gt)");
  ev->add_option("--k", ev_k, "Comma-separated k for P@k");
  ev->add_option("--recall-k", ev_rk, "Comma-separated k for R@k");
  ev->add_option("--psp-k", ev_psp_k, "Comma-separated k for PSP@k (default: --k)");
  ev->add_option("--psp-A", psp_a, "Propensity parameter A");
  ev->add_option("--psp-B", psp_b, "Propensity parameter B");
  ev->add_option("--out", ev_out, "Write the report here instead of stdout");
  ev->add_option("--plot", ev_plot, "Write an SVG bar chart of the report");

  // rai
  std::string rai_ckpt, rai_train, rai_test, rai_out, rai_agg = "sum", rai_vocab, rai_config;
  RaiConfig rai_cfg;
  auto* ra = app.add_subcommand("rai", "Retrieval-augmented prediction");
  ra->add_option("--ckpt", rai_ckpt, "Checkpoint")->required();
  ra->add_option("--train", rai_train, "Train split directory")->required();
  ra->add_option("--test", rai_test, "Test split directory")->required();
  ra->add_option("--lambda", rai_cfg.lambda, "Weight of the label search");
  ra->add_option("--temp", rai_cfg.temperature, "Softmax temperature");
  ra->add_option("--k-search", rai_cfg.k_search, "Items retrieved per search");
  ra->add_option("--agg", rai_agg, "Per-label aggregation: sum or max");
  ra->add_option("--k", rai_cfg.output_k, "Predictions per query");
  ra->add_option("--out", rai_out, "Prediction TSV")->required();
  ra->add_option("--vocab", rai_vocab, "Vocabulary (default: next to the checkpoint)");
  ra->add_option("--config", rai_config, "Resolved config (default: next to the checkpoint)");
  add_threads(ra, threads);

  // gradcheck
  std::size_t gc_d = 4, gc_trials = 1;
  std::uint64_t gc_seed = 1;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gc->add_option("--d", gc_d, "Embedding dimension");
  gc->add_option("--seed", gc_seed, "Fixture seed");
  gc->add_option("--trials", gc_trials, "Number of fixtures (seeds seed, seed+1, ...)");

  // assemble
  std::string as_mode = "decoder_fused", as_golden, as_data, as_side = "query", as_items = "0";
  std::size_t as_len = 32, as_cap = 3;
  auto* as = app.add_subcommand("assemble", "Dump prompt slot listings");
  as->add_option("--mode", as_mode, "Prompt template");
  as->add_option("--max-len", as_len, "Sequence length");
  as->add_option("--image-cap", as_cap, "Images per item");
  as->add_option("--dump-golden", as_golden, "Write the listing here (default: stdout)");
  as->add_option("--data", as_data, "Split directory (default: built-in fixture)");
  as->add_option("--side", as_side, "query or label");
  as->add_option("--items", as_items, "Comma-separated item indices");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return static_cast<int>(ErrorKind::kUsage);
  }

  if (show_version) {
    out << "vixml " << kToolVersion << " (image bank format " << kImageBankVersion << ", checkpoint format "
        << kCheckpointVersion << ")\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return static_cast<int>(ErrorKind::kUsage);
  }

  RunManifest manifest;
  try {
    if (gen->parsed()) {
      manifest.subcommand = "gen-synth";
      const SynthCorpus c = generate_synthetic(synth);
      write_split((fs::path(synth_out) / "train").string(), c.train);
      write_split((fs::path(synth_out) / "test").string(), c.test);
      std::string amb;
      for (std::size_t i = 0; i < c.test_ambiguous.size(); ++i) amb += std::to_string(i) + "\t" + (c.test_ambiguous[i] ? "1" : "0") + "\n";
      write_file_atomic((fs::path(synth_out) / "test" / "ambiguous.tsv").string(), amb);
      manifest.seed = synth.seed;
      manifest.config = {{"queries", synth.num_queries},
                         {"test_queries", synth.num_test_queries},
                         {"labels", synth.num_labels},
                         {"clusters", synth.num_clusters},
                         {"vocab", synth.vocab_size},
                         {"pos_per_query", synth.positives_per_query},
                         {"ambiguity", synth.ambiguity_fraction},
                         {"image_dim", synth.image_dim},
                         {"image_availability", synth.image_availability},
                         {"max_images", synth.max_images_per_item}};
      manifest.outputs = {(fs::path(synth_out) / "train").string(), (fs::path(synth_out) / "test").string()};
      const auto st = compute_stats(c.train.data, opt_bank(c.train.query_images), opt_bank(c.train.label_images));
      out << "labels_per_query\t" << st.labels_per_query << "\nqueries_per_label\t" << st.queries_per_label << "\n";
      manifest.write((fs::path(synth_out) / "manifest.json").string());
      return 0;
    }

    if (bv->parsed()) {
      manifest.subcommand = "build-vocab";
      const SplitData s = load_split(vocab_data, Split::kTrain);
      const Vocab v = build_vocab(vocab_corpus(s.data), vocab_max);
      write_vocab(vocab_out, v);
      manifest.config = {{"max_size", vocab_max}};
      manifest.inputs = {{"data", vocab_data}};
      manifest.outputs = {vocab_out};
      manifest.write(manifest_path_for_file(vocab_out));
      out << "vocabulary size\t" << v.size() << "\n";
      return 0;
    }

    if (tr->parsed()) {
      manifest.subcommand = "train";
      KeyValues kv = load_key_values(train_config);
      for (const auto& s : train_sets) {
        const auto parsed = parse_key_values(s, "--set");
        for (const auto& [k, v] : parsed) kv[k] = v;
      }
      if (!train_data.empty()) kv["data"] = train_data;
      if (!train_eval.empty()) kv["eval_data"] = train_eval;
      if (train_seed) kv["seed"] = std::to_string(*train_seed);
      if (train_epochs) kv["epochs"] = std::to_string(*train_epochs);
      kv["threads"] = std::to_string(threads);
      std::set<std::string> known(TrainConfig::keys().begin(), TrainConfig::keys().end());
      known.insert({"data", "eval_data", "vocab"});
      for (const auto& [k, v] : kv) {
        if (!known.count(k)) usage_error("unknown config key \"" + k + "\"");
      }
      if (!kv.count("data")) usage_error("train: no data directory (config key data or --data)");
      const TrainConfig cfg = TrainConfig::from_key_values(kv);
      const SplitData split = load_split(kv.at("data"), Split::kTrain);
      const Vocab vocab = kv.count("vocab") ? load_vocab(kv.at("vocab"))
                                            : build_vocab(vocab_corpus(split.data), cfg.vocab_max_size);
      fs::create_directories(train_out);
      const fs::path outp(train_out);
      write_vocab((outp / "vocab.txt").string(), vocab);

      KeyValues resolved = cfg.to_key_values();
      resolved["data"] = kv.at("data");
      if (kv.count("eval_data")) resolved["eval_data"] = kv.at("eval_data");

      TrainHooks hooks;
      hooks.on_refresh = [&](std::size_t epoch, const EncoderParams& p) {
        const std::string path = (outp / ("ckpt_epoch" + std::to_string(epoch) + ".vixp")).string();
        save_checkpoint(path, p);
        manifest.outputs.push_back(path);
      };
      hooks.on_epoch = [&](const EpochLog& e) {
        err << "epoch " << e.epoch << " loss " << e.loss << " active " << e.active_fraction << "\n";
      };
      TrainResult res = train(split, vocab, cfg, hooks);
      resolved["m"] = std::to_string(res.params.m);
      write_file_atomic((outp / "config.txt").string(), format_key_values(resolved));
      save_checkpoint((outp / "final.vixp").string(), res.params);
      write_file_atomic((outp / "train_log.tsv").string(), format_train_log(res.log));
      write_file_atomic((outp / "timing.tsv").string(), format_timing(res.log));
      manifest.outputs.push_back((outp / "final.vixp").string());
      manifest.outputs.push_back((outp / "train_log.tsv").string());

      if (kv.count("eval_data")) {
        ModelBundle mb{round_to_f32(res.params), vocab, cfg};
        const SplitData test = load_eval_split(kv.at("eval_data"));
        const PredictionSet ps = predict_split(mb, test, kEvalDepth);
        const auto rows = default_eval(ps, test.data.ground_truth, split.data.ground_truth, split.data.num_labels);
        write_file_atomic((outp / "eval.tsv").string(), format_report(rows));
        manifest.outputs.push_back((outp / "eval.tsv").string());
        out << format_report(rows);
      }
      for (const auto& [k, v] : resolved) manifest.config[k] = v;
      manifest.seed = cfg.seed;
      manifest.inputs = {{"config", train_config}, {"data", kv.at("data")}};
      manifest.write((outp / "manifest.json").string());
      return 0;
    }

    if (pr->parsed()) {
      manifest.subcommand = "predict";
      const ModelBundle mb = load_model(pred_ckpt, pred_vocab, pred_config, threads);
      const SplitData split = load_eval_split(pred_data);
      const PredictionSet ps = predict_split(mb, split, pred_k);
      write_predictions(pred_out, ps);
      for (const auto& [k, v] : mb.cfg.to_key_values()) manifest.config[k] = v;
      manifest.config["k"] = pred_k;
      manifest.seed = mb.cfg.seed;
      manifest.inputs = {{"ckpt", pred_ckpt}, {"data", pred_data}};
      manifest.outputs = {pred_out};
      manifest.write(manifest_path_for_file(pred_out));
      return 0;
    }

    if (ev->parsed()) {
      manifest.subcommand = "evaluate";
      const PredictionSet ps = read_predictions(ev_preds);
      const GroundTruthFile gt = read_ground_truth(ev_gt);
      const GroundTruthFile train_gt = ev_train_gt.empty() ? gt : read_ground_truth(ev_train_gt);
      const auto pm = compute_propensities(label_frequencies(train_gt.rows, gt.num_labels), train_gt.num_queries, psp_a, psp_b);
      EvalRequest req;
      req.precision_k = parse_size_list(ev_k, "--k");
      req.recall_k = parse_size_list(ev_rk, "--recall-k");
      req.psp_k = ev_psp_k.empty() ? req.precision_k : parse_size_list(ev_psp_k, "--psp-k");
      PredictionSet padded = ps;
      // Rows that already rank every label are complete at any depth.
      if (ps.k >= gt.num_labels) {
        for (const auto* ks : {&req.precision_k, &req.recall_k, &req.psp_k}) {
          for (std::size_t k : *ks) padded.k = std::max(padded.k, k);
        }
      }
      // Default depths beyond the predictions are dropped; explicit ones are errors.
      auto drop_deep = [&](std::vector<std::size_t>& ks, bool explicit_flag, const char* name) {
        if (explicit_flag) return;
        const auto n = ks.size();
        std::erase_if(ks, [&](std::size_t k) { return k > padded.k; });
        if (ks.size() != n) err << "note: skipping default " << name << " depths beyond prediction depth " << padded.k << "\n";
      };
      drop_deep(req.precision_k, ev->count("--k") > 0, "P@k");
      drop_deep(req.recall_k, ev->count("--recall-k") > 0, "R@k");
      drop_deep(req.psp_k, ev->count("--psp-k") > 0 || ev->count("--k") > 0, "PSP@k");
      const auto rows = evaluate_all(padded, gt.rows, pm, req);
      const std::string report = format_report(rows);
      if (ev_out.empty()) {
        out << report;
      } else {
        write_file_atomic(ev_out, report);
        manifest.outputs.push_back(ev_out);
      }
      if (!ev_plot.empty()) {
        write_file_atomic(ev_plot, render_svg_bars(rows, fs::path(ev_preds).filename().string()));
        manifest.outputs.push_back(ev_plot);
      }
      manifest.config = {{"k", ev_k}, {"recall_k", ev_rk}, {"psp_A", psp_a}, {"psp_B", psp_b}};
      manifest.inputs = {{"preds", ev_preds}, {"gt", ev_gt}, {"train_gt", ev_train_gt}};
      if (!ev_out.empty()) manifest.write(manifest_path_for_file(ev_out));
      return 0;
    }

    if (ra->parsed()) {
      manifest.subcommand = "rai";
      rai_cfg.aggregation = parse_aggregation(rai_agg);
      validate(rai_cfg);
      const ModelBundle mb = load_model(rai_ckpt, rai_vocab, rai_config, threads);
      const SplitData trs = load_split(rai_train, Split::kTrain);
      const SplitData tes = load_eval_split(rai_test);
      const InferenceSetup setup = InferenceSetup::from(mb.cfg);
      const Matrix l = embed_texts(mb.params, trs.data.label_texts, BankSide::kLabel, opt_bank(trs.label_images), mb.vocab, setup);
      const Matrix tq = embed_texts(mb.params, trs.data.query_texts, BankSide::kQuery, opt_bank(trs.query_images), mb.vocab, setup);
      const Matrix q = embed_texts(mb.params, tes.data.query_texts, BankSide::kQuery, opt_bank(tes.query_images), mb.vocab, setup);
      std::vector<LabelId> lids(l.rows), qids(tq.rows);
      for (std::size_t i = 0; i < lids.size(); ++i) lids[i] = static_cast<LabelId>(i);
      for (std::size_t i = 0; i < qids.size(); ++i) qids[i] = static_cast<LabelId>(i);
      const auto lidx = EmbeddingIndex::build(l, std::move(lids));
      const auto qidx = EmbeddingIndex::build(tq, std::move(qids));
      const PredictionSet ps = rai_predict_all(q, lidx, qidx, trs.data.ground_truth, rai_cfg, threads);
      write_predictions(rai_out, ps);
      manifest.config = {{"lambda", rai_cfg.lambda},
                         {"temperature", rai_cfg.temperature},
                         {"k_search", rai_cfg.k_search},
                         {"aggregation", rai_agg},
                         {"k", rai_cfg.output_k}};
      manifest.inputs = {{"ckpt", rai_ckpt}, {"train", rai_train}, {"test", rai_test}};
      manifest.outputs = {rai_out};
      manifest.write(manifest_path_for_file(rai_out));
      return 0;
    }

    if (gc->parsed()) {
      double worst = 0.0;
      std::size_t entries = 0;
      for (std::size_t t = 0; t < std::max<std::size_t>(gc_trials, 1); ++t) {
        const auto fx = make_gradcheck_fixture(gc_d, gc_seed + t);
        const auto rep = gradcheck(fx);
        worst = std::max(worst, rep.max_rel_error);
        entries += rep.entries;
      }
      char buf[128];
      std::snprintf(buf, sizeof(buf), "max_rel_error\t%.3e\nentries\t%zu\n", worst, entries);
      out << buf;
      return worst < 1e-4 ? 0 : static_cast<int>(ErrorKind::kNumeric);
    }

    if (as->parsed()) {
      std::string listing;
      if (as_data.empty()) {
        listing = golden_fixture_listing(as_mode, as_len, as_cap);
      } else {
        const SplitData s = load_eval_split(as_data);
        const Vocab v = build_vocab(vocab_corpus(s.data), 100000);
        const BankSide side = as_side == "label" ? BankSide::kLabel : BankSide::kQuery;
        if (as_side != "label" && as_side != "query") usage_error("--side must be query or label");
        const auto& texts = side == BankSide::kQuery ? s.data.query_texts : s.data.label_texts;
        const ImageBank* bank = side == BankSide::kQuery ? opt_bank(s.query_images) : opt_bank(s.label_images);
        const auto items = parse_size_list(as_items, "--items");
        const auto seqs = assemble_batch(texts, items, side, bank, parse_prompt_mode(as_mode), as_len, v, as_cap);
        for (std::size_t i = 0; i < seqs.size(); ++i) {
          listing += "# item " + std::to_string(items[i]) + "\n" + format_slots(seqs[i]);
        }
      }
      if (as_golden.empty()) {
        out << listing;
      } else {
        write_file_atomic(as_golden, listing);
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
  return 0;
}

}  // namespace vixml
