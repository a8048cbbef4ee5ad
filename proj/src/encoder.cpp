// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#include "vixml/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vixml/binary_io.hpp"
#include "vixml/parallel.hpp"
#include "vixml/rng.hpp"

namespace vixml {
namespace {

// out = a * b, a: n x k, b: k x m.
void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  out = Matrix(a.rows, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    auto o = out.row(r);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double s = a(r, k);
      const auto br = b.row(k);
      for (std::size_t c = 0; c < b.cols; ++c) o[c] += s * br[c];
    }
  }
}

// acc += a^T * b, a: n x k, b: n x m, acc: k x m.
void add_matmul_at_b(const Matrix& a, const Matrix& b, Matrix& acc) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    const auto br = b.row(r);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double s = a(r, k);
      auto o = acc.row(k);
      for (std::size_t c = 0; c < b.cols; ++c) o[c] += s * br[c];
    }
  }
}

// acc += a * b^T, a: n x k, b: m x k, acc: n x m.
void add_matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& acc) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    const auto ar = a.row(r);
    auto o = acc.row(r);
    for (std::size_t c = 0; c < b.rows; ++c) o[c] += dot(ar, b.row(c));
  }
}

std::span<const float> resolve_image(const ImageBanks& banks, const ImageRef& ref) {
  const ImageBank* bank = banks.of(ref.side);
  const ImageBank::Entry* e = bank ? bank->find(ref.item) : nullptr;
  if (!e || ref.ordinal >= e->images.size()) {
    data_error("encoder: unresolvable image ref (" + std::string(ref.side == BankSide::kQuery ? "query" : "label") +
               " item " + std::to_string(ref.item) + ", image " + std::to_string(ref.ordinal) + ")");
  }
  return e->images[ref.ordinal];
}

bool masked(Directionality dir, std::size_t query_pos, std::size_t key_pos) {
  return dir == Directionality::kCausal && key_pos > query_pos;
}

// Per-sequence gradient contribution; token rows stay sparse.
struct SequenceGrad {
  Matrix image_proj_w, image_proj_b, wq, wk, wv, wo;
  std::vector<std::pair<TokenId, std::vector<double>>> token_rows;
};

SequenceGrad backward_one(const EncoderParams& p, const PromptSequence& s, const ImageBanks& banks,
                          std::span<const double> upstream, const EmbedOptions& opts) {
  const ForwardCache f = forward(p, s, banks, opts);
  const std::size_t n = f.n;
  const std::size_t d = p.d;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  SequenceGrad g;
  g.image_proj_w = Matrix(p.image_proj_w.rows, p.image_proj_w.cols);
  g.image_proj_b = Matrix(1, d);
  g.wq = Matrix(d, d);
  g.wk = Matrix(d, d);
  g.wv = Matrix(d, d);
  g.wo = Matrix(d, d);

  // Through normalization: dh/du = (I - h h^T) / |u|.
  std::vector<double> dpooled(d);
  const double hg = dot(f.h, upstream);
  for (std::size_t i = 0; i < d; ++i) dpooled[i] = (upstream[i] - f.h[i] * hg) / f.pooled_norm;

  Matrix dz(n, d);
  if (opts.pooling == Pooling::kMean) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < d; ++i) dz(r, i) = dpooled[i] / static_cast<double>(n);
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) dz(n - 1, i) = dpooled[i];
  }

  // z = x + ctx * Wo
  Matrix dx = dz;
  add_matmul_at_b(f.ctx, dz, g.wo);
  Matrix dctx(n, d);
  add_matmul_a_bt(dz, p.attn_wo, dctx);

  // ctx = attn * v
  Matrix dattn(n, n);
  add_matmul_a_bt(dctx, f.v, dattn);
  Matrix dv(n, d);
  add_matmul_at_b(f.attn, dctx, dv);

  // Softmax rows; masked entries have zero weight and so zero gradient.
  Matrix dscores(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    double inner = 0.0;
    for (std::size_t c = 0; c < n; ++c) inner += f.attn(r, c) * dattn(r, c);
    for (std::size_t c = 0; c < n; ++c) dscores(r, c) = f.attn(r, c) * (dattn(r, c) - inner) * inv_sqrt_d;
  }
  Matrix dq(n, d), dk(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double gs = dscores(r, c);
      if (gs == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) {
        dq(r, i) += gs * f.k(c, i);
        dk(c, i) += gs * f.q(r, i);
      }
    }
  }
  add_matmul_at_b(f.x, dq, g.wq);
  add_matmul_at_b(f.x, dk, g.wk);
  add_matmul_at_b(f.x, dv, g.wv);
  add_matmul_a_bt(dq, p.attn_wq, dx);
  add_matmul_a_bt(dk, p.attn_wk, dx);
  add_matmul_a_bt(dv, p.attn_wv, dx);

  for (std::size_t r = 0; r < n; ++r) {
    const Slot& slot = s.slots[r];
    const auto dxr = dx.row(r);
    if (slot.kind == SlotKind::kImage) {
      const auto img = resolve_image(banks, slot.image);
      for (std::size_t i = 0; i < d; ++i) {
        auto wrow = g.image_proj_w.row(i);
        for (std::size_t j = 0; j < img.size(); ++j) wrow[j] += dxr[i] * static_cast<double>(img[j]);
        g.image_proj_b(0, i) += dxr[i];
      }
    } else {
      g.token_rows.emplace_back(slot.token, std::vector<double>(dxr.begin(), dxr.end()));
    }
  }
  return g;
}

void add_into(Matrix& acc, const Matrix& m) {
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += m.data[i];
}

}  // namespace

std::string_view to_string(Directionality d) { return d == Directionality::kCausal ? "causal" : "bidirectional"; }

Directionality parse_directionality(std::string_view s) {
  if (s == "causal") return Directionality::kCausal;
  if (s == "bidirectional") return Directionality::kBidirectional;
  usage_error("unknown directionality \"" + std::string(s) + "\"");
}

std::string_view to_string(Pooling p) { return p == Pooling::kMean ? "mean" : "last"; }

Pooling parse_pooling(std::string_view s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "last") return Pooling::kLastToken;
  usage_error("unknown pooling \"" + std::string(s) + "\"");
}

const std::array<const char*, ParamTensors::kNumTensors>& ParamTensors::tensor_names() {
  static const std::array<const char*, kNumTensors> names = {"token_table", "image_proj_w", "image_proj_b", "attn_wq",
                                                             "attn_wk",     "attn_wv",      "attn_wo"};
  return names;
}

ParamTensors ParamTensors::zeros_like() const {
  ParamTensors z;
  auto dst = z.tensors();
  auto src = tensors();
  for (std::size_t t = 0; t < kNumTensors; ++t) *dst[t] = Matrix(src[t]->rows, src[t]->cols);
  return z;
}

EncoderParams init_params(std::size_t d, std::size_t m, std::size_t vocab_size, Directionality dir,
                          std::uint64_t seed) {
  if (d == 0 || m == 0) usage_error("init_params: d and m must be positive");
  if (vocab_size == 0) usage_error("init_params: empty vocabulary");
  EncoderParams p;
  p.d = d;
  p.m = m;
  p.vocab_size = vocab_size;
  p.directionality = dir;
  p.token_table = Matrix(vocab_size, d);
  p.image_proj_w = Matrix(d, m);
  p.image_proj_b = Matrix(1, d);
  p.attn_wq = Matrix(d, d);
  p.attn_wk = Matrix(d, d);
  p.attn_wv = Matrix(d, d);
  p.attn_wo = Matrix(d, d);
  Rng rng(seed);
  for (Matrix* t : p.tensors()) {
    for (double& x : t->data) x = rng.uniform(-0.05, 0.05);
  }
  return p;
}

ForwardCache forward(const EncoderParams& p, const PromptSequence& s, const ImageBanks& banks,
                     const EmbedOptions& opts) {
  ForwardCache f;
  const std::size_t n = s.valid_length();
  const std::size_t d = p.d;
  if (n == 0) data_error("encoder: sequence has no valid slots");
  f.n = n;

  f.x = Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const Slot& slot = s.slots[r];
    auto xr = f.x.row(r);
    if (slot.kind == SlotKind::kImage) {
      const auto img = resolve_image(banks, slot.image);
      if (img.size() != p.m) {
        data_error("encoder: image dimension " + std::to_string(img.size()) + " does not match m=" + std::to_string(p.m));
      }
      for (std::size_t i = 0; i < d; ++i) {
        const auto w = p.image_proj_w.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < img.size(); ++j) acc += w[j] * static_cast<double>(img[j]);
        xr[i] = acc + p.image_proj_b(0, i);
      }
    } else {
      if (slot.token >= p.vocab_size) data_error("encoder: token id " + std::to_string(slot.token) + " out of range");
      const auto row = p.token_table.row(slot.token);
      std::copy(row.begin(), row.end(), xr.begin());
    }
  }

  matmul(f.x, p.attn_wq, f.q);
  matmul(f.x, p.attn_wk, f.k);
  matmul(f.x, p.attn_wv, f.v);

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  f.attn = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (masked(p.directionality, r, c)) continue;
      const double sc = dot(f.q.row(r), f.k.row(c)) * inv_sqrt_d;
      f.attn(r, c) = sc;
      mx = std::max(mx, sc);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (masked(p.directionality, r, c)) {
        f.attn(r, c) = 0.0;
        continue;
      }
      f.attn(r, c) = std::exp(f.attn(r, c) - mx);
      sum += f.attn(r, c);
    }
    for (std::size_t c = 0; c < n; ++c) f.attn(r, c) /= sum;
  }

  matmul(f.attn, f.v, f.ctx);
  matmul(f.ctx, p.attn_wo, f.z);
  for (std::size_t i = 0; i < f.z.data.size(); ++i) f.z.data[i] += f.x.data[i];

  f.pooled.assign(d, 0.0);
  if (opts.pooling == Pooling::kMean) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto zr = f.z.row(r);
      for (std::size_t i = 0; i < d; ++i) f.pooled[i] += zr[i];
    }
    for (double& x : f.pooled) x /= static_cast<double>(n);
  } else {
    const auto zr = f.z.row(n - 1);
    std::copy(zr.begin(), zr.end(), f.pooled.begin());
  }
  f.pooled_norm = l2_norm(f.pooled);
  if (!(f.pooled_norm > 0.0) || !std::isfinite(f.pooled_norm)) {
    numeric_error("encoder: pooled representation has norm " + std::to_string(f.pooled_norm));
  }
  f.h = f.pooled;
  for (double& x : f.h) x /= f.pooled_norm;
  return f;
}

Embedding embed(const EncoderParams& p, const PromptSequence& s, const ImageBanks& banks, const EmbedOptions& opts) {
  return forward(p, s, banks, opts).h;
}

Matrix embed_bank(const EncoderParams& p, std::span<const PromptSequence> sequences, const ImageBanks& banks,
                  const EmbedOptions& opts, unsigned threads) {
  Matrix out(sequences.size(), p.d);
  parallel_for(sequences.size(), threads, [&](std::size_t i) {
    const Embedding h = embed(p, sequences[i], banks, opts);
    std::copy(h.begin(), h.end(), out.row(i).begin());
  });
  return out;
}

GradientSet backward(const EncoderParams& p, std::span<const PromptSequence> sequences, const ImageBanks& banks,
                     const Matrix& upstream, const EmbedOptions& opts, unsigned threads) {
  if (upstream.rows != sequences.size() || upstream.cols != p.d) {
    usage_error("backward: upstream has shape " + std::to_string(upstream.rows) + "x" + std::to_string(upstream.cols) +
                ", expected " + std::to_string(sequences.size()) + "x" + std::to_string(p.d));
  }
  GradientSet g;
  static_cast<ParamTensors&>(g) = p.zeros_like();

  std::vector<SequenceGrad> parts(sequences.size());
  std::vector<char> active(sequences.size(), 0);
  parallel_for(sequences.size(), threads, [&](std::size_t i) {
    const auto up = upstream.row(i);
    if (std::all_of(up.begin(), up.end(), [](double x) { return x == 0.0; })) return;
    parts[i] = backward_one(p, sequences[i], banks, up, opts);
    active[i] = 1;
  });
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!active[i]) continue;
    const SequenceGrad& sg = parts[i];
    add_into(g.image_proj_w, sg.image_proj_w);
    add_into(g.image_proj_b, sg.image_proj_b);
    add_into(g.attn_wq, sg.wq);
    add_into(g.attn_wk, sg.wk);
    add_into(g.attn_wv, sg.wv);
    add_into(g.attn_wo, sg.wo);
    for (const auto& [tok, row] : sg.token_rows) {
      auto dst = g.token_table.row(tok);
      for (std::size_t c = 0; c < row.size(); ++c) dst[c] += row[c];
    }
  }
  return g;
}

std::string serialize_checkpoint(const EncoderParams& p) {
  std::string out("VIXP");
  bin::put_uint<std::uint32_t>(out, kCheckpointVersion);
  bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(p.d));
  bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(p.m));
  bin::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(p.vocab_size));
  bin::put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(p.directionality));
  for (const Matrix* t : p.tensors()) {
    for (double x : t->data) bin::put_f32(out, static_cast<float>(x));
  }
  return out;
}

EncoderParams parse_checkpoint(const std::string& bytes, const std::string& context) {
  bin::Reader r(bytes, context);
  if (r.get_bytes(4) != "VIXP") data_error(context + ": bad magic, expected VIXP");
  const auto version = r.get_uint<std::uint32_t>();
  if (version != kCheckpointVersion) data_error(context + ": unsupported version " + std::to_string(version));
  const auto d = r.get_uint<std::uint32_t>();
  const auto m = r.get_uint<std::uint32_t>();
  const auto vocab = r.get_uint<std::uint32_t>();
  const auto dir = r.get_uint<std::uint8_t>();
  if (d == 0 || m == 0 || vocab == 0 || dir > 1) data_error(context + ": invalid header");
  EncoderParams p = init_params(d, m, vocab, static_cast<Directionality>(dir), 0);
  for (Matrix* t : p.tensors()) {
    for (double& x : t->data) {
      const float f = r.get_f32();
      if (!std::isfinite(f)) data_error(context + ": non-finite parameter");
      x = static_cast<double>(f);
    }
  }
  if (!r.at_end()) data_error(context + ": trailing bytes");
  return p;
}

void save_checkpoint(const std::string& path, const EncoderParams& p) { write_file_atomic(path, serialize_checkpoint(p)); }

EncoderParams load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path), path); }

EncoderParams round_to_f32(const EncoderParams& p) {
  EncoderParams r = p;
  for (Matrix* t : r.tensors()) {
    for (double& x : t->data) x = static_cast<double>(static_cast<float>(x));
  }
  return r;
}

}  // namespace vixml
