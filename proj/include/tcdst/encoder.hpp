#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tcdst/autodiff.hpp"
#include "tcdst/error.hpp"
#include "tcdst/input.hpp"
#include "tcdst/rng.hpp"
#include "tcdst/vocab.hpp"

namespace tcdst {

enum class Mode { kTrain, kEval };

struct EncoderConfig {
  std::size_t num_layers = 2;
  std::size_t hidden_size = 64;
  std::size_t num_heads = 4;
  std::size_t ffn_size = 0;  // 0 means 4 * hidden_size
  std::size_t max_len = 128;
  std::size_t vocab_size = 0;
  double dropout_rate = 0.1;  // off in eval and grad-check modes
  std::uint64_t seed = 0;

  std::size_t ffn() const { return ffn_size ? ffn_size : 4 * hidden_size; }

  void validate() const {
    if (vocab_size == 0) throw ConfigError("encoder: vocab_size not set");
    if (num_layers == 0) throw ConfigError("encoder: num_layers must be >= 1");
    if (num_heads == 0 || hidden_size % num_heads != 0)
      throw ConfigError("encoder: num_heads must divide hidden_size");
    if (max_len < 8) throw ConfigError("encoder: max_len must be >= 8");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw ConfigError("encoder: dropout_rate must be in [0, 1)");
  }
};

inline constexpr double kLayerNormEps = 1e-5;

// Registers embeddings, per-layer attention/feed-forward blocks, and the
// final norm, in a fixed order. Weights are N(0, 0.02), biases zero, norm
// gains one.
template <class T>
void register_encoder_params(ParamStore<T>& store, const EncoderConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t h = cfg.hidden_size;
  const std::size_t f = cfg.ffn();
  const T std02 = T(0.02);
  auto ones = [](std::size_t n) { return std::vector<T>(n, T(1)); };

  store.add_normal("emb.tok", cfg.vocab_size, h, std02, rng);
  store.add_normal("emb.pos", cfg.max_len, h, std02, rng);
  store.add_normal("emb.seg", 2, h, std02, rng);
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string p = "enc" + std::to_string(l) + ".";
    store.add(p + "ln1.g", 1, h, ones(h));
    store.add_normal(p + "ln1.b", 1, h, T(0), rng);
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
      store.add_normal(p + "attn." + w, h, h, std02, rng);
      store.add_normal(p + "attn." + w + std::string(".bias"), 1, h, T(0), rng);
    }
    store.add(p + "ln2.g", 1, h, ones(h));
    store.add_normal(p + "ln2.b", 1, h, T(0), rng);
    store.add_normal(p + "ffn.w1", h, f, std02, rng);
    store.add_normal(p + "ffn.b1", 1, f, T(0), rng);
    store.add_normal(p + "ffn.w2", f, h, std02, rng);
    store.add_normal(p + "ffn.b2", 1, h, T(0), rng);
  }
  store.add("final_ln.g", 1, h, ones(h));
  store.add_normal("final_ln.b", 1, h, T(0), rng);
}

// [INTENT] starts as an exact copy of the [CLS] embedding; each [SLOT-*]
// row is redrawn N(0, 0.02) under its own seed so the rows are reproducible
// regardless of vocabulary size.
template <class T>
void init_conditioning_embeddings(ParamStore<T>& store, const Vocabulary& vocab,
                                  Variant variant, std::uint64_t seed) {
  if (!store.has("emb.tok"))
    throw StateError("init_conditioning_embeddings before base init");
  Param<T>& tok = store.by_name("emb.tok");
  const std::size_t h = tok.cols;
  if (conditions_on_intent(variant))
    for (std::size_t j = 0; j < h; ++j)
      tok.values[Vocabulary::kIntent * h + j] =
          tok.values[Vocabulary::kCls * h + j];
  if (conditions_on_categorical(variant)) {
    Rng rng(Rng::derive(seed, 0x51075u));
    for (std::size_t s = 0; s < vocab.num_slot_tokens(); ++s) {
      const std::size_t row = Vocabulary::kIntent + 1 + s;
      for (std::size_t j = 0; j < h; ++j)
        tok.values[row * h + j] = static_cast<T>(rng.normal(0.0, 0.02));
    }
  }
}

// Pre-norm Transformer encoder over one input sequence. Returns the tape id
// of the [n x h] contextualized output. Pad positions are excluded from
// attention keys so a padded tail cannot influence real positions.
template <class T>
typename Tape<T>::Id encoder_forward(Tape<T>& tape, ParamStore<T>& store,
                                     const EncoderConfig& cfg,
                                     const InputSequence& seq, Mode mode,
                                     Rng& rng) {
  cfg.validate();
  const std::size_t n = seq.length();
  if (n == 0) throw DimensionError("encoder_forward: empty sequence");
  if (n > cfg.max_len)
    throw CapacityError("sequence length " + std::to_string(n) +
                        " exceeds max_len " + std::to_string(cfg.max_len));
  for (auto id : seq.token_ids)
    if (id >= cfg.vocab_size)
      throw VocabError("token id " + std::to_string(id) +
                       " outside vocab of " + std::to_string(cfg.vocab_size));

  using Id = typename Tape<T>::Id;
  const std::size_t h = cfg.hidden_size;
  const std::size_t dh = h / cfg.num_heads;
  const T rate = mode == Mode::kTrain ? T(cfg.dropout_rate) : T(0);
  auto p = [&](const std::string& name) {
    return tape.param(store, store.index_of(name));
  };

  std::vector<std::size_t> positions(n), segments(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  for (std::size_t i = 0; i < n; ++i) segments[i] = seq.segment_ids[i];
  std::vector<unsigned char> key_valid(n, 1);
  for (std::size_t i = 0; i < n; ++i)
    if (seq.token_ids[i] == Vocabulary::kPad) key_valid[i] = 0;

  Id x = tape.add(tape.embed_rows(p("emb.tok"), seq.token_ids),
                  tape.add(tape.embed_rows(p("emb.pos"), positions),
                           tape.embed_rows(p("emb.seg"), segments)));
  x = tape.dropout(x, rate, rng);

  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::string pre = "enc" + std::to_string(l) + ".";
    Id a = tape.layer_norm_rows(x, p(pre + "ln1.g"), p(pre + "ln1.b"),
                                T(kLayerNormEps));
    Id q = tape.add_bias(tape.matmul(a, p(pre + "attn.wq")),
                         p(pre + "attn.wq.bias"));
    Id k = tape.add_bias(tape.matmul(a, p(pre + "attn.wk")),
                         p(pre + "attn.wk.bias"));
    Id v = tape.add_bias(tape.matmul(a, p(pre + "attn.wv")),
                         p(pre + "attn.wv.bias"));
    std::vector<Id> ctx;
    for (std::size_t head = 0; head < cfg.num_heads; ++head) {
      Id qi = tape.col_block(q, head * dh, dh);
      Id ki = tape.col_block(k, head * dh, dh);
      Id vi = tape.col_block(v, head * dh, dh);
      Id scores = tape.scale(tape.matmul_nt(qi, ki),
                             T(1.0 / std::sqrt(static_cast<double>(dh))));
      Id probs = tape.softmax_rows(scores, key_valid);
      ctx.push_back(tape.matmul(probs, vi));
    }
    Id attn = tape.add_bias(tape.matmul(tape.concat_cols(ctx), p(pre + "attn.wo")),
                            p(pre + "attn.wo.bias"));
    x = tape.add(x, tape.dropout(attn, rate, rng));

    Id b = tape.layer_norm_rows(x, p(pre + "ln2.g"), p(pre + "ln2.b"),
                                T(kLayerNormEps));
    Id f = tape.add_bias(tape.matmul(b, p(pre + "ffn.w1")), p(pre + "ffn.b1"));
    f = tape.gelu_op(f);
    f = tape.add_bias(tape.matmul(f, p(pre + "ffn.w2")), p(pre + "ffn.b2"));
    x = tape.add(x, tape.dropout(f, rate, rng));
  }
  return tape.layer_norm_rows(x, p("final_ln.g"), p("final_ln.b"),
                              T(kLayerNormEps));
}

}  // namespace tcdst
