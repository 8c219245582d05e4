#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stylevec/binio.hpp"
#include "stylevec/errors.hpp"
#include "stylevec/textcodec.hpp"
#include "stylevec/vecmath.hpp"

namespace stylevec {

using textcodec::TokenSeq;

struct ModelConfig {
    int n_layers = 4;
    int d_model = 64;
    int n_heads = 4;
    int d_ff = 256;
    int vocab_size = textcodec::kVocabSize;
    int max_seq_len = 256;
    uint64_t seed = 42;

    void validate() const {
        if (n_layers < 1) throw ConfigInvalid("n_layers must be >= 1");
        if (d_model < 2) throw ConfigInvalid("d_model must be >= 2");
        if (n_heads < 1 || d_model % n_heads != 0)
            throw ConfigInvalid("n_heads must be positive and divide d_model");
        if (d_ff < 1) throw ConfigInvalid("d_ff must be >= 1");
        if (vocab_size != textcodec::kVocabSize)
            throw ConfigInvalid("vocab_size is fixed to the byte codec vocabulary (258)");
        if (max_seq_len < 2) throw ConfigInvalid("max_seq_len must be >= 2");
    }
};

/// Which token positions a hook touches. Position t is measured against the
/// prompt length P: AllInput hits t < P, LastInputToken hits t == P-1,
/// GeneratedOnly hits t >= P.
enum class PositionPolicy { AllInput, LastInputToken, GeneratedOnly };

inline const char* to_string(PositionPolicy p) {
    switch (p) {
        case PositionPolicy::AllInput: return "all-input";
        case PositionPolicy::LastInputToken: return "last-input";
        case PositionPolicy::GeneratedOnly: return "generated";
    }
    return "?";
}

/// Additive intervention at one layer: rows selected by the policy become
/// row + scale * vector, applied to the post-block residual stream.
struct HookSpec {
    int layer = 0;
    std::vector<float> vector;
    float scale = 0.f;
    PositionPolicy positions = PositionPolicy::GeneratedOnly;
};

/// Captured post-block hidden rows per requested layer, plus the next-token
/// scores at the final processed position. When a hook is active at a
/// captured layer, the rows hold the post-injection values.
struct ForwardTrace {
    std::map<int, std::vector<float>> hidden; // layer -> n_positions * d_model, row-major
    int n_positions = 0;
    int d_model = 0;
    std::vector<float> logits;

    std::span<const float> row(int layer, int pos) const {
        const auto& rows = hidden.at(layer);
        return {rows.data() + static_cast<size_t>(pos) * d_model,
                static_cast<size_t>(d_model)};
    }
};

struct Weights {
    std::vector<float> tok_emb; // [vocab, D]
    std::vector<float> pos_emb; // [max_seq, D]
    struct Block {
        std::vector<float> ln1_g, ln1_b;
        std::vector<float> wq, bq, wk, bk, wv, bv; // [D,D] row-per-output, [D]
        std::vector<float> wo, bo;
        std::vector<float> ln2_g, ln2_b;
        std::vector<float> w1, b1; // [F,D], [F]
        std::vector<float> w2, b2; // [D,F], [D]
    };
    std::vector<Block> blocks;
    std::vector<float> lnf_g, lnf_b;
    std::vector<float> head_w, head_b; // [vocab, D], [vocab]
};

/// Visits every tensor in checkpoint order; the same order defines the
/// on-disk layout and the trainer's gradient/moment bookkeeping.
template <typename F>
void for_each_tensor(Weights& w, F&& f) {
    f(w.tok_emb);
    f(w.pos_emb);
    for (auto& b : w.blocks) {
        f(b.ln1_g); f(b.ln1_b);
        f(b.wq); f(b.bq); f(b.wk); f(b.bk); f(b.wv); f(b.bv); f(b.wo); f(b.bo);
        f(b.ln2_g); f(b.ln2_b);
        f(b.w1); f(b.b1); f(b.w2); f(b.b2);
    }
    f(w.lnf_g); f(w.lnf_b);
    f(w.head_w); f(w.head_b);
}

namespace nn {

inline constexpr float kLnEps = 1e-5f;

// y[t][o] = sum_k x[t][k] * w[o][k] + b[o]   (w stored row-per-output)
inline void linear(const float* x, const float* w, const float* b, float* y,
                   int n, int in, int out) {
    for (int t = 0; t < n; ++t) {
        const float* xr = x + static_cast<size_t>(t) * in;
        float* yr = y + static_cast<size_t>(t) * out;
        for (int o = 0; o < out; ++o) {
            const float* wr = w + static_cast<size_t>(o) * in;
            float acc = b ? b[o] : 0.f;
            for (int k = 0; k < in; ++k) acc += xr[k] * wr[k];
            yr[o] = acc;
        }
    }
}

inline void layer_norm(const float* x, const float* g, const float* b, float* y,
                       int n, int d) {
    for (int t = 0; t < n; ++t) {
        const float* xr = x + static_cast<size_t>(t) * d;
        float* yr = y + static_cast<size_t>(t) * d;
        double mean = 0.0;
        for (int i = 0; i < d; ++i) mean += xr[i];
        mean /= d;
        double var = 0.0;
        for (int i = 0; i < d; ++i) {
            const double diff = xr[i] - mean;
            var += diff * diff;
        }
        var /= d;
        const float inv_std = 1.0f / std::sqrt(static_cast<float>(var) + kLnEps);
        for (int i = 0; i < d; ++i)
            yr[i] = g[i] * (static_cast<float>(xr[i] - mean) * inv_std) + b[i];
    }
}

inline float gelu(float x) {
    constexpr float c = 0.7978845608028654f; // sqrt(2/pi)
    const float u = c * (x + 0.044715f * x * x * x);
    return 0.5f * x * (1.0f + std::tanh(u));
}

} // namespace nn

/// Decoder-only transformer: learned positional embeddings, pre-norm blocks
/// with multi-head causal self-attention and a 2-layer GELU feed-forward.
/// The capture/injection site is the post-block residual stream (the row
/// after both residual adds of block l); with a hook active, injection runs
/// first and capture reports the post-injection row.
class Model {
public:
    explicit Model(const ModelConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        init_weights();
    }

    // the forward-pass counter is instrumentation, not state: copies start
    // from the source's current count
    Model(const Model& other)
        : cfg_(other.cfg_), w_(other.w_),
          fwd_count_(other.fwd_count_.load(std::memory_order_relaxed)) {}
    Model(Model&& other) noexcept
        : cfg_(std::move(other.cfg_)), w_(std::move(other.w_)),
          fwd_count_(other.fwd_count_.load(std::memory_order_relaxed)) {}

    const ModelConfig& config() const { return cfg_; }
    const Weights& weights() const { return w_; }
    // Mutable access exists for the training scaffold and the checkpoint
    // loader. Weights must not change once the model is shared across calls.
    Weights& weights() { return w_; }

    /// Hidden rows at every position for each requested layer. The optional
    /// hook treats the whole sequence as input (prompt_len == |seq|), so
    /// GeneratedOnly hooks are a no-op here.
    ForwardTrace forward_capture(const TokenSeq& seq, const std::set<int>& layers,
                                 const std::optional<HookSpec>& hook = {}) const {
        check_seq(seq, 0);
        check_layers(layers);
        if (hook) check_hook(*hook);
        KvCache cache(cfg_);
        ForwardTrace trace;
        trace.d_model = cfg_.d_model;
        trace.logits = process(seq, 0, static_cast<int>(seq.size()), cache,
                               hook ? &*hook : nullptr, &layers, &trace);
        trace.n_positions = static_cast<int>(seq.size());
        return trace;
    }

    /// Greedy decoding (argmax, ties to the lowest token id). Stops after
    /// max_new tokens or when EOS is emitted; returns the generated ids only
    /// (prompt excluded, EOS excluded).
    TokenSeq generate(const TokenSeq& prompt, int max_new,
                      const std::optional<HookSpec>& hook = {}) const {
        return run_generate(prompt, max_new, hook, nullptr, nullptr);
    }

    struct TracedGeneration {
        TokenSeq generated;
        ForwardTrace trace; // rows for every processed position (prompt + fed-back tokens)
    };

    TracedGeneration generate_traced(const TokenSeq& prompt, int max_new,
                                     const std::optional<HookSpec>& hook,
                                     const std::set<int>& layers) const {
        check_layers(layers);
        TracedGeneration out;
        out.trace.d_model = cfg_.d_model;
        out.generated = run_generate(prompt, max_new, hook, &layers, &out.trace);
        return out;
    }

    /// Instrumentation: number of forward invocations (one per prompt pass
    /// or single-token decode step) since construction or the last reset.
    uint64_t forward_passes() const { return fwd_count_.load(std::memory_order_relaxed); }
    void reset_forward_counter() const { fwd_count_.store(0, std::memory_order_relaxed); }

    // -- checkpoint io ------------------------------------------------------
    // Layout: magic "SLMW", u32 version (1), config as six i32 fields
    // (n_layers, d_model, n_heads, d_ff, vocab_size, max_seq_len) plus u64
    // seed, then f32 little-endian tensors in declaration order: tok_emb,
    // pos_emb, per block [ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo,
    // ln2_g, ln2_b, w1, b1, w2, b2], lnf_g, lnf_b, head_w, head_b.

    void save(const std::filesystem::path& path) const {
        namespace fs = std::filesystem;
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
            binio::write_bytes(os, "SLMW", 4);
            binio::write_u32(os, 1);
            binio::write_i32(os, cfg_.n_layers);
            binio::write_i32(os, cfg_.d_model);
            binio::write_i32(os, cfg_.n_heads);
            binio::write_i32(os, cfg_.d_ff);
            binio::write_i32(os, cfg_.vocab_size);
            binio::write_i32(os, cfg_.max_seq_len);
            binio::write_u64(os, cfg_.seed);
            for_each_tensor(const_cast<Weights&>(w_), [&](std::vector<float>& t) {
                for (float v : t) binio::write_f32(os, v);
            });
            if (!os) throw IoError("write failed for " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
    }

    static Model load(const std::filesystem::path& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw IoError("cannot open " + path.string());
        char magic[4];
        binio::read_bytes(is, magic, 4, "magic");
        if (std::string_view(magic, 4) != "SLMW")
            throw BadMagic("bad magic in " + path.string() + " (expected SLMW)");
        const uint32_t version = binio::read_u32(is, "version");
        if (version != 1)
            throw VersionUnsupported("checkpoint version " + std::to_string(version));
        ModelConfig cfg;
        cfg.n_layers = binio::read_i32(is, "n_layers");
        cfg.d_model = binio::read_i32(is, "d_model");
        cfg.n_heads = binio::read_i32(is, "n_heads");
        cfg.d_ff = binio::read_i32(is, "d_ff");
        cfg.vocab_size = binio::read_i32(is, "vocab_size");
        cfg.max_seq_len = binio::read_i32(is, "max_seq_len");
        cfg.seed = binio::read_u64(is, "seed");
        cfg.validate();
        Model m(cfg);
        for_each_tensor(m.w_, [&](std::vector<float>& t) {
            for (float& v : t) v = binio::read_f32(is, "weights");
        });
        return m;
    }

private:
    struct KvCache {
        explicit KvCache(const ModelConfig& cfg)
            : k(cfg.n_layers, std::vector<float>(static_cast<size_t>(cfg.max_seq_len) * cfg.d_model)),
              v(cfg.n_layers, std::vector<float>(static_cast<size_t>(cfg.max_seq_len) * cfg.d_model)) {}
        std::vector<std::vector<float>> k, v;
    };

    void check_seq(const TokenSeq& seq, int extra) const {
        if (seq.empty()) throw SeqTooLong("sequence must contain at least one token");
        if (static_cast<int>(seq.size()) + extra > cfg_.max_seq_len)
            throw SeqTooLong("sequence of " + std::to_string(seq.size()) + "+" +
                             std::to_string(extra) + " tokens exceeds max_seq_len " +
                             std::to_string(cfg_.max_seq_len));
        for (int id : seq)
            if (id < 0 || id >= cfg_.vocab_size)
                throw DataError("token id " + std::to_string(id) + " out of vocabulary");
    }

    void check_layers(const std::set<int>& layers) const {
        for (int l : layers)
            if (l < 0 || l >= cfg_.n_layers)
                throw LayerOutOfRange("layer " + std::to_string(l) + " not in [0, " +
                                      std::to_string(cfg_.n_layers - 1) + "]");
    }

    void check_hook(const HookSpec& hook) const {
        if (hook.layer < 0 || hook.layer >= cfg_.n_layers)
            throw LayerOutOfRange("hook layer " + std::to_string(hook.layer));
        if (static_cast<int>(hook.vector.size()) != cfg_.d_model)
            throw DimensionMismatch("hook vector has dimension " +
                                    std::to_string(hook.vector.size()) + ", model is " +
                                    std::to_string(cfg_.d_model));
        if (!std::isfinite(hook.scale)) throw ConfigInvalid("hook scale must be finite");
    }

    static bool policy_selects(PositionPolicy p, int pos, int prompt_len) {
        switch (p) {
            case PositionPolicy::AllInput: return pos < prompt_len;
            case PositionPolicy::LastInputToken: return pos == prompt_len - 1;
            case PositionPolicy::GeneratedOnly: return pos >= prompt_len;
        }
        return false;
    }

    // Runs the block stack over `tokens` occupying absolute positions
    // pos0..pos0+n-1, reading/filling the KV cache. Returns the next-token
    // scores at the last of the new positions.
    std::vector<float> process(std::span<const int> tokens, int pos0, int prompt_len,
                               KvCache& cache, const HookSpec* hook,
                               const std::set<int>* capture, ForwardTrace* trace) const {
        fwd_count_.fetch_add(1, std::memory_order_relaxed);
        const int n = static_cast<int>(tokens.size());
        const int d = cfg_.d_model;
        const int nh = cfg_.n_heads;
        const int dh = d / nh;
        const float att_scale = 1.0f / std::sqrt(static_cast<float>(dh));

        std::vector<float> x(static_cast<size_t>(n) * d);
        for (int t = 0; t < n; ++t) {
            const float* te = &w_.tok_emb[static_cast<size_t>(tokens[t]) * d];
            const float* pe = &w_.pos_emb[static_cast<size_t>(pos0 + t) * d];
            float* xr = &x[static_cast<size_t>(t) * d];
            for (int i = 0; i < d; ++i) xr[i] = te[i] + pe[i];
        }

        std::vector<float> xn(static_cast<size_t>(n) * d), q(static_cast<size_t>(n) * d),
            att(static_cast<size_t>(n) * d), proj(static_cast<size_t>(n) * d),
            ff1(static_cast<size_t>(n) * cfg_.d_ff), ff2(static_cast<size_t>(n) * d);
        std::vector<float> scores(static_cast<size_t>(cfg_.max_seq_len));

        for (int l = 0; l < cfg_.n_layers; ++l) {
            const auto& b = w_.blocks[l];
            float* kc = cache.k[l].data();
            float* vc = cache.v[l].data();

            nn::layer_norm(x.data(), b.ln1_g.data(), b.ln1_b.data(), xn.data(), n, d);
            nn::linear(xn.data(), b.wq.data(), b.bq.data(), q.data(), n, d, d);
            nn::linear(xn.data(), b.wk.data(), b.bk.data(), kc + static_cast<size_t>(pos0) * d, n, d, d);
            nn::linear(xn.data(), b.wv.data(), b.bv.data(), vc + static_cast<size_t>(pos0) * d, n, d, d);

            for (int t = 0; t < n; ++t) {
                const int p = pos0 + t; // attends cache positions 0..p
                for (int h = 0; h < nh; ++h) {
                    const float* qh = &q[static_cast<size_t>(t) * d + h * dh];
                    float maxs = -1e30f;
                    for (int s = 0; s <= p; ++s) {
                        const float* kh = kc + static_cast<size_t>(s) * d + h * dh;
                        float acc = 0.f;
                        for (int i = 0; i < dh; ++i) acc += qh[i] * kh[i];
                        acc *= att_scale;
                        scores[s] = acc;
                        if (acc > maxs) maxs = acc;
                    }
                    double denom = 0.0;
                    for (int s = 0; s <= p; ++s) {
                        scores[s] = std::exp(scores[s] - maxs);
                        denom += scores[s];
                    }
                    float* oh = &att[static_cast<size_t>(t) * d + h * dh];
                    for (int i = 0; i < dh; ++i) oh[i] = 0.f;
                    for (int s = 0; s <= p; ++s) {
                        const float w = static_cast<float>(scores[s] / denom);
                        const float* vh = vc + static_cast<size_t>(s) * d + h * dh;
                        for (int i = 0; i < dh; ++i) oh[i] += w * vh[i];
                    }
                }
            }

            nn::linear(att.data(), b.wo.data(), b.bo.data(), proj.data(), n, d, d);
            for (size_t i = 0; i < x.size(); ++i) x[i] += proj[i];

            nn::layer_norm(x.data(), b.ln2_g.data(), b.ln2_b.data(), xn.data(), n, d);
            nn::linear(xn.data(), b.w1.data(), b.b1.data(), ff1.data(), n, d, cfg_.d_ff);
            for (float& v : ff1) v = nn::gelu(v);
            nn::linear(ff1.data(), b.w2.data(), b.b2.data(), ff2.data(), n, cfg_.d_ff, d);
            for (size_t i = 0; i < x.size(); ++i) x[i] += ff2[i];

            if (hook && hook->layer == l) {
                for (int t = 0; t < n; ++t) {
                    if (!policy_selects(hook->positions, pos0 + t, prompt_len)) continue;
                    float* xr = &x[static_cast<size_t>(t) * d];
                    for (int i = 0; i < d; ++i) xr[i] += hook->scale * hook->vector[i];
                }
            }
            if (capture && capture->count(l) && trace) {
                auto& rows = trace->hidden[l];
                rows.insert(rows.end(), x.begin(), x.end());
            }
        }

        // final norm + head on the last new position only
        std::vector<float> hn(d), logits(cfg_.vocab_size);
        nn::layer_norm(&x[static_cast<size_t>(n - 1) * d], w_.lnf_g.data(), w_.lnf_b.data(),
                       hn.data(), 1, d);
        nn::linear(hn.data(), w_.head_w.data(), w_.head_b.data(), logits.data(), 1, d,
                   cfg_.vocab_size);
        return logits;
    }

    TokenSeq run_generate(const TokenSeq& prompt, int max_new,
                          const std::optional<HookSpec>& hook, const std::set<int>* capture,
                          ForwardTrace* trace) const {
        check_seq(prompt, max_new < 0 ? 0 : max_new);
        if (max_new < 0) throw SeqTooLong("max_new must be >= 0");
        if (hook) check_hook(*hook);
        if (max_new == 0) {
            if (trace) trace->n_positions = 0;
            return {};
        }
        const HookSpec* h = hook ? &*hook : nullptr;
        const int prompt_len = static_cast<int>(prompt.size());

        KvCache cache(cfg_);
        TokenSeq generated;
        int processed = 0;
        std::vector<float> logits =
            process(prompt, 0, prompt_len, cache, h, capture, trace);
        processed = prompt_len;

        for (int step = 0; step < max_new; ++step) {
            int best = 0;
            for (int i = 1; i < cfg_.vocab_size; ++i)
                if (logits[i] > logits[best]) best = i; // strict > keeps the lowest id on ties
            if (best == textcodec::kEos) break;
            generated.push_back(best);
            if (step + 1 == max_new) break; // emitted token never fed back
            const int tok[1] = {best};
            logits = process(std::span<const int>(tok, 1), processed, prompt_len, cache, h,
                             capture, trace);
            ++processed;
        }
        if (trace) trace->n_positions = processed;
        return generated;
    }

    void init_weights() {
        const int d = cfg_.d_model;
        Rng rng(cfg_.seed);
        const float base_std = 0.02f;
        // residual-output projections get the usual 1/sqrt(2L) damping
        const float resid_std = base_std / std::sqrt(2.0f * cfg_.n_layers);

        auto fill_normal = [&](std::vector<float>& t, size_t size, float std_dev) {
            t.assign(size, 0.f);
            for (float& v : t) v = static_cast<float>(rng.normal()) * std_dev;
        };
        auto fill_const = [&](std::vector<float>& t, size_t size, float value) {
            t.assign(size, value);
        };

        fill_normal(w_.tok_emb, static_cast<size_t>(cfg_.vocab_size) * d, base_std);
        fill_normal(w_.pos_emb, static_cast<size_t>(cfg_.max_seq_len) * d, base_std);
        w_.blocks.resize(cfg_.n_layers);
        for (auto& b : w_.blocks) {
            fill_const(b.ln1_g, d, 1.f);
            fill_const(b.ln1_b, d, 0.f);
            fill_normal(b.wq, static_cast<size_t>(d) * d, base_std);
            fill_const(b.bq, d, 0.f);
            fill_normal(b.wk, static_cast<size_t>(d) * d, base_std);
            fill_const(b.bk, d, 0.f);
            fill_normal(b.wv, static_cast<size_t>(d) * d, base_std);
            fill_const(b.bv, d, 0.f);
            fill_normal(b.wo, static_cast<size_t>(d) * d, resid_std);
            fill_const(b.bo, d, 0.f);
            fill_const(b.ln2_g, d, 1.f);
            fill_const(b.ln2_b, d, 0.f);
            fill_normal(b.w1, static_cast<size_t>(cfg_.d_ff) * d, base_std);
            fill_const(b.b1, cfg_.d_ff, 0.f);
            fill_normal(b.w2, static_cast<size_t>(d) * cfg_.d_ff, resid_std);
            fill_const(b.b2, d, 0.f);
        }
        fill_const(w_.lnf_g, d, 1.f);
        fill_const(w_.lnf_b, d, 0.f);
        fill_normal(w_.head_w, static_cast<size_t>(cfg_.vocab_size) * d, base_std);
        fill_const(w_.head_b, cfg_.vocab_size, 0.f);
    }

    ModelConfig cfg_;
    Weights w_;
    mutable std::atomic<uint64_t> fwd_count_{0};
};

/// BOS + byte encoding: the model-input form of a text. BOS/EOS belong to
/// the LM layer, not the codec.
inline TokenSeq lm_input(std::string_view text) {
    TokenSeq seq;
    seq.reserve(text.size() + 1);
    seq.push_back(textcodec::kBos);
    for (unsigned char c : text) seq.push_back(static_cast<int>(c));
    return seq;
}

} // namespace stylevec
