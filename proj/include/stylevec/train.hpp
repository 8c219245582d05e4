#pragma once

// Next-token cross-entropy training for the desk-scale LM. This exists to
// imprint small synthetic corpora for tests and demos; it is a scaffold, not
// a general trainer (full-batch documents, no dropout, no schedules).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "stylevec/errors.hpp"
#include "stylevec/model.hpp"
#include "stylevec/vecmath.hpp"

namespace stylevec {

struct TrainConfig {
    int steps = 300;
    int batch_docs = 16;   // documents per step (whole docs, variable length)
    float lr = 3e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float adam_eps = 1e-8f;
    float clip_norm = 1.0f; // global gradient-norm clip; <= 0 disables
    float stop_loss = 0.0f; // early stop once mean step loss drops below; <= 0 disables
    uint64_t seed = 7;      // batch-order shuffling only
};

struct TrainStats {
    std::vector<float> step_loss;
    int steps_run = 0;
    float final_loss = 0.0f;
};

namespace detail {

inline float gelu_grad(float x) {
    constexpr float c = 0.7978845608028654f; // sqrt(2/pi)
    const float u = c * (x + 0.044715f * x * x * x);
    const float th = std::tanh(u);
    const float du = c * (1.0f + 3.0f * 0.044715f * x * x);
    return 0.5f * (1.0f + th) + 0.5f * x * (1.0f - th * th) * du;
}

// d(loss)/dx for y = layer_norm(x) given d(loss)/dy, one row.
inline void layer_norm_grad_row(const float* x, const float* g, const float* dy,
                                float* dx_add, float* dg, float* db, int d) {
    double mean = 0.0;
    for (int i = 0; i < d; ++i) mean += x[i];
    mean /= d;
    double var = 0.0;
    for (int i = 0; i < d; ++i) {
        const double diff = x[i] - mean;
        var += diff * diff;
    }
    var /= d;
    const float inv_std = 1.0f / std::sqrt(static_cast<float>(var) + nn::kLnEps);

    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int i = 0; i < d; ++i) {
        const float xhat = static_cast<float>(x[i] - mean) * inv_std;
        dg[i] += dy[i] * xhat;
        db[i] += dy[i];
        const float dxhat = dy[i] * g[i];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += static_cast<double>(dxhat) * xhat;
    }
    const float m1 = static_cast<float>(sum_dxhat / d);
    const float m2 = static_cast<float>(sum_dxhat_xhat / d);
    for (int i = 0; i < d; ++i) {
        const float xhat = static_cast<float>(x[i] - mean) * inv_std;
        const float dxhat = dy[i] * g[i];
        dx_add[i] += inv_std * (dxhat - m1 - xhat * m2);
    }
}

} // namespace detail

class Trainer {
public:
    Trainer(Model& model, const TrainConfig& cfg)
        : model_(model), cfg_(cfg), rng_(cfg.seed) {
        if (cfg_.batch_docs < 1) throw ConfigInvalid("batch_docs must be >= 1");
        if (!(cfg_.lr > 0.f)) throw ConfigInvalid("lr must be positive");
        grads_ = zero_like(model_.weights());
        m_ = zero_like(model_.weights());
        v_ = zero_like(model_.weights());
    }

    /// Forward-only mean next-token cross-entropy over one document.
    double eval_loss(const TokenSeq& doc) {
        Activations a;
        const double sum = forward(doc, a);
        return sum / predictions(doc);
    }

    void zero_grads() {
        for_each_tensor(grads_, [](std::vector<float>& t) {
            std::fill(t.begin(), t.end(), 0.0f);
        });
    }

    /// Adds d(sum of per-position CE)/dW for one document into the gradient
    /// accumulators and returns that summed loss. Exposed so tests can check
    /// the analytic gradient against finite differences.
    double accumulate(const TokenSeq& doc) {
        Activations a;
        const double sum = forward(doc, a);
        backward(doc, a);
        return sum;
    }

    const Weights& grads() const { return grads_; }

    /// One optimizer step over a batch of documents; returns mean CE.
    float step(const std::vector<const TokenSeq*>& batch) {
        if (batch.empty()) throw EmptyInput("empty training batch");
        zero_grads();
        double loss_sum = 0.0;
        size_t n_pred = 0;
        for (const TokenSeq* doc : batch) {
            loss_sum += accumulate(*doc);
            n_pred += predictions(*doc);
        }
        const float inv = 1.0f / static_cast<float>(n_pred);
        for_each_tensor(grads_, [&](std::vector<float>& t) {
            for (float& g : t) g *= inv;
        });
        clip_and_apply();
        return static_cast<float>(loss_sum / static_cast<double>(n_pred));
    }

    /// Shuffled minibatch loop over the corpus.
    TrainStats run(const std::vector<TokenSeq>& corpus) {
        if (corpus.empty()) throw EmptyInput("empty training corpus");
        for (const auto& doc : corpus)
            if (predictions(doc) == 0)
                throw DataError("training document shorter than two tokens");

        std::vector<size_t> order(corpus.size());
        std::iota(order.begin(), order.end(), size_t{0});
        size_t cursor = order.size(); // forces a shuffle on first use

        TrainStats stats;
        stats.step_loss.reserve(cfg_.steps);
        for (int s = 0; s < cfg_.steps; ++s) {
            std::vector<const TokenSeq*> batch;
            batch.reserve(cfg_.batch_docs);
            while (static_cast<int>(batch.size()) < cfg_.batch_docs) {
                if (cursor == order.size()) {
                    rng_.shuffle(order);
                    cursor = 0;
                }
                batch.push_back(&corpus[order[cursor++]]);
            }
            const float loss = step(batch);
            stats.step_loss.push_back(loss);
            stats.steps_run = s + 1;
            stats.final_loss = loss;
            if (cfg_.stop_loss > 0.f && loss < cfg_.stop_loss) break;
        }
        return stats;
    }

private:
    // Everything the backward pass needs, kept per block.
    struct BlockActs {
        std::vector<float> x_in;  // [T,D] residual entering the block
        std::vector<float> ln1;   // [T,D]
        std::vector<float> q, k, v; // [T,D]
        std::vector<float> probs; // [H,T,T] softmax rows (zero above diagonal)
        std::vector<float> att;   // [T,D] pre-projection head mix
        std::vector<float> x_mid; // [T,D] after the attention residual
        std::vector<float> ln2;   // [T,D]
        std::vector<float> f_pre; // [T,F]
        std::vector<float> f_act; // [T,F]
    };
    struct Activations {
        int T = 0;
        std::vector<BlockActs> blocks;
        std::vector<float> x_final; // [T,D]
        std::vector<float> lnf;     // [T,D]
        std::vector<float> probs;   // [T,V] softmax of logits, reused by backward
    };

    static size_t predictions(const TokenSeq& doc) {
        return doc.size() >= 2 ? doc.size() - 1 : 0;
    }

    // Full-sequence forward with logits at every position (the inference path
    // only materializes the last row). Returns the summed CE over positions
    // 0..T-2 predicting tokens 1..T-1.
    double forward(const TokenSeq& doc, Activations& a) {
        const auto& cfg = model_.config();
        const auto& w = model_.weights();
        const int T = static_cast<int>(doc.size());
        if (T < 2) throw DataError("training document shorter than two tokens");
        if (T > cfg.max_seq_len)
            throw SeqTooLong("document length " + std::to_string(T) +
                             " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
        const int D = cfg.d_model, H = cfg.n_heads, F = cfg.d_ff, V = cfg.vocab_size;
        const int hd = D / H;
        const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

        a.T = T;
        a.blocks.assign(cfg.n_layers, {});
        std::vector<float> x(static_cast<size_t>(T) * D);
        for (int t = 0; t < T; ++t) {
            const int id = doc[static_cast<size_t>(t)];
            if (id < 0 || id >= V) throw DataError("token id out of vocabulary");
            const float* te = w.tok_emb.data() + static_cast<size_t>(id) * D;
            const float* pe = w.pos_emb.data() + static_cast<size_t>(t) * D;
            float* xr = x.data() + static_cast<size_t>(t) * D;
            for (int i = 0; i < D; ++i) xr[i] = te[i] + pe[i];
        }

        for (int l = 0; l < cfg.n_layers; ++l) {
            const auto& b = w.blocks[static_cast<size_t>(l)];
            BlockActs& ba = a.blocks[static_cast<size_t>(l)];
            ba.x_in = x;
            ba.ln1.resize(x.size());
            nn::layer_norm(x.data(), b.ln1_g.data(), b.ln1_b.data(), ba.ln1.data(), T, D);
            ba.q.resize(x.size());
            ba.k.resize(x.size());
            ba.v.resize(x.size());
            nn::linear(ba.ln1.data(), b.wq.data(), b.bq.data(), ba.q.data(), T, D, D);
            nn::linear(ba.ln1.data(), b.wk.data(), b.bk.data(), ba.k.data(), T, D, D);
            nn::linear(ba.ln1.data(), b.wv.data(), b.bv.data(), ba.v.data(), T, D, D);

            ba.probs.assign(static_cast<size_t>(H) * T * T, 0.0f);
            ba.att.assign(x.size(), 0.0f);
            std::vector<float> scores(static_cast<size_t>(T));
            for (int h = 0; h < H; ++h) {
                const int off = h * hd;
                for (int t = 0; t < T; ++t) {
                    const float* qr = ba.q.data() + static_cast<size_t>(t) * D + off;
                    float mx = -std::numeric_limits<float>::infinity();
                    for (int s = 0; s <= t; ++s) {
                        const float* kr = ba.k.data() + static_cast<size_t>(s) * D + off;
                        float acc = 0.0f;
                        for (int i = 0; i < hd; ++i) acc += qr[i] * kr[i];
                        scores[static_cast<size_t>(s)] = acc * scale;
                        mx = std::max(mx, scores[static_cast<size_t>(s)]);
                    }
                    double denom = 0.0;
                    for (int s = 0; s <= t; ++s)
                        denom += std::exp(static_cast<double>(scores[static_cast<size_t>(s)] - mx));
                    float* prow = ba.probs.data() +
                                  (static_cast<size_t>(h) * T + t) * T;
                    float* arow = ba.att.data() + static_cast<size_t>(t) * D + off;
                    for (int s = 0; s <= t; ++s) {
                        const float p = static_cast<float>(
                            std::exp(static_cast<double>(scores[static_cast<size_t>(s)] - mx)) / denom);
                        prow[s] = p;
                        const float* vr = ba.v.data() + static_cast<size_t>(s) * D + off;
                        for (int i = 0; i < hd; ++i) arow[i] += p * vr[i];
                    }
                }
            }

            ba.x_mid.resize(x.size());
            nn::linear(ba.att.data(), b.wo.data(), b.bo.data(), ba.x_mid.data(), T, D, D);
            for (size_t i = 0; i < x.size(); ++i) ba.x_mid[i] += ba.x_in[i];

            ba.ln2.resize(x.size());
            nn::layer_norm(ba.x_mid.data(), b.ln2_g.data(), b.ln2_b.data(), ba.ln2.data(), T, D);
            ba.f_pre.resize(static_cast<size_t>(T) * F);
            nn::linear(ba.ln2.data(), b.w1.data(), b.b1.data(), ba.f_pre.data(), T, D, F);
            ba.f_act.resize(ba.f_pre.size());
            for (size_t i = 0; i < ba.f_pre.size(); ++i) ba.f_act[i] = nn::gelu(ba.f_pre[i]);
            nn::linear(ba.f_act.data(), b.w2.data(), b.b2.data(), x.data(), T, F, D);
            for (size_t i = 0; i < x.size(); ++i) x[i] += ba.x_mid[i];
        }

        a.x_final = x;
        a.lnf.resize(x.size());
        nn::layer_norm(x.data(), w.lnf_g.data(), w.lnf_b.data(), a.lnf.data(), T, D);

        a.probs.resize(static_cast<size_t>(T) * V);
        std::vector<float> logits(static_cast<size_t>(V));
        double loss = 0.0;
        for (int t = 0; t < T; ++t) {
            nn::linear(a.lnf.data() + static_cast<size_t>(t) * D, w.head_w.data(),
                       w.head_b.data(), logits.data(), 1, D, V);
            float mx = logits[0];
            for (int o = 1; o < V; ++o) mx = std::max(mx, logits[static_cast<size_t>(o)]);
            double denom = 0.0;
            for (int o = 0; o < V; ++o)
                denom += std::exp(static_cast<double>(logits[static_cast<size_t>(o)] - mx));
            float* prow = a.probs.data() + static_cast<size_t>(t) * V;
            for (int o = 0; o < V; ++o)
                prow[o] = static_cast<float>(
                    std::exp(static_cast<double>(logits[static_cast<size_t>(o)] - mx)) / denom);
            if (t + 1 < T) {
                const int target = doc[static_cast<size_t>(t) + 1];
                loss -= std::log(std::max(1e-30, static_cast<double>(prow[target])));
            }
        }
        return loss;
    }

    void backward(const TokenSeq& doc, const Activations& a) {
        const auto& cfg = model_.config();
        const auto& w = model_.weights();
        const int T = a.T, D = cfg.d_model, H = cfg.n_heads, F = cfg.d_ff, V = cfg.vocab_size;
        const int hd = D / H;
        const float scale = 1.0f / std::sqrt(static_cast<float>(hd));

        // head and final norm
        std::vector<float> dlnf(static_cast<size_t>(T) * D, 0.0f);
        {
            std::vector<float> dlogit(static_cast<size_t>(V));
            for (int t = 0; t + 1 < T; ++t) {
                const float* prow = a.probs.data() + static_cast<size_t>(t) * V;
                const int target = doc[static_cast<size_t>(t) + 1];
                for (int o = 0; o < V; ++o) dlogit[static_cast<size_t>(o)] = prow[o];
                dlogit[static_cast<size_t>(target)] -= 1.0f;
                const float* hrow = a.lnf.data() + static_cast<size_t>(t) * D;
                float* dh = dlnf.data() + static_cast<size_t>(t) * D;
                for (int o = 0; o < V; ++o) {
                    const float g = dlogit[static_cast<size_t>(o)];
                    if (g == 0.0f) continue;
                    const float* wr = w.head_w.data() + static_cast<size_t>(o) * D;
                    float* gw = grads_.head_w.data() + static_cast<size_t>(o) * D;
                    for (int i = 0; i < D; ++i) {
                        gw[i] += g * hrow[i];
                        dh[i] += g * wr[i];
                    }
                    grads_.head_b[static_cast<size_t>(o)] += g;
                }
            }
        }

        std::vector<float> dx(static_cast<size_t>(T) * D, 0.0f);
        for (int t = 0; t < T; ++t)
            detail::layer_norm_grad_row(a.x_final.data() + static_cast<size_t>(t) * D,
                                        w.lnf_g.data(),
                                        dlnf.data() + static_cast<size_t>(t) * D,
                                        dx.data() + static_cast<size_t>(t) * D,
                                        grads_.lnf_g.data(), grads_.lnf_b.data(), D);

        std::vector<float> df_act(static_cast<size_t>(T) * F);
        std::vector<float> dln2(static_cast<size_t>(T) * D);
        std::vector<float> dmid(static_cast<size_t>(T) * D);
        std::vector<float> datt(static_cast<size_t>(T) * D);
        std::vector<float> dq(static_cast<size_t>(T) * D);
        std::vector<float> dk(static_cast<size_t>(T) * D);
        std::vector<float> dv(static_cast<size_t>(T) * D);
        std::vector<float> dln1(static_cast<size_t>(T) * D);

        for (int l = cfg.n_layers - 1; l >= 0; --l) {
            const auto& b = w.blocks[static_cast<size_t>(l)];
            auto& gb = grads_.blocks[static_cast<size_t>(l)];
            const BlockActs& ba = a.blocks[static_cast<size_t>(l)];

            // x_out = x_mid + W2 gelu(W1 ln2(x_mid) + b1) + b2
            std::fill(df_act.begin(), df_act.end(), 0.0f);
            for (int t = 0; t < T; ++t) {
                const float* dxr = dx.data() + static_cast<size_t>(t) * D;
                const float* fa = ba.f_act.data() + static_cast<size_t>(t) * F;
                float* dfa = df_act.data() + static_cast<size_t>(t) * F;
                for (int o = 0; o < D; ++o) {
                    const float g = dxr[o];
                    if (g == 0.0f) continue;
                    const float* wr = b.w2.data() + static_cast<size_t>(o) * F;
                    float* gw = gb.w2.data() + static_cast<size_t>(o) * F;
                    for (int i = 0; i < F; ++i) {
                        gw[i] += g * fa[i];
                        dfa[i] += g * wr[i];
                    }
                    gb.b2[static_cast<size_t>(o)] += g;
                }
            }
            for (size_t i = 0; i < df_act.size(); ++i)
                df_act[i] *= detail::gelu_grad(ba.f_pre[i]); // now d(f_pre)

            std::fill(dln2.begin(), dln2.end(), 0.0f);
            for (int t = 0; t < T; ++t) {
                const float* dfp = df_act.data() + static_cast<size_t>(t) * F;
                const float* l2 = ba.ln2.data() + static_cast<size_t>(t) * D;
                float* dl2 = dln2.data() + static_cast<size_t>(t) * D;
                for (int o = 0; o < F; ++o) {
                    const float g = dfp[o];
                    if (g == 0.0f) continue;
                    const float* wr = b.w1.data() + static_cast<size_t>(o) * D;
                    float* gw = gb.w1.data() + static_cast<size_t>(o) * D;
                    for (int i = 0; i < D; ++i) {
                        gw[i] += g * l2[i];
                        dl2[i] += g * wr[i];
                    }
                    gb.b1[static_cast<size_t>(o)] += g;
                }
            }

            dmid = dx; // residual path around the feed-forward
            for (int t = 0; t < T; ++t)
                detail::layer_norm_grad_row(ba.x_mid.data() + static_cast<size_t>(t) * D,
                                            b.ln2_g.data(),
                                            dln2.data() + static_cast<size_t>(t) * D,
                                            dmid.data() + static_cast<size_t>(t) * D,
                                            gb.ln2_g.data(), gb.ln2_b.data(), D);

            // x_mid = x_in + Wo att + bo
            std::fill(datt.begin(), datt.end(), 0.0f);
            for (int t = 0; t < T; ++t) {
                const float* dmr = dmid.data() + static_cast<size_t>(t) * D;
                const float* ar = ba.att.data() + static_cast<size_t>(t) * D;
                float* dar = datt.data() + static_cast<size_t>(t) * D;
                for (int o = 0; o < D; ++o) {
                    const float g = dmr[o];
                    if (g == 0.0f) continue;
                    const float* wr = b.wo.data() + static_cast<size_t>(o) * D;
                    float* gw = gb.wo.data() + static_cast<size_t>(o) * D;
                    for (int i = 0; i < D; ++i) {
                        gw[i] += g * ar[i];
                        dar[i] += g * wr[i];
                    }
                    gb.bo[static_cast<size_t>(o)] += g;
                }
            }

            std::fill(dq.begin(), dq.end(), 0.0f);
            std::fill(dk.begin(), dk.end(), 0.0f);
            std::fill(dv.begin(), dv.end(), 0.0f);
            std::vector<float> dp(static_cast<size_t>(T));
            for (int h = 0; h < H; ++h) {
                const int off = h * hd;
                for (int t = 0; t < T; ++t) {
                    const float* dar = datt.data() + static_cast<size_t>(t) * D + off;
                    const float* prow = ba.probs.data() + (static_cast<size_t>(h) * T + t) * T;
                    double dot_pd = 0.0;
                    for (int s = 0; s <= t; ++s) {
                        const float* vr = ba.v.data() + static_cast<size_t>(s) * D + off;
                        float acc = 0.0f;
                        for (int i = 0; i < hd; ++i) acc += dar[i] * vr[i];
                        dp[static_cast<size_t>(s)] = acc;
                        dot_pd += static_cast<double>(prow[s]) * acc;
                        float* dvr = dv.data() + static_cast<size_t>(s) * D + off;
                        for (int i = 0; i < hd; ++i) dvr[i] += prow[s] * dar[i];
                    }
                    const float* qr = ba.q.data() + static_cast<size_t>(t) * D + off;
                    float* dqr = dq.data() + static_cast<size_t>(t) * D + off;
                    for (int s = 0; s <= t; ++s) {
                        const float ds = prow[s] *
                            (dp[static_cast<size_t>(s)] - static_cast<float>(dot_pd)) * scale;
                        if (ds == 0.0f) continue;
                        const float* kr = ba.k.data() + static_cast<size_t>(s) * D + off;
                        float* dkr = dk.data() + static_cast<size_t>(s) * D + off;
                        for (int i = 0; i < hd; ++i) {
                            dqr[i] += ds * kr[i];
                            dkr[i] += ds * qr[i];
                        }
                    }
                }
            }

            std::fill(dln1.begin(), dln1.end(), 0.0f);
            auto qkv_back = [&](const std::vector<float>& dout,
                               const std::vector<float>& wmat,
                               std::vector<float>& gw_mat, std::vector<float>& gb_vec) {
                for (int t = 0; t < T; ++t) {
                    const float* dor = dout.data() + static_cast<size_t>(t) * D;
                    const float* l1 = ba.ln1.data() + static_cast<size_t>(t) * D;
                    float* dl1 = dln1.data() + static_cast<size_t>(t) * D;
                    for (int o = 0; o < D; ++o) {
                        const float g = dor[o];
                        if (g == 0.0f) continue;
                        const float* wr = wmat.data() + static_cast<size_t>(o) * D;
                        float* gw = gw_mat.data() + static_cast<size_t>(o) * D;
                        for (int i = 0; i < D; ++i) {
                            gw[i] += g * l1[i];
                            dl1[i] += g * wr[i];
                        }
                        gb_vec[static_cast<size_t>(o)] += g;
                    }
                }
            };
            qkv_back(dq, b.wq, gb.wq, gb.bq);
            qkv_back(dk, b.wk, gb.wk, gb.bk);
            qkv_back(dv, b.wv, gb.wv, gb.bv);

            dx = dmid; // residual path around attention
            for (int t = 0; t < T; ++t)
                detail::layer_norm_grad_row(ba.x_in.data() + static_cast<size_t>(t) * D,
                                            b.ln1_g.data(),
                                            dln1.data() + static_cast<size_t>(t) * D,
                                            dx.data() + static_cast<size_t>(t) * D,
                                            gb.ln1_g.data(), gb.ln1_b.data(), D);
        }

        for (int t = 0; t < T; ++t) {
            const int id = doc[static_cast<size_t>(t)];
            const float* dxr = dx.data() + static_cast<size_t>(t) * D;
            float* gt = grads_.tok_emb.data() + static_cast<size_t>(id) * D;
            float* gp = grads_.pos_emb.data() + static_cast<size_t>(t) * D;
            for (int i = 0; i < D; ++i) {
                gt[i] += dxr[i];
                gp[i] += dxr[i];
            }
        }
    }

    void clip_and_apply() {
        if (cfg_.clip_norm > 0.f) {
            double sq = 0.0;
            for_each_tensor(grads_, [&](std::vector<float>& t) {
                for (float g : t) sq += static_cast<double>(g) * g;
            });
            const double norm = std::sqrt(sq);
            if (norm > cfg_.clip_norm) {
                const float s = static_cast<float>(cfg_.clip_norm / norm);
                for_each_tensor(grads_, [&](std::vector<float>& t) {
                    for (float& g : t) g *= s;
                });
            }
        }
        ++adam_t_;
        const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(adam_t_));
        const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(adam_t_));

        // walk weights / grads / m / v in lockstep via the shared tensor order
        std::vector<std::vector<float>*> wt, gt, mt, vt;
        auto collect = [](Weights& ws, std::vector<std::vector<float>*>& out) {
            out.clear();
            for_each_tensor(ws, [&](std::vector<float>& t) { out.push_back(&t); });
        };
        collect(model_.weights(), wt);
        collect(grads_, gt);
        collect(m_, mt);
        collect(v_, vt);
        for (size_t k = 0; k < wt.size(); ++k) {
            auto& wv = *wt[k];
            auto& gv = *gt[k];
            auto& mv = *mt[k];
            auto& vv = *vt[k];
            for (size_t i = 0; i < wv.size(); ++i) {
                mv[i] = cfg_.beta1 * mv[i] + (1.0f - cfg_.beta1) * gv[i];
                vv[i] = cfg_.beta2 * vv[i] + (1.0f - cfg_.beta2) * gv[i] * gv[i];
                const float mh = mv[i] / bc1;
                const float vh = vv[i] / bc2;
                wv[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.adam_eps);
            }
        }
    }

    static Weights zero_like(const Weights& src) {
        Weights z = src;
        for_each_tensor(z, [](std::vector<float>& t) {
            std::fill(t.begin(), t.end(), 0.0f);
        });
        return z;
    }

    Model& model_;
    TrainConfig cfg_;
    Rng rng_;
    Weights grads_, m_, v_;
    uint64_t adam_t_ = 0;
};

} // namespace stylevec
