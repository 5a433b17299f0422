#include "latk/encoder.hpp"

#include <cmath>

#include "latk/error.hpp"
#include "latk/kernels.hpp"

namespace latk {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// xs holds pointers in the direction's processing order.
void run_dir(const std::vector<const std::vector<double>*>& xs, const LstmDirParams& p,
             LstmDirCache* cache, std::vector<std::vector<double>>& hs) {
    const std::size_t d = p.d_lstm();
    std::vector<double> h_prev(d, 0.0), c_prev(d, 0.0), a(4 * d);
    hs.clear();
    for (const auto* xp : xs) {
        const std::vector<double>& x = *xp;
        if (x.size() != p.d_in()) throw ShapeError("lstm: input dimension mismatch");
        std::copy(p.b.data.begin(), p.b.data.end(), a.begin());
        matvec_acc(p.wx, x.data(), a.data());
        matvec_acc(p.wh, h_prev.data(), a.data());
        std::vector<double> gi(d), gf(d), gg(d), go(d), c(d), tc(d), h(d);
        for (std::size_t k = 0; k < d; ++k) {
            gi[k] = sigmoid(a[k]);
            gf[k] = sigmoid(a[d + k]);
            gg[k] = std::tanh(a[2 * d + k]);
            go[k] = sigmoid(a[3 * d + k]);
            c[k] = gf[k] * c_prev[k] + gi[k] * gg[k];
            tc[k] = std::tanh(c[k]);
            h[k] = go[k] * tc[k];
        }
        if (cache) {
            cache->x.push_back(x);
            cache->gi.push_back(gi);
            cache->gf.push_back(gf);
            cache->gg.push_back(gg);
            cache->go.push_back(go);
            cache->c.push_back(c);
            cache->tc.push_back(tc);
            cache->h.push_back(h);
        }
        h_prev = h;
        c_prev = std::move(c);
        hs.push_back(std::move(h));
    }
}

// dh_ext[step] points at a buffer whose first d entries are dL/dh for that
// step in processing order.
void backward_dir(const LstmDirParams& p, const LstmDirCache& cc,
                  const std::vector<const double*>& dh_ext, LstmDirParams& g,
                  std::vector<std::vector<double>>& dx) {
    const std::size_t d = p.d_lstm();
    const std::size_t steps = cc.steps();
    std::vector<double> dh_rec(d, 0.0), dc_next(d, 0.0), da(4 * d);
    const std::vector<double> zeros(d, 0.0);
    dx.assign(steps, std::vector<double>(p.d_in(), 0.0));
    for (std::size_t t = steps; t-- > 0;) {
        for (std::size_t k = 0; k < d; ++k) {
            double dhv = dh_ext[t][k] + dh_rec[k];
            double o = cc.go[t][k], tc = cc.tc[t][k];
            double dov = dhv * tc;
            double dc = dhv * o * (1.0 - tc * tc) + dc_next[k];
            double cprev = t > 0 ? cc.c[t - 1][k] : 0.0;
            double df = dc * cprev;
            double di = dc * cc.gg[t][k];
            double dg = dc * cc.gi[t][k];
            dc_next[k] = dc * cc.gf[t][k];
            da[k] = di * cc.gi[t][k] * (1.0 - cc.gi[t][k]);
            da[d + k] = df * cc.gf[t][k] * (1.0 - cc.gf[t][k]);
            da[2 * d + k] = dg * (1.0 - cc.gg[t][k] * cc.gg[t][k]);
            da[3 * d + k] = dov * o * (1.0 - o);
        }
        kernels::axpy(1.0, da.data(), g.b.row(0), 4 * d);
        outer_acc(da.data(), cc.x[t].data(), g.wx);
        const std::vector<double>& h_prev = t > 0 ? cc.h[t - 1] : zeros;
        outer_acc(da.data(), h_prev.data(), g.wh);
        matvec_t_acc(p.wx, da.data(), dx[t].data());
        std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
        matvec_t_acc(p.wh, da.data(), dh_rec.data());
    }
}

LstmDirParams zero_dir(const LstmDirParams& p) {
    LstmDirParams z;
    z.wx = Matrix(p.wx.rows, p.wx.cols);
    z.wh = Matrix(p.wh.rows, p.wh.cols);
    z.b = Matrix(p.b.rows, p.b.cols);
    return z;
}

}  // namespace

LstmDirParams init_lstm_dir(std::size_t d_in, std::size_t d_lstm, Rng& rng) {
    if (d_in == 0 || d_lstm == 0) throw ParamError("init_lstm_dir: zero dimension");
    LstmDirParams p;
    p.wx = Matrix(4 * d_lstm, d_in);
    p.wh = Matrix(4 * d_lstm, d_lstm);
    p.b = Matrix(1, 4 * d_lstm);
    double bx = std::sqrt(6.0 / static_cast<double>(d_in + d_lstm));
    double bh = std::sqrt(6.0 / static_cast<double>(2 * d_lstm));
    for (auto& v : p.wx.data) v = rng.uniform(-bx, bx);
    for (auto& v : p.wh.data) v = rng.uniform(-bh, bh);
    for (std::size_t k = d_lstm; k < 2 * d_lstm; ++k) p.b(0, k) = 1.0;
    return p;
}

BiLstmParams init_bilstm(std::size_t d_in, std::size_t d_lstm, Rng& rng) {
    BiLstmParams p;
    p.fwd = init_lstm_dir(d_in, d_lstm, rng);
    p.bwd = init_lstm_dir(d_in, d_lstm, rng);
    return p;
}

Matrix bilstm_forward(const std::vector<std::vector<double>>& xs, const BiLstmParams& p,
                      BiLstmCache* cache) {
    const std::size_t n = xs.size();
    const std::size_t d = p.fwd.d_lstm();
    if (p.bwd.d_lstm() != d || p.fwd.d_in() != p.bwd.d_in())
        throw ShapeError("bilstm: direction shapes disagree");
    std::vector<const std::vector<double>*> fwd_order(n), bwd_order(n);
    for (std::size_t t = 0; t < n; ++t) {
        fwd_order[t] = &xs[t];
        bwd_order[t] = &xs[n - 1 - t];
    }
    if (cache) {
        *cache = BiLstmCache{};
        cache->n = n;
        cache->d_in = p.fwd.d_in();
    }
    std::vector<std::vector<double>> hf, hb;
    run_dir(fwd_order, p.fwd, cache ? &cache->fwd : nullptr, hf);
    run_dir(bwd_order, p.bwd, cache ? &cache->bwd : nullptr, hb);
    Matrix h(n, 2 * d);
    for (std::size_t t = 0; t < n; ++t) {
        std::copy(hf[t].begin(), hf[t].end(), h.row(t));
        std::copy(hb[n - 1 - t].begin(), hb[n - 1 - t].end(), h.row(t) + d);
    }
    return h;
}

BiLstmGrads zero_grads(const BiLstmParams& p) {
    return BiLstmGrads{zero_dir(p.fwd), zero_dir(p.bwd)};
}

void bilstm_backward(const BiLstmParams& p, const BiLstmCache& cache, const Matrix& dh,
                     BiLstmGrads& grads, std::vector<std::vector<double>>& dx) {
    const std::size_t n = cache.n;
    const std::size_t d = p.fwd.d_lstm();
    if (dh.rows != n || dh.cols != 2 * d) throw ShapeError("bilstm_backward: dh shape");
    if (cache.fwd.steps() != n || cache.bwd.steps() != n)
        throw UsageError("bilstm_backward: cache does not match");
    std::vector<const double*> fwd_ext(n), bwd_ext(n);
    for (std::size_t t = 0; t < n; ++t) {
        fwd_ext[t] = dh.row(t);
        bwd_ext[t] = dh.row(n - 1 - t) + d;
    }
    std::vector<std::vector<double>> dxf, dxb;
    backward_dir(p.fwd, cache.fwd, fwd_ext, grads.fwd, dxf);
    backward_dir(p.bwd, cache.bwd, bwd_ext, grads.bwd, dxb);
    dx.assign(n, std::vector<double>(cache.d_in, 0.0));
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < cache.d_in; ++k)
            dx[t][k] = dxf[t][k] + dxb[n - 1 - t][k];
    }
}

std::vector<std::string> utf8_codepoints(const std::string& word) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < word.size()) {
        unsigned char lead = static_cast<unsigned char>(word[i]);
        std::size_t len = 1;
        if ((lead & 0x80u) == 0x00u)
            len = 1;
        else if ((lead & 0xE0u) == 0xC0u)
            len = 2;
        else if ((lead & 0xF0u) == 0xE0u)
            len = 3;
        else if ((lead & 0xF8u) == 0xF0u)
            len = 4;
        if (i + len > word.size()) len = 1;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(word[i + k]) & 0xC0u) != 0x80u) {
                len = 1;
                break;
            }
        }
        out.push_back(word.substr(i, len));
        i += len;
    }
    return out;
}

std::vector<double> encode_chars(const std::vector<std::vector<double>>& char_vecs,
                                 const BiLstmParams& p, BiLstmCache* cache) {
    const std::size_t d = p.fwd.d_lstm();
    if (char_vecs.empty()) {
        if (cache) *cache = BiLstmCache{};
        return std::vector<double>(2 * d, 0.0);
    }
    Matrix h = bilstm_forward(char_vecs, p, cache);
    std::vector<double> out(2 * d);
    const std::size_t n = char_vecs.size();
    std::copy(h.row(n - 1), h.row(n - 1) + d, out.begin());         // final forward state
    std::copy(h.row(0) + d, h.row(0) + 2 * d, out.begin() + d);     // final backward state
    return out;
}

Matrix encode_sentence(const std::vector<std::string>& tokens, const EncoderParams& p,
                       SentenceCache* cache) {
    const std::size_t d_emb = p.embeddings.d_emb;
    SentenceCache local;
    SentenceCache& cc = cache ? *cache : local;
    cc = SentenceCache{};
    std::vector<std::vector<double>> inputs;
    inputs.reserve(tokens.size());
    for (const auto& tok : tokens) {
        std::size_t id = p.embeddings.lookup(tok);
        cc.token_ids.push_back(id);
        std::vector<double> x(p.embeddings.vectors.row(id), p.embeddings.vectors.row(id) + d_emb);
        if (p.use_char) {
            std::vector<std::size_t> cids;
            std::vector<std::vector<double>> cvecs;
            for (const auto& cp : utf8_codepoints(tok)) {
                std::size_t cid = p.char_embeddings.lookup(cp);
                cids.push_back(cid);
                cvecs.emplace_back(p.char_embeddings.vectors.row(cid),
                                   p.char_embeddings.vectors.row(cid) + p.char_embeddings.d_emb);
            }
            cc.char_caches.emplace_back();
            std::vector<double> cfeat = encode_chars(cvecs, p.char_lstm, &cc.char_caches.back());
            cc.char_ids.push_back(std::move(cids));
            cc.char_inputs.push_back(std::move(cvecs));
            x.insert(x.end(), cfeat.begin(), cfeat.end());
        }
        inputs.push_back(std::move(x));
    }
    cc.word_inputs = inputs;
    return bilstm_forward(inputs, p.word_lstm, &cc.word_cache);
}

EncoderGrads zero_grads(const EncoderParams& p) {
    EncoderGrads g;
    g.d_embeddings = Matrix(p.embeddings.vectors.rows, p.embeddings.vectors.cols);
    g.word = zero_grads(p.word_lstm);
    if (p.use_char) {
        g.d_char_embeddings = Matrix(p.char_embeddings.vectors.rows, p.char_embeddings.vectors.cols);
        g.chars = zero_grads(p.char_lstm);
    }
    return g;
}

void encoder_backward(const EncoderParams& p, const SentenceCache& cache, const Matrix& dh,
                      EncoderGrads& grads, std::vector<std::vector<double>>* dx_out) {
    const std::size_t d_emb = p.embeddings.d_emb;
    std::vector<std::vector<double>> dx;
    bilstm_backward(p.word_lstm, cache.word_cache, dh, grads.word, dx);
    for (std::size_t t = 0; t < dx.size(); ++t) {
        kernels::axpy(1.0, dx[t].data(), grads.d_embeddings.row(cache.token_ids[t]), d_emb);
        if (p.use_char) {
            const std::size_t dc = p.char_lstm.fwd.d_lstm();
            const std::size_t n_chars = cache.char_inputs[t].size();
            if (n_chars == 0) continue;
            Matrix dch(n_chars, 2 * dc);
            // the word feature saw only the two final states
            for (std::size_t k = 0; k < dc; ++k) {
                dch(n_chars - 1, k) = dx[t][d_emb + k];
                dch(0, dc + k) = dx[t][d_emb + dc + k];
            }
            std::vector<std::vector<double>> dcx;
            bilstm_backward(p.char_lstm, cache.char_caches[t], dch, grads.chars, dcx);
            for (std::size_t ci = 0; ci < n_chars; ++ci)
                kernels::axpy(1.0, dcx[ci].data(),
                              grads.d_char_embeddings.row(cache.char_ids[t][ci]),
                              p.char_embeddings.d_emb);
        }
    }
    if (dx_out) *dx_out = std::move(dx);
}

}  // namespace latk
