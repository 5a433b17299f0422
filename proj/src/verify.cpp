#include "latk/verify.hpp"

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "latk/crf.hpp"
#include "latk/encoder.hpp"
#include "latk/numerics.hpp"
#include "latk/rng.hpp"
#include "latk/trainer.hpp"
#include "latk/transfer.hpp"

namespace latk {

namespace {

constexpr double kTolerance = 1e-4;

Matrix rand_mat(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

std::vector<double> flatten(const std::vector<const Matrix*>& mats) {
    std::vector<double> flat;
    for (const auto* m : mats) flat.insert(flat.end(), m->data.begin(), m->data.end());
    return flat;
}

std::vector<double> flatten(const std::vector<Matrix*>& mats) {
    std::vector<double> flat;
    for (const auto* m : mats) flat.insert(flat.end(), m->data.begin(), m->data.end());
    return flat;
}

void unflatten(const std::vector<double>& flat, const std::vector<Matrix*>& mats) {
    std::size_t pos = 0;
    for (auto* m : mats) {
        std::copy(flat.begin() + pos, flat.begin() + pos + m->size(), m->data.begin());
        pos += m->size();
    }
}

std::vector<Matrix*> lstm_mats(BiLstmParams& p) {
    return {&p.fwd.wx, &p.fwd.wh, &p.fwd.b, &p.bwd.wx, &p.bwd.wh, &p.bwd.b};
}

std::vector<Matrix*> lstm_mats(BiLstmGrads& g) {
    return {&g.fwd.wx, &g.fwd.wh, &g.fwd.b, &g.bwd.wx, &g.bwd.wh, &g.bwd.b};
}

double encoder_trial(Rng rng) {
    const std::size_t d_in = 8, d = 8;
    BiLstmParams params = init_bilstm(d_in, d, rng);
    const std::size_t n = 3 + rng.uniform_index(3);
    std::vector<std::vector<double>> xs(n, std::vector<double>(d_in));
    for (auto& x : xs)
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Matrix weights = rand_mat(n, 2 * d, rng);

    BiLstmCache cache;
    bilstm_forward(xs, params, &cache);
    BiLstmGrads grads = zero_grads(params);
    std::vector<std::vector<double>> dx;
    bilstm_backward(params, cache, weights, grads, dx);
    std::vector<double> analytic = flatten(lstm_mats(grads));
    std::vector<double> point = flatten(lstm_mats(params));

    auto loss_fn = [&](const std::vector<double>& flat) {
        BiLstmParams probe = params;
        unflatten(flat, lstm_mats(probe));
        Matrix h = bilstm_forward(xs, probe, nullptr);
        double total = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) total += h.data[i] * weights.data[i];
        return total;
    };
    return grad_check(loss_fn, analytic, point);
}

double crf_trial(Rng rng) {
    const std::size_t n = 2 + rng.uniform_index(4), d = 16, m = 5;
    Matrix h = rand_mat(n, d, rng);
    Matrix w = rand_mat(d, m, rng);
    Matrix a = rand_mat(m, m, rng);
    std::vector<std::size_t> y(n);
    for (auto& v : y) v = rng.uniform_index(m);

    CrfGradients g = crf_gradients(h, w, a, y);
    std::vector<double> analytic = flatten(std::vector<const Matrix*>{&g.dh, &g.dw, &g.da});
    std::vector<double> point = flatten(std::vector<const Matrix*>{&h, &w, &a});

    auto loss_fn = [&](const std::vector<double>& flat) {
        Matrix ph = h, pw = w, pa = a;
        unflatten(flat, {&ph, &pw, &pa});
        return -log_likelihood(emission(ph, pw), pa, y);
    };
    return grad_check(loss_fn, analytic, point);
}

double la_mmd_trial(Rng rng) {
    const std::size_t m = 5, dim = 16;
    MmdConfig config;
    config.policy = MmdConfig::Bandwidth::fixed;
    config.fixed_bandwidth = 1.0 + rng.uniform();
    config.matched.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        config.matched[k] = k;
        config.mu.push_back(0.5 + 0.5 * static_cast<double>(k));
    }
    std::vector<std::size_t> counts_s(m), counts_t(m);
    for (std::size_t k = 0; k < m; ++k) {
        counts_s[k] = rng.uniform_index(3);
        counts_t[k] = rng.uniform_index(3);
    }
    counts_s[0] = 1 + counts_s[0];
    counts_t[0] = 1 + counts_t[0];

    auto build = [&](const std::vector<std::size_t>& counts, Matrix& storage) {
        std::size_t total = 0;
        for (std::size_t c : counts) total += c;
        storage = rand_mat(total, dim, rng);
    };
    Matrix store_s, store_t;
    build(counts_s, store_s);
    build(counts_t, store_t);

    auto make_pools = [&](Matrix& storage, const std::vector<std::size_t>& counts,
                          Matrix* grad_storage, DomainPools& pools, PoolGrads& grads) {
        pools.dim = dim;
        pools.by_label.assign(m, {});
        grads.assign(m, {});
        std::size_t row = 0;
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < counts[k]; ++i, ++row) {
                pools.by_label[k].push_back(storage.row(row));
                if (grad_storage) grads[k].push_back(grad_storage->row(row));
            }
    };

    Matrix gs(store_s.rows, dim), gt(store_t.rows, dim);
    DomainPools ps, pt;
    PoolGrads sink_s, sink_t;
    make_pools(store_s, counts_s, &gs, ps, sink_s);
    make_pools(store_t, counts_t, &gt, pt, sink_t);
    la_mmd(ps, pt, config, &sink_s, &sink_t);
    std::vector<double> analytic = flatten(std::vector<const Matrix*>{&gs, &gt});
    std::vector<double> point = flatten(std::vector<const Matrix*>{&store_s, &store_t});

    auto loss_fn = [&](const std::vector<double>& flat) {
        Matrix probe_s = store_s, probe_t = store_t;
        unflatten(flat, {&probe_s, &probe_t});
        DomainPools qs, qt;
        PoolGrads unused_s, unused_t;
        make_pools(probe_s, counts_s, nullptr, qs, unused_s);
        make_pools(probe_t, counts_t, nullptr, qt, unused_t);
        return la_mmd(qs, qt, config, nullptr, nullptr);
    };
    return grad_check(loss_fn, analytic, point);
}

double penalty_trial(Rng rng) {
    const std::size_t d = 16, m = 5;
    Matrix ws = rand_mat(d, m, rng), as = rand_mat(m, m, rng);
    Matrix wt = rand_mat(d, m, rng), at = rand_mat(m, m, rng);
    ParamPenalty p = param_penalty(ws, as, wt, at);
    std::vector<double> analytic =
        flatten(std::vector<const Matrix*>{&p.dw_s, &p.da_s, &p.dw_t, &p.da_t});
    std::vector<double> point = flatten(std::vector<const Matrix*>{&ws, &as, &wt, &at});

    auto loss_fn = [&](const std::vector<double>& flat) {
        Matrix pws = ws, pas = as, pwt = wt, pat = at;
        unflatten(flat, {&pws, &pas, &pwt, &pat});
        return param_penalty(pws, pas, pwt, pat).value;
    };
    return grad_check(loss_fn, analytic, point);
}

double objective_trial(Rng rng, std::size_t threads) {
    LabelScheme scheme = LabelScheme::from_types({"A"});
    Hyperparams hp;
    hp.d_emb = 8;
    hp.d_lstm = 8;
    hp.alpha = 0.05;
    hp.beta = 0.07;
    hp.gamma = 1e-4;
    hp.epsilon = 0.3;
    hp.bandwidth_policy = MmdConfig::Bandwidth::fixed;
    hp.fixed_bandwidth = 1.5;

    std::vector<std::string> vocab{"a", "b", "c", "d"};
    Rng init_rng = rng.substream("init");
    ModelParams model = init_model(hp, scheme, vocab, "", init_rng);
    for (double& v : model.target_head.w.data) v += rng.uniform(-0.1, 0.1);

    auto random_sentence = [&](Domain domain) {
        LabeledSentence s;
        s.domain = domain;
        std::size_t n = 2 + rng.uniform_index(3);
        for (std::size_t i = 0; i < n; ++i) {
            s.tokens.push_back(vocab[rng.uniform_index(vocab.size())]);
            s.labels.push_back(scheme.tags[rng.uniform_index(scheme.size())]);
        }
        return s;
    };
    std::vector<LabeledSentence> storage;
    for (int i = 0; i < 2; ++i) storage.push_back(random_sentence(Domain::source));
    for (int i = 0; i < 2; ++i) storage.push_back(random_sentence(Domain::target));
    std::vector<const LabeledSentence*> bs{&storage[0], &storage[1]};
    std::vector<const LabeledSentence*> bt{&storage[2], &storage[3]};

    ModelGrads grads = zero_grads(model);
    total_loss(bs, bt, model, hp, scheme, &grads, nullptr, threads);
    std::vector<double> analytic = flatten(grad_tensors(grads, hp.use_char));
    std::vector<double> point =
        flatten(param_tensors(static_cast<const ModelParams&>(model)));

    auto loss_fn = [&](const std::vector<double>& flat) {
        ModelParams probe = model;
        unflatten(flat, param_tensors(probe));
        return total_loss(bs, bt, probe, hp, scheme, nullptr, nullptr, threads).total;
    };
    return grad_check(loss_fn, analytic, point);
}

}  // namespace

bool verify_gradcheck(std::size_t trials, std::uint64_t seed, std::ostream& out,
                      std::size_t threads) {
    Rng root(seed);
    bool all_pass = true;
    struct Component {
        const char* name;
        std::function<double(Rng)> run;
    };
    const Component components[] = {
        {"encoder", encoder_trial},
        {"crf", crf_trial},
        {"la_mmd", la_mmd_trial},
        {"penalty", penalty_trial},
        {"objective", [threads](Rng rng) { return objective_trial(std::move(rng), threads); }},
    };
    for (const Component& component : components) {
        double worst = 0.0;
        std::vector<std::pair<std::size_t, double>> failures;
        for (std::size_t i = 0; i < trials; ++i) {
            double err = component.run(
                root.substream(std::string(component.name) + "/" + std::to_string(i)));
            if (err > worst) worst = err;
            if (!(err < kTolerance)) failures.emplace_back(i, err);
        }
        char line[160];
        std::snprintf(line, sizeof(line), "gradcheck %s trials %zu worst %.3g %s\n",
                      component.name, trials, worst, failures.empty() ? "pass" : "fail");
        out << line;
        for (const auto& [index, err] : failures) {
            std::snprintf(line, sizeof(line), "gradcheck %s trial %zu error %.17g exceeds %g\n",
                          component.name, index, err, kTolerance);
            out << line;
        }
        if (!failures.empty()) all_pass = false;
    }
    return all_pass;
}

bool verify_bound(std::size_t trials, std::uint64_t seed, std::ostream& out) {
    Rng root(seed);
    std::size_t passes = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        Rng rng = root.substream("bound/" + std::to_string(i));
        std::size_t n = 1 + rng.uniform_index(6);
        std::size_t m = 1 + rng.uniform_index(4);
        std::size_t d = 1 + rng.uniform_index(4);
        Matrix h = rand_mat(n, d, rng);
        CrfParams source{rand_mat(d, m, rng), rand_mat(m, m, rng)};
        CrfParams target{rand_mat(d, m, rng), rand_mat(m, m, rng)};
        BoundCertificate cert = certify_kl_bound(h, source, target);
        out << certificate_line(cert) << "\n";
        if (cert.pass) ++passes;
    }
    out << "bound " << passes << "/" << trials << (passes == trials ? " pass" : " fail") << "\n";
    return passes == trials;
}

}  // namespace latk
