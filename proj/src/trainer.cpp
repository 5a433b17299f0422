#include "latk/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <thread>

#include "latk/error.hpp"
#include "latk/eval.hpp"
#include "latk/numerics.hpp"

namespace latk {

Mode parse_mode(const std::string& name) {
    if (name == "la_dtl") return Mode::la_dtl;
    if (name == "la_mmd_only") return Mode::la_mmd_only;
    if (name == "crf_l2_only") return Mode::crf_l2_only;
    if (name == "vanilla_mmd_crf_l2") return Mode::vanilla_mmd_crf_l2;
    if (name == "non_transfer") return Mode::non_transfer;
    throw ConfigError("unknown mode '" + name + "'");
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::la_dtl: return "la_dtl";
        case Mode::la_mmd_only: return "la_mmd_only";
        case Mode::crf_l2_only: return "crf_l2_only";
        case Mode::vanilla_mmd_crf_l2: return "vanilla_mmd_crf_l2";
        case Mode::non_transfer: return "non_transfer";
    }
    throw ConfigError("unknown mode value");
}

std::vector<std::string> normalize_hyperparams(Hyperparams& hp) {
    std::vector<std::string> warnings;
    auto force_zero = [&](double& field, const char* name) {
        if (field != 0.0) {
            warnings.push_back("mode " + mode_name(hp.mode) + " forces " + name + " = 0");
            field = 0.0;
        }
    };
    switch (hp.mode) {
        case Mode::la_dtl:
        case Mode::vanilla_mmd_crf_l2:
            break;
        case Mode::la_mmd_only:
            force_zero(hp.beta, "beta");
            break;
        case Mode::crf_l2_only:
            force_zero(hp.alpha, "alpha");
            break;
        case Mode::non_transfer:
            force_zero(hp.alpha, "alpha");
            force_zero(hp.beta, "beta");
            force_zero(hp.epsilon, "epsilon");
            break;
    }
    if (hp.alpha < 0.0 || hp.beta < 0.0 || hp.gamma < 0.0)
        throw ConfigError("loss weights must be non-negative");
    if (hp.epsilon < 0.0 || hp.epsilon > 1.0) throw ConfigError("epsilon must lie in [0, 1]");
    if (hp.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (hp.batch_target == 0) throw ConfigError("batch_target must be positive");
    if (hp.mode != Mode::non_transfer && hp.batch_source == 0)
        throw ConfigError("batch_source must be positive");
    if (hp.max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (hp.d_emb == 0 || hp.d_lstm == 0) throw ConfigError("d_emb and d_lstm must be positive");
    if (hp.use_char && hp.d_char == 0) throw ConfigError("d_char must be positive");
    if (hp.mu_default < 0.0) throw ConfigError("mu weights must be non-negative");
    for (const auto& [tag, w] : hp.mu_by_tag) {
        (void)tag;
        if (w < 0.0) throw ConfigError("mu weights must be non-negative");
    }
    if (hp.bandwidth_policy == MmdConfig::Bandwidth::fixed && hp.fixed_bandwidth <= 0.0)
        throw ConfigError("bandwidth must be positive");
    return warnings;
}

namespace {

std::vector<Matrix*> encoder_grad_list(EncoderGrads& g, bool use_char) {
    std::vector<Matrix*> t{&g.d_embeddings, &g.word.fwd.wx, &g.word.fwd.wh, &g.word.fwd.b,
                           &g.word.bwd.wx,  &g.word.bwd.wh, &g.word.bwd.b};
    if (use_char) {
        t.push_back(&g.d_char_embeddings);
        for (Matrix* m : {&g.chars.fwd.wx, &g.chars.fwd.wh, &g.chars.fwd.b, &g.chars.bwd.wx,
                          &g.chars.bwd.wh, &g.chars.bwd.b})
            t.push_back(m);
    }
    return t;
}

template <typename Model, typename MatrixPtr>
std::vector<MatrixPtr> model_tensor_list(Model& model) {
    std::vector<MatrixPtr> t{&model.encoder.embeddings.vectors,
                             &model.encoder.word_lstm.fwd.wx,
                             &model.encoder.word_lstm.fwd.wh,
                             &model.encoder.word_lstm.fwd.b,
                             &model.encoder.word_lstm.bwd.wx,
                             &model.encoder.word_lstm.bwd.wh,
                             &model.encoder.word_lstm.bwd.b};
    if (model.encoder.use_char) {
        t.push_back(&model.encoder.char_embeddings.vectors);
        for (MatrixPtr m : {&model.encoder.char_lstm.fwd.wx, &model.encoder.char_lstm.fwd.wh,
                            &model.encoder.char_lstm.fwd.b, &model.encoder.char_lstm.bwd.wx,
                            &model.encoder.char_lstm.bwd.wh, &model.encoder.char_lstm.bwd.b})
            t.push_back(m);
    }
    t.push_back(&model.source_head.w);
    t.push_back(&model.source_head.a);
    t.push_back(&model.target_head.w);
    t.push_back(&model.target_head.a);
    return t;
}

std::vector<std::size_t> label_indices(const LabeledSentence& s, const LabelScheme& scheme) {
    std::vector<std::size_t> y;
    y.reserve(s.labels.size());
    for (const auto& tag : s.labels) y.push_back(scheme.index_of(tag));
    return y;
}

// static chunking; fn(begin, end) must touch disjoint state per index
void run_chunks(std::size_t count, std::size_t threads,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t t = std::max<std::size_t>(1, std::min(threads, count));
    if (t == 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    for (std::size_t c = 0; c < t; ++c) {
        std::size_t lo = c * count / t, hi = (c + 1) * count / t;
        pool.emplace_back([&, c, lo, hi] {
            try {
                fn(c, lo, hi);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct SentenceWork {
    const LabeledSentence* sentence = nullptr;
    bool is_source = false;
    double weight = 0.0;
    std::vector<std::size_t> labels;
    SentenceCache cache;
    Matrix h;
    Matrix dh;
    Matrix dw, da;
    double weighted_nll = 0.0;
};

MmdConfig build_mmd_config(const Hyperparams& hp, const LabelScheme& scheme,
                           const std::vector<std::pair<std::size_t, std::size_t>>* label_pairs) {
    MmdConfig cfg;
    cfg.policy = hp.bandwidth_policy;
    cfg.fixed_bandwidth = hp.fixed_bandwidth;
    cfg.mu.assign(scheme.size(), hp.mu_default);
    for (const auto& [tag, w] : hp.mu_by_tag) cfg.mu[scheme.index_of(tag)] = w;
    if (label_pairs) {
        for (const auto& [src, tgt] : *label_pairs) {
            if (src != tgt)
                throw ConfigError("training requires matched labels to share one scheme index");
            cfg.matched.push_back(src);
        }
    } else {
        cfg.matched.resize(scheme.size());
        std::iota(cfg.matched.begin(), cfg.matched.end(), 0);
    }
    return cfg;
}

}  // namespace

std::vector<Matrix*> param_tensors(ModelParams& model) {
    return model_tensor_list<ModelParams, Matrix*>(model);
}

std::vector<const Matrix*> param_tensors(const ModelParams& model) {
    return model_tensor_list<const ModelParams, const Matrix*>(model);
}

std::vector<Matrix*> grad_tensors(ModelGrads& grads, bool use_char) {
    std::vector<Matrix*> t = encoder_grad_list(grads.encoder, use_char);
    t.push_back(&grads.dw_s);
    t.push_back(&grads.da_s);
    t.push_back(&grads.dw_t);
    t.push_back(&grads.da_t);
    return t;
}

ModelParams init_model(const Hyperparams& hp, const LabelScheme& scheme,
                       const std::vector<std::string>& vocab_tokens,
                       const std::string& embedding_file_text, Rng& rng) {
    ModelParams model;
    Rng emb_rng = rng.substream("embeddings");
    if (embedding_file_text.empty()) {
        model.encoder.embeddings = random_embeddings(hp.d_emb, vocab_tokens, emb_rng);
    } else {
        model.encoder.embeddings = load_embeddings(embedding_file_text, vocab_tokens, emb_rng);
        if (model.encoder.embeddings.d_emb != hp.d_emb)
            throw ConfigError("pretrained embedding dimension differs from d_emb");
    }

    model.encoder.use_char = hp.use_char;
    std::size_t d_in = hp.d_emb;
    if (hp.use_char) {
        std::vector<std::string> chars;
        for (const auto& tok : vocab_tokens)
            for (auto& cp : utf8_codepoints(tok)) chars.push_back(std::move(cp));
        std::sort(chars.begin(), chars.end());
        chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
        Rng char_emb_rng = rng.substream("char_embeddings");
        model.encoder.char_embeddings = random_embeddings(hp.d_char, chars, char_emb_rng);
        Rng char_lstm_rng = rng.substream("char_lstm");
        model.encoder.char_lstm = init_bilstm(hp.d_char, hp.d_char, char_lstm_rng);
        d_in += 2 * hp.d_char;
    }
    Rng word_rng = rng.substream("word_lstm");
    model.encoder.word_lstm = init_bilstm(d_in, hp.d_lstm, word_rng);

    Rng head_rng = rng.substream("crf");
    const std::size_t m = scheme.size();
    const std::size_t rows = 2 * hp.d_lstm;
    double bound = std::sqrt(6.0 / static_cast<double>(rows + m));
    model.source_head.w = Matrix(rows, m);
    for (auto& v : model.source_head.w.data) v = head_rng.uniform(-bound, bound);
    model.source_head.a = Matrix(m, m);
    model.target_head = model.source_head;
    return model;
}

ModelGrads zero_grads(const ModelParams& model) {
    ModelGrads g;
    g.encoder = zero_grads(model.encoder);
    g.dw_s = Matrix(model.source_head.w.rows, model.source_head.w.cols);
    g.da_s = Matrix(model.source_head.a.rows, model.source_head.a.cols);
    g.dw_t = Matrix(model.target_head.w.rows, model.target_head.w.cols);
    g.da_t = Matrix(model.target_head.a.rows, model.target_head.a.cols);
    return g;
}

std::vector<std::string> collect_vocab(
    const std::vector<const std::vector<LabeledSentence>*>& corpora) {
    std::vector<std::string> vocab;
    for (const auto* corpus : corpora)
        for (const auto& s : *corpus) vocab.insert(vocab.end(), s.tokens.begin(), s.tokens.end());
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    return vocab;
}

double crf_loss(const std::vector<const LabeledSentence*>& batch_s,
                const std::vector<const LabeledSentence*>& batch_t, double epsilon,
                const ModelParams& model, const LabelScheme& scheme) {
    if (batch_t.empty()) throw ParamError("target batch must not be empty");
    if (batch_s.empty() && epsilon != 0.0)
        throw ParamError("an empty source batch requires epsilon = 0");
    double total = 0.0;
    auto add_domain = [&](const std::vector<const LabeledSentence*>& batch, const CrfParams& head,
                          double weight) {
        if (batch.empty() || weight == 0.0) return;
        double per_sentence = weight / static_cast<double>(batch.size());
        for (const auto* s : batch) {
            Matrix h = encode_sentence(s->tokens, model.encoder, nullptr);
            total -= per_sentence * log_likelihood(emission(h, head.w), head.a,
                                                   label_indices(*s, scheme));
        }
    };
    add_domain(batch_s, model.source_head, epsilon);
    add_domain(batch_t, model.target_head, 1.0 - epsilon);
    return total;
}

LossBreakdown total_loss(const std::vector<const LabeledSentence*>& batch_s,
                         const std::vector<const LabeledSentence*>& batch_t,
                         const ModelParams& model, const Hyperparams& hp,
                         const LabelScheme& scheme, ModelGrads* grads,
                         const std::vector<std::pair<std::size_t, std::size_t>>* label_pairs,
                         std::size_t threads) {
    if (batch_t.empty()) throw ParamError("target batch must not be empty");
    if (batch_s.empty() && hp.epsilon != 0.0)
        throw ParamError("an empty source batch requires epsilon = 0");

    std::vector<SentenceWork> work;
    work.reserve(batch_s.size() + batch_t.size());
    double ws = batch_s.empty() ? 0.0 : hp.epsilon / static_cast<double>(batch_s.size());
    double wt = (1.0 - hp.epsilon) / static_cast<double>(batch_t.size());
    for (const auto* s : batch_s) {
        SentenceWork item;
        item.sentence = s;
        item.is_source = true;
        item.weight = ws;
        item.labels = label_indices(*s, scheme);
        work.push_back(std::move(item));
    }
    for (const auto* s : batch_t) {
        SentenceWork item;
        item.sentence = s;
        item.weight = wt;
        item.labels = label_indices(*s, scheme);
        work.push_back(std::move(item));
    }

    run_chunks(work.size(), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            SentenceWork& item = work[i];
            const CrfParams& head = item.is_source ? model.source_head : model.target_head;
            item.h = encode_sentence(item.sentence->tokens, model.encoder,
                                     grads ? &item.cache : nullptr);
            if (grads) {
                CrfGradients g = crf_gradients(item.h, head.w, head.a, item.labels);
                item.weighted_nll = item.weight * g.nll;
                item.dh = std::move(g.dh);
                for (auto& v : item.dh.data) v *= item.weight;
                item.dw = std::move(g.dw);
                for (auto& v : item.dw.data) v *= item.weight;
                item.da = std::move(g.da);
                for (auto& v : item.da.data) v *= item.weight;
            } else {
                item.weighted_nll =
                    -item.weight * log_likelihood(emission(item.h, head.w), head.a, item.labels);
            }
        }
    });

    LossBreakdown loss;
    for (const SentenceWork& item : work) loss.l_c += item.weighted_nll;
    if (grads) {
        for (SentenceWork& item : work) {
            add_scaled(item.is_source ? grads->dw_s : grads->dw_t, 1.0, item.dw);
            add_scaled(item.is_source ? grads->da_s : grads->da_t, 1.0, item.da);
        }
    }

    const bool use_mmd = hp.alpha > 0.0 && !batch_s.empty();
    std::vector<Matrix> dh_mmd;
    if (use_mmd) {
        MmdConfig cfg = build_mmd_config(hp, scheme, label_pairs);
        const std::size_t dim = model.encoder.hidden_dim();
        DomainPools sp, tp;
        sp.dim = tp.dim = dim;
        sp.by_label.resize(scheme.size());
        tp.by_label.resize(scheme.size());
        PoolGrads sg(scheme.size()), tg(scheme.size());
        if (grads) {
            dh_mmd.reserve(work.size());
            for (const SentenceWork& item : work) dh_mmd.emplace_back(item.h.rows, item.h.cols);
        }
        for (std::size_t i = 0; i < work.size(); ++i) {
            SentenceWork& item = work[i];
            for (std::size_t t = 0; t < item.h.rows; ++t) {
                std::size_t y = item.labels[t];
                (item.is_source ? sp : tp).by_label[y].push_back(item.h.row(t));
                if (grads) (item.is_source ? sg : tg)[y].push_back(dh_mmd[i].row(t));
            }
        }
        if (hp.mode == Mode::vanilla_mmd_crf_l2)
            loss.l_lammd = vanilla_mmd(sp, tp, cfg, grads ? &sg : nullptr, grads ? &tg : nullptr);
        else
            loss.l_lammd = la_mmd(sp, tp, cfg, grads ? &sg : nullptr, grads ? &tg : nullptr);
        if (grads)
            for (std::size_t i = 0; i < work.size(); ++i)
                add_scaled(work[i].dh, hp.alpha, dh_mmd[i]);
    }

    if (grads) {
        if (threads <= 1) {
            for (SentenceWork& item : work)
                encoder_backward(model.encoder, item.cache, item.dh, grads->encoder);
        } else {
            std::size_t t = std::max<std::size_t>(1, std::min(threads, work.size()));
            std::vector<EncoderGrads> locals;
            for (std::size_t c = 0; c < t; ++c) locals.push_back(zero_grads(model.encoder));
            run_chunks(work.size(), threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i)
                    encoder_backward(model.encoder, work[i].cache, work[i].dh, locals[c]);
            });
            auto into = encoder_grad_list(grads->encoder, model.encoder.use_char);
            for (std::size_t c = 0; c < t; ++c) {
                auto from = encoder_grad_list(locals[c], model.encoder.use_char);
                for (std::size_t k = 0; k < into.size(); ++k) add_scaled(*into[k], 1.0, *from[k]);
            }
        }
    }

    ParamPenalty penalty =
        label_pairs ? param_penalty_mapped(model.source_head.w, model.source_head.a,
                                           model.target_head.w, model.target_head.a, *label_pairs)
                    : param_penalty(model.source_head.w, model.source_head.a,
                                    model.target_head.w, model.target_head.a);
    loss.l_p = penalty.value;
    if (grads && hp.beta > 0.0) {
        add_scaled(grads->dw_s, hp.beta, penalty.dw_s);
        add_scaled(grads->da_s, hp.beta, penalty.da_s);
        add_scaled(grads->dw_t, hp.beta, penalty.dw_t);
        add_scaled(grads->da_t, hp.beta, penalty.da_t);
    }

    auto params = param_tensors(model);
    for (const Matrix* p : params) loss.l_r += frob_sq(*p);
    if (grads && hp.gamma > 0.0) {
        auto sinks = grad_tensors(*grads, model.encoder.use_char);
        for (std::size_t i = 0; i < params.size(); ++i)
            add_scaled(*sinks[i], 2.0 * hp.gamma, *params[i]);
    }

    loss.total = loss.l_c + hp.alpha * loss.l_lammd + hp.beta * loss.l_p + hp.gamma * loss.l_r;
    return loss;
}

Batcher::Batcher(std::size_t corpus_size, std::size_t batch_size, const Rng& base)
    : corpus_size_(corpus_size), batch_size_(batch_size), base_(base) {
    if (corpus_size_ == 0) throw ConfigError("cannot batch an empty corpus");
    if (batch_size_ == 0) throw ConfigError("batch size must be positive");
    reshuffle();
}

void Batcher::reshuffle() {
    order_.resize(corpus_size_);
    std::iota(order_.begin(), order_.end(), 0);
    Rng r = base_.substream("cycle/" + std::to_string(cycle_++));
    r.shuffle(order_);
    pos_ = 0;
}

std::vector<std::size_t> Batcher::next() {
    std::vector<std::size_t> batch;
    batch.reserve(batch_size_);
    while (batch.size() < batch_size_) {
        if (pos_ == order_.size()) reshuffle();
        batch.push_back(order_[pos_++]);
    }
    return batch;
}

std::vector<std::string> predict_labels(const ModelParams& model, const LabelScheme& scheme,
                                        const std::vector<std::string>& tokens, Domain domain) {
    if (tokens.empty()) return {};
    Matrix h = encode_sentence(tokens, model.encoder, nullptr);
    const CrfParams& head = domain == Domain::source ? model.source_head : model.target_head;
    ViterbiResult v = viterbi(emission(h, head.w), head.a);
    std::vector<std::string> out;
    out.reserve(v.labels.size());
    for (std::size_t idx : v.labels) out.push_back(scheme.tags[idx]);
    return out;
}

TrainResult train(const Hyperparams& hp_in, const std::vector<LabeledSentence>& source_train,
                  const std::vector<LabeledSentence>& target_train,
                  const std::vector<LabeledSentence>& target_dev, const LabelScheme& scheme,
                  const std::string& embedding_file_text, std::ostream* progress,
                  const std::vector<std::pair<std::size_t, std::size_t>>* label_pairs,
                  std::size_t threads) {
    Hyperparams hp = hp_in;
    normalize_hyperparams(hp);
    const bool use_source = hp.mode != Mode::non_transfer;
    if (target_train.empty()) throw ConfigError("target training corpus is empty");
    if (target_dev.empty()) throw ConfigError("target dev corpus is empty");
    if (use_source && source_train.empty())
        throw ConfigError("source training corpus is empty in a transfer mode");

    std::vector<const std::vector<LabeledSentence>*> corpora;
    if (use_source) corpora.push_back(&source_train);
    corpora.push_back(&target_train);
    std::vector<std::string> vocab = collect_vocab(corpora);

    Rng root(hp.seed);
    Rng init_rng = root.substream("init");
    ModelParams model = init_model(hp, scheme, vocab, embedding_file_text, init_rng);
    ModelGrads grads = zero_grads(model);

    std::vector<AdaGradState> states;
    for (const Matrix* p : param_tensors(model))
        states.emplace_back(p->rows, p->cols, hp.learning_rate);

    std::optional<Batcher> source_batcher;
    if (use_source)
        source_batcher.emplace(source_train.size(), hp.batch_source,
                               root.substream("batch/source"));
    Batcher target_batcher(target_train.size(), hp.batch_target, root.substream("batch/target"));

    std::size_t batches_per_epoch =
        (target_train.size() + hp.batch_target - 1) / hp.batch_target;
    if (use_source)
        batches_per_epoch = std::max(
            batches_per_epoch, (source_train.size() + hp.batch_source - 1) / hp.batch_source);

    TrainResult result;
    result.record.seed = hp.seed;
    double best_f1 = -1.0;
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        LossBreakdown mean;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            std::vector<const LabeledSentence*> batch_s, batch_t;
            if (use_source)
                for (std::size_t idx : source_batcher->next())
                    batch_s.push_back(&source_train[idx]);
            for (std::size_t idx : target_batcher.next()) batch_t.push_back(&target_train[idx]);

            for (Matrix* g : grad_tensors(grads, hp.use_char)) g->fill(0.0);
            LossBreakdown loss =
                total_loss(batch_s, batch_t, model, hp, scheme, &grads, label_pairs, threads);
            if (!std::isfinite(loss.total))
                throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(b + 1));
            mean.l_c += loss.l_c;
            mean.l_lammd += loss.l_lammd;
            mean.l_p += loss.l_p;
            mean.l_r += loss.l_r;
            mean.total += loss.total;

            auto tensors = param_tensors(model);
            auto sinks = grad_tensors(grads, hp.use_char);
            for (std::size_t i = 0; i < tensors.size(); ++i)
                adagrad_step_inplace(*tensors[i], *sinks[i], states[i]);
        }
        double nb = static_cast<double>(batches_per_epoch);
        mean.l_c /= nb;
        mean.l_lammd /= nb;
        mean.l_p /= nb;
        mean.l_r /= nb;
        mean.total /= nb;

        std::vector<std::vector<std::string>> predictions;
        predictions.reserve(target_dev.size());
        for (const auto& s : target_dev)
            predictions.push_back(predict_labels(model, scheme, s.tokens, Domain::target));
        double dev_f1 = span_f1(target_dev, predictions).f1;

        EpochRecord record;
        record.loss = mean;
        record.dev_f1 = dev_f1;
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.record.epochs.push_back(record);

        if (progress) {
            char line[256];
            std::snprintf(line, sizeof(line), "%zu %.17g %.17g %.17g %.17g %.17g %.17g\n", epoch,
                          mean.l_c, mean.l_lammd, mean.l_p, mean.l_r, mean.total, dev_f1);
            (*progress) << line;
            progress->flush();
        }

        if (dev_f1 > best_f1) {
            best_f1 = dev_f1;
            result.model = model;
            result.record.best_epoch = epoch - 1;
            since_best = 0;
        } else if (hp.patience > 0 && ++since_best >= hp.patience) {
            break;
        }
    }
    return result;
}

}  // namespace latk
