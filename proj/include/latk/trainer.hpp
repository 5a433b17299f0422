#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "latk/corpus.hpp"
#include "latk/crf.hpp"
#include "latk/encoder.hpp"
#include "latk/rng.hpp"
#include "latk/transfer.hpp"

namespace latk {

enum class Mode { la_dtl, la_mmd_only, crf_l2_only, vanilla_mmd_crf_l2, non_transfer };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

struct Hyperparams {
    Mode mode = Mode::la_dtl;
    double alpha = 0.02;     // feature-transfer weight
    double beta = 0.03;      // parameter-transfer weight
    double gamma = 1e-6;     // weight decay
    double epsilon = 0.3;    // source share of the likelihood term
    double learning_rate = 0.05;
    std::size_t batch_source = 16;
    std::size_t batch_target = 16;
    std::size_t max_epochs = 50;
    std::size_t patience = 10;  // 0 disables early stopping
    std::size_t d_emb = 32;
    std::size_t d_lstm = 32;
    bool use_char = false;
    std::size_t d_char = 16;
    std::uint64_t seed = 1;
    double mu_default = 1.0;
    std::map<std::string, double> mu_by_tag;
    MmdConfig::Bandwidth bandwidth_policy = MmdConfig::Bandwidth::median;
    double fixed_bandwidth = 1.0;
};

// Applies the constraints the mode implies (la_mmd_only: beta = 0;
// crf_l2_only: alpha = 0; non_transfer: alpha = beta = epsilon = 0),
// validates every range, and reports one warning per overridden value.
std::vector<std::string> normalize_hyperparams(Hyperparams& hp);

struct ModelParams {
    EncoderParams encoder;
    CrfParams source_head;
    CrfParams target_head;
};

struct ModelGrads {
    EncoderGrads encoder;
    Matrix dw_s, da_s;
    Matrix dw_t, da_t;
};

// Every parameter tensor in a fixed traversal order (embeddings, word LSTM
// fwd wx/wh/b, bwd wx/wh/b, char stack when enabled, then W/A per head).
// The same order drives AdaGrad, gradient checking, and the model archive.
std::vector<Matrix*> param_tensors(ModelParams& model);
std::vector<const Matrix*> param_tensors(const ModelParams& model);
std::vector<Matrix*> grad_tensors(ModelGrads& grads, bool use_char);

// Fresh model: embeddings from the pretrained text (or random when empty),
// glorot LSTM blocks, and both CRF heads starting from the same W with zero
// transitions so the parameter penalty begins at 0.
ModelParams init_model(const Hyperparams& hp, const LabelScheme& scheme,
                       const std::vector<std::string>& vocab_tokens,
                       const std::string& embedding_file_text, Rng& rng);

ModelGrads zero_grads(const ModelParams& model);

// Sorted unique tokens over the given corpora.
std::vector<std::string> collect_vocab(
    const std::vector<const std::vector<LabeledSentence>*>& corpora);

struct LossBreakdown {
    double l_c = 0.0;
    double l_lammd = 0.0;
    double l_p = 0.0;
    double l_r = 0.0;
    double total = 0.0;
};

// -(eps/|S|) sum log p(y|H) - ((1-eps)/|T|) sum log p(y|H), each domain
// scored by its own head. An empty source batch is valid only at eps = 0.
double crf_loss(const std::vector<const LabeledSentence*>& batch_s,
                const std::vector<const LabeledSentence*>& batch_t, double epsilon,
                const ModelParams& model, const LabelScheme& scheme);

// Full objective l_c + alpha*l_lammd + beta*l_p + gamma*l_r with gradients
// for every tensor; the MMD term back-propagates into the encoder through
// the pooled hidden vectors. grads may be null for value-only evaluation.
LossBreakdown total_loss(const std::vector<const LabeledSentence*>& batch_s,
                         const std::vector<const LabeledSentence*>& batch_t,
                         const ModelParams& model, const Hyperparams& hp,
                         const LabelScheme& scheme, ModelGrads* grads,
                         const std::vector<std::pair<std::size_t, std::size_t>>* label_pairs =
                             nullptr,
                         std::size_t threads = 1);

// Uniform epoch-level shuffling without replacement; when the corpus runs
// out mid-epoch it reshuffles under a fresh sub-seed and keeps going, so a
// smaller corpus recycles to fill every batch.
class Batcher {
  public:
    Batcher(std::size_t corpus_size, std::size_t batch_size, const Rng& base);
    std::vector<std::size_t> next();

  private:
    void reshuffle();

    std::size_t corpus_size_;
    std::size_t batch_size_;
    Rng base_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    std::uint64_t cycle_ = 0;
};

struct EpochRecord {
    LossBreakdown loss;  // means over the epoch's batches
    double dev_f1 = 0.0;
    double wall_seconds = 0.0;
};

struct TrainRecord {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 0-based index into epochs
    std::uint64_t seed = 0;
};

struct TrainResult {
    ModelParams model;  // deep copy of the best-dev snapshot
    TrainRecord record;
};

// Viterbi decode of one sentence with the chosen domain's head.
std::vector<std::string> predict_labels(const ModelParams& model, const LabelScheme& scheme,
                                        const std::vector<std::string>& tokens, Domain domain);

// AdaGrad loop over mixed-domain batches; an epoch is as many batches as the
// slower-cycling domain needs for one pass. After each epoch the target head
// is scored on dev, one progress line "epoch l_c l_lammd l_p l_r total
// dev_f1" is written, and the best-dev snapshot is kept. Early stopping
// fires after `patience` epochs without improvement. Non-finite losses abort
// with the offending epoch and batch in the error.
TrainResult train(const Hyperparams& hp, const std::vector<LabeledSentence>& source_train,
                  const std::vector<LabeledSentence>& target_train,
                  const std::vector<LabeledSentence>& target_dev, const LabelScheme& scheme,
                  const std::string& embedding_file_text, std::ostream* progress,
                  const std::vector<std::pair<std::size_t, std::size_t>>* label_pairs = nullptr,
                  std::size_t threads = 1);

}  // namespace latk
