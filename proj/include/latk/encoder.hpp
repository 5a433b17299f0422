#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "latk/embedding.hpp"
#include "latk/matrix.hpp"
#include "latk/rng.hpp"

namespace latk {

// One direction of an LSTM. The four gate blocks are stacked row-wise in
// the order input, forget, candidate, output: rows [0,d) of wx/wh/b belong
// to the input gate, [d,2d) to the forget gate, and so on.
struct LstmDirParams {
    Matrix wx;  // 4d × d_in
    Matrix wh;  // 4d × d
    Matrix b;   // 1 × 4d

    std::size_t d_lstm() const { return wh.cols; }
    std::size_t d_in() const { return wx.cols; }
};

struct BiLstmParams {
    LstmDirParams fwd;
    LstmDirParams bwd;
};

// Weights uniform in +-sqrt(6/(fan_in+fan_out)) per gate block, biases zero
// except the forget gate at +1.
LstmDirParams init_lstm_dir(std::size_t d_in, std::size_t d_lstm, Rng& rng);
BiLstmParams init_bilstm(std::size_t d_in, std::size_t d_lstm, Rng& rng);

// Per-timestep activations kept for the backward pass. The backward
// direction stores steps in its own processing order (step k consumed
// input n-1-k).
struct LstmDirCache {
    std::vector<std::vector<double>> x, gi, gf, gg, go, c, tc, h;
    std::size_t steps() const { return x.size(); }
};

struct BiLstmCache {
    LstmDirCache fwd, bwd;
    std::size_t n = 0;
    std::size_t d_in = 0;
};

// Runs both directions from zero initial states; returns H (n × 2d) with
// rows h_t = fwd_t (+) bwd_t. cache may be null when no backward pass follows.
Matrix bilstm_forward(const std::vector<std::vector<double>>& xs, const BiLstmParams& p,
                      BiLstmCache* cache);

struct BiLstmGrads {
    LstmDirParams fwd, bwd;
};

BiLstmGrads zero_grads(const BiLstmParams& p);

// Accumulates parameter gradients into `grads` and input gradients into
// `dx` (resized to match the cached sentence). dh is n × 2d.
void bilstm_backward(const BiLstmParams& p, const BiLstmCache& cache, const Matrix& dh,
                     BiLstmGrads& grads, std::vector<std::vector<double>>& dx);

// Splits a UTF-8 string into codepoint substrings (invalid bytes become
// single-byte units rather than failing).
std::vector<std::string> utf8_codepoints(const std::string& word);

// Word representation from a char-level Bi-LSTM: final forward hidden state
// (+) final backward hidden state, dimension 2*d_char. Empty word -> zeros.
std::vector<double> encode_chars(const std::vector<std::vector<double>>& char_vecs,
                                 const BiLstmParams& p, BiLstmCache* cache);

// Shared encoder: embedding lookup, optional char Bi-LSTM feature, word
// Bi-LSTM. Owns every theta_b parameter.
struct EncoderParams {
    EmbeddingTable embeddings;
    BiLstmParams word_lstm;
    bool use_char = false;
    EmbeddingTable char_embeddings;  // rows indexed by codepoint vocabulary
    BiLstmParams char_lstm;

    std::size_t hidden_dim() const { return 2 * word_lstm.fwd.d_lstm(); }
};

struct SentenceCache {
    std::vector<std::size_t> token_ids;
    std::vector<std::vector<double>> word_inputs;
    BiLstmCache word_cache;
    std::vector<std::vector<std::size_t>> char_ids;
    std::vector<std::vector<std::vector<double>>> char_inputs;
    std::vector<BiLstmCache> char_caches;
};

// H = n × 2*d_lstm over the sentence's tokens.
Matrix encode_sentence(const std::vector<std::string>& tokens, const EncoderParams& p,
                       SentenceCache* cache);

struct EncoderGrads {
    Matrix d_embeddings;
    BiLstmGrads word;
    Matrix d_char_embeddings;
    BiLstmGrads chars;
};

EncoderGrads zero_grads(const EncoderParams& p);

// Scatter-adds embedding-row gradients and accumulates LSTM gradients for
// one sentence. cache must come from encode_sentence on the same params.
// dx_out, when given, receives dL/d(word input vector) per token.
void encoder_backward(const EncoderParams& p, const SentenceCache& cache, const Matrix& dh,
                      EncoderGrads& grads, std::vector<std::vector<double>>* dx_out = nullptr);

}  // namespace latk
