#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latk/corpus.hpp"

namespace latk {

// Two-domain synthetic corpus parameters. Entity surface forms are shared
// across domains; only the context-word distribution shifts. vocab_size
// counts context words and entity tokens together: one third of it (split
// evenly over types, at least 4 each) goes to entity lexicons, the rest to
// context words.
struct SynthSpec {
    std::size_t n_source = 200;
    std::size_t n_target = 40;
    std::size_t n_types = 3;
    std::size_t vocab_size = 120;
    double shift_strength = 0.4;
};

struct SynthResult {
    std::vector<LabeledSentence> source;
    std::vector<LabeledSentence> target;
    LabelScheme scheme;
    std::string header_comment;  // '#'-prefixed lines describing the process
};

// Hidden-Markov-style generator: each sentence alternates between a context
// state emitting domain-weighted context words and entity states emitting
// 1..3 lexicon tokens labeled with gold BIOES tags. shift_strength 0 makes
// the two domains identically distributed; 1 makes their context
// vocabularies disjoint. Deterministic given seed.
SynthResult gen_synthetic(std::uint64_t seed, const SynthSpec& spec);

}  // namespace latk
