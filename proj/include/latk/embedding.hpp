#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "latk/matrix.hpp"
#include "latk/rng.hpp"

namespace latk {

inline constexpr const char* kPadToken = "<PAD>";
inline constexpr const char* kUnkToken = "<UNK>";

// Token vocabulary plus its embedding rows. Index 0 is <PAD> (all-zero row
// unless the file provides one), index 1 is <UNK>.
struct EmbeddingTable {
    std::vector<std::string> index_to_token;
    std::unordered_map<std::string, std::size_t> token_to_index;
    Matrix vectors;
    std::size_t d_emb = 0;

    std::size_t pad_index() const { return 0; }
    std::size_t unk_index() const { return 1; }
    // OOV tokens resolve to <UNK>
    std::size_t lookup(const std::string& token) const;
    bool contains(const std::string& token) const { return token_to_index.count(token) != 0; }
};

// Parse the text embedding format: header `<count> <dim>`, then one
// `word v1 .. vdim` line per vector. Vocabulary = <PAD>, <UNK>, file tokens
// in file order, then required tokens (first appearance) not already seen.
// Rows for <UNK> and for required tokens missing from the file are drawn
// uniformly from [-sqrt(3/d), sqrt(3/d)]; <PAD> stays zero. File rows are
// bit-exact decimal parses and override the defaults for special tokens.
EmbeddingTable load_embeddings(const std::string& file_text,
                               const std::vector<std::string>& required_tokens, Rng& rng);

// No pretrained file: every non-<PAD> row is drawn from the same range.
EmbeddingTable random_embeddings(std::size_t d_emb,
                                 const std::vector<std::string>& required_tokens, Rng& rng);

}  // namespace latk
