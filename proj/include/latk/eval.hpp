#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "latk/corpus.hpp"

namespace latk {

// Micro-averaged exact-match span metrics; zero denominators yield 0.
struct F1Report {
    std::size_t true_positive = 0;
    std::size_t predicted_count = 0;
    std::size_t gold_count = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    struct TypeRow {
        std::string type;
        std::size_t true_positive = 0;
        std::size_t predicted_count = 0;
        std::size_t gold_count = 0;
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
    };
    std::vector<TypeRow> per_type;  // sorted by type name
};

// Gold spans come from the strict extractor (gold must be valid BIOES);
// predictions go through the lenient extractor, so malformed fragments only
// contribute their well-formed spans.
F1Report span_f1(const std::vector<LabeledSentence>& gold,
                 const std::vector<std::vector<std::string>>& pred);

// "precision recall f1 tp pred gold" header line with values, then one
// "TYPE precision recall f1" line per entity type; 4 fraction digits.
std::string render_report(const F1Report& report, bool with_types = true);

// Sentence-level F1 under the same rules; a sentence with neither gold nor
// predicted spans scores 1.
std::vector<double> per_sentence_f1(const std::vector<LabeledSentence>& gold,
                                    const std::vector<std::vector<std::string>>& pred);

// Paired randomization test on |mean(a) - mean(b)|: every iteration flips
// each pair with probability 1/2; p = (1 + #{resampled >= observed}) /
// (1 + iterations).
double randomization_test(const std::vector<double>& a, const std::vector<double>& b,
                          std::size_t iterations, std::uint64_t seed);

}  // namespace latk
