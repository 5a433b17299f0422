#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace latk {

enum class Domain { source, target };

struct LabeledSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> labels;
    Domain domain = Domain::target;

    bool operator==(const LabeledSentence&) const = default;
};

// BIOES tag inventory over an ordered list of entity types. Index 0 is O;
// each type contributes B-,I-,E-,S- tags in that order, grouped by type.
struct LabelScheme {
    std::vector<std::string> entity_types;
    std::vector<std::string> tags;
    std::unordered_map<std::string, std::size_t> tag_index;

    static LabelScheme from_types(std::vector<std::string> types);

    std::size_t size() const { return tags.size(); }  // m = 4*types + 1
    bool has(const std::string& tag) const { return tag_index.count(tag) != 0; }
    std::size_t index_of(const std::string& tag) const;

    bool operator==(const LabelScheme& o) const {
        return entity_types == o.entity_types;
    }
};

struct Violation {
    std::size_t position;
    std::string message;
};

struct Span {
    std::size_t start;
    std::size_t end;  // inclusive
    std::string type;

    auto operator<=>(const Span&) const = default;
};

// Empty result means the sequence is valid BIOES. Unknown tags throw.
std::vector<Violation> validate_bioes(const std::vector<std::string>& labels,
                                      const LabelScheme& scheme);

// Strict extractor for gold sequences; throws ValidationError on invalid input.
std::vector<Span> extract_spans(const std::vector<std::string>& labels);

// Lenient extractor for model predictions: malformed fragments yield no span
// and scanning resumes at the token that broke the run.
std::vector<Span> extract_spans_lenient(const std::vector<std::string>& labels);

// Inverse of extract_spans for a valid non-overlapping span set.
std::vector<std::string> render_bioes(const std::vector<Span>& spans, std::size_t length);

// Column format: token<TAB>tag lines, sentences split on blank lines,
// '#' comments and -DOCSTART- lines skipped. Every sentence is validated
// against the scheme; the first problem aborts the parse with its line.
std::vector<LabeledSentence> parse_column_file(const std::string& text, const LabelScheme& scheme,
                                               Domain domain);
std::string serialize_column(const std::vector<LabeledSentence>& sentences);

// Matched tags across two schemes. type_pairs expand to the four BIOES tag
// pairs per matched type; O is always matched to O. Y_v is target-side.
struct LabelMap {
    std::vector<std::pair<std::string, std::string>> type_pairs;
    std::vector<std::pair<std::string, std::string>> tag_pairs;
    std::vector<std::string> matched_target_tags;  // Y_v, O first
};

LabelMap build_label_map(const LabelScheme& source, const LabelScheme& target,
                         const std::vector<std::pair<std::string, std::string>>& type_pairs);

// Scheme file: one entity type per line. Map file: source<TAB>target per line.
// Both skip blank lines and '#' comments.
LabelScheme parse_scheme_file(const std::string& text);
std::string serialize_scheme(const LabelScheme& scheme);
std::vector<std::pair<std::string, std::string>> parse_map_file(const std::string& text);

}  // namespace latk
