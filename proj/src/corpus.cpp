#include "latk/corpus.hpp"

#include <algorithm>
#include <sstream>

#include "latk/error.hpp"

namespace latk {

namespace {

bool tag_shape_ok(const std::string& tag) {
    if (tag == "O") return true;
    if (tag.size() < 3 || tag[1] != '-') return false;
    char p = tag[0];
    return p == 'B' || p == 'I' || p == 'E' || p == 'S';
}

char prefix_of(const std::string& tag) { return tag == "O" ? 'O' : tag[0]; }

std::string type_of(const std::string& tag) { return tag == "O" ? "" : tag.substr(2); }

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

bool is_comment(const std::string& line) {
    return (!line.empty() && line[0] == '#') || line.rfind("-DOCSTART-", 0) == 0;
}

}  // namespace

LabelScheme LabelScheme::from_types(std::vector<std::string> types) {
    LabelScheme s;
    s.tags.push_back("O");
    s.tag_index["O"] = 0;
    for (const auto& t : types) {
        if (t.empty()) throw ConfigError("label scheme: empty entity type name");
        if (t.find_first_of(" \t\r\n") != std::string::npos)
            throw ConfigError("label scheme: whitespace in entity type '" + t + "'");
        for (const char* p : {"B-", "I-", "E-", "S-"}) {
            std::string tag = p + t;
            if (!s.tag_index.emplace(tag, s.tags.size()).second)
                throw ConfigError("label scheme: duplicate entity type '" + t + "'");
            s.tags.push_back(tag);
        }
    }
    s.entity_types = std::move(types);
    return s;
}

std::size_t LabelScheme::index_of(const std::string& tag) const {
    auto it = tag_index.find(tag);
    if (it == tag_index.end()) throw ValidationError("unknown tag '" + tag + "'");
    return it->second;
}

std::vector<Violation> validate_bioes(const std::vector<std::string>& labels,
                                      const LabelScheme& scheme) {
    std::vector<Violation> out;
    std::string open;  // type of the currently open entity, empty = outside
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string& tag = labels[i];
        if (!scheme.has(tag)) throw ValidationError("unknown tag '" + tag + "'");
        char p = prefix_of(tag);
        std::string ty = type_of(tag);
        if (open.empty()) {
            if (p == 'B') {
                open = ty;
            } else if (p == 'I' || p == 'E') {
                out.push_back({i, tag + " without an open B-" + ty});
            }
        } else {
            if (p == 'I' && ty == open) {
                // entity continues
            } else if (p == 'E' && ty == open) {
                open.clear();
            } else {
                if ((p == 'I' || p == 'E') && ty != open) {
                    out.push_back({i, "type switch inside entity: " + tag + " after B-" + open});
                    open.clear();
                } else if (p == 'O') {
                    out.push_back({i, "entity B-" + open + " interrupted by O"});
                    open.clear();
                } else {  // B or S while an entity is open
                    out.push_back({i, tag + " inside an open B-" + open + " entity"});
                    open.clear();
                    if (p == 'B') open = ty;
                }
            }
        }
    }
    if (!open.empty()) out.push_back({labels.size() - 1, "entity B-" + open + " open at sentence end"});
    return out;
}

std::vector<Span> extract_spans(const std::vector<std::string>& labels) {
    std::vector<Span> spans;
    std::string open;
    std::size_t open_start = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string& tag = labels[i];
        if (!tag_shape_ok(tag))
            throw ValidationError("malformed tag '" + tag + "' at position " + std::to_string(i));
        char p = prefix_of(tag);
        std::string ty = type_of(tag);
        if (open.empty()) {
            if (p == 'S') {
                spans.push_back({i, i, ty});
            } else if (p == 'B') {
                open = ty;
                open_start = i;
            } else if (p != 'O') {
                throw ValidationError("invalid BIOES sequence at position " + std::to_string(i));
            }
        } else {
            if (p == 'I' && ty == open) {
                // continues
            } else if (p == 'E' && ty == open) {
                spans.push_back({open_start, i, open});
                open.clear();
            } else {
                throw ValidationError("invalid BIOES sequence at position " + std::to_string(i));
            }
        }
    }
    if (!open.empty())
        throw ValidationError("entity open at sentence end (started at position " +
                              std::to_string(open_start) + ")");
    return spans;
}

std::vector<Span> extract_spans_lenient(const std::vector<std::string>& labels) {
    std::vector<Span> spans;
    const std::size_t n = labels.size();
    std::size_t i = 0;
    while (i < n) {
        const std::string& tag = labels[i];
        if (!tag_shape_ok(tag)) {
            ++i;
            continue;
        }
        char p = prefix_of(tag);
        std::string ty = type_of(tag);
        if (p == 'S') {
            spans.push_back({i, i, ty});
            ++i;
        } else if (p == 'B') {
            std::size_t j = i + 1;
            while (j < n && labels[j] == "I-" + ty) ++j;
            if (j < n && labels[j] == "E-" + ty) {
                spans.push_back({i, j, ty});
                i = j + 1;
            } else {
                // malformed run: drop it and rescan from the breaking token
                i = j;
            }
        } else {
            ++i;  // O, or dangling I/E
        }
    }
    return spans;
}

std::vector<std::string> render_bioes(const std::vector<Span>& spans, std::size_t length) {
    std::vector<std::string> labels(length, "O");
    std::vector<bool> used(length, false);
    for (const auto& sp : spans) {
        if (sp.start > sp.end || sp.end >= length)
            throw ValidationError("span out of range: [" + std::to_string(sp.start) + "," +
                                  std::to_string(sp.end) + "]");
        if (sp.type.empty()) throw ValidationError("span with empty type");
        for (std::size_t i = sp.start; i <= sp.end; ++i) {
            if (used[i]) throw ValidationError("overlapping spans at position " + std::to_string(i));
            used[i] = true;
        }
        if (sp.start == sp.end) {
            labels[sp.start] = "S-" + sp.type;
        } else {
            labels[sp.start] = "B-" + sp.type;
            for (std::size_t i = sp.start + 1; i < sp.end; ++i) labels[i] = "I-" + sp.type;
            labels[sp.end] = "E-" + sp.type;
        }
    }
    return labels;
}

std::vector<LabeledSentence> parse_column_file(const std::string& text, const LabelScheme& scheme,
                                               Domain domain) {
    std::vector<LabeledSentence> out;
    LabeledSentence cur;
    cur.domain = domain;
    std::vector<std::size_t> token_lines;

    auto flush = [&]() {
        if (cur.tokens.empty()) return;
        for (std::size_t k = 0; k < cur.labels.size(); ++k) {
            if (!scheme.has(cur.labels[k]))
                throw ValidationError("line " + std::to_string(token_lines[k]) + ": unknown tag '" +
                                      cur.labels[k] + "'");
        }
        auto viols = validate_bioes(cur.labels, scheme);
        if (!viols.empty())
            throw ValidationError("line " + std::to_string(token_lines[viols[0].position]) + ": " +
                                  viols[0].message);
        out.push_back(std::move(cur));
        cur = LabeledSentence{};
        cur.domain = domain;
        token_lines.clear();
    };

    std::istringstream ss(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        std::string line = strip_cr(std::move(raw));
        if (line.empty()) {
            flush();
            continue;
        }
        if (is_comment(line)) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected token<TAB>tag");
        if (line.find('\t', tab + 1) != std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": too many fields");
        std::string token = line.substr(0, tab);
        std::string tag = line.substr(tab + 1);
        if (token.empty() || tag.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty token or tag");
        cur.tokens.push_back(std::move(token));
        cur.labels.push_back(std::move(tag));
        token_lines.push_back(line_no);
    }
    flush();
    return out;
}

std::string serialize_column(const std::vector<LabeledSentence>& sentences) {
    std::string out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto& s = sentences[i];
        if (s.tokens.size() != s.labels.size() || s.tokens.empty())
            throw ValidationError("sentence " + std::to_string(i) + ": bad token/label shape");
        if (i > 0) out += '\n';
        for (std::size_t k = 0; k < s.tokens.size(); ++k) {
            const std::string& tok = s.tokens[k];
            const std::string& tag = s.labels[k];
            if (tok.find_first_of("\t\n") != std::string::npos ||
                tag.find_first_of("\t\n") != std::string::npos)
                throw ValidationError("token or tag contains tab/newline");
            if (tok[0] == '#' || tok.rfind("-DOCSTART-", 0) == 0)
                throw ValidationError("token '" + tok + "' would be read back as a comment");
            out += tok;
            out += '\t';
            out += tag;
            out += '\n';
        }
    }
    return out;
}

LabelMap build_label_map(const LabelScheme& source, const LabelScheme& target,
                         const std::vector<std::pair<std::string, std::string>>& type_pairs) {
    LabelMap map;
    map.tag_pairs.emplace_back("O", "O");
    map.matched_target_tags.push_back("O");
    std::vector<std::string> used_src, used_tgt;
    for (const auto& [s, t] : type_pairs) {
        if (std::find(source.entity_types.begin(), source.entity_types.end(), s) ==
            source.entity_types.end())
            throw ConfigError("label map: unknown source type '" + s + "'");
        if (std::find(target.entity_types.begin(), target.entity_types.end(), t) ==
            target.entity_types.end())
            throw ConfigError("label map: unknown target type '" + t + "'");
        if (std::find(used_src.begin(), used_src.end(), s) != used_src.end())
            throw ConfigError("label map: source type '" + s + "' paired twice");
        if (std::find(used_tgt.begin(), used_tgt.end(), t) != used_tgt.end())
            throw ConfigError("label map: target type '" + t + "' paired twice");
        used_src.push_back(s);
        used_tgt.push_back(t);
        for (const char* p : {"B-", "I-", "E-", "S-"}) {
            map.tag_pairs.emplace_back(p + s, p + t);
            map.matched_target_tags.push_back(p + t);
        }
        map.type_pairs.emplace_back(s, t);
    }
    return map;
}

LabelScheme parse_scheme_file(const std::string& text) {
    std::vector<std::string> types;
    std::istringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
        std::string line = strip_cr(std::move(raw));
        if (line.empty() || line[0] == '#') continue;
        types.push_back(std::move(line));
    }
    return LabelScheme::from_types(std::move(types));
}

std::string serialize_scheme(const LabelScheme& scheme) {
    std::string out;
    for (const auto& t : scheme.entity_types) {
        out += t;
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_map_file(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream ss(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        std::string line = strip_cr(std::move(raw));
        if (line.empty() || line[0] == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw ParseError("map line " + std::to_string(line_no) +
                             ": expected source_type<TAB>target_type");
        std::string s = line.substr(0, tab);
        std::string t = line.substr(tab + 1);
        if (s.empty() || t.empty())
            throw ParseError("map line " + std::to_string(line_no) + ": empty type name");
        pairs.emplace_back(std::move(s), std::move(t));
    }
    return pairs;
}

}  // namespace latk
