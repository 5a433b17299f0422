#include "latk/embedding.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

#include "latk/error.hpp"

namespace latk {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) out.push_back(std::move(f));
    return out;
}

double parse_real(const std::string& s, std::size_t line_no) {
    const char* c = s.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end != c + s.size() || s.empty())
        throw ParseError("embedding line " + std::to_string(line_no) + ": non-numeric field '" + s +
                         "'");
    return v;
}

std::size_t parse_count(const std::string& s, const char* what) {
    const char* c = s.c_str();
    char* end = nullptr;
    unsigned long long v = std::strtoull(c, &end, 10);
    if (end != c + s.size() || s.empty())
        throw ParseError(std::string("embedding header: bad ") + what + " '" + s + "'");
    return static_cast<std::size_t>(v);
}

struct VocabBuilder {
    EmbeddingTable table;

    explicit VocabBuilder(std::size_t d) {
        table.d_emb = d;
        add(kPadToken);
        add(kUnkToken);
    }

    std::size_t add(const std::string& token) {
        auto [it, fresh] = table.token_to_index.emplace(token, table.index_to_token.size());
        if (fresh) table.index_to_token.push_back(token);
        return it->second;
    }
};

}  // namespace

std::size_t EmbeddingTable::lookup(const std::string& token) const {
    auto it = token_to_index.find(token);
    return it == token_to_index.end() ? unk_index() : it->second;
}

EmbeddingTable load_embeddings(const std::string& file_text,
                               const std::vector<std::string>& required_tokens, Rng& rng) {
    std::istringstream ss(file_text);
    std::string line;
    if (!std::getline(ss, line)) throw ParseError("embedding file: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_ws(line);
    if (header.size() != 2) throw ParseError("embedding header: expected '<count> <dim>'");
    std::size_t count = parse_count(header[0], "count");
    std::size_t dim = parse_count(header[1], "dim");
    if (dim == 0) throw ParseError("embedding header: dim must be positive");

    VocabBuilder vb(dim);
    std::vector<std::pair<std::size_t, std::vector<double>>> file_rows;
    std::unordered_set<std::size_t> seen_rows;
    std::size_t line_no = 1;
    std::size_t rows_seen = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_ws(line);
        if (fields.empty())
            throw ParseError("embedding line " + std::to_string(line_no) + ": blank row");
        if (fields.size() != dim + 1)
            throw ParseError("embedding line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim) + " values, got " +
                             std::to_string(fields.size() - 1));
        const std::string& token = fields[0];
        std::size_t idx = vb.add(token);
        if (!seen_rows.insert(idx).second)
            throw ParseError("embedding line " + std::to_string(line_no) + ": duplicate token '" +
                             token + "'");
        std::vector<double> vals(dim);
        for (std::size_t k = 0; k < dim; ++k) vals[k] = parse_real(fields[k + 1], line_no);
        file_rows.emplace_back(idx, std::move(vals));
        ++rows_seen;
    }
    if (rows_seen != count)
        throw ParseError("embedding file: header count " + std::to_string(count) + " but " +
                         std::to_string(rows_seen) + " rows");

    for (const auto& t : required_tokens) vb.add(t);

    EmbeddingTable table = std::move(vb.table);
    table.vectors = Matrix(table.index_to_token.size(), dim);
    std::vector<bool> filled(table.index_to_token.size(), false);
    filled[table.pad_index()] = true;  // zero row unless the file overrides it
    for (auto& [idx, vals] : file_rows) {
        std::copy(vals.begin(), vals.end(), table.vectors.row(idx));
        filled[idx] = true;
    }
    double r = std::sqrt(3.0 / static_cast<double>(dim));
    for (std::size_t i = 0; i < filled.size(); ++i) {
        if (filled[i]) continue;
        double* row = table.vectors.row(i);
        for (std::size_t k = 0; k < dim; ++k) row[k] = rng.uniform(-r, r);
    }
    return table;
}

EmbeddingTable random_embeddings(std::size_t d_emb,
                                 const std::vector<std::string>& required_tokens, Rng& rng) {
    if (d_emb == 0) throw ParamError("random_embeddings: d_emb must be positive");
    VocabBuilder vb(d_emb);
    for (const auto& t : required_tokens) vb.add(t);
    EmbeddingTable table = std::move(vb.table);
    table.vectors = Matrix(table.index_to_token.size(), d_emb);
    double r = std::sqrt(3.0 / static_cast<double>(d_emb));
    for (std::size_t i = table.unk_index(); i < table.index_to_token.size(); ++i) {
        double* row = table.vectors.row(i);
        for (std::size_t k = 0; k < d_emb; ++k) row[k] = rng.uniform(-r, r);
    }
    return table;
}

}  // namespace latk
