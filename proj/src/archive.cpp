#include "latk/archive.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "latk/error.hpp"

namespace latk {

namespace {

constexpr const char* kMagic = "latk-model 1";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size() || s.empty())
        throw ConfigError(std::string("model archive: bad ") + what + " '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    unsigned long long v = std::strtoull(begin, &end, 10);
    if (end != begin + s.size() || s.empty() || s[0] == '-')
        throw ConfigError(std::string("model archive: bad ") + what + " '" + s + "'");
    return v;
}

void append_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::vector<std::string> tensor_names(bool use_char) {
    std::vector<std::string> names{"embeddings",  "word_fwd_wx", "word_fwd_wh", "word_fwd_b",
                                   "word_bwd_wx", "word_bwd_wh", "word_bwd_b"};
    if (use_char)
        for (const char* n : {"char_embeddings", "char_fwd_wx", "char_fwd_wh", "char_fwd_b",
                              "char_bwd_wx", "char_bwd_wh", "char_bwd_b"})
            names.push_back(n);
    for (const char* n : {"source_w", "source_a", "target_w", "target_a"}) names.push_back(n);
    return names;
}

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;

    std::string line() {
        std::size_t nl = text.find('\n', pos);
        if (pos >= text.size() || nl == std::string::npos)
            throw ConfigError("model archive: truncated header");
        std::string out = text.substr(pos, nl - pos);
        pos = nl + 1;
        return out;
    }
};

std::string expect_value(Cursor& c, const char* key) {
    std::string l = c.line();
    std::size_t klen = std::strlen(key);
    if (l.size() < klen + 2 || l.compare(0, klen, key) != 0 || l[klen] != ' ')
        throw ConfigError(std::string("model archive: expected '") + key + "' line, got '" + l +
                          "'");
    return l.substr(klen + 1);
}

std::pair<std::string, std::string> split_once(const std::string& s, const char* what) {
    std::size_t sp = s.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 == s.size())
        throw ConfigError(std::string("model archive: bad ") + what + " line '" + s + "'");
    return {s.substr(0, sp), s.substr(sp + 1)};
}

void write_scheme(std::string& out, const char* key, const LabelScheme& scheme) {
    out += std::string(key) + " " + std::to_string(scheme.entity_types.size()) + "\n";
    for (const auto& t : scheme.entity_types) out += t + "\n";
}

std::vector<std::string> read_list(Cursor& c, const char* key) {
    std::size_t count = parse_u64(expect_value(c, key), key);
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(c.line());
    return out;
}

}  // namespace

std::string save_archive(const ModelArchive& archive) {
    const Hyperparams& hp = archive.hp;
    const EncoderParams& enc = archive.model.encoder;
    std::string out;
    out += std::string(kMagic) + "\n";
    out += "mode " + mode_name(hp.mode) + "\n";
    out += "seed " + std::to_string(hp.seed) + "\n";
    out += "alpha " + fmt_double(hp.alpha) + "\n";
    out += "beta " + fmt_double(hp.beta) + "\n";
    out += "gamma " + fmt_double(hp.gamma) + "\n";
    out += "epsilon " + fmt_double(hp.epsilon) + "\n";
    out += "learning_rate " + fmt_double(hp.learning_rate) + "\n";
    out += "batch_source " + std::to_string(hp.batch_source) + "\n";
    out += "batch_target " + std::to_string(hp.batch_target) + "\n";
    out += "max_epochs " + std::to_string(hp.max_epochs) + "\n";
    out += "patience " + std::to_string(hp.patience) + "\n";
    out += "d_emb " + std::to_string(hp.d_emb) + "\n";
    out += "d_lstm " + std::to_string(hp.d_lstm) + "\n";
    out += "use_char " + std::string(hp.use_char ? "1" : "0") + "\n";
    out += "d_char " + std::to_string(hp.d_char) + "\n";
    out += "mu_default " + fmt_double(hp.mu_default) + "\n";
    out += std::string("bandwidth_policy ") +
           (hp.bandwidth_policy == MmdConfig::Bandwidth::median ? "median" : "fixed") + "\n";
    out += "fixed_bandwidth " + fmt_double(hp.fixed_bandwidth) + "\n";
    out += "mu_overrides " + std::to_string(hp.mu_by_tag.size()) + "\n";
    for (const auto& [tag, w] : hp.mu_by_tag) out += tag + " " + fmt_double(w) + "\n";
    write_scheme(out, "scheme_source", archive.scheme);
    write_scheme(out, "scheme_target", archive.scheme);
    out += "label_map " + std::to_string(archive.label_map.size()) + "\n";
    for (const auto& [src, tgt] : archive.label_map) out += src + " " + tgt + "\n";
    out += "vocab " + std::to_string(enc.embeddings.index_to_token.size()) + "\n";
    for (const auto& tok : enc.embeddings.index_to_token) out += tok + "\n";
    out += "char_vocab " +
           std::to_string(enc.use_char ? enc.char_embeddings.index_to_token.size() : 0) + "\n";
    if (enc.use_char)
        for (const auto& tok : enc.char_embeddings.index_to_token) out += tok + "\n";

    auto tensors = param_tensors(archive.model);
    std::vector<std::string> names = tensor_names(enc.use_char);
    if (tensors.size() != names.size())
        throw ConfigError("model archive: tensor list does not match the declared layout");
    out += "tensors " + std::to_string(tensors.size()) + "\n";
    std::size_t offset = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        out += names[i] + " " + std::to_string(tensors[i]->rows) + " " +
               std::to_string(tensors[i]->cols) + " " + std::to_string(offset) + "\n";
        offset += tensors[i]->size() * 8;
    }
    out += "blob " + std::to_string(offset) + "\n";
    out.reserve(out.size() + offset);
    for (const Matrix* t : tensors)
        for (double v : t->data) append_f64(out, v);
    return out;
}

ModelArchive load_archive(const std::string& text) {
    Cursor c{text};
    if (c.line() != kMagic) throw ConfigError("model archive: unsupported format version");

    ModelArchive a;
    Hyperparams& hp = a.hp;
    hp.mode = parse_mode(expect_value(c, "mode"));
    hp.seed = parse_u64(expect_value(c, "seed"), "seed");
    hp.alpha = parse_double(expect_value(c, "alpha"), "alpha");
    hp.beta = parse_double(expect_value(c, "beta"), "beta");
    hp.gamma = parse_double(expect_value(c, "gamma"), "gamma");
    hp.epsilon = parse_double(expect_value(c, "epsilon"), "epsilon");
    hp.learning_rate = parse_double(expect_value(c, "learning_rate"), "learning_rate");
    hp.batch_source = parse_u64(expect_value(c, "batch_source"), "batch_source");
    hp.batch_target = parse_u64(expect_value(c, "batch_target"), "batch_target");
    hp.max_epochs = parse_u64(expect_value(c, "max_epochs"), "max_epochs");
    hp.patience = parse_u64(expect_value(c, "patience"), "patience");
    hp.d_emb = parse_u64(expect_value(c, "d_emb"), "d_emb");
    hp.d_lstm = parse_u64(expect_value(c, "d_lstm"), "d_lstm");
    std::string uc = expect_value(c, "use_char");
    if (uc != "0" && uc != "1") throw ConfigError("model archive: bad use_char '" + uc + "'");
    hp.use_char = uc == "1";
    hp.d_char = parse_u64(expect_value(c, "d_char"), "d_char");
    hp.mu_default = parse_double(expect_value(c, "mu_default"), "mu_default");
    std::string policy = expect_value(c, "bandwidth_policy");
    if (policy == "median")
        hp.bandwidth_policy = MmdConfig::Bandwidth::median;
    else if (policy == "fixed")
        hp.bandwidth_policy = MmdConfig::Bandwidth::fixed;
    else
        throw ConfigError("model archive: bad bandwidth_policy '" + policy + "'");
    hp.fixed_bandwidth = parse_double(expect_value(c, "fixed_bandwidth"), "fixed_bandwidth");
    std::size_t mu_count = parse_u64(expect_value(c, "mu_overrides"), "mu_overrides");
    for (std::size_t i = 0; i < mu_count; ++i) {
        auto [tag, value] = split_once(c.line(), "mu override");
        hp.mu_by_tag[tag] = parse_double(value, "mu override");
    }

    std::vector<std::string> types_s = read_list(c, "scheme_source");
    std::vector<std::string> types_t = read_list(c, "scheme_target");
    if (types_s != types_t)
        throw ConfigError("model archive: source and target schemes differ; shared-scheme models "
                          "are the only supported layout");
    a.scheme = LabelScheme::from_types(types_s);

    std::size_t map_count = parse_u64(expect_value(c, "label_map"), "label_map");
    for (std::size_t i = 0; i < map_count; ++i) {
        auto [src, tgt] = split_once(c.line(), "label map");
        a.label_map.emplace_back(src, tgt);
    }

    std::vector<std::string> vocab = read_list(c, "vocab");
    std::vector<std::string> char_vocab = read_list(c, "char_vocab");
    if (vocab.size() < 2 || vocab[0] != kPadToken || vocab[1] != kUnkToken)
        throw ConfigError("model archive: vocabulary must start with the pad and unk tokens");
    if (!hp.use_char && !char_vocab.empty())
        throw ConfigError("model archive: char vocabulary present without use_char");
    if (hp.use_char &&
        (char_vocab.size() < 2 || char_vocab[0] != kPadToken || char_vocab[1] != kUnkToken))
        throw ConfigError("model archive: char vocabulary must start with the pad and unk tokens");

    Hyperparams check = hp;
    normalize_hyperparams(check);

    EncoderParams& enc = a.model.encoder;
    enc.use_char = hp.use_char;
    auto build_table = [](EmbeddingTable& table, std::vector<std::string> tokens,
                          std::size_t dim) {
        table.index_to_token = std::move(tokens);
        table.d_emb = dim;
        for (std::size_t i = 0; i < table.index_to_token.size(); ++i)
            if (!table.token_to_index.emplace(table.index_to_token[i], i).second)
                throw ConfigError("model archive: duplicate vocabulary entry '" +
                                  table.index_to_token[i] + "'");
    };
    build_table(enc.embeddings, std::move(vocab), hp.d_emb);
    if (hp.use_char) build_table(enc.char_embeddings, std::move(char_vocab), hp.d_char);

    const std::size_t m = a.scheme.size();
    const std::size_t d_in = hp.d_emb + (hp.use_char ? 2 * hp.d_char : 0);
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> expected;
    auto lstm_shapes = [&expected](const std::string& prefix, std::size_t d_in_dim,
                                   std::size_t d) {
        for (const char* dir : {"fwd", "bwd"}) {
            expected.push_back({prefix + "_" + dir + "_wx", {4 * d, d_in_dim}});
            expected.push_back({prefix + "_" + dir + "_wh", {4 * d, d}});
            expected.push_back({prefix + "_" + dir + "_b", {1, 4 * d}});
        }
    };
    expected.push_back({"embeddings", {enc.embeddings.index_to_token.size(), hp.d_emb}});
    lstm_shapes("word", d_in, hp.d_lstm);
    if (hp.use_char) {
        expected.push_back(
            {"char_embeddings", {enc.char_embeddings.index_to_token.size(), hp.d_char}});
        lstm_shapes("char", hp.d_char, hp.d_char);
    }
    expected.push_back({"source_w", {2 * hp.d_lstm, m}});
    expected.push_back({"source_a", {m, m}});
    expected.push_back({"target_w", {2 * hp.d_lstm, m}});
    expected.push_back({"target_a", {m, m}});

    std::size_t tensor_count = parse_u64(expect_value(c, "tensors"), "tensors");
    if (tensor_count != expected.size())
        throw ConfigError("model archive: tensor count does not match the declared layout");
    std::vector<Matrix> tensors;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < tensor_count; ++i) {
        std::string l = c.line();
        auto [name, rest] = split_once(l, "tensor manifest");
        auto [rows_str, rest2] = split_once(rest, "tensor manifest");
        auto [cols_str, off_str] = split_once(rest2, "tensor manifest");
        std::size_t rows = parse_u64(rows_str, "tensor rows");
        std::size_t cols = parse_u64(cols_str, "tensor cols");
        std::size_t off = parse_u64(off_str, "tensor offset");
        if (name != expected[i].first || rows != expected[i].second.first ||
            cols != expected[i].second.second)
            throw ConfigError("model archive: tensor '" + name +
                              "' does not match the declared dimensions");
        if (off != offset)
            throw ConfigError("model archive: tensor '" + name + "' has a wrong byte offset");
        tensors.emplace_back(rows, cols);
        offset += rows * cols * 8;
    }
    std::size_t blob_bytes = parse_u64(expect_value(c, "blob"), "blob");
    if (blob_bytes != offset) throw ConfigError("model archive: blob size mismatch");
    if (text.size() - c.pos != blob_bytes)
        throw ConfigError("model archive: blob is truncated or has trailing bytes");
    const char* p = text.data() + c.pos;
    for (Matrix& t : tensors)
        for (double& v : t.data) {
            v = read_f64(p);
            p += 8;
        }

    std::size_t idx = 0;
    enc.embeddings.vectors = std::move(tensors[idx++]);
    for (Matrix* dst : {&enc.word_lstm.fwd.wx, &enc.word_lstm.fwd.wh, &enc.word_lstm.fwd.b,
                        &enc.word_lstm.bwd.wx, &enc.word_lstm.bwd.wh, &enc.word_lstm.bwd.b})
        *dst = std::move(tensors[idx++]);
    if (hp.use_char) {
        enc.char_embeddings.vectors = std::move(tensors[idx++]);
        for (Matrix* dst : {&enc.char_lstm.fwd.wx, &enc.char_lstm.fwd.wh, &enc.char_lstm.fwd.b,
                            &enc.char_lstm.bwd.wx, &enc.char_lstm.bwd.wh, &enc.char_lstm.bwd.b})
            *dst = std::move(tensors[idx++]);
    }
    a.model.source_head.w = std::move(tensors[idx++]);
    a.model.source_head.a = std::move(tensors[idx++]);
    a.model.target_head.w = std::move(tensors[idx++]);
    a.model.target_head.a = std::move(tensors[idx++]);
    return a;
}

std::string save_record(const TrainRecord& record, Mode mode) {
    std::string out = "latk-record 1\n";
    out += "mode " + mode_name(mode) + "\n";
    out += "seed " + std::to_string(record.seed) + "\n";
    out += "best_epoch " + std::to_string(record.best_epoch + 1) + "\n";
    out += "epochs " + std::to_string(record.epochs.size()) + "\n";
    char line[256];
    for (std::size_t i = 0; i < record.epochs.size(); ++i) {
        const EpochRecord& e = record.epochs[i];
        std::snprintf(line, sizeof line, "%zu %.17g %.17g %.17g %.17g %.17g %.17g\n", i + 1,
                      e.loss.l_c, e.loss.l_lammd, e.loss.l_p, e.loss.l_r, e.loss.total, e.dev_f1);
        out += line;
    }
    return out;
}

}  // namespace latk
