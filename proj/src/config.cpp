#include "latk/config.hpp"

#include <cstdlib>
#include <set>
#include <string>

#include "latk/error.hpp"

namespace latk {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (s.empty() || end != begin + s.size())
        throw ConfigError("config key '" + key + "': bad number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    unsigned long long v = std::strtoull(begin, &end, 10);
    if (s.empty() || s[0] == '-' || end != begin + s.size())
        throw ConfigError("config key '" + key + "': bad count '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("config key '" + key + "': bad flag '" + s + "'");
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    Hyperparams& hp = config.hp;
    if (value.empty()) throw ConfigError("config key '" + key + "': empty value");
    if (key == "mode") {
        hp.mode = parse_mode(value);
    } else if (key == "alpha") {
        hp.alpha = parse_double(key, value);
    } else if (key == "beta") {
        hp.beta = parse_double(key, value);
    } else if (key == "gamma") {
        hp.gamma = parse_double(key, value);
    } else if (key == "epsilon") {
        hp.epsilon = parse_double(key, value);
    } else if (key == "learning_rate") {
        hp.learning_rate = parse_double(key, value);
    } else if (key == "batch_source") {
        hp.batch_source = parse_u64(key, value);
    } else if (key == "batch_target") {
        hp.batch_target = parse_u64(key, value);
    } else if (key == "max_epochs") {
        hp.max_epochs = parse_u64(key, value);
    } else if (key == "patience") {
        hp.patience = parse_u64(key, value);
    } else if (key == "d_emb") {
        hp.d_emb = parse_u64(key, value);
    } else if (key == "d_lstm") {
        hp.d_lstm = parse_u64(key, value);
    } else if (key == "use_char") {
        hp.use_char = parse_bool(key, value);
    } else if (key == "d_char") {
        hp.d_char = parse_u64(key, value);
    } else if (key == "seed") {
        hp.seed = parse_u64(key, value);
    } else if (key == "mu_default") {
        hp.mu_default = parse_double(key, value);
    } else if (key == "bandwidth_policy") {
        if (value == "median")
            hp.bandwidth_policy = MmdConfig::Bandwidth::median;
        else if (value == "fixed")
            hp.bandwidth_policy = MmdConfig::Bandwidth::fixed;
        else
            throw ConfigError("config key 'bandwidth_policy': expected median or fixed, got '" +
                              value + "'");
    } else if (key == "fixed_bandwidth") {
        hp.fixed_bandwidth = parse_double(key, value);
    } else if (key.rfind("mu.", 0) == 0) {
        std::string tag = key.substr(3);
        if (tag.empty()) throw ConfigError("config key 'mu.': missing tag");
        hp.mu_by_tag[tag] = parse_double(key, value);
    } else if (key == "threads") {
        config.threads = parse_u64(key, value);
        if (config.threads == 0) throw ConfigError("config key 'threads': must be positive");
    } else if (key == "source_train") {
        config.source_train = value;
    } else if (key == "target_train") {
        config.target_train = value;
    } else if (key == "target_dev") {
        config.target_dev = value;
    } else if (key == "target_test") {
        config.target_test = value;
    } else if (key == "embeddings") {
        config.embeddings = value;
    } else if (key == "scheme") {
        config.scheme = value;
    } else if (key == "label_map") {
        config.label_map = value;
    } else if (key == "model_out") {
        config.model_out = value;
    } else if (key == "record_out") {
        config.record_out = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    std::set<std::string> seen;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string raw = nl == std::string::npos ? text.substr(pos)
                                                  : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

}  // namespace latk
