#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "latk/archive.hpp"
#include "latk/config.hpp"
#include "latk/corpus.hpp"
#include "latk/error.hpp"
#include "latk/eval.hpp"
#include "latk/synth.hpp"
#include "latk/trainer.hpp"
#include "latk/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw latk::IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw latk::IoError("failed while reading '" + path + "'");
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw latk::IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out.good()) throw latk::IoError("failed while writing '" + path + "'");
}

void require_readable(const std::string& what, const std::string& path) {
    if (!std::filesystem::exists(path))
        throw latk::ConfigError(what + " path does not exist: '" + path + "'");
}

struct GenSynthArgs {
    std::uint64_t seed = 1;
    std::string out_dir;
    std::size_t n_source = 200;
    std::size_t n_target = 40;
    std::size_t n_test = 0;
    std::size_t n_types = 3;
    std::size_t vocab_size = 120;
    double shift_strength = 0.4;
    double target_dev_frac = 0.25;
};

int cmd_gen_synth(const GenSynthArgs& args) {
    if (args.n_target == 0) throw latk::ConfigError("--n-target must be positive");
    if (args.target_dev_frac < 0.0 || args.target_dev_frac >= 1.0)
        throw latk::ConfigError("--target-dev-frac must lie in [0, 1)");
    std::size_t n_dev =
        static_cast<std::size_t>(static_cast<double>(args.n_target) * args.target_dev_frac + 0.5);
    std::size_t n_train = args.n_target - n_dev;

    latk::SynthSpec spec;
    spec.n_source = args.n_source;
    spec.n_target = args.n_target + args.n_test;
    spec.n_types = args.n_types;
    spec.vocab_size = args.vocab_size;
    spec.shift_strength = args.shift_strength;
    latk::SynthResult result = latk::gen_synthetic(args.seed, spec);

    std::filesystem::create_directories(args.out_dir);
    auto slice = [&](std::size_t begin, std::size_t end) {
        return std::vector<latk::LabeledSentence>(result.target.begin() + begin,
                                                  result.target.begin() + end);
    };
    auto emit = [&](const std::string& name, const std::vector<latk::LabeledSentence>& corpus) {
        std::string path = (std::filesystem::path(args.out_dir) / name).string();
        write_file(path, result.header_comment + latk::serialize_column(corpus));
        std::printf("# wrote %s (%zu sentences)\n", path.c_str(), corpus.size());
    };
    std::printf("# seed %llu\n", static_cast<unsigned long long>(args.seed));
    std::printf("# n_source %zu n_target %zu n_test %zu n_types %zu vocab_size %zu "
                "shift_strength %.17g target_dev_frac %.17g\n",
                args.n_source, args.n_target, args.n_test, args.n_types, args.vocab_size,
                args.shift_strength, args.target_dev_frac);
    emit("source_train.tsv", result.source);
    emit("target_train.tsv", slice(0, n_train));
    emit("target_dev.tsv", slice(n_train, args.n_target));
    emit("target_test.tsv", slice(args.n_target, args.n_target + args.n_test));
    std::string scheme_path = (std::filesystem::path(args.out_dir) / "scheme.txt").string();
    write_file(scheme_path, latk::serialize_scheme(result.scheme));
    std::printf("# wrote %s\n", scheme_path.c_str());
    return 0;
}

int cmd_train(latk::RunConfig cfg) {
    if (cfg.target_train.empty()) throw latk::ConfigError("target_train is required");
    if (cfg.target_dev.empty()) throw latk::ConfigError("target_dev is required");
    if (cfg.scheme.empty()) throw latk::ConfigError("scheme is required");
    if (cfg.model_out.empty()) throw latk::ConfigError("model_out is required");
    const bool use_source = cfg.hp.mode != latk::Mode::non_transfer;
    if (use_source && cfg.source_train.empty())
        throw latk::ConfigError("source_train is required in transfer modes");
    if (!use_source && !cfg.source_train.empty())
        std::fprintf(stderr, "warning: mode non_transfer ignores source_train\n");

    for (const std::string& warning : latk::normalize_hyperparams(cfg.hp))
        std::fprintf(stderr, "warning: %s\n", warning.c_str());

    require_readable("scheme", cfg.scheme);
    require_readable("target_train", cfg.target_train);
    require_readable("target_dev", cfg.target_dev);
    if (use_source) require_readable("source_train", cfg.source_train);
    if (!cfg.embeddings.empty()) require_readable("embeddings", cfg.embeddings);
    if (!cfg.label_map.empty()) require_readable("label_map", cfg.label_map);

    latk::LabelScheme scheme = latk::parse_scheme_file(read_file(cfg.scheme));
    std::vector<latk::LabeledSentence> source_train;
    if (use_source)
        source_train =
            latk::parse_column_file(read_file(cfg.source_train), scheme, latk::Domain::source);
    std::vector<latk::LabeledSentence> target_train =
        latk::parse_column_file(read_file(cfg.target_train), scheme, latk::Domain::target);
    std::vector<latk::LabeledSentence> target_dev =
        latk::parse_column_file(read_file(cfg.target_dev), scheme, latk::Domain::target);
    std::string embedding_text = cfg.embeddings.empty() ? "" : read_file(cfg.embeddings);

    std::vector<std::pair<std::string, std::string>> map_tags;
    std::vector<std::pair<std::size_t, std::size_t>> map_indices;
    if (!cfg.label_map.empty()) {
        latk::LabelMap map =
            latk::build_label_map(scheme, scheme, latk::parse_map_file(read_file(cfg.label_map)));
        map_tags = map.tag_pairs;
        for (const auto& [src, tgt] : map.tag_pairs)
            map_indices.emplace_back(scheme.index_of(src), scheme.index_of(tgt));
    }

    std::printf("# seed %llu\n", static_cast<unsigned long long>(cfg.hp.seed));
    std::printf("# mode %s\n", latk::mode_name(cfg.hp.mode).c_str());
    std::fflush(stdout);
    latk::TrainResult result =
        latk::train(cfg.hp, source_train, target_train, target_dev, scheme, embedding_text,
                    &std::cout, map_indices.empty() ? nullptr : &map_indices, cfg.threads);

    latk::ModelArchive archive{cfg.hp, scheme, map_tags, std::move(result.model)};
    write_file(cfg.model_out, latk::save_archive(archive));
    std::string record_path =
        cfg.record_out.empty() ? cfg.model_out + ".record" : cfg.record_out;
    write_file(record_path, latk::save_record(result.record, cfg.hp.mode));
    std::printf("# best_epoch %zu dev_f1 %.17g\n", result.record.best_epoch + 1,
                result.record.epochs[result.record.best_epoch].dev_f1);
    std::printf("# wrote %s\n", cfg.model_out.c_str());
    std::printf("# wrote %s\n", record_path.c_str());
    return 0;
}

struct EvaluateArgs {
    std::string model;
    std::string test;
    std::string model_b;
    std::size_t iterations = 10000;
    std::uint64_t seed = 1;
};

int cmd_evaluate(const EvaluateArgs& args) {
    require_readable("model", args.model);
    require_readable("test", args.test);
    latk::ModelArchive a = latk::load_archive(read_file(args.model));
    std::vector<latk::LabeledSentence> corpus =
        latk::parse_column_file(read_file(args.test), a.scheme, latk::Domain::target);

    auto decode = [&](const latk::ModelArchive& archive) {
        std::vector<std::vector<std::string>> predictions;
        predictions.reserve(corpus.size());
        for (const auto& s : corpus)
            predictions.push_back(
                latk::predict_labels(archive.model, archive.scheme, s.tokens,
                                     latk::Domain::target));
        return predictions;
    };

    std::printf("# seed %llu\n", static_cast<unsigned long long>(args.seed));
    std::vector<std::vector<std::string>> pred_a = decode(a);
    std::printf("# model %s\n", args.model.c_str());
    std::fputs(latk::render_report(latk::span_f1(corpus, pred_a)).c_str(), stdout);

    if (!args.model_b.empty()) {
        require_readable("model", args.model_b);
        latk::ModelArchive b = latk::load_archive(read_file(args.model_b));
        if (b.scheme.tags != a.scheme.tags)
            throw latk::ConfigError("the two models were trained with different label schemes");
        std::vector<std::vector<std::string>> pred_b = decode(b);
        std::printf("# model %s\n", args.model_b.c_str());
        std::fputs(latk::render_report(latk::span_f1(corpus, pred_b)).c_str(), stdout);
        double p = latk::randomization_test(latk::per_sentence_f1(corpus, pred_a),
                                            latk::per_sentence_f1(corpus, pred_b),
                                            args.iterations, args.seed);
        std::printf("p-value %.17g\n", p);
    }
    return 0;
}

struct VerifyArgs {
    bool gradcheck = false;
    bool bound = false;
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

int cmd_verify(const VerifyArgs& args) {
    if (!args.gradcheck && !args.bound)
        throw latk::ConfigError("verify needs --gradcheck and/or --bound");
    std::printf("# seed %llu\n", static_cast<unsigned long long>(args.seed));
    std::printf("# trials %zu\n", args.trials);
    if (args.trials == 0)
        std::fprintf(stderr, "warning: 0 trials requested; every check passes vacuously\n");
    std::fflush(stdout);
    bool ok = true;
    if (args.gradcheck) ok = latk::verify_gradcheck(args.trials, args.seed, std::cout,
                                                    args.threads) && ok;
    if (args.bound) ok = latk::verify_bound(args.trials, args.seed, std::cout) && ok;
    std::cout.flush();
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequence-labeling transfer toolkit"};
    app.require_subcommand(1);

    GenSynthArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen-synth", "generate a two-domain synthetic corpus");
    gen->add_option("--seed", gen_args.seed, "generator seed");
    gen->add_option("--out", gen_args.out_dir, "output directory")->required();
    gen->add_option("--n-source", gen_args.n_source, "source training sentences");
    gen->add_option("--n-target", gen_args.n_target, "target train+dev sentences");
    gen->add_option("--n-test", gen_args.n_test, "target test sentences");
    gen->add_option("--n-types", gen_args.n_types, "entity types");
    gen->add_option("--vocab-size", gen_args.vocab_size, "total vocabulary size");
    gen->add_option("--shift-strength", gen_args.shift_strength,
                    "context distribution shift in [0, 1]");
    gen->add_option("--target-dev-frac", gen_args.target_dev_frac,
                    "fraction of --n-target held out as dev");

    CLI::App* train = app.add_subcommand("train", "train a model from a run config");
    std::string config_path;
    train->add_option("--config", config_path, "key = value run config file");
    std::map<std::string, std::string> override_values;
    std::vector<std::pair<std::string, CLI::Option*>> override_options;
    auto add_override = [&](const std::string& flag, const std::string& key,
                            const std::string& desc) {
        override_options.emplace_back(key, train->add_option(flag, override_values[key], desc));
    };
    add_override("--mode", "mode", "la_dtl | la_mmd_only | crf_l2_only | vanilla_mmd_crf_l2 | "
                                   "non_transfer");
    add_override("--alpha", "alpha", "feature-transfer weight");
    add_override("--beta", "beta", "parameter-transfer weight");
    add_override("--gamma", "gamma", "weight decay");
    add_override("--epsilon", "epsilon", "source share of the likelihood term");
    add_override("--learning-rate", "learning_rate", "AdaGrad learning rate");
    add_override("--batch-source", "batch_source", "source sentences per batch");
    add_override("--batch-target", "batch_target", "target sentences per batch");
    add_override("--max-epochs", "max_epochs", "epoch cap");
    add_override("--patience", "patience", "early-stopping patience (0 disables)");
    add_override("--d-emb", "d_emb", "word embedding width");
    add_override("--d-lstm", "d_lstm", "LSTM width per direction");
    add_override("--use-char", "use_char", "true/false: char-level features");
    add_override("--d-char", "d_char", "char embedding and char LSTM width");
    add_override("--seed", "seed", "training seed");
    add_override("--mu-default", "mu_default", "default per-label MMD weight");
    add_override("--bandwidth-policy", "bandwidth_policy", "median | fixed");
    add_override("--fixed-bandwidth", "fixed_bandwidth", "kernel bandwidth for the fixed policy");
    add_override("--threads", "threads", "worker cap (1 keeps runs bit-reproducible)");
    add_override("--source-train", "source_train", "source training corpus");
    add_override("--target-train", "target_train", "target training corpus");
    add_override("--target-dev", "target_dev", "target dev corpus");
    add_override("--target-test", "target_test", "target test corpus (recorded only)");
    add_override("--embeddings", "embeddings", "pretrained embedding file");
    add_override("--scheme", "scheme", "label scheme file");
    add_override("--label-map", "label_map", "matched entity-type file");
    add_override("--model-out", "model_out", "model archive output path");
    add_override("--record-out", "record_out", "train record output path");
    std::vector<std::string> mu_flags;
    train->add_option("--mu", mu_flags, "TAG=WEIGHT per-tag MMD weight (repeatable)");

    EvaluateArgs eval_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a model archive on a corpus");
    evaluate->add_option("--model", eval_args.model, "model archive")->required();
    evaluate->add_option("--test", eval_args.test, "labeled corpus to score")->required();
    evaluate->add_option("--model-b", eval_args.model_b,
                         "second archive for a paired significance test");
    evaluate->add_option("--iterations", eval_args.iterations, "randomization-test resamples");
    evaluate->add_option("--seed", eval_args.seed, "randomization-test seed");

    VerifyArgs verify_args;
    CLI::App* verify = app.add_subcommand("verify", "numerical self-checks");
    verify->add_flag("--gradcheck", verify_args.gradcheck,
                     "finite-difference gradient checks per component");
    verify->add_flag("--bound", verify_args.bound,
                     "sequence-distribution divergence certificates");
    verify->add_option("--trials", verify_args.trials, "random instances per check");
    verify->add_option("--seed", verify_args.seed, "instance seed");
    verify->add_option("--threads", verify_args.threads, "worker cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_synth(gen_args);
        if (train->parsed()) {
            latk::RunConfig cfg;
            if (!config_path.empty()) {
                require_readable("config", config_path);
                cfg = latk::parse_run_config(read_file(config_path));
            }
            for (const auto& [key, option] : override_options)
                if (option->count() > 0) latk::apply_setting(cfg, key, override_values[key]);
            for (const std::string& entry : mu_flags) {
                std::size_t eq = entry.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
                    throw latk::ConfigError("--mu expects TAG=WEIGHT, got '" + entry + "'");
                latk::apply_setting(cfg, "mu." + entry.substr(0, eq), entry.substr(eq + 1));
            }
            return cmd_train(std::move(cfg));
        }
        if (evaluate->parsed()) return cmd_evaluate(eval_args);
        if (verify->parsed()) return cmd_verify(verify_args);
    } catch (const latk::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
