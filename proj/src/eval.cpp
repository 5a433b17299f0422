#include "latk/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "latk/error.hpp"
#include "latk/rng.hpp"

namespace latk {

namespace {

struct SpanCounts {
    std::size_t tp = 0, pred = 0, gold = 0;
};

void fill_rates(std::size_t tp, std::size_t pred, std::size_t gold, double& precision,
                double& recall, double& f1) {
    precision = pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred);
    recall = gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold);
    f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

// tp/pred/gold per type for one sentence, accumulated into `by_type`
void count_sentence(const LabeledSentence& gold_sentence, const std::vector<std::string>& pred,
                    std::map<std::string, SpanCounts>& by_type) {
    if (pred.size() != gold_sentence.tokens.size())
        throw UsageError("prediction length differs from gold sentence length");
    std::vector<Span> gold_spans = extract_spans(gold_sentence.labels);
    std::vector<Span> pred_spans = extract_spans_lenient(pred);
    std::sort(gold_spans.begin(), gold_spans.end());
    for (const Span& s : gold_spans) by_type[s.type].gold += 1;
    for (const Span& s : pred_spans) {
        SpanCounts& c = by_type[s.type];
        c.pred += 1;
        if (std::binary_search(gold_spans.begin(), gold_spans.end(), s)) c.tp += 1;
    }
}

}  // namespace

F1Report span_f1(const std::vector<LabeledSentence>& gold,
                 const std::vector<std::vector<std::string>>& pred) {
    if (gold.size() != pred.size())
        throw UsageError("prediction corpus and gold corpus have different sentence counts");
    std::map<std::string, SpanCounts> by_type;
    for (std::size_t i = 0; i < gold.size(); ++i) count_sentence(gold[i], pred[i], by_type);

    F1Report report;
    for (const auto& [type, c] : by_type) {
        F1Report::TypeRow row;
        row.type = type;
        row.true_positive = c.tp;
        row.predicted_count = c.pred;
        row.gold_count = c.gold;
        fill_rates(c.tp, c.pred, c.gold, row.precision, row.recall, row.f1);
        report.per_type.push_back(std::move(row));
        report.true_positive += c.tp;
        report.predicted_count += c.pred;
        report.gold_count += c.gold;
    }
    fill_rates(report.true_positive, report.predicted_count, report.gold_count, report.precision,
               report.recall, report.f1);
    return report;
}

std::string render_report(const F1Report& report, bool with_types) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "precision recall f1 tp pred gold\n%.4f %.4f %.4f %zu %zu %zu\n",
                  report.precision, report.recall, report.f1, report.true_positive,
                  report.predicted_count, report.gold_count);
    std::string out = buf;
    if (with_types) {
        for (const auto& row : report.per_type) {
            std::snprintf(buf, sizeof(buf), "%s %.4f %.4f %.4f\n", row.type.c_str(),
                          row.precision, row.recall, row.f1);
            out += buf;
        }
    }
    return out;
}

std::vector<double> per_sentence_f1(const std::vector<LabeledSentence>& gold,
                                    const std::vector<std::vector<std::string>>& pred) {
    if (gold.size() != pred.size())
        throw UsageError("prediction corpus and gold corpus have different sentence counts");
    std::vector<double> scores;
    scores.reserve(gold.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::map<std::string, SpanCounts> by_type;
        count_sentence(gold[i], pred[i], by_type);
        std::size_t tp = 0, np = 0, ng = 0;
        for (const auto& [type, c] : by_type) {
            (void)type;
            tp += c.tp;
            np += c.pred;
            ng += c.gold;
        }
        if (np == 0 && ng == 0) {
            scores.push_back(1.0);
            continue;
        }
        double p, r, f;
        fill_rates(tp, np, ng, p, r, f);
        scores.push_back(f);
    }
    return scores;
}

double randomization_test(const std::vector<double>& a, const std::vector<double>& b,
                          std::size_t iterations, std::uint64_t seed) {
    if (a.size() != b.size()) throw UsageError("paired score lists differ in length");
    if (a.size() < 2) throw UsageError("randomization test needs at least 2 pairs");
    if (iterations < 1000) throw UsageError("randomization test needs at least 1000 iterations");

    const double n = static_cast<double>(a.size());
    std::vector<double> diff(a.size());
    double observed = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
        observed += diff[i];
    }
    observed = std::fabs(observed / n);

    Rng rng(seed);
    std::size_t at_least = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
        double sum = 0.0;
        for (double d : diff) sum += rng.uniform_index(2) == 0 ? d : -d;
        if (std::fabs(sum / n) >= observed) ++at_least;
    }
    return static_cast<double>(1 + at_least) / static_cast<double>(1 + iterations);
}

}  // namespace latk
