#include "latk/synth.hpp"

#include <sstream>

#include "latk/error.hpp"
#include "latk/rng.hpp"

namespace latk {

namespace {

// Generator shape constants. Entities are optionally announced by a
// type-specific trigger token, and entity surface tokens also show up as
// plain context with label O, so token identity alone cannot solve the
// task; resolving the ambiguity needs the surrounding context.
constexpr std::size_t kMinLen = 5;
constexpr std::size_t kMaxLen = 15;
constexpr double kEntityProb = 0.22;
constexpr double kTriggerProb = 0.7;
constexpr double kAmbiguousProb = 0.10;
constexpr std::size_t kTriggersPerType = 3;
constexpr std::size_t kMaxEntityLen = 3;

struct Layout {
    std::size_t per_type;   // entity lexicon size per type
    std::size_t n_context;  // domain-shifted context vocabulary size
    std::size_t half_a;     // context words [0, half_a) form half A
};

Layout make_layout(const SynthSpec& spec) {
    Layout lay;
    lay.per_type = std::max<std::size_t>(4, spec.vocab_size / 3 / spec.n_types);
    std::size_t reserved = lay.per_type * spec.n_types + kTriggersPerType * spec.n_types;
    if (spec.vocab_size <= reserved + 1)
        throw ParamError("gen_synthetic: vocab_size too small for " +
                         std::to_string(spec.n_types) + " types");
    lay.n_context = spec.vocab_size - reserved;
    lay.half_a = (lay.n_context + 1) / 2;
    return lay;
}

std::string context_word(std::size_t idx) { return "w" + std::to_string(idx); }

std::string entity_token(std::size_t type, std::size_t idx) {
    return "e" + std::to_string(type + 1) + "_" + std::to_string(idx);
}

std::string trigger_token(std::size_t type, std::size_t k) {
    return "t" + std::to_string(type + 1) + "_" + std::to_string(k);
}

std::size_t draw_context_index(Rng& rng, const Layout& lay, double p_half_a) {
    if (rng.uniform() < p_half_a) return rng.uniform_index(lay.half_a);
    std::size_t b = lay.n_context - lay.half_a;
    return b == 0 ? rng.uniform_index(lay.half_a) : lay.half_a + rng.uniform_index(b);
}

LabeledSentence gen_sentence(Rng& rng, const SynthSpec& spec, const Layout& lay,
                             const LabelScheme& scheme, double p_half_a, Domain domain) {
    LabeledSentence s;
    s.domain = domain;
    std::size_t len = kMinLen + rng.uniform_index(kMaxLen - kMinLen + 1);
    while (s.tokens.size() < len) {
        std::size_t left = len - s.tokens.size();
        if (rng.uniform() < kEntityProb) {
            std::size_t type = rng.uniform_index(spec.n_types);
            if (left >= 2 && rng.uniform() < kTriggerProb) {
                s.tokens.push_back(trigger_token(type, rng.uniform_index(kTriggersPerType)));
                s.labels.push_back("O");
                --left;
            }
            std::size_t ent_len = std::min(left, 1 + rng.uniform_index(kMaxEntityLen));
            for (std::size_t j = 0; j < ent_len; ++j)
                s.tokens.push_back(entity_token(type, rng.uniform_index(lay.per_type)));
            if (ent_len == 1) {
                s.labels.push_back("S-" + scheme.entity_types[type]);
            } else {
                s.labels.push_back("B-" + scheme.entity_types[type]);
                for (std::size_t j = 1; j + 1 < ent_len; ++j)
                    s.labels.push_back("I-" + scheme.entity_types[type]);
                s.labels.push_back("E-" + scheme.entity_types[type]);
            }
        } else if (rng.uniform() < kAmbiguousProb) {
            std::size_t type = rng.uniform_index(spec.n_types);
            s.tokens.push_back(entity_token(type, rng.uniform_index(lay.per_type)));
            s.labels.push_back("O");
        } else {
            s.tokens.push_back(context_word(draw_context_index(rng, lay, p_half_a)));
            s.labels.push_back("O");
        }
    }
    return s;
}

}  // namespace

SynthResult gen_synthetic(std::uint64_t seed, const SynthSpec& spec) {
    if (spec.n_source == 0 || spec.n_target == 0)
        throw ParamError("gen_synthetic: sentence counts must be positive");
    if (spec.n_types == 0) throw ParamError("gen_synthetic: n_types must be positive");
    if (!(spec.shift_strength >= 0.0 && spec.shift_strength <= 1.0))
        throw ParamError("gen_synthetic: shift_strength must lie in [0,1]");
    Layout lay = make_layout(spec);

    SynthResult res;
    std::vector<std::string> types;
    for (std::size_t t = 0; t < spec.n_types; ++t) types.push_back("T" + std::to_string(t + 1));
    res.scheme = LabelScheme::from_types(types);

    double p_a_source = (1.0 + spec.shift_strength) / 2.0;
    double p_a_target = (1.0 - spec.shift_strength) / 2.0;

    Rng master(seed);
    Rng src_rng = master.substream("synth/source");
    Rng tgt_rng = master.substream("synth/target");
    for (std::size_t i = 0; i < spec.n_source; ++i)
        res.source.push_back(
            gen_sentence(src_rng, spec, lay, res.scheme, p_a_source, Domain::source));
    for (std::size_t i = 0; i < spec.n_target; ++i)
        res.target.push_back(
            gen_sentence(tgt_rng, spec, lay, res.scheme, p_a_target, Domain::target));

    std::ostringstream h;
    h << "# synthetic two-domain sequence labeling corpus\n"
      << "# seed=" << seed << " n_source=" << spec.n_source << " n_target=" << spec.n_target
      << " n_types=" << spec.n_types << " vocab_size=" << spec.vocab_size
      << " shift_strength=" << spec.shift_strength << "\n"
      << "# vocabulary: per type, " << lay.per_type << " entity tokens (e<type>_<i>) and "
      << kTriggersPerType << " trigger tokens (t<type>_<k>), both shared across domains; "
      << lay.n_context << " domain-shifted context words (w<i>)\n"
      << "# process: sentence length uniform " << kMinLen << ".." << kMaxLen
      << "; each step opens an entity with p=" << kEntityProb
      << " (type uniform, length 1.." << kMaxEntityLen << ", gold BIOES tags, preceded by a"
      << " type trigger with p=" << kTriggerProb << ")\n"
      << "# otherwise emits an O token: an ambiguous entity-lexicon token with p="
      << kAmbiguousProb << ", else a context word from vocabulary half A with p=(1+/-shift)/2"
      << " (+ source, - target), uniform inside the half\n";
    res.header_comment = h.str();
    return res;
}

}  // namespace latk
