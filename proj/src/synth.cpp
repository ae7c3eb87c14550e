#include "tbvec/synth.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tbvec/util.hpp"

namespace tbvec {

SynthSpec default_synth_spec() {
    SynthSpec spec;
    const Convention a{true, false, "amod"};
    const Convention b{false, false, "amod"};
    const Convention c{true, true, "mod"};
    spec.treebanks.push_back({"synthA", {a}, false});
    spec.treebanks.push_back({"synthB", {b}, false});
    spec.treebanks.push_back({"synthC", {c}, false});
    spec.treebanks.push_back({"synthD", {a, b, c}, true});
    return spec;
}

SynthSpec control_synth_spec() {
    SynthSpec spec = default_synth_spec();
    const Convention shared{true, false, "amod"};
    for (SynthTreebankSpec& tb : spec.treebanks) {
        tb.conventions.assign(tb.out_of_domain ? 3 : 1, shared);
    }
    return spec;
}

namespace {

Convention parse_convention(const std::string& text) {
    Convention conv;
    for (const std::string& part : split(text, ',')) {
        const std::vector<std::string> kv = split(part, '=');
        if (kv.size() != 2) throw std::invalid_argument("bad convention item: " + part);
        if (kv[0] == "particle") {
            if (kv[1] != "verb" && kv[1] != "noun")
                throw std::invalid_argument("particle must attach to verb or noun");
            conv.particle_to_verb = kv[1] == "verb";
        } else if (kv[0] == "adp") {
            if (kv[1] != "verb" && kv[1] != "noun")
                throw std::invalid_argument("adp must attach to verb or noun");
            conv.adp_to_verb = kv[1] == "verb";
        } else if (kv[0] == "adj") {
            if (kv[1].empty()) throw std::invalid_argument("empty adj label");
            conv.adj_label = kv[1];
        } else {
            throw std::invalid_argument("unknown convention key: " + kv[0]);
        }
    }
    return conv;
}

std::string format_convention(const Convention& c) {
    std::string out = "particle=";
    out += c.particle_to_verb ? "verb" : "noun";
    out += ",adp=";
    out += c.adp_to_verb ? "verb" : "noun";
    out += ",adj=" + c.adj_label;
    return out;
}

void validate_spec(const SynthSpec& spec) {
    if (spec.train_size < 1 || spec.dev_size < 1 || spec.test_size < 1)
        throw std::invalid_argument("split sizes must be positive");
    if (spec.shared_nouns < 1 || spec.shared_verbs < 1 || spec.shared_adjs < 1)
        throw std::invalid_argument("shared vocabulary sizes must be positive");
    if (spec.treebanks.empty()) throw std::invalid_argument("spec has no treebanks");
    std::set<std::string> names;
    for (const SynthTreebankSpec& tb : spec.treebanks) {
        if (tb.name.empty()) throw std::invalid_argument("treebank with empty name");
        if (!names.insert(tb.name).second)
            throw std::invalid_argument("duplicate treebank name: " + tb.name);
        if (tb.conventions.empty())
            throw std::invalid_argument("treebank " + tb.name + " has no conventions");
    }
}

const char* kConsonants = "bdfgklmnprstvz";
const char* kVowels = "aeiou";

std::string make_word(std::mt19937_64& rng, std::set<std::string>& used) {
    for (;;) {
        std::string w;
        const int syllables = 2 + static_cast<int>(rng() % 2);
        for (int s = 0; s < syllables; ++s) {
            w += kConsonants[rng() % 14];
            w += kVowels[rng() % 5];
        }
        if (used.insert(w).second) return w;
    }
}

std::vector<std::string> make_words(std::mt19937_64& rng, int count,
                                    std::set<std::string>& used) {
    std::vector<std::string> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(make_word(rng, used));
    return out;
}

struct Lexicon {
    std::vector<std::string> nouns, verbs, adjs;  // shared + treebank-specific merged
};

Token make_token(int index, const std::string& form, const std::string& upos, int head,
                 const std::string& deprel) {
    Token t;
    t.index = index;
    t.form = form;
    t.upos = upos;
    t.head = head;
    t.deprel = deprel;
    return t;
}

const std::vector<std::string> kDets = {"ta", "tu"};
const std::vector<std::string> kParts = {"po", "ka"};
const std::vector<std::string> kAdps = {"en", "su"};

Sentence make_sentence(std::mt19937_64& rng, const Lexicon& shared, const Lexicon& specific,
                       const Convention& conv) {
    auto chance = [&rng](int percent) { return static_cast<int>(rng() % 100) < percent; };
    auto pick = [&rng](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
    auto pick_word = [&](const std::vector<std::string>& sh, const std::vector<std::string>& sp) {
        return (!sp.empty() && chance(35)) ? pick(sp) : pick(sh);
    };

    // layout: [det] [adj] NOUN  VERB  [PART]  [det] [adj] NOUN  [ADP NOUN]
    struct Slot {
        std::string form, upos, deprel;
        int head_slot;  // index into slots, -1 = root
    };
    std::vector<Slot> slots;
    auto np = [&](const std::string& role) {
        const int det = chance(60) ? 1 : 0;
        const int adj = chance(40) ? 1 : 0;
        const int noun_slot = static_cast<int>(slots.size()) + det + adj;
        if (det) slots.push_back({pick(kDets), "DET", "det", noun_slot});
        if (adj)
            slots.push_back({pick_word(shared.adjs, specific.adjs), "ADJ", conv.adj_label, noun_slot});
        slots.push_back({pick_word(shared.nouns, specific.nouns), "NOUN", role, -2});
        return noun_slot;
    };

    const int subj = np("nsubj");
    const int verb = static_cast<int>(slots.size());
    slots.push_back({pick_word(shared.verbs, specific.verbs), "VERB", "root", -1});
    slots[subj].head_slot = verb;
    int part = -1;
    if (chance(50)) {
        part = static_cast<int>(slots.size());
        slots.push_back({pick(kParts), "PART", "prt", verb});
    }
    const int obj = np("obj");
    slots[obj].head_slot = verb;
    if (part >= 0 && !conv.particle_to_verb) slots[part].head_slot = obj;
    if (chance(50)) {
        const int adp = static_cast<int>(slots.size());
        const int obl = adp + 1;
        if (conv.adp_to_verb) {
            slots.push_back({pick(kAdps), "ADP", "mark", verb});
            slots.push_back({pick_word(shared.nouns, specific.nouns), "NOUN", "pobj", adp});
        } else {
            slots.push_back({pick(kAdps), "ADP", "case", obl});
            slots.push_back({pick_word(shared.nouns, specific.nouns), "NOUN", "obl", verb});
        }
    }

    Sentence s;
    for (size_t i = 0; i < slots.size(); ++i) {
        const int head = slots[i].head_slot < 0 ? 0 : slots[i].head_slot + 1;
        s.tokens.push_back(
            make_token(static_cast<int>(i) + 1, slots[i].form, slots[i].upos, head, slots[i].deprel));
    }
    return s;
}

}  // namespace

std::vector<Treebank> generate_synthetic_suite(const SynthSpec& spec, uint64_t seed) {
    validate_spec(spec);
    std::mt19937_64 rng(seed);
    std::set<std::string> used(kDets.begin(), kDets.end());
    used.insert(kParts.begin(), kParts.end());
    used.insert(kAdps.begin(), kAdps.end());

    Lexicon shared;
    shared.nouns = make_words(rng, spec.shared_nouns, used);
    shared.verbs = make_words(rng, spec.shared_verbs, used);
    shared.adjs = make_words(rng, spec.shared_adjs, used);

    std::vector<Lexicon> specific(spec.treebanks.size());
    Lexicon in_domain_union;
    for (size_t i = 0; i < spec.treebanks.size(); ++i) {
        if (spec.treebanks[i].out_of_domain) continue;
        specific[i].nouns = make_words(rng, spec.specific_nouns, used);
        specific[i].verbs = make_words(rng, spec.specific_verbs, used);
        specific[i].adjs = make_words(rng, spec.specific_adjs, used);
        for (const std::string& w : specific[i].nouns) in_domain_union.nouns.push_back(w);
        for (const std::string& w : specific[i].verbs) in_domain_union.verbs.push_back(w);
        for (const std::string& w : specific[i].adjs) in_domain_union.adjs.push_back(w);
    }
    // an out-of-domain treebank blends the in-domain specific vocabularies
    for (size_t i = 0; i < spec.treebanks.size(); ++i)
        if (spec.treebanks[i].out_of_domain) specific[i] = in_domain_union;

    std::vector<Treebank> out;
    for (size_t i = 0; i < spec.treebanks.size(); ++i) {
        const SynthTreebankSpec& tbspec = spec.treebanks[i];
        Treebank tb;
        tb.id = static_cast<int>(i) + 1;
        tb.name = tbspec.name;
        struct SplitRef {
            const char* name;
            int size;
            std::vector<Sentence>* out;
        };
        const SplitRef splits[3] = {{"train", spec.train_size, &tb.train},
                                    {"dev", spec.dev_size, &tb.dev},
                                    {"test", spec.test_size, &tb.test}};
        for (const SplitRef& sp : splits) {
            for (int n = 0; n < sp.size; ++n) {
                const Convention& conv = tbspec.conventions[rng() % tbspec.conventions.size()];
                Sentence s = make_sentence(rng, shared, specific[i], conv);
                s.id = tb.name + "-" + sp.name + "-" + std::to_string(n + 1);
                s.comments.push_back("# sent_id = " + s.id);
                s.source_treebank = tb.id;
                sp.out->push_back(std::move(s));
            }
        }
        out.push_back(std::move(tb));
    }
    return out;
}

SynthSpec parse_synth_spec(const std::string& text) {
    SynthSpec spec;
    spec.treebanks.clear();
    std::istringstream is(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("spec line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "train_size")
                spec.train_size = std::stoi(value);
            else if (key == "dev_size")
                spec.dev_size = std::stoi(value);
            else if (key == "test_size")
                spec.test_size = std::stoi(value);
            else if (key == "shared_nouns")
                spec.shared_nouns = std::stoi(value);
            else if (key == "specific_nouns")
                spec.specific_nouns = std::stoi(value);
            else if (key == "shared_verbs")
                spec.shared_verbs = std::stoi(value);
            else if (key == "specific_verbs")
                spec.specific_verbs = std::stoi(value);
            else if (key == "shared_adjs")
                spec.shared_adjs = std::stoi(value);
            else if (key == "specific_adjs")
                spec.specific_adjs = std::stoi(value);
            else if (key == "treebank") {
                std::vector<std::string> parts;
                for (const std::string& p : split(value, ' '))
                    if (!p.empty()) parts.push_back(p);
                if (parts.empty())
                    throw std::invalid_argument("treebank line without a name");
                SynthTreebankSpec tb;
                tb.name = parts[0];
                for (size_t i = 1; i < parts.size(); ++i) {
                    if (parts[i] == "ood") {
                        tb.out_of_domain = true;
                    } else {
                        for (const std::string& c : split(parts[i], '|'))
                            tb.conventions.push_back(parse_convention(c));
                    }
                }
                spec.treebanks.push_back(std::move(tb));
            } else {
                throw std::invalid_argument("unknown key: " + key);
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("spec line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate_spec(spec);
    return spec;
}

std::string format_synth_spec(const SynthSpec& spec) {
    std::string out;
    out += "train_size = " + std::to_string(spec.train_size) + "\n";
    out += "dev_size = " + std::to_string(spec.dev_size) + "\n";
    out += "test_size = " + std::to_string(spec.test_size) + "\n";
    out += "shared_nouns = " + std::to_string(spec.shared_nouns) + "\n";
    out += "specific_nouns = " + std::to_string(spec.specific_nouns) + "\n";
    out += "shared_verbs = " + std::to_string(spec.shared_verbs) + "\n";
    out += "specific_verbs = " + std::to_string(spec.specific_verbs) + "\n";
    out += "shared_adjs = " + std::to_string(spec.shared_adjs) + "\n";
    out += "specific_adjs = " + std::to_string(spec.specific_adjs) + "\n";
    for (const SynthTreebankSpec& tb : spec.treebanks) {
        out += "treebank = " + tb.name;
        if (tb.out_of_domain) out += " ood";
        out += " ";
        std::vector<std::string> convs;
        for (const Convention& c : tb.conventions) convs.push_back(format_convention(c));
        out += join(convs, "|");
        out += "\n";
    }
    return out;
}

}  // namespace tbvec
