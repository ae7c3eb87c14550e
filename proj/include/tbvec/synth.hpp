#ifndef TBVEC_SYNTH_HPP
#define TBVEC_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tbvec/conllu.hpp"

namespace tbvec {

// One head-attachment convention. Treebanks sharing a grammar but differing
// here force the parser to rely on the treebank vector.
struct Convention {
    bool particle_to_verb = true;   // else the particle attaches to the object noun
    bool adp_to_verb = false;       // else adposition attaches to its noun (case-style)
    std::string adj_label = "amod";

    bool operator==(const Convention&) const = default;
};

struct SynthTreebankSpec {
    std::string name;
    std::vector<Convention> conventions;  // >1 means a per-sentence blend
    bool out_of_domain = false;
};

struct SynthSpec {
    int train_size = 500;
    int dev_size = 100;
    int test_size = 100;
    int shared_nouns = 45, specific_nouns = 15;
    int shared_verbs = 24, specific_verbs = 7;
    int shared_adjs = 12, specific_adjs = 4;
    std::vector<SynthTreebankSpec> treebanks;
};

// 3 training treebanks with pairwise-different conventions plus one
// out-of-domain treebank blending all three.
SynthSpec default_synth_spec();
// Same grammar but one shared convention everywhere; landscapes stay flat.
SynthSpec control_synth_spec();

// Plain key-value spec file; throws on unknown keys or malformed treebanks.
SynthSpec parse_synth_spec(const std::string& text);
std::string format_synth_spec(const SynthSpec& spec);

std::vector<Treebank> generate_synthetic_suite(const SynthSpec& spec, uint64_t seed);

}  // namespace tbvec

#endif
