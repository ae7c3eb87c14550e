#ifndef TBVEC_PARSER_HPP
#define TBVEC_PARSER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tbvec/conllu.hpp"
#include "tbvec/weight_space.hpp"

namespace tbvec {

struct ParserConfig {
    int word_dim = 32;     // dynamically learned word vector
    int char_dim = 16;     // character embedding
    int char_hidden = 32;  // per-direction recurrent state, token vector is 2x this
    int tb_dim = 12;       // treebank embedding
    int hidden = 64;       // transition classifier hidden layer
    int epochs = 8;
    double learning_rate = 0.1;
    int word_min_freq = 2;  // rarer forms train the UNK row
    uint64_t seed = 1;

    int enc_dim() const { return word_dim + 2 * char_hidden + tb_dim; }
};

// Transition inventory of the arc-hybrid system.
enum class ActionKind { kShift, kLeftArc, kRightArc };

struct Transition {
    ActionKind kind;
    int label = -1;  // deprel id, -1 for shift
    bool operator==(const Transition&) const = default;
};

struct ParseResult {
    std::vector<int> heads;            // per token, 0 = root
    std::vector<std::string> deprels;
};

// All trainable parameters live in one flat vector so finite-difference
// checks and SGD touch a single array. Named offsets index into it.
struct ParserModel {
    ParserConfig config;
    int num_treebanks = 0;  // m
    std::map<std::string, int> word_ids;  // UNK is id 0, not in the map
    std::map<uint32_t, int> char_ids;     // UNK is id 0
    std::vector<std::string> labels;

    std::vector<double> theta;

    // offsets into theta
    size_t off_word = 0, off_char = 0, off_tb = 0;
    size_t off_fwd_wx = 0, off_fwd_wh = 0, off_fwd_b = 0;
    size_t off_bwd_wx = 0, off_bwd_wh = 0, off_bwd_b = 0;
    size_t off_w1 = 0, off_b1 = 0, off_w2 = 0, off_b2 = 0;
    size_t off_root = 0;

    int num_actions() const { return 1 + 2 * static_cast<int>(labels.size()); }
    int feat_dim() const { return 4 * config.enc_dim(); }
    int word_id(const std::string& form) const;
    int char_id(uint32_t cp) const;
    int label_id(const std::string& deprel) const;

    const double* tb_row(int t) const {  // t is 1-based
        return theta.data() + off_tb + static_cast<size_t>(t - 1) * config.tb_dim;
    }
};

// f = sum_t alpha_t * e3(t)
std::vector<double> interpolate_tbvec(const ParserModel& model, const WeightVector& weights);

// word embedding . char encoder final states . treebank vector
std::vector<double> encode_token(const ParserModel& model, const Token& token,
                                 const std::vector<double>& tbvec);

// --- transition system ---

bool is_projective(const std::vector<int>& heads);
// Lift strategy: reattach the dependent of a shortest non-projective arc to
// its grandparent until the tree is projective.
std::vector<int> projectivize(const std::vector<int>& heads);

struct OracleResult {
    std::vector<Transition> transitions;
    bool was_projective = true;  // false when the gold tree needed lifting
};

// Static arc-hybrid oracle for a gold sentence; non-projective trees are
// projectivized first and flagged.
OracleResult oracle_transitions(const ParserModel& model, const Sentence& gold);

// Human-readable form ("shift", "left-arc(nsubj)", ...) for tests and traces.
std::string transition_name(const ParserModel& model, const Transition& t);

// --- training and inference ---

struct TrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int skipped_nonprojective = 0;
};

ParserModel train(const std::vector<Treebank>& treebanks, const ParserConfig& config,
                  TrainReport* report = nullptr);

ParseResult parse(const ParserModel& model, const Sentence& sentence, const WeightVector& weights);
ParseResult parse_with_tbvec(const ParserModel& model, const Sentence& sentence,
                             const std::vector<double>& tbvec);

// Average cross-entropy over the oracle transitions of `sentences`; the
// gradient (same layout as theta) is written to *grad when non-null.
double loss_and_grad(const ParserModel& model, const std::vector<const Sentence*>& sentences,
                     std::vector<double>* grad);

// --- serialization (versioned, little-endian float32 tensors) ---

void save_model(const ParserModel& model, const std::string& path);
ParserModel load_model(const std::string& path);

}  // namespace tbvec

#endif
