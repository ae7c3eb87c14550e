#ifndef TBVEC_CONLLU_HPP
#define TBVEC_CONLLU_HPP

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbvec {

// A basic node of a dependency tree. The five modelled columns are parsed,
// the remaining CoNLL-U columns are kept verbatim for round-trip output.
struct Token {
    int index = 0;       // 1-based position
    std::string form;
    std::string upos;    // "_" when absent
    int head = -1;       // 0 = root, -1 = missing ("_")
    std::string deprel;  // "_" when absent
    // unmodelled columns, preserved as read
    std::string lemma = "_";
    std::string xpos = "_";
    std::string feats = "_";
    std::string deps = "_";
    std::string misc = "_";

    // number of Unicode scalar values in `form`
    size_t char_count() const;
};

// A multiword-token range or empty-node line, kept opaque for round-trip.
// `anchor` is the number of basic tokens already seen when the line occurred.
struct OpaqueLine {
    size_t anchor = 0;
    std::string text;
};

struct Sentence {
    std::string id;
    int source_treebank = -1;  // treebank id, -1 for out-of-domain input
    std::vector<std::string> comments;  // raw '#' lines
    std::vector<Token> tokens;
    std::vector<OpaqueLine> opaque;

    size_t size() const { return tokens.size(); }
    bool has_gold_heads() const;
};

struct Treebank {
    int id = 0;  // 1..m
    std::string name;
    std::vector<Sentence> train, dev, test;
};

struct ConlluError : std::runtime_error {
    explicit ConlluError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse a CoNLL-U stream. Sentence ids come from `# sent_id` comments and
// default to "<treebank_name>:<ordinal>". Malformed lines raise ConlluError
// with the 1-based line number; out-of-range heads name the sentence id.
std::vector<Sentence> read_conllu(std::istream& in, const std::string& treebank_name,
                                  int treebank_id = -1);
std::vector<Sentence> read_conllu_string(const std::string& text, const std::string& treebank_name,
                                         int treebank_id = -1);
std::vector<Sentence> read_conllu_file(const std::string& path, const std::string& treebank_name,
                                       int treebank_id = -1);

std::string write_conllu(const std::vector<Sentence>& sentences);

// Tree well-formedness report; empty means ok.
std::vector<std::string> validate_tree(const Sentence& s);

}  // namespace tbvec

#endif
