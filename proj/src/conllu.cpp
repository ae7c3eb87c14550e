#include "tbvec/conllu.hpp"

#include <fstream>
#include <sstream>

#include "tbvec/util.hpp"

namespace tbvec {

size_t Token::char_count() const { return utf8_codepoints(form).size(); }

bool Sentence::has_gold_heads() const {
    if (tokens.empty()) return false;
    for (const Token& t : tokens)
        if (t.head < 0) return false;
    return true;
}

namespace {

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// MWT ranges ("3-4") and empty nodes ("5.1") stay opaque.
bool is_basic_id(const std::string& s) { return is_integer(s); }

void finish_sentence(Sentence& s, std::vector<Sentence>& out, const std::string& treebank_name,
                     size_t& ordinal) {
    if (s.comments.empty() && s.tokens.empty() && s.opaque.empty()) return;
    ++ordinal;
    for (const std::string& c : s.comments) {
        const std::string prefix = "# sent_id = ";
        if (c.rfind(prefix, 0) == 0) s.id = c.substr(prefix.size());
    }
    if (s.id.empty()) s.id = treebank_name + ":" + std::to_string(ordinal);
    const int n = static_cast<int>(s.tokens.size());
    for (const Token& t : s.tokens) {
        if (t.head > n)
            throw ConlluError("sentence " + s.id + ": token " + std::to_string(t.index) +
                              " has head " + std::to_string(t.head) + " out of range [0, " +
                              std::to_string(n) + "]");
    }
    out.push_back(std::move(s));
    s = Sentence{};
}

}  // namespace

std::vector<Sentence> read_conllu(std::istream& in, const std::string& treebank_name,
                                  int treebank_id) {
    std::vector<Sentence> out;
    Sentence cur;
    cur.source_treebank = treebank_id;
    size_t ordinal = 0;
    size_t lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            finish_sentence(cur, out, treebank_name, ordinal);
            cur.source_treebank = treebank_id;
            continue;
        }
        if (line[0] == '#') {
            cur.comments.push_back(line);
            continue;
        }
        std::vector<std::string> cols = split(line, '\t');
        if (cols.size() != 10)
            throw ConlluError("line " + std::to_string(lineno) + ": expected 10 tab-separated fields, got " +
                              std::to_string(cols.size()));
        if (!is_basic_id(cols[0])) {
            cur.opaque.push_back({cur.tokens.size(), line});
            continue;
        }
        Token t;
        t.index = std::stoi(cols[0]);
        if (t.index != static_cast<int>(cur.tokens.size()) + 1)
            throw ConlluError("line " + std::to_string(lineno) + ": token id " + cols[0] +
                              " out of sequence");
        t.form = cols[1];
        t.lemma = cols[2];
        t.upos = cols[3];
        t.xpos = cols[4];
        t.feats = cols[5];
        if (cols[6] == "_") {
            t.head = -1;
        } else if (is_integer(cols[6])) {
            t.head = std::stoi(cols[6]);
        } else {
            throw ConlluError("line " + std::to_string(lineno) + ": non-integer HEAD '" + cols[6] + "'");
        }
        t.deprel = cols[7];
        t.deps = cols[8];
        t.misc = cols[9];
        cur.tokens.push_back(std::move(t));
    }
    finish_sentence(cur, out, treebank_name, ordinal);
    return out;
}

std::vector<Sentence> read_conllu_string(const std::string& text, const std::string& treebank_name,
                                         int treebank_id) {
    std::istringstream ss(text);
    return read_conllu(ss, treebank_name, treebank_id);
}

std::vector<Sentence> read_conllu_file(const std::string& path, const std::string& treebank_name,
                                       int treebank_id) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConlluError("cannot open: " + path);
    return read_conllu(is, treebank_name, treebank_id);
}

std::string write_conllu(const std::vector<Sentence>& sentences) {
    std::string out;
    for (const Sentence& s : sentences) {
        for (const std::string& c : s.comments) {
            out += c;
            out += '\n';
        }
        size_t opi = 0;
        for (size_t i = 0; i <= s.tokens.size(); ++i) {
            while (opi < s.opaque.size() && s.opaque[opi].anchor == i) {
                out += s.opaque[opi].text;
                out += '\n';
                ++opi;
            }
            if (i == s.tokens.size()) break;
            const Token& t = s.tokens[i];
            out += std::to_string(t.index);
            out += '\t';
            out += t.form;
            out += '\t';
            out += t.lemma;
            out += '\t';
            out += t.upos;
            out += '\t';
            out += t.xpos;
            out += '\t';
            out += t.feats;
            out += '\t';
            out += t.head < 0 ? "_" : std::to_string(t.head);
            out += '\t';
            out += t.deprel;
            out += '\t';
            out += t.deps;
            out += '\t';
            out += t.misc;
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

std::vector<std::string> validate_tree(const Sentence& s) {
    std::vector<std::string> violations;
    const int n = static_cast<int>(s.tokens.size());
    int roots = 0;
    bool heads_usable = true;
    for (const Token& t : s.tokens) {
        if (t.head < 0) {
            violations.push_back("token " + std::to_string(t.index) + ": missing head");
            heads_usable = false;
            continue;
        }
        if (t.head > n) {
            violations.push_back("token " + std::to_string(t.index) + ": head " +
                                 std::to_string(t.head) + " out of range");
            heads_usable = false;
            continue;
        }
        if (t.head == t.index) {
            violations.push_back("token " + std::to_string(t.index) + ": is its own head");
            heads_usable = false;
            continue;
        }
        if (t.head == 0) ++roots;
    }
    if (heads_usable) {
        if (roots == 0 && n > 0) violations.push_back("no root (no token with head 0)");
        if (roots > 1) violations.push_back("multiple roots (" + std::to_string(roots) + " tokens with head 0)");
        // cycle check: walk to the root from every token
        for (int i = 1; i <= n; ++i) {
            int cur = i;
            int steps = 0;
            while (cur != 0 && steps <= n) {
                cur = s.tokens[cur - 1].head;
                ++steps;
            }
            if (cur != 0) {
                violations.push_back("cycle involving token " + std::to_string(i));
                break;
            }
        }
    }
    return violations;
}

}  // namespace tbvec
