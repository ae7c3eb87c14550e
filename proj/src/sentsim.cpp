#include "tbvec/sentsim.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tbvec/util.hpp"

namespace tbvec {

void SentenceRepresentation::update_norm() {
    double s = 0.0;
    if (is_dense()) {
        for (double v : dense) s += v * v;
    } else {
        for (const auto& [k, v] : sparse) s += v * v;
    }
    norm = std::sqrt(s);
}

std::string sentence_text(const Sentence& s) {
    std::string text = "^";
    for (size_t i = 0; i < s.tokens.size(); ++i) {
        if (i) text += ' ';
        text += s.tokens[i].form;
    }
    text += '$';
    return text;
}

CharNgramTfidf::CharNgramTfidf(int n_min, int n_max) : n_min_(n_min), n_max_(n_max) {
    if (n_min < 1 || n_max < n_min) throw std::invalid_argument("bad n-gram range");
}

namespace {

std::map<std::string, double> count_ngrams(const std::string& text, int n_min, int n_max) {
    std::map<std::string, double> counts;
    const std::vector<std::string> chars = utf8_chars(text);
    const int len = static_cast<int>(chars.size());
    for (int n = n_min; n <= n_max; ++n) {
        for (int i = 0; i + n <= len; ++i) {
            std::string g;
            for (int k = 0; k < n; ++k) g += chars[i + k];
            counts[g] += 1.0;
        }
    }
    return counts;
}

}  // namespace

void CharNgramTfidf::fit(const std::vector<Sentence>& corpus) {
    if (corpus.empty()) throw std::invalid_argument("empty tf-idf corpus");
    df_.clear();
    doc_count_ = corpus.size();
    for (const Sentence& s : corpus) {
        for (const auto& [g, c] : count_ngrams(sentence_text(s), n_min_, n_max_)) ++df_[g];
    }
}

double CharNgramTfidf::idf(const std::string& ngram) const {
    auto it = df_.find(ngram);
    const size_t df = it == df_.end() ? 0 : it->second;
    return std::log((1.0 + static_cast<double>(doc_count_)) / (1.0 + static_cast<double>(df))) + 1.0;
}

SentenceRepresentation CharNgramTfidf::transform(const Sentence& s) const {
    if (!fitted()) throw std::logic_error("tf-idf not fitted");
    SentenceRepresentation rep;
    rep.key = s.id;
    for (const auto& [g, tf] : count_ngrams(sentence_text(s), n_min_, n_max_))
        rep.sparse[g] = tf * idf(g);
    rep.update_norm();
    return rep;
}

std::vector<SentenceRepresentation> CharNgramTfidf::transform_all(
    const std::vector<Sentence>& corpus) const {
    std::vector<SentenceRepresentation> out;
    out.reserve(corpus.size());
    for (const Sentence& s : corpus) out.push_back(transform(s));
    return out;
}

double cosine(const SentenceRepresentation& a, const SentenceRepresentation& b) {
    if (a.is_dense() != b.is_dense())
        throw std::invalid_argument("cannot compare sparse and dense representations");
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    double dot = 0.0;
    if (a.is_dense()) {
        if (a.dense.size() != b.dense.size())
            throw std::invalid_argument("dense dimension mismatch");
        for (size_t i = 0; i < a.dense.size(); ++i) dot += a.dense[i] * b.dense[i];
    } else {
        // iterate over the smaller map
        const auto& small = a.sparse.size() <= b.sparse.size() ? a.sparse : b.sparse;
        const auto& large = a.sparse.size() <= b.sparse.size() ? b.sparse : a.sparse;
        for (const auto& [k, v] : small) {
            auto it = large.find(k);
            if (it != large.end()) dot += v * it->second;
        }
    }
    return dot / (a.norm * b.norm);
}

TreebankRepresentation treebank_centroid(int treebank_id,
                                         const std::vector<SentenceRepresentation>& reps) {
    if (reps.empty()) throw std::invalid_argument("treebank centroid needs at least one sentence");
    TreebankRepresentation tb;
    tb.treebank_id = treebank_id;
    SentenceRepresentation& c = tb.vector;
    c.key = "treebank:" + std::to_string(treebank_id);
    const double inv = 1.0 / static_cast<double>(reps.size());
    if (reps.front().is_dense()) {
        c.dense.assign(reps.front().dense.size(), 0.0);
        for (const SentenceRepresentation& r : reps) {
            if (r.dense.size() != c.dense.size())
                throw std::invalid_argument("dense dimension mismatch in centroid");
            for (size_t i = 0; i < c.dense.size(); ++i) c.dense[i] += r.dense[i] * inv;
        }
    } else {
        for (const SentenceRepresentation& r : reps)
            for (const auto& [k, v] : r.sparse) c.sparse[k] += v * inv;
    }
    c.update_norm();
    if (c.norm == 0.0) throw std::invalid_argument("degenerate treebank: all-zero centroid");
    const double scale = 1.0 / c.norm;
    if (c.is_dense()) {
        for (double& v : c.dense) v *= scale;
    } else {
        for (auto& [k, v] : c.sparse) v *= scale;
    }
    c.update_norm();
    return tb;
}

std::vector<SentenceRepresentation> load_dense_vectors(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dense-vector file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "#dense-vectors v1")
        throw std::runtime_error("bad dense-vector header: '" + line + "'");
    std::vector<SentenceRepresentation> out;
    std::set<std::string> seen;
    size_t dim = 0;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cols = split(line, '\t');
        if (cols.size() != 3)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected id<TAB>dim<TAB>values");
        SentenceRepresentation rep;
        rep.key = cols[0];
        if (!seen.insert(rep.key).second)
            throw std::runtime_error("line " + std::to_string(lineno) + ": duplicate key '" +
                                     rep.key + "'");
        size_t row_dim = 0;
        try {
            row_dim = std::stoul(cols[1]);
        } catch (...) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": bad dimension field");
        }
        // strtod rather than stream extraction so "nan"/"inf" are parsed and
        // then rejected by the finiteness check below
        for (const std::string& field : split(cols[2], ' ')) {
            if (field.empty()) continue;
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0')
                throw std::runtime_error("line " + std::to_string(lineno) + ": bad value '" +
                                         field + "'");
            rep.dense.push_back(v);
        }
        if (rep.dense.size() != row_dim)
            throw std::runtime_error("line " + std::to_string(lineno) + ": declared dim " +
                                     cols[1] + " but found " + std::to_string(rep.dense.size()) +
                                     " values");
        if (dim == 0) dim = row_dim;
        if (row_dim != dim)
            throw std::runtime_error("line " + std::to_string(lineno) + ": dimension " + cols[1] +
                                     " differs from earlier rows (" + std::to_string(dim) + ")");
        for (double x : rep.dense)
            if (!std::isfinite(x))
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": non-finite value in row '" + rep.key + "'");
        rep.update_norm();
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<SentenceRepresentation> load_dense_vectors_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return load_dense_vectors(is);
}

std::string write_dense_vectors(const std::vector<SentenceRepresentation>& reps) {
    std::string out = "#dense-vectors v1\n";
    for (const SentenceRepresentation& r : reps) {
        out += r.key;
        out += '\t';
        out += std::to_string(r.dense.size());
        out += '\t';
        for (size_t i = 0; i < r.dense.size(); ++i) {
            if (i) out += ' ';
            out += format_double(r.dense[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace tbvec
