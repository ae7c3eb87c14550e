#ifndef TBVEC_SENTSIM_HPP
#define TBVEC_SENTSIM_HPP

#include <map>
#include <string>
#include <vector>

#include "tbvec/conllu.hpp"

namespace tbvec {

// Sparse (tf-idf) or dense sentence vector with a cached L2 norm.
struct SentenceRepresentation {
    std::string key;
    std::map<std::string, double> sparse;
    std::vector<double> dense;
    double norm = 0.0;

    bool is_dense() const { return !dense.empty(); }
    void update_norm();
};

struct TreebankRepresentation {
    int treebank_id = 0;
    SentenceRepresentation vector;  // unit L2 norm
};

// tf-idf over character n-grams fitted on a retrieval corpus; the frozen idf
// table is then reused for queries.
class CharNgramTfidf {
  public:
    CharNgramTfidf(int n_min = 2, int n_max = 5);

    void fit(const std::vector<Sentence>& corpus);
    bool fitted() const { return doc_count_ > 0; }

    SentenceRepresentation transform(const Sentence& s) const;
    std::vector<SentenceRepresentation> transform_all(const std::vector<Sentence>& corpus) const;

    double idf(const std::string& ngram) const;

  private:
    int n_min_, n_max_;
    size_t doc_count_ = 0;
    std::map<std::string, size_t> df_;
};

// Joined token forms with boundary markers, the string the n-grams run over.
std::string sentence_text(const Sentence& s);

double cosine(const SentenceRepresentation& a, const SentenceRepresentation& b);

// Mean of the sentence vectors, L2-normalized to the unit sphere.
TreebankRepresentation treebank_centroid(int treebank_id,
                                         const std::vector<SentenceRepresentation>& reps);

// Dense-vector file: "#dense-vectors v1" header, then
// sentence_id<TAB>dim<TAB>v1 v2 ... per row.
std::vector<SentenceRepresentation> load_dense_vectors(std::istream& in);
std::vector<SentenceRepresentation> load_dense_vectors_file(const std::string& path);
std::string write_dense_vectors(const std::vector<SentenceRepresentation>& reps);

}  // namespace tbvec

#endif
