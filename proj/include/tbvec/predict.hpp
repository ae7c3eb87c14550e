#ifndef TBVEC_PREDICT_HPP
#define TBVEC_PREDICT_HPP

#include <map>
#include <string>
#include <vector>

#include "tbvec/sentsim.hpp"
#include "tbvec/weight_space.hpp"

namespace tbvec {

// Per-sentence attachment counts at every grid point.
struct SentenceLas {
    std::string key;
    int total = 0;                 // sentence length
    std::vector<int> correct;      // one entry per grid point
    double las(size_t point_id) const {
        return total == 0 ? 0.0 : static_cast<double>(correct[point_id]) / total;
    }
};

using LasTable = std::map<std::string, SentenceLas>;

// CSV: sentence_key, point_id, correct, total (rows sorted by key, point).
std::string las_table_to_csv(const LasTable& table);
LasTable las_table_from_csv(const std::string& csv, size_t num_points);

// Pointwise lower median of the correct counts across seeds.
LasTable median_las_tables(const std::vector<LasTable>& per_seed);

struct RetrievalIndex {
    WeightGrid grid;
    std::vector<SentenceRepresentation> reps;  // aligned with keys below
    LasTable las;                              // one entry per indexed sentence
    bool oracle = false;
};

struct Neighbor {
    std::string key;
    double similarity = 0.0;
};

// Top-k by descending similarity, ties by ascending key. When k exceeds the
// index, everything is returned and *truncated is set.
std::vector<Neighbor> retrieve(const RetrievalIndex& index, const SentenceRepresentation& query,
                               int k, bool* truncated = nullptr);

// Argmax set of sentence LAS over the points of the sample space.
std::vector<size_t> best_points(const SentenceLas& records, const WeightGrid& grid,
                                SampleSpace space);

enum class TieBreak { kUniformClosest, kNextNeighborRerank, kKAverage };
TieBreak parse_tie_break(const std::string& s);
std::string tie_break_name(TieBreak t);

// Deterministic resolution of a candidate point set to a single point:
// minimal Euclidean distance to the uniform weight vector, ties by
// ascending point id.
size_t closest_to_uniform(const std::vector<size_t>& candidates, const WeightGrid& grid);

struct PredictorConfig {
    int k = 1;
    SampleSpace space = SampleSpace::kAny;
    TieBreak tie_break = TieBreak::kUniformClosest;
    bool oracle = false;
};

struct Prediction {
    size_t point_id = 0;
    WeightVector weights;
    std::vector<Neighbor> neighbors;
};

// se-se: pick a weight point for one sentence from its k nearest indexed
// sentences, then tie-break.
Prediction predict_se_se(const PredictorConfig& config, const RetrievalIndex& index,
                         const SentenceRepresentation& query);

// Aggregate evidence for one training treebank: centroid plus micro-averaged
// attachment counts per grid point over its dev sentences.
struct TreebankEvidence {
    int treebank_id = 0;
    TreebankRepresentation centroid;
    std::vector<long long> correct;  // per grid point
    long long total = 0;
};

TreebankEvidence make_treebank_evidence(int treebank_id, const TreebankRepresentation& centroid,
                                        const LasTable& las, const WeightGrid& grid);

// tr-tr: one weight point for a whole test set via the most similar
// training-treebank centroid.
Prediction predict_tr_tr(const PredictorConfig& config, const WeightGrid& grid,
                         const std::vector<TreebankEvidence>& evidence,
                         const std::vector<SentenceRepresentation>& test_reps);

// --- baselines ---

// argmax/argmin corner by aggregate test-set LAS (oracle information)
Prediction proxy_baseline(const WeightGrid& grid, const std::vector<long long>& correct,
                          long long total, bool best);
WeightVector equal_baseline(int m);
Prediction random_baseline(const WeightGrid& grid, SampleSpace space, uint64_t seed);

// Prediction report CSV:
// sentence_key, point_id, alpha_1..alpha_m, strategy, k, space
std::string prediction_report_csv(const WeightGrid& grid,
                                  const std::vector<std::pair<std::string, Prediction>>& rows,
                                  const PredictorConfig& config);

}  // namespace tbvec

#endif
