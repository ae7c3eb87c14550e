#ifndef TBVEC_EVAL_HPP
#define TBVEC_EVAL_HPP

#include <string>
#include <vector>

#include "tbvec/conllu.hpp"
#include "tbvec/parser.hpp"
#include "tbvec/predict.hpp"
#include "tbvec/weight_space.hpp"

namespace tbvec {

// (correct, total): tokens whose head and deprel both match gold.
std::pair<int, int> las(const Sentence& gold, const ParseResult& pred);

struct SweepResult {
    WeightGrid grid;
    LasTable per_sentence;
    std::vector<long long> correct;  // aggregate per point
    long long total = 0;

    double aggregate_las(size_t point_id) const {
        return total == 0 ? 0.0 : static_cast<double>(correct[point_id]) / total;
    }
};

// Parse every sentence at every grid point. The serial version is the
// reference; the parallel version fans out over (sentence, point) pairs with
// OpenMP and produces bit-identical results.
SweepResult sweep_serial(const ParserModel& model, const std::vector<Sentence>& sentences,
                         const WeightGrid& grid);
SweepResult sweep(const ParserModel& model, const std::vector<Sentence>& sentences,
                  const WeightGrid& grid, int jobs);

// Pointwise lower median of aggregate LAS across seeds.
std::vector<double> median_over_seeds(const std::vector<SweepResult>& per_seed);

// Two-sided paired permutation test on per-sentence correct-arc counts.
struct SignificanceResult {
    double p_value = 1.0;
    double las_a = 0.0, las_b = 0.0;
    double las_diff = 0.0;
};
SignificanceResult significance(const std::vector<Sentence>& gold,
                                const std::vector<ParseResult>& pred_a,
                                const std::vector<ParseResult>& pred_b, int iterations,
                                uint64_t seed);

// CSV: point_id, alpha_1..alpha_m, las, correct, total
std::string sweep_to_csv(const SweepResult& result);

// Simplex-plane heatmap with the fixed-vector triangle and argmax marks;
// only defined for m = 3.
std::string sweep_to_svg(const SweepResult& result);

}  // namespace tbvec

#endif
