#ifndef TBVEC_WEIGHT_SPACE_HPP
#define TBVEC_WEIGHT_SPACE_HPP

#include <string>
#include <vector>

namespace tbvec {

// Barycentric interpolation weights over the m training treebanks.
// Entries may be negative; they always sum to 1.
using WeightVector = std::vector<double>;

enum class SampleSpace { kFixed, kNonneg, kAny };

SampleSpace parse_sample_space(const std::string& s);
std::string sample_space_name(SampleSpace s);

WeightVector corner(int t, int m);    // t is 1-based
WeightVector uniform(int m);

double weight_sum(const WeightVector& w);
bool sums_to_one(const WeightVector& w, double tol = 1e-9);

struct WeightGrid {
    std::vector<WeightVector> points;  // lexicographic order
    double step = 0.125;
    double margin = 0.5;
    int m = 0;

    size_t size() const { return points.size(); }
    // -1 when the point is not in the grid
    int find(const WeightVector& w, double tol = 1e-9) const;
    bool is_corner(size_t point_id) const;
    bool is_nonneg(size_t point_id) const;
    bool in_space(size_t point_id, SampleSpace space) const;
    std::vector<size_t> space_points(SampleSpace space) const;
};

// Deterministic lattice: every alpha an integer multiple of `step` within
// [-margin, 1+margin], summing to 1 exactly (integer arithmetic), plus the
// m corner vectors. Points are sorted lexicographically.
WeightGrid generate_grid(int m, double step, double margin);

// CSV: point_id, alpha_1..alpha_m, space_flags
std::string grid_to_csv(const WeightGrid& grid);

}  // namespace tbvec

#endif
