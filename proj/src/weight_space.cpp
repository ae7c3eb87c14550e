#include "tbvec/weight_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tbvec/util.hpp"

namespace tbvec {

SampleSpace parse_sample_space(const std::string& s) {
    if (s == "fixed") return SampleSpace::kFixed;
    if (s == "nonneg") return SampleSpace::kNonneg;
    if (s == "any") return SampleSpace::kAny;
    throw std::invalid_argument("unknown sample space: " + s);
}

std::string sample_space_name(SampleSpace s) {
    switch (s) {
        case SampleSpace::kFixed: return "fixed";
        case SampleSpace::kNonneg: return "nonneg";
        case SampleSpace::kAny: return "any";
    }
    return "?";
}

WeightVector corner(int t, int m) {
    if (t < 1 || t > m)
        throw std::out_of_range("corner index " + std::to_string(t) + " not in [1, " +
                                std::to_string(m) + "]");
    WeightVector w(static_cast<size_t>(m), 0.0);
    w[static_cast<size_t>(t - 1)] = 1.0;
    return w;
}

WeightVector uniform(int m) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    return WeightVector(static_cast<size_t>(m), 1.0 / m);
}

double weight_sum(const WeightVector& w) {
    double s = 0.0;
    for (double a : w) s += a;
    return s;
}

bool sums_to_one(const WeightVector& w, double tol) {
    return std::fabs(weight_sum(w) - 1.0) <= tol;
}

namespace {

bool same_point(const WeightVector& a, const WeightVector& b, double tol) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (std::fabs(a[i] - b[i]) > tol) return false;
    return true;
}

bool point_is_corner(const WeightVector& w, double tol = 1e-9) {
    int ones = 0;
    for (double a : w) {
        if (std::fabs(a - 1.0) <= tol)
            ++ones;
        else if (std::fabs(a) > tol)
            return false;
    }
    return ones == 1;
}

void enumerate(int m, int depth, long long remaining, long long klo, long long khi, double step,
               std::vector<long long>& ks, std::vector<WeightVector>& out) {
    if (depth == m - 1) {
        if (remaining < klo || remaining > khi) return;
        ks.push_back(remaining);
        WeightVector w(ks.size());
        for (size_t i = 0; i < ks.size(); ++i) w[i] = static_cast<double>(ks[i]) * step;
        out.push_back(std::move(w));
        ks.pop_back();
        return;
    }
    const int rest = m - 1 - depth;
    for (long long k = klo; k <= khi; ++k) {
        const long long r = remaining - k;
        if (r < klo * rest || r > khi * rest) continue;
        ks.push_back(k);
        enumerate(m, depth + 1, r, klo, khi, step, ks, out);
        ks.pop_back();
    }
}

}  // namespace

WeightGrid generate_grid(int m, double step, double margin) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (step <= 0) throw std::invalid_argument("step must be > 0");
    if (margin < 0) throw std::invalid_argument("margin must be >= 0");

    WeightGrid grid;
    grid.m = m;
    grid.step = step;
    grid.margin = margin;

    const long long klo = static_cast<long long>(std::ceil(-margin / step - 1e-9));
    const long long khi = static_cast<long long>(std::floor((1.0 + margin) / step + 1e-9));
    const double s_real = 1.0 / step;
    const long long target = std::llround(s_real);
    // Lattice points summing to 1 exist only when 1/step is an integer;
    // otherwise the grid is just the corners.
    if (std::fabs(s_real - static_cast<double>(target)) <= 1e-9) {
        std::vector<long long> ks;
        enumerate(m, 0, target, klo, khi, step, ks, grid.points);
    }
    for (int t = 1; t <= m; ++t) {
        WeightVector c = corner(t, m);
        bool present = false;
        for (const WeightVector& p : grid.points)
            if (same_point(p, c, 1e-9)) {
                present = true;
                break;
            }
        if (!present) grid.points.push_back(std::move(c));
    }
    std::sort(grid.points.begin(), grid.points.end());
    if (grid.points.empty()) throw std::invalid_argument("grid parameters yield no points");
    return grid;
}

int WeightGrid::find(const WeightVector& w, double tol) const {
    for (size_t i = 0; i < points.size(); ++i)
        if (same_point(points[i], w, tol)) return static_cast<int>(i);
    return -1;
}

bool WeightGrid::is_corner(size_t point_id) const { return point_is_corner(points.at(point_id)); }

bool WeightGrid::is_nonneg(size_t point_id) const {
    for (double a : points.at(point_id))
        if (a < -1e-9) return false;
    return true;
}

bool WeightGrid::in_space(size_t point_id, SampleSpace space) const {
    switch (space) {
        case SampleSpace::kFixed: return is_corner(point_id);
        case SampleSpace::kNonneg: return is_nonneg(point_id);
        case SampleSpace::kAny: return true;
    }
    return false;
}

std::vector<size_t> WeightGrid::space_points(SampleSpace space) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < points.size(); ++i)
        if (in_space(i, space)) out.push_back(i);
    return out;
}

std::string grid_to_csv(const WeightGrid& grid) {
    std::string out = "point_id";
    for (int t = 1; t <= grid.m; ++t) out += ",alpha_" + std::to_string(t);
    out += ",space_flags\n";
    for (size_t i = 0; i < grid.points.size(); ++i) {
        out += std::to_string(i);
        for (double a : grid.points[i]) out += "," + format_double(a);
        out += ",";
        if (grid.is_corner(i)) out += "fixed;";
        if (grid.is_nonneg(i)) out += "nonneg;";
        out += "any\n";
    }
    return out;
}

}  // namespace tbvec
