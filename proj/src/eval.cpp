#include "tbvec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tbvec/util.hpp"

namespace tbvec {

std::pair<int, int> las(const Sentence& gold, const ParseResult& pred) {
    const size_t n = gold.tokens.size();
    if (pred.heads.size() != n || pred.deprels.size() != n)
        throw std::invalid_argument("prediction length mismatch for sentence " + gold.id);
    int correct = 0;
    for (size_t i = 0; i < n; ++i) {
        const Token& t = gold.tokens[i];
        if (pred.heads[i] == t.head && pred.deprels[i] == t.deprel) ++correct;
    }
    return {correct, static_cast<int>(n)};
}

namespace {

SweepResult assemble(const ParserModel& model, const std::vector<Sentence>& sentences,
                     const WeightGrid& grid, const std::vector<int>& correct_flat) {
    SweepResult res;
    res.grid = grid;
    res.correct.assign(grid.size(), 0);
    const size_t npoints = grid.size();
    for (size_t si = 0; si < sentences.size(); ++si) {
        const Sentence& s = sentences[si];
        SentenceLas rec;
        rec.key = s.id;
        rec.total = static_cast<int>(s.tokens.size());
        rec.correct.resize(npoints);
        for (size_t p = 0; p < npoints; ++p) {
            const int c = correct_flat[si * npoints + p];
            rec.correct[p] = c;
            res.correct[p] += c;
        }
        res.total += rec.total;
        res.per_sentence.emplace(s.id, std::move(rec));
    }
    (void)model;
    return res;
}

}  // namespace

SweepResult sweep_serial(const ParserModel& model, const std::vector<Sentence>& sentences,
                         const WeightGrid& grid) {
    const size_t npoints = grid.size();
    std::vector<int> correct_flat(sentences.size() * npoints, 0);
    for (size_t si = 0; si < sentences.size(); ++si) {
        for (size_t p = 0; p < npoints; ++p) {
            const ParseResult pr = parse(model, sentences[si], grid.points[p]);
            correct_flat[si * npoints + p] = las(sentences[si], pr).first;
        }
    }
    return assemble(model, sentences, grid, correct_flat);
}

SweepResult sweep(const ParserModel& model, const std::vector<Sentence>& sentences,
                  const WeightGrid& grid, int jobs) {
    if (jobs <= 1) return sweep_serial(model, sentences, grid);
    const size_t npoints = grid.size();
    const size_t npairs = sentences.size() * npoints;
    std::vector<int> correct_flat(npairs, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(jobs)
#endif
    for (long long idx = 0; idx < static_cast<long long>(npairs); ++idx) {
        const size_t si = static_cast<size_t>(idx) / npoints;
        const size_t p = static_cast<size_t>(idx) % npoints;
        const ParseResult pr = parse(model, sentences[si], grid.points[p]);
        correct_flat[idx] = las(sentences[si], pr).first;
    }
    return assemble(model, sentences, grid, correct_flat);
}

std::vector<double> median_over_seeds(const std::vector<SweepResult>& per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("no sweep results to aggregate");
    const size_t npoints = per_seed.front().grid.size();
    for (const SweepResult& r : per_seed)
        if (r.grid.size() != npoints)
            throw std::invalid_argument("seed sweeps ran on different grids");
    std::vector<double> out(npoints);
    std::vector<double> vals(per_seed.size());
    for (size_t p = 0; p < npoints; ++p) {
        for (size_t s = 0; s < per_seed.size(); ++s) vals[s] = per_seed[s].aggregate_las(p);
        std::sort(vals.begin(), vals.end());
        out[p] = vals[(vals.size() - 1) / 2];  // lower median
    }
    return out;
}

SignificanceResult significance(const std::vector<Sentence>& gold,
                                const std::vector<ParseResult>& pred_a,
                                const std::vector<ParseResult>& pred_b, int iterations,
                                uint64_t seed) {
    if (pred_a.size() != gold.size() || pred_b.size() != gold.size())
        throw std::invalid_argument("prediction sets not aligned with gold");
    const size_t n = gold.size();
    std::vector<int> ca(n), cb(n);
    long long total = 0, sum_a = 0, sum_b = 0;
    for (size_t i = 0; i < n; ++i) {
        ca[i] = las(gold[i], pred_a[i]).first;
        cb[i] = las(gold[i], pred_b[i]).first;
        sum_a += ca[i];
        sum_b += cb[i];
        total += static_cast<long long>(gold[i].tokens.size());
    }
    SignificanceResult res;
    res.las_a = total ? static_cast<double>(sum_a) / total : 0.0;
    res.las_b = total ? static_cast<double>(sum_b) / total : 0.0;
    res.las_diff = res.las_a - res.las_b;

    const long long observed = std::llabs(sum_a - sum_b);
    std::mt19937_64 rng(seed);
    int at_least = 0;
    for (int it = 0; it < iterations; ++it) {
        long long diff = 0;
        for (size_t i = 0; i < n; ++i) {
            const long long d = ca[i] - cb[i];
            diff += (rng() & 1ull) ? d : -d;
        }
        if (std::llabs(diff) >= observed) ++at_least;
    }
    res.p_value = iterations ? static_cast<double>(at_least) / iterations : 1.0;
    return res;
}

std::string sweep_to_csv(const SweepResult& result) {
    const WeightGrid& grid = result.grid;
    std::string out = "point_id";
    for (int t = 1; t <= grid.m; ++t) out += ",alpha_" + std::to_string(t);
    out += ",las,correct,total\n";
    for (size_t p = 0; p < grid.size(); ++p) {
        out += std::to_string(p);
        for (double a : grid.points[p]) out += "," + format_double(a);
        out += "," + format_double(result.aggregate_las(p));
        out += "," + std::to_string(result.correct[p]);
        out += "," + std::to_string(result.total);
        out += '\n';
    }
    return out;
}

namespace {

// barycentric point -> simplex plane, corners at (0,0), (1,0), (0.5, sqrt(3)/2)
void plane_coords(const WeightVector& w, double& x, double& y) {
    x = w[1] + 0.5 * w[2];
    y = 0.8660254037844386 * w[2];
}

std::string color_for(double v) {  // 0 -> blue, 1 -> red
    const int r = static_cast<int>(std::lround(255.0 * v));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - v)));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x40%02x", r, b);
    return buf;
}

}  // namespace

std::string sweep_to_svg(const SweepResult& result) {
    const WeightGrid& grid = result.grid;
    if (grid.m != 3) throw std::invalid_argument("SVG heatmap is only defined for m=3");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    std::vector<double> xs(grid.size()), ys(grid.size());
    for (size_t p = 0; p < grid.size(); ++p) {
        plane_coords(grid.points[p], xs[p], ys[p]);
        xmin = std::min(xmin, xs[p]);
        xmax = std::max(xmax, xs[p]);
        ymin = std::min(ymin, ys[p]);
        ymax = std::max(ymax, ys[p]);
    }
    const double size = 640.0, pad = 40.0;
    const double span = std::max(xmax - xmin, ymax - ymin);
    const double scale = span > 0 ? (size - 2 * pad) / span : 1.0;
    auto px = [&](double x) { return pad + (x - xmin) * scale; };
    auto py = [&](double y) { return size - pad - (y - ymin) * scale; };

    long long lo = result.correct[0], hi = result.correct[0];
    for (long long c : result.correct) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(size) +
           "\" height=\"" + format_double(size) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const double radius = std::max(3.0, 0.35 * grid.step * scale);
    for (size_t p = 0; p < grid.size(); ++p) {
        const double v = hi > lo ? static_cast<double>(result.correct[p] - lo) / (hi - lo) : 0.5;
        svg += "<circle cx=\"" + format_double(px(xs[p])) + "\" cy=\"" + format_double(py(ys[p])) +
               "\" r=\"" + format_double(radius) + "\" fill=\"" + color_for(v) + "\"/>\n";
    }

    // triangle spanned by the fixed treebank vectors
    double cx[3], cy[3];
    for (int t = 1; t <= 3; ++t) plane_coords(corner(t, 3), cx[t - 1], cy[t - 1]);
    svg += "<path d=\"M " + format_double(px(cx[0])) + " " + format_double(py(cy[0])) + " L " +
           format_double(px(cx[1])) + " " + format_double(py(cy[1])) + " L " +
           format_double(px(cx[2])) + " " + format_double(py(cy[2])) +
           " Z\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

    // argmax points
    for (size_t p = 0; p < grid.size(); ++p) {
        if (result.correct[p] != hi) continue;
        svg += "<circle cx=\"" + format_double(px(xs[p])) + "\" cy=\"" + format_double(py(ys[p])) +
               "\" r=\"" + format_double(radius + 2.5) +
               "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace tbvec
