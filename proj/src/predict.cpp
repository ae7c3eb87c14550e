#include "tbvec/predict.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tbvec/util.hpp"

namespace tbvec {

std::string las_table_to_csv(const LasTable& table) {
    std::string out = "sentence_key,point_id,correct,total\n";
    for (const auto& [key, rec] : table) {
        for (size_t p = 0; p < rec.correct.size(); ++p) {
            out += key;
            out += ',';
            out += std::to_string(p);
            out += ',';
            out += std::to_string(rec.correct[p]);
            out += ',';
            out += std::to_string(rec.total);
            out += '\n';
        }
    }
    return out;
}

LasTable las_table_from_csv(const std::string& csv, size_t num_points) {
    LasTable table;
    std::istringstream is(csv);
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;  // header
        const std::vector<std::string> cols = split(line, ',');
        if (cols.size() != 4)
            throw std::runtime_error("LAS CSV line " + std::to_string(lineno) + ": expected 4 columns");
        const std::string& key = cols[0];
        const size_t point = std::stoul(cols[1]);
        if (point >= num_points)
            throw std::runtime_error("LAS CSV line " + std::to_string(lineno) +
                                     ": point_id out of range");
        SentenceLas& rec = table[key];
        if (rec.correct.empty()) {
            rec.key = key;
            rec.total = std::stoi(cols[3]);
            rec.correct.assign(num_points, -1);
        }
        rec.correct[point] = std::stoi(cols[2]);
    }
    for (const auto& [key, rec] : table)
        for (int c : rec.correct)
            if (c < 0) throw std::runtime_error("LAS CSV: sentence " + key + " misses grid points");
    return table;
}

LasTable median_las_tables(const std::vector<LasTable>& per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("no LAS tables to aggregate");
    LasTable out = per_seed.front();
    if (per_seed.size() == 1) return out;
    for (auto& [key, rec] : out) {
        const size_t npoints = rec.correct.size();
        for (size_t p = 0; p < npoints; ++p) {
            std::vector<int> vals;
            vals.reserve(per_seed.size());
            for (const LasTable& t : per_seed) {
                auto it = t.find(key);
                if (it == t.end() || it->second.correct.size() != npoints)
                    throw std::invalid_argument("seed tables disagree on sentence " + key);
                vals.push_back(it->second.correct[p]);
            }
            std::sort(vals.begin(), vals.end());
            rec.correct[p] = vals[(vals.size() - 1) / 2];  // lower median
        }
    }
    return out;
}

std::vector<Neighbor> retrieve(const RetrievalIndex& index, const SentenceRepresentation& query,
                               int k, bool* truncated) {
    if (index.reps.empty()) throw std::invalid_argument("empty retrieval index");
    std::vector<Neighbor> all;
    all.reserve(index.reps.size());
    for (const SentenceRepresentation& r : index.reps)
        all.push_back({r.key, cosine(query, r)});
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.key < b.key;
    });
    if (truncated) *truncated = static_cast<size_t>(k) > all.size();
    if (static_cast<size_t>(k) < all.size()) all.resize(k);
    return all;
}

std::vector<size_t> best_points(const SentenceLas& records, const WeightGrid& grid,
                                SampleSpace space) {
    const std::vector<size_t> pts = grid.space_points(space);
    if (records.correct.size() != grid.size())
        throw std::invalid_argument("LAS records do not cover the grid");
    int best = -1;
    for (size_t p : pts) best = std::max(best, records.correct[p]);
    std::vector<size_t> out;
    for (size_t p : pts)
        if (records.correct[p] == best) out.push_back(p);
    return out;
}

TieBreak parse_tie_break(const std::string& s) {
    if (s == "uniform-closest") return TieBreak::kUniformClosest;
    if (s == "next-neighbor-rerank") return TieBreak::kNextNeighborRerank;
    if (s == "k-average") return TieBreak::kKAverage;
    throw std::invalid_argument("unknown tie-break strategy: " + s);
}

std::string tie_break_name(TieBreak t) {
    switch (t) {
        case TieBreak::kUniformClosest: return "uniform-closest";
        case TieBreak::kNextNeighborRerank: return "next-neighbor-rerank";
        case TieBreak::kKAverage: return "k-average";
    }
    return "?";
}

size_t closest_to_uniform(const std::vector<size_t>& candidates, const WeightGrid& grid) {
    if (candidates.empty()) throw std::invalid_argument("empty candidate set");
    const WeightVector u = uniform(grid.m);
    size_t best = candidates.front();
    double best_d = 1e300;
    for (size_t p : candidates) {
        double d = 0.0;
        for (int i = 0; i < grid.m; ++i) {
            const double diff = grid.points[p][i] - u[i];
            d += diff * diff;
        }
        if (d < best_d - 1e-15 || (std::fabs(d - best_d) <= 1e-15 && p < best)) {
            best_d = d;
            best = p;
        }
    }
    return best;
}

Prediction predict_se_se(const PredictorConfig& config, const RetrievalIndex& index,
                         const SentenceRepresentation& query) {
    Prediction pred;
    pred.neighbors = retrieve(index, query, config.k);
    const WeightGrid& grid = index.grid;

    auto records_of = [&index](const std::string& key) -> const SentenceLas& {
        auto it = index.las.find(key);
        if (it == index.las.end())
            throw std::invalid_argument("indexed sentence without LAS records: " + key);
        return it->second;
    };

    std::vector<size_t> candidates;
    if (config.tie_break == TieBreak::kKAverage) {
        // argmax of mean LAS across the k retrieved neighbors
        const std::vector<size_t> pts = grid.space_points(config.space);
        double best = -1.0;
        std::vector<double> mean(grid.size(), 0.0);
        for (const Neighbor& nb : pred.neighbors) {
            const SentenceLas& rec = records_of(nb.key);
            for (size_t p : pts) mean[p] += rec.las(p);
        }
        for (size_t p : pts) best = std::max(best, mean[p]);
        for (size_t p : pts)
            if (mean[p] >= best - 1e-12) candidates.push_back(p);
    } else {
        candidates = best_points(records_of(pred.neighbors.front().key), grid, config.space);
        if (config.tie_break == TieBreak::kNextNeighborRerank) {
            for (size_t j = 1; j < pred.neighbors.size() && candidates.size() > 1; ++j) {
                const SentenceLas& rec = records_of(pred.neighbors[j].key);
                int best = -1;
                for (size_t p : candidates) best = std::max(best, rec.correct[p]);
                std::vector<size_t> kept;
                for (size_t p : candidates)
                    if (rec.correct[p] == best) kept.push_back(p);
                candidates = std::move(kept);
            }
        }
    }
    pred.point_id = closest_to_uniform(candidates, grid);
    pred.weights = grid.points[pred.point_id];
    return pred;
}

TreebankEvidence make_treebank_evidence(int treebank_id, const TreebankRepresentation& centroid,
                                        const LasTable& las, const WeightGrid& grid) {
    TreebankEvidence ev;
    ev.treebank_id = treebank_id;
    ev.centroid = centroid;
    ev.correct.assign(grid.size(), 0);
    for (const auto& [key, rec] : las) {
        if (rec.correct.size() != grid.size())
            throw std::invalid_argument("LAS records do not cover the grid (sentence " + key + ")");
        for (size_t p = 0; p < grid.size(); ++p) ev.correct[p] += rec.correct[p];
        ev.total += rec.total;
    }
    return ev;
}

Prediction predict_tr_tr(const PredictorConfig& config, const WeightGrid& grid,
                         const std::vector<TreebankEvidence>& evidence,
                         const std::vector<SentenceRepresentation>& test_reps) {
    if (evidence.empty()) throw std::invalid_argument("no treebank evidence");
    const TreebankRepresentation query = treebank_centroid(0, test_reps);

    const TreebankEvidence* chosen = nullptr;
    double best_sim = -2.0;
    for (const TreebankEvidence& ev : evidence) {
        const double sim = cosine(query.vector, ev.centroid.vector);
        if (sim > best_sim ||
            (sim == best_sim && chosen && ev.treebank_id < chosen->treebank_id)) {
            best_sim = sim;
            chosen = &ev;
        }
    }

    Prediction pred;
    pred.neighbors.push_back({"treebank:" + std::to_string(chosen->treebank_id), best_sim});
    const std::vector<size_t> pts = grid.space_points(config.space);
    long long best = -1;
    for (size_t p : pts) best = std::max(best, chosen->correct[p]);
    std::vector<size_t> candidates;
    for (size_t p : pts)
        if (chosen->correct[p] == best) candidates.push_back(p);
    pred.point_id = closest_to_uniform(candidates, grid);
    pred.weights = grid.points[pred.point_id];
    return pred;
}

Prediction proxy_baseline(const WeightGrid& grid, const std::vector<long long>& correct,
                          long long total, bool best) {
    if (correct.size() != grid.size())
        throw std::invalid_argument("aggregate LAS does not cover the grid");
    const std::vector<size_t> corners = grid.space_points(SampleSpace::kFixed);
    Prediction pred;
    bool first = true;
    for (size_t p : corners) {
        const bool better = first || (best ? correct[p] > correct[pred.point_id]
                                           : correct[p] < correct[pred.point_id]);
        if (better) {
            pred.point_id = p;
            first = false;
        }
    }
    (void)total;
    pred.weights = grid.points[pred.point_id];
    return pred;
}

WeightVector equal_baseline(int m) { return uniform(m); }

Prediction random_baseline(const WeightGrid& grid, SampleSpace space, uint64_t seed) {
    const std::vector<size_t> pts = grid.space_points(space);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, pts.size() - 1);
    Prediction pred;
    pred.point_id = pts[pick(rng)];
    pred.weights = grid.points[pred.point_id];
    return pred;
}

std::string prediction_report_csv(const WeightGrid& grid,
                                  const std::vector<std::pair<std::string, Prediction>>& rows,
                                  const PredictorConfig& config) {
    std::string out = "sentence_key,point_id";
    for (int t = 1; t <= grid.m; ++t) out += ",alpha_" + std::to_string(t);
    out += ",strategy,k,space\n";
    for (const auto& [key, pred] : rows) {
        out += key;
        out += ',';
        out += std::to_string(pred.point_id);
        for (double a : pred.weights) out += "," + format_double(a);
        out += ',';
        out += tie_break_name(config.tie_break);
        out += ',';
        out += std::to_string(config.k);
        out += ',';
        out += sample_space_name(config.space);
        out += '\n';
    }
    return out;
}

}  // namespace tbvec
