#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "tbvec/conllu.hpp"
#include "tbvec/eval.hpp"
#include "tbvec/parser.hpp"
#include "tbvec/predict.hpp"
#include "tbvec/sentsim.hpp"
#include "tbvec/synth.hpp"
#include "tbvec/util.hpp"
#include "tbvec/weight_space.hpp"

namespace fs = std::filesystem;
using namespace tbvec;

namespace {

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

// "1..9" or plain numbers
std::vector<uint64_t> parse_seeds(const std::vector<std::string>& specs) {
    std::vector<uint64_t> seeds;
    for (const std::string& s : specs) {
        const size_t dots = s.find("..");
        if (dots != std::string::npos) {
            const uint64_t lo = std::stoull(s.substr(0, dots));
            const uint64_t hi = std::stoull(s.substr(dots + 2));
            if (hi < lo) throw CLI::ValidationError("--seeds", "range " + s + " is empty");
            for (uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
        } else {
            seeds.push_back(std::stoull(s));
        }
    }
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
    return seeds;
}

std::vector<Treebank> load_treebanks(const std::vector<std::string>& paths) {
    std::vector<Treebank> tbs;
    for (size_t i = 0; i < paths.size(); ++i) {
        Treebank tb;
        tb.id = static_cast<int>(i) + 1;
        tb.name = file_stem(paths[i]);
        tb.train = read_conllu_file(paths[i], tb.name, tb.id);
        tbs.push_back(std::move(tb));
    }
    return tbs;
}

struct TrainArgs {
    std::vector<std::string> treebanks;
    std::vector<std::string> seeds{"1"};
    std::string out = ".";
    ParserConfig config;
};

int cmd_train(const TrainArgs& args) {
    const std::vector<uint64_t> seeds = parse_seeds(args.seeds);
    for (const std::string& p : args.treebanks)
        if (!fs::exists(p)) {
            std::cerr << "error: treebank file not found: " << p << "\n";
            return 1;
        }
    const std::vector<Treebank> tbs = load_treebanks(args.treebanks);
    fs::create_directories(args.out);

    std::map<std::string, std::string> manifest;
    manifest["command"] = "train";
    for (size_t i = 0; i < args.treebanks.size(); ++i)
        manifest["treebank_" + std::to_string(i + 1)] = args.treebanks[i];
    manifest["epochs"] = std::to_string(args.config.epochs);
    manifest["learning_rate"] = format_double(args.config.learning_rate);
    manifest["word_dim"] = std::to_string(args.config.word_dim);
    manifest["char_dim"] = std::to_string(args.config.char_dim);
    manifest["char_hidden"] = std::to_string(args.config.char_hidden);
    manifest["tb_dim"] = std::to_string(args.config.tb_dim);
    manifest["hidden"] = std::to_string(args.config.hidden);

    for (uint64_t seed : seeds) {
        ParserConfig cfg = args.config;
        cfg.seed = seed;
        TrainReport report;
        const ParserModel model = train(tbs, cfg, &report);
        const std::string path =
            (fs::path(args.out) / ("model-seed" + std::to_string(seed) + ".bin")).string();
        save_model(model, path);
        manifest["seed_" + std::to_string(seed) + "_model"] = path;
        manifest["seed_" + std::to_string(seed) + "_initial_loss"] = format_double(report.initial_loss);
        manifest["seed_" + std::to_string(seed) + "_final_loss"] = format_double(report.final_loss);
        std::cout << "trained seed " << seed << ": loss " << report.initial_loss << " -> "
                  << report.final_loss << " (" << path << ")\n";
    }
    atomic_write_file((fs::path(args.out) / "train-manifest.txt").string(),
                      format_manifest(manifest));
    return 0;
}

struct SweepArgs {
    std::vector<std::string> models;
    std::string test;
    double grid_step = 0.125;
    double grid_margin = 0.5;
    int jobs = 1;
    std::string out = ".";
    bool svg = true;
};

int cmd_sweep(const SweepArgs& args) {
    std::vector<SweepResult> results;
    fs::create_directories(args.out);
    std::map<std::string, std::string> manifest;
    manifest["command"] = "sweep";
    manifest["test"] = args.test;
    manifest["grid_step"] = format_double(args.grid_step);
    manifest["grid_margin"] = format_double(args.grid_margin);

    for (const std::string& model_path : args.models) {
        const ParserModel model = load_model(model_path);
        const std::vector<Sentence> test = read_conllu_file(args.test, file_stem(args.test));
        const WeightGrid grid = generate_grid(model.num_treebanks, args.grid_step, args.grid_margin);
        const SweepResult res = sweep(model, test, grid, args.jobs);
        const std::string stem = file_stem(model_path);
        atomic_write_file((fs::path(args.out) / ("sweep-" + stem + ".csv")).string(),
                          sweep_to_csv(res));
        atomic_write_file((fs::path(args.out) / ("sweep-" + stem + "-sentences.csv")).string(),
                          las_table_to_csv(res.per_sentence));
        if (args.svg) {
            if (model.num_treebanks == 3) {
                atomic_write_file((fs::path(args.out) / ("sweep-" + stem + ".svg")).string(),
                                  sweep_to_svg(res));
            } else {
                std::cout << "note: SVG heatmap needs m=3, model has m=" << model.num_treebanks
                          << "; CSV only\n";
            }
        }
        manifest["model_" + stem] = model_path;
        results.push_back(res);
    }
    if (results.size() > 1) {
        const std::vector<double> med = median_over_seeds(results);
        std::string csv = "point_id";
        for (int t = 1; t <= results.front().grid.m; ++t) csv += ",alpha_" + std::to_string(t);
        csv += ",median_las\n";
        for (size_t p = 0; p < med.size(); ++p) {
            csv += std::to_string(p);
            for (double a : results.front().grid.points[p]) csv += "," + format_double(a);
            csv += "," + format_double(med[p]) + "\n";
        }
        atomic_write_file((fs::path(args.out) / "sweep-median.csv").string(), csv);
    }
    atomic_write_file((fs::path(args.out) / "sweep-manifest.txt").string(),
                      format_manifest(manifest));
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string input;
    std::vector<std::string> index_conllu;   // one file per training treebank
    std::vector<std::string> index_las;      // one or more seeds, median-merged
    std::vector<std::string> oracle_las;     // LAS records of the input file, oracle mode
    std::string mode = "se-se";
    std::string space = "any";
    std::string tie_break = "uniform-closest";
    std::string representation = "sparse";
    std::string dense_file;        // query-side dense vectors
    std::string index_dense_file;  // index-side dense vectors
    int k = 1;
    bool oracle = false;
    double grid_step = 0.125;
    double grid_margin = 0.5;
    std::string out = ".";
};

std::map<std::string, SentenceRepresentation> dense_by_key(const std::string& path) {
    std::map<std::string, SentenceRepresentation> by_key;
    for (SentenceRepresentation& r : load_dense_vectors_file(path)) by_key[r.key] = std::move(r);
    return by_key;
}

SentenceRepresentation dense_for(const std::map<std::string, SentenceRepresentation>& by_key,
                                 const std::string& key) {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw std::runtime_error("no dense vector for sentence " + key);
    return it->second;
}

int cmd_predict(const PredictArgs& args) {
    const ParserModel model = load_model(args.model);
    const WeightGrid grid = generate_grid(model.num_treebanks, args.grid_step, args.grid_margin);
    const std::vector<Sentence> input = read_conllu_file(args.input, file_stem(args.input));

    PredictorConfig config;
    config.k = args.k;
    config.space = parse_sample_space(args.space);
    config.tie_break = parse_tie_break(args.tie_break);
    config.oracle = args.oracle;

    if (args.oracle) {
        bool gold = !input.empty();
        for (const Sentence& s : input)
            if (!s.has_gold_heads()) gold = false;
        if (!gold) {
            std::cerr << "error: --oracle adds the input to the retrieval set, which needs gold "
                         "heads and deprels in the input file\n";
            return 1;
        }
        if (args.oracle_las.empty()) {
            std::cerr << "error: --oracle needs --oracle-las (sweep records of the input file)\n";
            return 1;
        }
    }

    // per-treebank sentences
    std::vector<std::vector<Sentence>> index_groups;
    for (size_t i = 0; i < args.index_conllu.size(); ++i)
        index_groups.push_back(read_conllu_file(args.index_conllu[i], file_stem(args.index_conllu[i]),
                                                static_cast<int>(i) + 1));

    // LAS evidence, median across seeds
    std::vector<LasTable> seed_tables;
    for (const std::string& p : args.index_las)
        seed_tables.push_back(las_table_from_csv(read_file(p), grid.size()));
    if (seed_tables.empty()) {
        std::cerr << "error: --index-las is required\n";
        return 1;
    }
    LasTable evidence_las = median_las_tables(seed_tables);
    if (args.oracle) {
        std::vector<LasTable> oracle_tables;
        for (const std::string& p : args.oracle_las)
            oracle_tables.push_back(las_table_from_csv(read_file(p), grid.size()));
        for (auto& [key, rec] : median_las_tables(oracle_tables)) evidence_las[key] = rec;
    }

    const bool dense = args.representation == "dense";
    if (!dense && args.representation != "sparse") {
        std::cerr << "error: --representation must be sparse or dense\n";
        return 1;
    }
    if (dense && (args.dense_file.empty() || args.index_dense_file.empty())) {
        std::cerr << "error: --representation dense needs --dense-file and --index-dense-file\n";
        return 1;
    }

    CharNgramTfidf tfidf;
    std::vector<Sentence> index_all;
    for (const auto& g : index_groups) index_all.insert(index_all.end(), g.begin(), g.end());
    if (!dense) {
        std::vector<Sentence> fit_corpus = index_all;
        if (args.oracle) fit_corpus.insert(fit_corpus.end(), input.begin(), input.end());
        tfidf.fit(fit_corpus);
    }
    std::map<std::string, SentenceRepresentation> dense_index, dense_query;
    if (dense) {
        dense_index = dense_by_key(args.index_dense_file);
        dense_query = dense_by_key(args.dense_file);
    }
    auto represent_index = [&](const Sentence& s) {
        return dense ? dense_for(dense_index, s.id) : tfidf.transform(s);
    };
    auto represent_query = [&](const Sentence& s) {
        return dense ? dense_for(dense_query, s.id) : tfidf.transform(s);
    };

    fs::create_directories(args.out);
    std::vector<std::pair<std::string, Prediction>> report_rows;
    std::vector<Sentence> parsed = input;

    if (args.mode == "se-se") {
        RetrievalIndex index;
        index.grid = grid;
        index.las = evidence_las;
        index.oracle = args.oracle;
        for (const Sentence& s : index_all) index.reps.push_back(represent_index(s));
        if (args.oracle)
            for (const Sentence& s : input) index.reps.push_back(represent_query(s));
        for (const SentenceRepresentation& r : index.reps)
            if (index.las.find(r.key) == index.las.end())
                throw std::runtime_error("no LAS records for indexed sentence " + r.key);
        for (size_t i = 0; i < input.size(); ++i) {
            const Prediction pred = predict_se_se(config, index, represent_query(input[i]));
            report_rows.emplace_back(input[i].id, pred);
            const ParseResult pr = parse(model, input[i], pred.weights);
            for (size_t t = 0; t < parsed[i].tokens.size(); ++t) {
                parsed[i].tokens[t].head = pr.heads[t];
                parsed[i].tokens[t].deprel = pr.deprels[t];
            }
        }
    } else if (args.mode == "tr-tr") {
        std::vector<TreebankEvidence> evidence;
        for (size_t g = 0; g < index_groups.size(); ++g) {
            std::vector<SentenceRepresentation> reps;
            LasTable group_las;
            for (const Sentence& s : index_groups[g]) {
                reps.push_back(represent_index(s));
                auto it = evidence_las.find(s.id);
                if (it == evidence_las.end())
                    throw std::runtime_error("no LAS records for indexed sentence " + s.id);
                group_las[s.id] = it->second;
            }
            const TreebankRepresentation centroid =
                treebank_centroid(static_cast<int>(g) + 1, reps);
            evidence.push_back(
                make_treebank_evidence(static_cast<int>(g) + 1, centroid, group_las, grid));
        }
        std::vector<SentenceRepresentation> query_reps;
        for (const Sentence& s : input) query_reps.push_back(represent_query(s));
        if (args.oracle) {
            LasTable test_las;
            for (const Sentence& s : input) {
                auto it = evidence_las.find(s.id);
                if (it == evidence_las.end())
                    throw std::runtime_error("no oracle LAS records for input sentence " + s.id);
                test_las[s.id] = it->second;
            }
            const int test_id = static_cast<int>(index_groups.size()) + 1;
            evidence.push_back(make_treebank_evidence(
                test_id, treebank_centroid(test_id, query_reps), test_las, grid));
        }
        const Prediction pred = predict_tr_tr(config, grid, evidence, query_reps);
        report_rows.emplace_back("<all>", pred);
        for (size_t i = 0; i < input.size(); ++i) {
            const ParseResult pr = parse(model, input[i], pred.weights);
            for (size_t t = 0; t < parsed[i].tokens.size(); ++t) {
                parsed[i].tokens[t].head = pr.heads[t];
                parsed[i].tokens[t].deprel = pr.deprels[t];
            }
        }
    } else {
        std::cerr << "error: --mode must be se-se or tr-tr\n";
        return 1;
    }

    atomic_write_file((fs::path(args.out) / "predictions.csv").string(),
                      prediction_report_csv(grid, report_rows, config));
    atomic_write_file((fs::path(args.out) / "parsed.conllu").string(), write_conllu(parsed));

    std::map<std::string, std::string> manifest;
    manifest["command"] = "predict";
    manifest["model"] = args.model;
    manifest["input"] = args.input;
    manifest["mode"] = args.mode;
    manifest["space"] = args.space;
    manifest["tie_break"] = args.tie_break;
    manifest["k"] = std::to_string(args.k);
    manifest["oracle"] = args.oracle ? "true" : "false";
    manifest["representation"] = args.representation;
    manifest["grid_step"] = format_double(args.grid_step);
    manifest["grid_margin"] = format_double(args.grid_margin);
    atomic_write_file((fs::path(args.out) / "predict-manifest.txt").string(),
                      format_manifest(manifest));
    return 0;
}

struct EvalArgs {
    std::string gold;
    std::string pred_a;
    std::string pred_b;
    int iterations = 10000;
    uint64_t seed = 1;
    std::string out;
};

int cmd_eval(const EvalArgs& args) {
    const std::vector<Sentence> gold = read_conllu_file(args.gold, file_stem(args.gold));
    auto load_pred = [&gold](const std::string& path) {
        const std::vector<Sentence> sents = read_conllu_file(path, file_stem(path));
        if (sents.size() != gold.size())
            throw std::runtime_error("sentence count mismatch: " + path + " has " +
                                     std::to_string(sents.size()) + ", gold has " +
                                     std::to_string(gold.size()));
        std::vector<ParseResult> preds;
        for (size_t i = 0; i < sents.size(); ++i) {
            if (sents[i].tokens.size() != gold[i].tokens.size())
                throw std::runtime_error("token count mismatch in sentence " + gold[i].id);
            ParseResult pr;
            for (const Token& t : sents[i].tokens) {
                pr.heads.push_back(t.head);
                pr.deprels.push_back(t.deprel);
            }
            preds.push_back(std::move(pr));
        }
        return preds;
    };

    const std::vector<ParseResult> pa = load_pred(args.pred_a);
    std::string report;
    if (!args.pred_b.empty()) {
        const std::vector<ParseResult> pb = load_pred(args.pred_b);
        const SignificanceResult sig = significance(gold, pa, pb, args.iterations, args.seed);
        report += "las_a = " + format_double(100.0 * sig.las_a) + "\n";
        report += "las_b = " + format_double(100.0 * sig.las_b) + "\n";
        report += "las_diff = " + format_double(100.0 * sig.las_diff) + "\n";
        report += "p_value = " + format_double(sig.p_value) + "\n";
        report += "iterations = " + std::to_string(args.iterations) + "\n";
    } else {
        long long correct = 0, total = 0;
        for (size_t i = 0; i < gold.size(); ++i) {
            const auto [c, t] = las(gold[i], pa[i]);
            correct += c;
            total += t;
        }
        report += "las = " + format_double(total ? 100.0 * correct / total : 0.0) + "\n";
        report += "correct = " + std::to_string(correct) + "\n";
        report += "total = " + std::to_string(total) + "\n";
    }
    if (args.out.empty())
        std::cout << report;
    else
        atomic_write_file(args.out, report);
    return 0;
}

struct SynthArgs {
    std::string spec_file;
    bool control = false;
    uint64_t seed = 1;
    std::string out = ".";
};

int cmd_synth(const SynthArgs& args) {
    SynthSpec spec;
    if (!args.spec_file.empty())
        spec = parse_synth_spec(read_file(args.spec_file));
    else
        spec = args.control ? control_synth_spec() : default_synth_spec();

    const std::vector<Treebank> tbs = generate_synthetic_suite(spec, args.seed);
    fs::create_directories(args.out);
    for (const Treebank& tb : tbs) {
        atomic_write_file((fs::path(args.out) / (tb.name + "-train.conllu")).string(),
                          write_conllu(tb.train));
        atomic_write_file((fs::path(args.out) / (tb.name + "-dev.conllu")).string(),
                          write_conllu(tb.dev));
        atomic_write_file((fs::path(args.out) / (tb.name + "-test.conllu")).string(),
                          write_conllu(tb.test));
    }
    std::map<std::string, std::string> manifest;
    manifest["command"] = "synth";
    manifest["seed"] = std::to_string(args.seed);
    manifest["treebanks"] = std::to_string(tbs.size());
    atomic_write_file((fs::path(args.out) / "synth-manifest.txt").string(),
                      format_manifest(manifest));
    atomic_write_file((fs::path(args.out) / "synth-spec.txt").string(), format_synth_spec(spec));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-treebank parser with interpolated treebank vectors"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "train one model per seed");
    train_cmd->add_option("--treebanks", train_args.treebanks, "training treebank CoNLL-U files")
        ->required()
        ->expected(-1);
    train_cmd->add_option("--seeds", train_args.seeds, "seed list or A..B ranges");
    train_cmd->add_option("--out", train_args.out, "output directory");
    train_cmd->add_option("--epochs", train_args.config.epochs, "training epochs");
    train_cmd->add_option("--lr", train_args.config.learning_rate, "SGD step size");
    train_cmd->add_option("--word-dim", train_args.config.word_dim, "word embedding dim");
    train_cmd->add_option("--char-dim", train_args.config.char_dim, "char embedding dim");
    train_cmd->add_option("--char-hidden", train_args.config.char_hidden, "char encoder state dim");
    train_cmd->add_option("--tb-dim", train_args.config.tb_dim, "treebank embedding dim");
    train_cmd->add_option("--hidden", train_args.config.hidden, "classifier hidden dim");

    SweepArgs sweep_args;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "LAS landscape over the weight grid");
    sweep_cmd->add_option("--model", sweep_args.models, "model file(s), one per seed")
        ->required()
        ->expected(-1);
    sweep_cmd->add_option("--test", sweep_args.test, "test CoNLL-U file")->required();
    sweep_cmd->add_option("--grid-step", sweep_args.grid_step, "lattice spacing");
    sweep_cmd->add_option("--grid-margin", sweep_args.grid_margin, "extension beyond the simplex");
    sweep_cmd->add_option("--jobs", sweep_args.jobs, "parallel fan-out");
    sweep_cmd->add_option("--out", sweep_args.out, "output directory");
    sweep_cmd->add_flag("--svg,!--no-svg", sweep_args.svg, "write the m=3 heatmap");

    PredictArgs predict_args;
    CLI::App* predict_cmd = app.add_subcommand("predict", "k-NN treebank vector prediction");
    predict_cmd->add_option("--model", predict_args.model, "parser model")->required();
    predict_cmd->add_option("--input", predict_args.input, "sentences to parse")->required();
    predict_cmd->add_option("--index-conllu", predict_args.index_conllu,
                            "retrieval sentences, one file per training treebank")
        ->required()
        ->expected(-1);
    predict_cmd->add_option("--index-las", predict_args.index_las,
                            "per-sentence sweep CSV(s) for the retrieval sentences")
        ->expected(-1);
    predict_cmd->add_option("--oracle-las", predict_args.oracle_las,
                            "per-sentence sweep CSV(s) for the input file (oracle mode)")
        ->expected(-1);
    predict_cmd->add_option("--mode", predict_args.mode, "se-se or tr-tr");
    predict_cmd->add_option("--space", predict_args.space, "fixed, nonneg or any");
    predict_cmd->add_option("--k", predict_args.k, "number of neighbours");
    predict_cmd->add_option("--tie-break", predict_args.tie_break,
                            "uniform-closest, next-neighbor-rerank or k-average");
    predict_cmd->add_option("--representation", predict_args.representation, "sparse or dense");
    predict_cmd->add_option("--dense-file", predict_args.dense_file, "query dense vectors");
    predict_cmd->add_option("--index-dense-file", predict_args.index_dense_file,
                            "index dense vectors");
    predict_cmd->add_flag("--oracle", predict_args.oracle, "add the input to the retrieval set");
    predict_cmd->add_option("--grid-step", predict_args.grid_step, "lattice spacing");
    predict_cmd->add_option("--grid-margin", predict_args.grid_margin, "extension beyond simplex");
    predict_cmd->add_option("--out", predict_args.out, "output directory");

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "LAS report and significance test");
    eval_cmd->add_option("--gold", eval_args.gold, "gold CoNLL-U")->required();
    eval_cmd->add_option("--pred", eval_args.pred_a, "system A predictions")->required();
    eval_cmd->add_option("--pred2", eval_args.pred_b, "system B predictions (enables the test)");
    eval_cmd->add_option("--iterations", eval_args.iterations, "permutation iterations");
    eval_cmd->add_option("--seed", eval_args.seed, "permutation seed");
    eval_cmd->add_option("--out", eval_args.out, "report file (stdout when omitted)");

    SynthArgs synth_args;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate the synthetic treebank suite");
    synth_cmd->add_option("--spec", synth_args.spec_file, "suite spec file");
    synth_cmd->add_flag("--control", synth_args.control,
                        "convention-identical control suite (ignored with --spec)");
    synth_cmd->add_option("--seed", synth_args.seed, "generator seed");
    synth_cmd->add_option("--out", synth_args.out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return cmd_train(train_args);
        if (*sweep_cmd) return cmd_sweep(sweep_args);
        if (*predict_cmd) return cmd_predict(predict_args);
        if (*eval_cmd) return cmd_eval(eval_args);
        if (*synth_cmd) return cmd_synth(synth_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
