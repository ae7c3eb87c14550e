#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tbvec/conllu.hpp"
#include "tbvec/parser.hpp"
#include "tbvec/synth.hpp"
#include "tbvec/util.hpp"

using namespace tbvec;

namespace {

ParserConfig tiny_config() {
    ParserConfig cfg;
    cfg.word_dim = 8;
    cfg.char_dim = 4;
    cfg.char_hidden = 6;
    cfg.tb_dim = 3;
    cfg.hidden = 12;
    cfg.epochs = 1;
    cfg.seed = 7;
    return cfg;
}

std::vector<Treebank> tiny_suite(uint64_t seed = 11) {
    SynthSpec spec = default_synth_spec();
    spec.train_size = 30;
    spec.dev_size = 8;
    spec.test_size = 4;
    auto suite = generate_synthetic_suite(spec, seed);
    suite.pop_back();  // training treebanks only
    return suite;
}

const ParserModel& tiny_model() {
    static const ParserModel model = train(tiny_suite(), tiny_config());
    return model;
}

Sentence gold_sentence(const std::vector<int>& heads, const std::vector<std::string>& deprels) {
    Sentence s;
    s.id = "t";
    for (size_t i = 0; i < heads.size(); ++i) {
        Token t;
        t.index = static_cast<int>(i) + 1;
        t.form = "w" + std::to_string(i);
        t.head = heads[i];
        t.deprel = deprels[i];
        s.tokens.push_back(t);
    }
    return s;
}

std::vector<std::string> oracle_names(const ParserModel& m, const Sentence& s) {
    std::vector<std::string> names;
    for (const Transition& t : oracle_transitions(m, s).transitions)
        names.push_back(transition_name(m, t));
    return names;
}

}  // namespace

TEST_CASE("interpolation at a corner returns that embedding row exactly") {
    const ParserModel& m = tiny_model();
    for (int t = 1; t <= m.num_treebanks; ++t) {
        const std::vector<double> f = interpolate_tbvec(m, corner(t, m.num_treebanks));
        const double* row = m.tb_row(t);
        for (int i = 0; i < m.config.tb_dim; ++i) CHECK(f[i] == row[i]);
    }
}

TEST_CASE("interpolation is the plain linear combination") {
    ParserModel m = tiny_model();  // copy, then overwrite the embedding table
    REQUIRE(m.config.tb_dim == 3);
    for (int t = 1; t <= 3; ++t)
        for (int i = 0; i < 3; ++i)
            m.theta[m.off_tb + (t - 1) * 3 + i] = (t - 1 == i) ? 1.0 : 0.0;

    const std::vector<double> u = interpolate_tbvec(m, uniform(3));
    for (int i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));

    const std::vector<double> v = interpolate_tbvec(m, {-0.25, 0.5, 0.75});
    CHECK(v == std::vector<double>{-0.25, 0.5, 0.75});

    CHECK_THROWS_AS(interpolate_tbvec(m, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("token encoding layout") {
    const ParserModel& m = tiny_model();
    Token tok;
    tok.index = 1;
    tok.form = "ta";  // determiner, always in vocabulary
    REQUIRE(m.word_id(tok.form) != 0);

    const std::vector<double> f1 = interpolate_tbvec(m, corner(1, 3));
    const std::vector<double> enc1 = encode_token(m, tok, f1);
    REQUIRE(static_cast<int>(enc1.size()) == m.config.enc_dim());
    const int tb_start = m.config.word_dim + 2 * m.config.char_hidden;
    for (int i = 0; i < m.config.tb_dim; ++i) CHECK(enc1[tb_start + i] == f1[i]);

    SUBCASE("two treebank vectors differ only in the last segment") {
        const std::vector<double> enc2 = encode_token(m, tok, interpolate_tbvec(m, corner(2, 3)));
        for (int i = 0; i < tb_start; ++i) CHECK(enc1[i] == enc2[i]);
        bool tail_differs = false;
        for (int i = tb_start; i < m.config.enc_dim(); ++i) tail_differs |= enc1[i] != enc2[i];
        CHECK(tail_differs);
    }
    SUBCASE("unseen forms use the UNK word row") {
        Token unseen;
        unseen.index = 1;
        unseen.form = "xyzzyqwerty";
        REQUIRE(m.word_id(unseen.form) == 0);
        const std::vector<double> enc = encode_token(m, unseen, f1);
        for (int i = 0; i < m.config.word_dim; ++i)
            CHECK(enc[i] == m.theta[m.off_word + i]);  // UNK row is row 0
    }
}

TEST_CASE("arc-hybrid oracle sequences") {
    const ParserModel& m = tiny_model();
    SUBCASE("two tokens, heads [2,0]") {
        // hand simulation of arc-hybrid: the nsubj arc is built from the
        // buffer before its head is shifted
        const Sentence s = gold_sentence({2, 0}, {"nsubj", "root"});
        CHECK(oracle_names(m, s) == std::vector<std::string>{"shift", "left-arc(nsubj)", "shift",
                                                             "right-arc(root)"});
    }
    SUBCASE("single token") {
        const Sentence s = gold_sentence({0}, {"root"});
        CHECK(oracle_names(m, s) == std::vector<std::string>{"shift", "right-arc(root)"});
    }
    SUBCASE("crossing arcs are flagged") {
        // 1->3, 2->4 cross
        const Sentence s = gold_sentence({3, 4, 0, 3}, {"obj", "obj", "root", "obj"});
        REQUIRE(!is_projective({3, 4, 0, 3}));
        const OracleResult res = oracle_transitions(m, s);
        CHECK(!res.was_projective);
    }
    SUBCASE("oracle reproduces the gold arcs") {
        for (const Treebank& tb : tiny_suite()) {
            for (size_t i = 0; i < 5; ++i) {
                const Sentence& s = tb.dev[i];
                const OracleResult res = oracle_transitions(m, s);
                CHECK(res.was_projective);
                // replay: count arc transitions, they must equal sentence length
                size_t arcs = 0;
                for (const Transition& t : res.transitions)
                    if (t.kind != ActionKind::kShift) ++arcs;
                CHECK(arcs == s.tokens.size());
            }
        }
    }
}

TEST_CASE("projectivity helpers") {
    CHECK(is_projective({2, 0}));
    CHECK(is_projective({2, 0, 2}));
    CHECK(!is_projective({3, 4, 0, 3}));
    const std::vector<int> lifted = projectivize({3, 4, 0, 3});
    CHECK(is_projective(lifted));
    CHECK(projectivize({2, 0, 2}) == std::vector<int>{2, 0, 2});  // already projective
}

TEST_CASE("training determinism") {
    const auto suite = tiny_suite();
    const ParserModel a = train(suite, tiny_config());
    const ParserModel b = train(suite, tiny_config());
    CHECK(a.theta == b.theta);

    ParserConfig other = tiny_config();
    other.seed = 8;
    const ParserModel c = train(suite, other);
    CHECK(a.theta != c.theta);
}

TEST_CASE("training decreases the loss") {
    TrainReport report;
    ParserConfig cfg = tiny_config();
    cfg.epochs = 3;
    train(tiny_suite(), cfg, &report);
    CHECK(report.final_loss < report.initial_loss);
    CHECK(report.skipped_nonprojective == 0);
}

TEST_CASE("training rejects empty data") {
    CHECK_THROWS_AS(train({}, tiny_config()), std::invalid_argument);
    std::vector<Treebank> empty_tb(1);
    empty_tb[0].id = 1;
    empty_tb[0].name = "empty";
    CHECK_THROWS_AS(train(empty_tb, tiny_config()), std::invalid_argument);
}

TEST_CASE("all parses are valid trees, negative weights included") {
    const ParserModel& m = tiny_model();
    const std::vector<WeightVector> points = {
        corner(1, 3), uniform(3), {-0.25, 0.5, 0.75}, {1.5, -0.25, -0.25}};
    for (const Treebank& tb : tiny_suite())
        for (size_t i = 0; i < 3; ++i)
            for (const WeightVector& w : points) {
                const ParseResult pr = parse(m, tb.dev[i], w);
                Sentence hyp = tb.dev[i];
                for (size_t t = 0; t < hyp.tokens.size(); ++t) {
                    hyp.tokens[t].head = pr.heads[t];
                    hyp.tokens[t].deprel = pr.deprels[t];
                }
                CHECK(validate_tree(hyp).empty());
            }
}

TEST_CASE("corner parse equals parsing with the fixed embedding row") {
    const ParserModel& m = tiny_model();
    const auto suite = tiny_suite();
    for (int t = 1; t <= 3; ++t) {
        const double* row = m.tb_row(t);
        const std::vector<double> fixed(row, row + m.config.tb_dim);
        for (size_t i = 0; i < 4; ++i) {
            const ParseResult a = parse(m, suite[0].dev[i], corner(t, 3));
            const ParseResult b = parse_with_tbvec(m, suite[0].dev[i], fixed);
            CHECK(a.heads == b.heads);
            CHECK(a.deprels == b.deprels);
        }
    }
}

TEST_CASE("parse rejects weights that do not sum to one") {
    CHECK_THROWS_AS(parse(tiny_model(), tiny_suite()[0].dev[0], {0.5, 0.5, 0.5}),
                    std::invalid_argument);
}

TEST_CASE("gradients match central finite differences") {
    ParserConfig cfg = tiny_config();
    cfg.epochs = 0;  // random initialization is enough for the check
    const ParserModel m = train(tiny_suite(), cfg);

    const auto suite = tiny_suite();
    std::vector<const Sentence*> batch = {&suite[0].train[0], &suite[1].train[1],
                                          &suite[2].train[2]};
    std::vector<double> grad;
    loss_and_grad(m, batch, &grad);

    ParserModel probe = m;
    const double h = 1e-5;
    // sample a fixed spread of coordinates; full finite differences over the
    // whole vector would be needlessly slow
    for (size_t i = 0; i < probe.theta.size(); i += 97) {
        const double saved = probe.theta[i];
        probe.theta[i] = saved + h;
        const double lp = loss_and_grad(probe, batch, nullptr);
        probe.theta[i] = saved - h;
        const double lm = loss_and_grad(probe, batch, nullptr);
        probe.theta[i] = saved;
        const double fd = (lp - lm) / (2 * h);
        const double denom = std::max(1e-6, std::fabs(fd) + std::fabs(grad[i]));
        CHECK(std::fabs(fd - grad[i]) / denom < 1e-4);
    }
}

TEST_CASE("model serialization round trip") {
    namespace fs = std::filesystem;
    const ParserModel& m = tiny_model();
    const std::string path = (fs::temp_directory_path() / "tbvec_test_model.bin").string();
    save_model(m, path);
    const ParserModel loaded = load_model(path);

    CHECK(loaded.num_treebanks == m.num_treebanks);
    CHECK(loaded.word_ids == m.word_ids);
    CHECK(loaded.labels == m.labels);
    CHECK(loaded.theta.size() == m.theta.size());
    // float32 storage: parameters agree to float precision
    for (size_t i = 0; i < m.theta.size(); ++i)
        CHECK(loaded.theta[i] == static_cast<double>(static_cast<float>(m.theta[i])));

    SUBCASE("saving is deterministic") {
        const std::string path2 = (fs::temp_directory_path() / "tbvec_test_model2.bin").string();
        save_model(m, path2);
        CHECK(read_file(path) == read_file(path2));
        fs::remove(path2);
    }
    SUBCASE("version mismatch fails loudly") {
        std::string bytes = read_file(path);
        bytes[8] = 99;  // format-version field
        const std::string bad = (fs::temp_directory_path() / "tbvec_test_model_bad.bin").string();
        atomic_write_file(bad, bytes);
        CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("version"), std::runtime_error);
        fs::remove(bad);
    }
    fs::remove(path);
}
