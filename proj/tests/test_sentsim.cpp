#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tbvec/sentsim.hpp"

using namespace tbvec;

namespace {

Sentence sent(const std::string& id, const std::vector<std::string>& forms) {
    Sentence s;
    s.id = id;
    for (size_t i = 0; i < forms.size(); ++i) {
        Token t;
        t.index = static_cast<int>(i) + 1;
        t.form = forms[i];
        s.tokens.push_back(t);
    }
    return s;
}

SentenceRepresentation sparse_rep(const std::string& key,
                                  const std::map<std::string, double>& entries) {
    SentenceRepresentation r;
    r.key = key;
    r.sparse = entries;
    r.update_norm();
    return r;
}

SentenceRepresentation dense_rep(const std::string& key, const std::vector<double>& values) {
    SentenceRepresentation r;
    r.key = key;
    r.dense = values;
    r.update_norm();
    return r;
}

}  // namespace

TEST_CASE("sentence text carries boundary markers") {
    CHECK(sentence_text(sent("a", {"ab"})) == "^ab$");
    CHECK(sentence_text(sent("a", {"ka", "po"})) == "^ka po$");
}

TEST_CASE("idf ordering on a tiny corpus") {
    // corpus {"ab", "ab", "cd"}: the bigram "ab" occurs in 2 docs, "cd" in 1
    CharNgramTfidf tfidf(2, 2);
    tfidf.fit({sent("1", {"ab"}), sent("2", {"ab"}), sent("3", {"cd"})});
    const double idf_ab = tfidf.idf("ab");
    const double idf_cd = tfidf.idf("cd");
    const double idf_unseen = tfidf.idf("zz");
    CHECK(idf_ab == doctest::Approx(std::log(4.0 / 3.0) + 1.0));
    CHECK(idf_cd == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
    CHECK(idf_unseen == doctest::Approx(std::log(4.0 / 1.0) + 1.0));
    CHECK(idf_ab < idf_cd);
    CHECK(idf_cd < idf_unseen);
}

TEST_CASE("transform produces positive weights and a norm") {
    CharNgramTfidf tfidf;  // default 2..5
    const std::vector<Sentence> corpus = {sent("1", {"ka", "po"}), sent("2", {"ta", "su"})};
    tfidf.fit(corpus);
    const SentenceRepresentation rep = tfidf.transform(corpus[0]);
    CHECK(rep.key == "1");
    CHECK(!rep.sparse.empty());
    CHECK(rep.norm > 0.0);
    for (const auto& [g, w] : rep.sparse) {
        CHECK(w > 0.0);
        CHECK(g.size() >= 2);
        CHECK(g.size() <= 5);
    }
    // "^ka" must be present: boundary markers participate in the n-grams
    CHECK(rep.sparse.count("^ka") == 1);
}

TEST_CASE("transform before fit fails") {
    CharNgramTfidf tfidf;
    CHECK_THROWS_AS(tfidf.transform(sent("1", {"ab"})), std::logic_error);
    CHECK_THROWS_AS(tfidf.fit({}), std::invalid_argument);
    CHECK_THROWS_AS(CharNgramTfidf(3, 2), std::invalid_argument);
}

TEST_CASE("cosine hand values") {
    SUBCASE("sparse") {
        const auto a = sparse_rep("a", {{"x", 1.0}, {"y", 1.0}});
        const auto b = sparse_rep("b", {{"x", 1.0}, {"z", 1.0}});
        CHECK(cosine(a, b) == doctest::Approx(0.5));
        CHECK(cosine(a, a) == doctest::Approx(1.0));
        const auto zero = sparse_rep("z", {});
        CHECK(cosine(a, zero) == 0.0);
    }
    SUBCASE("dense") {
        const auto a = dense_rep("a", {1.0, 1.0, 0.0});
        const auto b = dense_rep("b", {1.0, 0.0, 1.0});
        CHECK(cosine(a, b) == doctest::Approx(0.5));
        const auto opposite = dense_rep("c", {-1.0, -1.0, 0.0});
        CHECK(cosine(a, opposite) == doctest::Approx(-1.0));
    }
    SUBCASE("mixing kinds is an error") {
        const auto a = sparse_rep("a", {{"x", 1.0}});
        const auto b = dense_rep("b", {1.0});
        CHECK_THROWS_AS(cosine(a, b), std::invalid_argument);
    }
    SUBCASE("dense dimension mismatch is an error") {
        CHECK_THROWS_AS(cosine(dense_rep("a", {1.0}), dense_rep("b", {1.0, 2.0})),
                        std::invalid_argument);
    }
}

TEST_CASE("identical sentences get cosine 1 regardless of corpus") {
    CharNgramTfidf tfidf;
    const std::vector<Sentence> corpus = {sent("1", {"ka", "po"}), sent("2", {"ta", "su"}),
                                          sent("3", {"ka", "su"})};
    tfidf.fit(corpus);
    const auto a = tfidf.transform(sent("q1", {"ka", "po"}));
    const auto b = tfidf.transform(sent("q2", {"ka", "po"}));
    CHECK(cosine(a, b) == doctest::Approx(1.0));
}

TEST_CASE("treebank centroid") {
    SUBCASE("dense hand example") {
        const auto c =
            treebank_centroid(1, {dense_rep("a", {1.0, 0.0}), dense_rep("b", {0.0, 1.0})});
        CHECK(c.treebank_id == 1);
        REQUIRE(c.vector.dense.size() == 2);
        const double r = std::sqrt(2.0) / 2.0;
        CHECK(c.vector.dense[0] == doctest::Approx(r));
        CHECK(c.vector.dense[1] == doctest::Approx(r));
        CHECK(c.vector.norm == doctest::Approx(1.0));
    }
    SUBCASE("duplicating every sentence leaves the centroid unchanged") {
        const std::vector<SentenceRepresentation> reps = {dense_rep("a", {1.0, 2.0}),
                                                          dense_rep("b", {3.0, 1.0})};
        std::vector<SentenceRepresentation> doubled = reps;
        doubled.insert(doubled.end(), reps.begin(), reps.end());
        const auto c1 = treebank_centroid(1, reps);
        const auto c2 = treebank_centroid(1, doubled);
        for (size_t i = 0; i < 2; ++i)
            CHECK(c1.vector.dense[i] == doctest::Approx(c2.vector.dense[i]));
    }
    SUBCASE("degenerate inputs") {
        CHECK_THROWS_AS(treebank_centroid(1, {}), std::invalid_argument);
        CHECK_THROWS_AS(treebank_centroid(1, {dense_rep("a", {0.0, 0.0})}),
                        std::invalid_argument);
    }
}

TEST_CASE("dense-vector file round trip") {
    const std::vector<SentenceRepresentation> reps = {dense_rep("s1", {0.5, -1.25, 3.0}),
                                                      dense_rep("s2", {1.0, 0.0, 2.5})};
    const std::string text = write_dense_vectors(reps);
    std::istringstream in(text);
    const auto loaded = load_dense_vectors(in);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].key == "s1");
    CHECK(loaded[0].dense == reps[0].dense);
    CHECK(loaded[1].dense == reps[1].dense);
    CHECK(loaded[1].norm == doctest::Approx(reps[1].norm));
}

TEST_CASE("dense-vector loader errors") {
    SUBCASE("bad header") {
        std::istringstream in("#vectors\ns1\t1\t1.0\n");
        CHECK_THROWS_WITH_AS(load_dense_vectors(in), doctest::Contains("header"),
                             std::runtime_error);
    }
    SUBCASE("dimension mismatch within a row") {
        std::istringstream in("#dense-vectors v1\ns1\t3\t1.0 2.0\n");
        CHECK_THROWS_WITH_AS(load_dense_vectors(in), doctest::Contains("line 2"),
                             std::runtime_error);
    }
    SUBCASE("dimension differs across rows") {
        std::istringstream in("#dense-vectors v1\ns1\t2\t1.0 2.0\ns2\t3\t1.0 2.0 3.0\n");
        CHECK_THROWS_AS(load_dense_vectors(in), std::runtime_error);
    }
    SUBCASE("non-finite value names the row") {
        std::istringstream in("#dense-vectors v1\ns1\t2\t1.0 nan\n");
        CHECK_THROWS_WITH_AS(load_dense_vectors(in), doctest::Contains("s1"), std::runtime_error);
    }
    SUBCASE("duplicate key") {
        std::istringstream in("#dense-vectors v1\ns1\t1\t1.0\ns1\t1\t2.0\n");
        CHECK_THROWS_WITH_AS(load_dense_vectors(in), doctest::Contains("duplicate"),
                             std::runtime_error);
    }
}
