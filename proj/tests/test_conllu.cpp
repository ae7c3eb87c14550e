#include <doctest.h>

#include "tbvec/conllu.hpp"
#include "tbvec/synth.hpp"

using namespace tbvec;

namespace {

std::string two_token_block() {
    return "1\tHe\t_\tPRON\t_\t_\t2\tnsubj\t_\t_\n"
           "2\truns\t_\tVERB\t_\t_\t0\troot\t_\t_\n\n";
}

}  // namespace

TEST_CASE("minimal well-formed tree") {
    const auto sents = read_conllu_string(two_token_block(), "tb");
    REQUIRE(sents.size() == 1);
    const Sentence& s = sents[0];
    REQUIRE(s.tokens.size() == 2);
    CHECK(s.tokens[0].head == 2);
    CHECK(s.tokens[1].head == 0);
    CHECK(s.tokens[0].form == "He");
    CHECK(s.tokens[0].deprel == "nsubj");
    CHECK(s.tokens[0].char_count() == 2);
    CHECK(s.id == "tb:1");  // no sent_id comment -> default key
}

TEST_CASE("empty input gives empty sentence list") {
    CHECK(read_conllu_string("", "tb").empty());
    CHECK(read_conllu_string("\n\n\n", "tb").empty());
}

TEST_CASE("out-of-range head is a validation error naming the sentence") {
    const std::string block =
        "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n"
        "2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "3\tc\t_\t_\t_\t_\t7\tdep\t_\t_\n"
        "4\td\t_\t_\t_\t_\t2\tdep\t_\t_\n\n";
    CHECK_THROWS_WITH_AS(read_conllu_string(block, "tb"),
                         doctest::Contains("tb:1"), ConlluError);
}

TEST_CASE("malformed column count reports the line number") {
    const std::string block = "1\tHe\t2\tnsubj\n";
    CHECK_THROWS_WITH_AS(read_conllu_string(block, "tb"), doctest::Contains("line 1"),
                         ConlluError);
}

TEST_CASE("non-integer head on a basic node") {
    const std::string block = "1\tHe\t_\t_\t_\t_\tx\tnsubj\t_\t_\n";
    CHECK_THROWS_AS(read_conllu_string(block, "tb"), ConlluError);
}

TEST_CASE("sent_id comment overrides the default key") {
    const std::string block = "# sent_id = my-id-7\n" + two_token_block();
    CHECK(read_conllu_string(block, "tb")[0].id == "my-id-7");
}

TEST_CASE("round trip is byte-identical, including comments, MWT and empty nodes") {
    const std::string file =
        "# sent_id = fixture-1\n"
        "# text = He del mundo runs\n"
        "1\tHe\t_\tPRON\t_\t_\t2\tnsubj\t_\t_\n"
        "2\truns\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
        "2.1\telided\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "3-4\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "3\tde\t_\tADP\t_\t_\t4\tcase\t_\t_\n"
        "4\tel\t_\tDET\t_\t_\t2\tobl\t_\t_\n\n";
    const auto sents = read_conllu_string(file, "tb");
    REQUIRE(sents.size() == 1);
    CHECK(sents[0].tokens.size() == 4);  // MWT range and empty node are not basic nodes
    CHECK(write_conllu(sents) == file);
    // read(write(read)) is a fixed point
    const auto again = read_conllu_string(write_conllu(sents), "tb");
    CHECK(write_conllu(again) == file);
}

TEST_CASE("predicted heads land in the HEAD column") {
    auto sents = read_conllu_string(two_token_block(), "tb");
    sents[0].tokens[0].head = 0;
    sents[0].tokens[0].deprel = "root";
    sents[0].tokens[1].head = 1;
    sents[0].tokens[1].deprel = "dep";
    const std::string out = write_conllu(sents);
    CHECK(out.find("1\tHe\t_\tPRON\t_\t_\t0\troot\t_\t_\n") != std::string::npos);
    CHECK(out.find("2\truns\t_\tVERB\t_\t_\t1\tdep\t_\t_\n") != std::string::npos);
}

TEST_CASE("empty sentence list writes empty output") {
    CHECK(write_conllu({}).empty());
}

namespace {
Sentence with_heads(const std::vector<int>& heads) {
    Sentence s;
    s.id = "t";
    for (size_t i = 0; i < heads.size(); ++i) {
        Token t;
        t.index = static_cast<int>(i) + 1;
        t.form = "w";
        t.head = heads[i];
        t.deprel = "dep";
        s.tokens.push_back(t);
    }
    return s;
}
}  // namespace

TEST_CASE("validate_tree") {
    CHECK(validate_tree(with_heads({2, 0})).empty());
    SUBCASE("cycle") {
        const auto v = validate_tree(with_heads({2, 1}));
        bool cycle = false;
        for (const auto& m : v) cycle = cycle || m.find("cycle") != std::string::npos;
        CHECK(cycle);
    }
    SUBCASE("multiple roots") {
        const auto v = validate_tree(with_heads({0, 0}));
        REQUIRE(v.size() == 1);
        CHECK(v[0].find("multiple roots") != std::string::npos);
    }
    SUBCASE("self head") {
        CHECK(!validate_tree(with_heads({1, 0})).empty());
    }
}

TEST_CASE("gold sentences accepted by the reader pass validate_tree") {
    // the synthetic suite exercises the full reader path
    SynthSpec spec = default_synth_spec();
    spec.train_size = 20;
    spec.dev_size = 5;
    spec.test_size = 5;
    for (const Treebank& tb : generate_synthetic_suite(spec, 3)) {
        const auto reread = read_conllu_string(write_conllu(tb.train), tb.name, tb.id);
        for (const Sentence& s : reread) CHECK(validate_tree(s).empty());
    }
}
