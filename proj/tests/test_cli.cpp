#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "tbvec/parser.hpp"
#include "tbvec/predict.hpp"
#include "tbvec/synth.hpp"
#include "tbvec/util.hpp"
#include "tbvec/weight_space.hpp"

namespace fs = std::filesystem;
using namespace tbvec;

namespace {

const fs::path kWork = fs::temp_directory_path() / "tbvec_cli_test";

int run(const std::string& args) {
    const std::string cmd =
        std::string(TBVEC_BIN) + " " + args + " > " + (kWork / "cmd.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& rel) { return (kWork / rel).string(); }

}  // namespace

// One linear pipeline: synth -> train -> sweep -> predict -> eval, with the
// failure paths checked along the way.
TEST_CASE("end-to-end pipeline") {
    fs::remove_all(kWork);
    fs::create_directories(kWork);

    // --- synth ---
    SynthSpec spec = default_synth_spec();
    spec.train_size = 40;
    spec.dev_size = 10;
    spec.test_size = 8;
    atomic_write_file(p("spec.txt"), format_synth_spec(spec));
    REQUIRE(run("synth --spec " + p("spec.txt") + " --seed 3 --out " + p("data")) == 0);
    for (const char* name : {"synthA", "synthB", "synthC", "synthD"})
        for (const char* split : {"train", "dev", "test"})
            CHECK(fs::exists(p(std::string("data/") + name + "-" + split + ".conllu")));
    CHECK(fs::exists(p("data/synth-manifest.txt")));

    REQUIRE(run("synth --spec " + p("spec.txt") + " --seed 3 --out " + p("data2")) == 0);
    CHECK(read_file(p("data/synthA-train.conllu")) == read_file(p("data2/synthA-train.conllu")));

    // --- train ---
    const std::string dims = " --epochs 1 --word-dim 8 --char-dim 4 --char-hidden 6"
                             " --tb-dim 3 --hidden 12";
    REQUIRE(run("train --treebanks " + p("data/synthA-train.conllu") + " " +
                p("data/synthB-train.conllu") + " " + p("data/synthC-train.conllu") +
                " --seeds 1..2 --out " + p("models") + dims) == 0);
    REQUIRE(fs::exists(p("models/model-seed1.bin")));
    REQUIRE(fs::exists(p("models/model-seed2.bin")));
    CHECK(fs::exists(p("models/train-manifest.txt")));
    const ParserModel model = load_model(p("models/model-seed1.bin"));
    CHECK(model.num_treebanks == 3);

    CHECK(run("train --treebanks " + p("data/nope.conllu") + " --out " + p("bad")) == 1);
    CHECK(!fs::exists(p("bad/train-manifest.txt")));

    // --- sweep (coarse grid: 6 points) ---
    const std::string grid = " --grid-step 0.5 --grid-margin 0";
    REQUIRE(run("sweep --model " + p("models/model-seed1.bin") + " " +
                p("models/model-seed2.bin") + " --test " + p("data/synthD-dev.conllu") +
                grid + " --jobs 2 --out " + p("sweeps")) == 0);
    CHECK(fs::exists(p("sweeps/sweep-model-seed1.csv")));
    CHECK(fs::exists(p("sweeps/sweep-model-seed1-sentences.csv")));
    CHECK(fs::exists(p("sweeps/sweep-model-seed1.svg")));
    CHECK(fs::exists(p("sweeps/sweep-median.csv")));
    const WeightGrid g = generate_grid(3, 0.5, 0.0);
    const LasTable dev_las =
        las_table_from_csv(read_file(p("sweeps/sweep-model-seed1-sentences.csv")), g.size());
    CHECK(dev_las.size() == 10);

    REQUIRE(run("sweep --model " + p("models/model-seed1.bin") + " --test " +
                p("data/synthD-dev.conllu") + grid + " --jobs 1 --out " + p("sw1")) == 0);
    REQUIRE(run("sweep --model " + p("models/model-seed1.bin") + " --test " +
                p("data/synthD-dev.conllu") + grid + " --jobs 4 --out " + p("sw4")) == 0);
    CHECK(read_file(p("sw1/sweep-model-seed1.csv")) == read_file(p("sw4/sweep-model-seed1.csv")));
    CHECK(read_file(p("sw1/sweep-model-seed1-sentences.csv")) ==
          read_file(p("sw4/sweep-model-seed1-sentences.csv")));

    // --- sweep the retrieval corpus (the three in-domain dev sets) ---
    atomic_write_file(p("index.conllu"), read_file(p("data/synthA-dev.conllu")) +
                                             read_file(p("data/synthB-dev.conllu")) +
                                             read_file(p("data/synthC-dev.conllu")));
    REQUIRE(run("sweep --model " + p("models/model-seed1.bin") + " --test " + p("index.conllu") +
                grid + " --no-svg --out " + p("index-sweep")) == 0);
    const std::string index_las = p("index-sweep/sweep-model-seed1-sentences.csv");

    // --- predict, sentence level ---
    REQUIRE(run("predict --model " + p("models/model-seed1.bin") + " --input " +
                p("data/synthD-test.conllu") + " --index-conllu " + p("index.conllu") +
                " --index-las " + index_las + grid +
                " --mode se-se --k 3 --tie-break k-average --out " + p("sese")) == 0);
    REQUIRE(fs::exists(p("sese/predictions.csv")));
    REQUIRE(fs::exists(p("sese/parsed.conllu")));
    const std::string sese_csv = read_file(p("sese/predictions.csv"));
    CHECK(sese_csv.find("k-average,3,any") != std::string::npos);
    CHECK(sese_csv.find("synthD-test-1,") != std::string::npos);

    // --- predict, treebank level ---
    REQUIRE(run("predict --model " + p("models/model-seed1.bin") + " --input " +
                p("data/synthD-test.conllu") + " --index-conllu " + p("data/synthA-dev.conllu") +
                " " + p("data/synthB-dev.conllu") + " " + p("data/synthC-dev.conllu") +
                " --index-las " + index_las + grid + " --mode tr-tr --space nonneg --out " +
                p("trtr")) == 0);
    const std::string trtr_csv = read_file(p("trtr/predictions.csv"));
    CHECK(trtr_csv.find("<all>,") != std::string::npos);  // one prediction for the whole set

    // --- predict failure paths ---
    CHECK(run("predict --model " + p("models/model-seed1.bin") + " --input " +
              p("data/synthD-test.conllu") + " --index-conllu " + p("index.conllu") + grid +
              " --out " + p("noind")) == 1);
    CHECK(run("predict --model " + p("models/model-seed1.bin") + " --input " +
              p("data/synthD-test.conllu") + " --index-conllu " + p("index.conllu") +
              " --index-las " + index_las + grid + " --oracle --out " + p("orc-bad")) == 1);

    // --- predict, oracle mode ---
    REQUIRE(run("sweep --model " + p("models/model-seed1.bin") + " --test " +
                p("data/synthD-test.conllu") + grid + " --no-svg --out " + p("test-sweep")) == 0);
    REQUIRE(run("predict --model " + p("models/model-seed1.bin") + " --input " +
                p("data/synthD-test.conllu") + " --index-conllu " + p("index.conllu") +
                " --index-las " + index_las + " --oracle --oracle-las " +
                p("test-sweep/sweep-model-seed1-sentences.csv") + grid + " --out " +
                p("orc")) == 0);
    CHECK(fs::exists(p("orc/predictions.csv")));

    // --- eval ---
    REQUIRE(run("eval --gold " + p("data/synthD-test.conllu") + " --pred " +
                p("sese/parsed.conllu") + " --out " + p("report.txt")) == 0);
    CHECK(read_file(p("report.txt")).find("las = ") != std::string::npos);

    REQUIRE(run("eval --gold " + p("data/synthD-test.conllu") + " --pred " +
                p("sese/parsed.conllu") + " --pred2 " + p("sese/parsed.conllu") +
                " --iterations 2000 --out " + p("sig.txt")) == 0);
    const std::string sig = read_file(p("sig.txt"));
    CHECK(sig.find("p_value = 1\n") != std::string::npos);  // a system against itself
    CHECK(sig.find("las_diff = 0\n") != std::string::npos);

    REQUIRE(run("eval --gold " + p("data/synthD-test.conllu") + " --pred " +
                p("sese/parsed.conllu") + " --pred2 " + p("trtr/parsed.conllu") +
                " --iterations 2000 --out " + p("sig2.txt")) == 0);
    CHECK(read_file(p("sig2.txt")).find("p_value = ") != std::string::npos);
}
