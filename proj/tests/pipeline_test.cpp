#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "phonet/pipeline.hpp"

using namespace phonet;

namespace {

const std::string cli = PHONET_CLI_PATH;
const std::string sample = PHONET_SAMPLE_CORPUS;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("phonet_pipeline_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::map<std::string, std::string> bundle(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        out[e.path().filename().string()] = slurp(e.path());
    return out;
}

RunConfig sample_config(const fs::path& out) {
    RunConfig c;
    c.corpus_path = sample;
    c.output_dir = out.string();
    c.replicates = 3;
    c.min_freq = 2;
    return c;
}

} // namespace

TEST(Config, ParsesKeysAndComments) {
    RunConfig c;
    std::istringstream in("# comment\ncorpus = a.txt\nbin-width = 12.5\ntop-k=30 # trailing\neigvec = 2, 4\nseed = 9\n");
    apply_config_text(c, in);
    EXPECT_EQ(c.corpus_path, "a.txt");
    EXPECT_EQ(c.bin_width, 12.5);
    EXPECT_EQ(c.top_k, 30u);
    EXPECT_EQ(c.eigvecs, (std::vector<std::size_t>{2, 4}));
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.min_freq, 5u);
}

TEST(Config, RejectsMalformedLines) {
    RunConfig c;
    std::istringstream unknown("colour = red\n");
    EXPECT_THROW(apply_config_text(c, unknown), ParseError);
    std::istringstream nokey("just text\n");
    EXPECT_THROW(apply_config_text(c, nokey), ParseError);
    std::istringstream bad("bin-width = wide\n");
    EXPECT_THROW(apply_config_text(c, bad), ParseError);
    RunConfig v;
    v.neutral_fraction = 1.5;
    EXPECT_THROW(validate_config(v), ValidationError);
}

TEST(Config, HashTracksAnalysisParametersOnly) {
    RunConfig a, b;
    b.corpus_path = "elsewhere.txt";
    b.output_dir = "/tmp/x";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.min_freq = 4;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Pipeline, SmokeRunWritesEverySection) {
    const auto dir = scratch("smoke");
    const auto res = run_pipeline(sample_config(dir));
    const std::string summary = slurp(dir / "summary.txt");
    for (const char* section : {"[census]", "[spectrum.phonet]", "[spectrum.langgraph]", "[experiment.eigvec2]",
                                "[experiment.eigvec3]", "[markedness]", "[control]"})
        EXPECT_NE(summary.find(section), std::string::npos) << section;
    for (const char* f : {"bipartite_edges.txt", "phonet_network.txt", "phonet_edges.txt", "langgraph_network.txt",
                          "phonet_spectrum.csv", "phonet_binned.csv", "phonet_frobenius.csv", "phonet_powerlaw.csv",
                          "phonet_ranked_positive.csv", "phonet_ranked_negative.csv", "phonet_eigvec1.csv",
                          "phonet_eigvec3.csv", "consonants_eigvec2_labels.csv", "consonants_eigvec3_tree.txt",
                          "consonants_eigvec2_tree.json", "languages_eigvec2_labels.csv", "crossprev_eigvec3.txt",
                          "markedness_overlap.csv", "control_replicates.csv", "control_summary.txt"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto corpus = load_corpus(sample);
    const std::string expected = Provenance{config_hash(sample_config(dir)), corpus_hash(corpus)}.line();
    for (const auto& name : res.artifacts)
        EXPECT_EQ(read_first_line((dir / name).string()), expected) << name;
    EXPECT_FALSE(fs::exists(dir / ".phonet.lock"));
}

TEST(Pipeline, RerunIsByteIdentical) {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    run_pipeline(sample_config(a));
    run_pipeline(sample_config(b));
    EXPECT_EQ(bundle(a), bundle(b));
}

TEST(Pipeline, LockedDirectoryIsRefused) {
    const auto dir = scratch("locked");
    fs::create_directories(dir);
    std::ofstream(dir / ".phonet.lock") << "";
    EXPECT_THROW(run_pipeline(sample_config(dir)), ValidationError);
    EXPECT_TRUE(fs::exists(dir / ".phonet.lock"));
}

TEST(Pipeline, FailureNamesStage) {
    auto cfg = sample_config(scratch("missing"));
    cfg.corpus_path = "/nonexistent/corpus.txt";
    try {
        run_pipeline(cfg);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("[load]"), std::string::npos);
    }
}

TEST(Cli, StageByStageMatchesMonolithic) {
    const auto mono = scratch("mono"), staged = scratch("staged");
    const auto cfg = scratch("cfg.txt");
    std::ofstream(cfg) << "corpus = " << sample << "\nreplicates = 3\nmin-freq = 2\n";
    const std::string c = " --config " + cfg.string();
    ASSERT_EQ(run_cli("run" + c + " --out " + mono.string()), 0);

    const std::string out = " --out " + staged.string();
    ASSERT_EQ(run_cli("build" + c + out), 0);
    ASSERT_EQ(run_cli("spectrum" + c + out + " --network " + (staged / "phonet_network.txt").string()), 0);
    ASSERT_EQ(run_cli("spectrum" + c + out + " --network " + (staged / "langgraph_network.txt").string()), 0);
    for (const char* k : {"2", "3"}) {
        ASSERT_EQ(run_cli(std::string("classify") + c + out + " --eigvec " + k), 0);
        ASSERT_EQ(run_cli(std::string("crossprev") + c + out + " --eigvec " + k + " --labels " +
                          (staged / ("consonants_eigvec" + std::string(k) + "_labels.csv")).string()),
                  0);
    }
    ASSERT_EQ(run_cli("overlap" + c + out), 0);
    ASSERT_EQ(run_cli("nullmodel" + c + out), 0);

    auto a = bundle(mono);
    const auto b = bundle(staged);
    a.erase("summary.txt");
    EXPECT_EQ(a, b);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exits");
    EXPECT_EQ(run_cli("--version"), 0);
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("run --corpus " + sample), 1); // no --out
    EXPECT_EQ(run_cli("run --corpus " + sample + " --out " + dir.string() + " --neutral-fraction 2"), 1);
    const auto bad = scratch("bad.txt");
    std::ofstream(bad) << "[features]\nf\n[consonants]\n0 a 1\n[languages]\n0 A 5\n";
    EXPECT_EQ(run_cli("build --corpus " + bad.string() + " --out " + dir.string()), 2);
    const auto badcfg = scratch("bad.cfg");
    std::ofstream(badcfg) << "colour = red\n";
    EXPECT_EQ(run_cli("build --config " + badcfg.string() + " --out " + dir.string()), 1);
}

TEST(Cli, NumericalFailureExitsThree) {
    const auto dir = scratch("numerical");
    // Consonants 0,1 share five languages, 2,3 share one. The second
    // eigenvector lives on the rare pair, which the frequency filter removes,
    // leaving nothing to label.
    const auto blocks = scratch("blocks.txt");
    std::ofstream(blocks) << "[features]\nf\n[consonants]\n0 a 1\n1 b 0\n2 c 1\n3 d 0\n[languages]\n"
                          << "0 A 0 1\n1 B 0 1\n2 C 0 1\n3 D 0 1\n4 E 0 1\n5 F 2 3\n";
    EXPECT_EQ(run_cli("classify --corpus " + blocks.string() + " --out " + dir.string() + " --eigvec 2"), 3);
}

TEST(Cli, SynthRoundTripsThroughBuild) {
    const auto corpus = scratch("synth.txt"), dir = scratch("synth_out");
    ASSERT_EQ(run_cli("synth --out " + corpus.string() +
                      " --languages 6 --consonants 9 --profile explicit --frequencies 6,5,4,3,3,2,2,1,1 --seed 4"),
              0);
    EXPECT_EQ(consonant_frequencies(load_corpus(corpus.string())),
              (std::vector<std::size_t>{6, 5, 4, 3, 3, 2, 2, 1, 1}));
    EXPECT_EQ(run_cli("build --corpus " + corpus.string() + " --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "phonet_network.txt"));
}
