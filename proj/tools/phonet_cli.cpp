// phonet: command-line front end for the co-occurrence spectral pipeline.
//
//   phonet run       --corpus FILE --out DIR        full pipeline + summary.txt
//   phonet build     --corpus FILE --out DIR        bipartite/network files
//   phonet spectrum  --network FILE --out DIR       spectral artifacts of one network
//   phonet classify  --corpus FILE --eigvec K       consonant labels + decision tree
//   phonet crossprev --corpus FILE --eigvec K       language labels + prevalence table
//   phonet overlap   --corpus FILE                  markedness overlap
//   phonet nullmodel --corpus FILE                  frequency-preserving control report
//   phonet synth     --out FILE ...                 synthetic corpus
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phonet/phonet.hpp"

namespace {

using namespace phonet;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config;
    std::string corpus;
    std::string out;
    double bin_width = 0;
    std::size_t top_k = 0;
    std::size_t min_freq = 0;
    double neutral_fraction = 0;
    double tol = 0;
    std::uint64_t seed = 0;
    std::size_t replicates = 0;
    std::size_t min_leaf = 0;
    std::vector<std::size_t> eigvec;

    CLI::Option* o_corpus = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_bin = nullptr;
    CLI::Option* o_topk = nullptr;
    CLI::Option* o_minfreq = nullptr;
    CLI::Option* o_frac = nullptr;
    CLI::Option* o_tol = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_reps = nullptr;
    CLI::Option* o_minleaf = nullptr;
    CLI::Option* o_eigvec = nullptr;

    /// Defaults, then config file, then explicitly given flags.
    RunConfig resolve() const {
        RunConfig cfg;
        if (const char* env = std::getenv("PHONET_OUT"))
            cfg.output_dir = env;
        if (!config.empty()) {
            try {
                load_config_file(cfg, config);
            } catch (const ParseError& e) {
                throw UsageError(std::string("config: ") + e.what());
            }
        }
        auto given = [](const CLI::Option* o) { return o && o->count() > 0; };
        if (given(o_corpus)) cfg.corpus_path = corpus;
        if (given(o_out)) cfg.output_dir = out;
        if (given(o_bin)) cfg.bin_width = bin_width;
        if (given(o_topk)) cfg.top_k = top_k;
        if (given(o_minfreq)) cfg.min_freq = min_freq;
        if (given(o_frac)) cfg.neutral_fraction = neutral_fraction;
        if (given(o_tol)) cfg.tol = tol;
        if (given(o_seed)) cfg.seed = seed;
        if (given(o_reps)) cfg.replicates = replicates;
        if (given(o_minleaf)) cfg.min_leaf = min_leaf;
        if (given(o_eigvec)) cfg.eigvecs = eigvec;
        try {
            validate_config(cfg);
        } catch (const ValidationError& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }
};

void add_common(CLI::App* app, Flags& f, bool corpus, bool analysis) {
    app->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
    f.o_out = app->add_option("--out", f.out, "output directory (default: $PHONET_OUT)");
    if (corpus)
        f.o_corpus = app->add_option("--corpus", f.corpus, "corpus file");
    f.o_tol = app->add_option("--tol", f.tol, "eigensolver residual tolerance relative to ||M||_F (default 1e-8)");
    if (!analysis)
        return;
    f.o_minfreq = app->add_option("--min-freq", f.min_freq, "exclude consonants rarer than this (default 5)");
    f.o_frac = app->add_option("--neutral-fraction", f.neutral_fraction,
                               "neutral band as a fraction of the extreme component (default 0.15)");
    f.o_minleaf = app->add_option("--min-leaf", f.min_leaf, "minimum examples per tree branch (default 2)");
}

fs::path require_out(const RunConfig& cfg) {
    if (cfg.output_dir.empty())
        throw UsageError("--out (or PHONET_OUT) is required");
    return cfg.output_dir;
}

InventoryCorpus require_corpus(const RunConfig& cfg) {
    if (cfg.corpus_path.empty())
        throw UsageError("--corpus is required");
    return load_corpus(cfg.corpus_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral analysis of consonant co-occurrence networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version));
    Flags f;
    std::function<void()> action;

    auto* run = app.add_subcommand("run", "full pipeline");
    add_common(run, f, true, true);
    f.o_bin = run->add_option("--bin-width", f.bin_width, "spectrum bin width (default 20)");
    f.o_topk = run->add_option("--top-k", f.top_k, "eigenvalues per power-law fit (default 50)");
    f.o_seed = run->add_option("--seed", f.seed, "null-model master seed (default 1)");
    f.o_reps = run->add_option("--replicates", f.replicates, "null-model replicates (default 10)");
    f.o_eigvec = run->add_option("--eigvec", f.eigvec, "1-based eigenvectors for the experiments (default 2 3)");
    run->callback([&] {
        action = [&] {
            const auto cfg = f.resolve();
            require_out(cfg);
            if (cfg.corpus_path.empty())
                throw UsageError("--corpus is required");
            const auto res = run_pipeline(cfg);
            for (const auto& w : res.warnings)
                std::cerr << "warning: " << w << '\n';
            std::cout << "wrote " << res.artifacts.size() << " artifacts to " << cfg.output_dir << '\n';
        };
    });

    auto* build = app.add_subcommand("build", "bipartite matrix and one-mode projections");
    Flags fb;
    add_common(build, fb, true, false);
    build->callback([&] {
        action = [&] {
            const auto cfg = fb.resolve();
            const auto dir = require_out(cfg);
            const auto corpus = require_corpus(cfg);
            for (const auto& w : validate_corpus(corpus))
                std::cerr << "warning: " << w << '\n';
            OutputLock lock(dir);
            const auto r = stage_build(corpus, {config_hash(cfg), corpus_hash(corpus)}, dir);
            std::cout << "bipartite " << r.bipartite.entries.rows() << "x" << r.bipartite.entries.cols() << ", "
                      << r.bipartite.ones() << " edges; phonet " << r.phonet.edge_count() << " edges; langgraph "
                      << r.langgraph.edge_count() << " edges\n";
        };
    });

    auto* spectrum = app.add_subcommand("spectrum", "spectral artifacts of an exported network file");
    Flags fs_;
    std::string network_path;
    add_common(spectrum, fs_, false, false);
    spectrum->add_option("--network", network_path, "network file written by 'build'")->required()->check(CLI::ExistingFile);
    fs_.o_bin = spectrum->add_option("--bin-width", fs_.bin_width, "spectrum bin width (default 20)");
    fs_.o_topk = spectrum->add_option("--top-k", fs_.top_k, "eigenvalues per power-law fit (default 50)");
    spectrum->callback([&] {
        action = [&] {
            const auto cfg = fs_.resolve();
            const auto dir = require_out(cfg);
            std::ifstream in(network_path);
            const auto net = read_network(in);
            std::string corpus_id = provenance_field(read_first_line(network_path), "corpus");
            if (corpus_id.empty())
                corpus_id = "unknown";
            OutputLock lock(dir);
            const auto r = stage_spectrum(net, cfg, {config_hash(cfg), corpus_id}, dir);
            std::cout << to_string(net.kind) << ": " << r.spectrum.size() << " eigenvalues, largest "
                      << fmt_num(r.spectrum.size() ? r.spectrum.eigenvalues[0] : 0.0) << '\n';
        };
    });

    auto* classify = app.add_subcommand("classify", "eigenvector labeling of consonants and its decision tree");
    Flags fc;
    std::size_t classify_k = 0;
    add_common(classify, fc, true, true);
    classify->add_option("--eigvec", classify_k, "1-based eigenvector index")->required()->check(CLI::PositiveNumber);
    classify->callback([&] {
        action = [&] {
            const auto cfg = fc.resolve();
            const auto dir = require_out(cfg);
            const auto corpus = require_corpus(cfg);
            const std::size_t k = classify_k;
            const auto ph = network_spectrum(project_phonet(build_bipartite(corpus)), cfg.eig());
            if (k > ph.size())
                throw UsageError("--eigvec exceeds the number of consonants");
            OutputLock lock(dir);
            const auto ex = stage_classify(corpus, ph, k, cfg, {config_hash(cfg), corpus_hash(corpus)}, dir);
            std::cout << "eigvec " << k << ": +" << ex.labels.count(Label::positive) << " -"
                      << ex.labels.count(Label::negative) << " neutral " << ex.labels.count(Label::neutral)
                      << "; tree error " << (ex.tree ? fmt_num(ex.tree->training_error()) : "NA") << '\n';
        };
    });

    auto* crossprev = app.add_subcommand("crossprev", "language labeling and cross-prevalence table");
    Flags fx;
    std::string labels_path;
    std::size_t crossprev_k = 0;
    add_common(crossprev, fx, true, true);
    crossprev->add_option("--eigvec", crossprev_k, "1-based eigenvector index")->required()->check(CLI::PositiveNumber);
    crossprev->add_option("--labels", labels_path, "consonant labels CSV from 'classify' (recomputed if absent)")
        ->check(CLI::ExistingFile);
    crossprev->callback([&] {
        action = [&] {
            const auto cfg = fx.resolve();
            const auto dir = require_out(cfg);
            const auto corpus = require_corpus(cfg);
            const std::size_t k = crossprev_k;
            const auto a = build_bipartite(corpus);
            ClassLabeling cons;
            if (!labels_path.empty()) {
                std::ifstream in(labels_path);
                cons = read_labeling(in);
            } else {
                const auto ph = network_spectrum(project_phonet(a), cfg.eig());
                if (k > ph.size())
                    throw UsageError("--eigvec exceeds the number of consonants");
                cons = classify_by_eigenvector(ph, k - 1, to_doubles(consonant_frequencies(corpus)), cfg.min_freq,
                                               cfg.neutral_fraction);
            }
            const auto lg = network_spectrum(project_langgraph(a), cfg.eig());
            if (k > lg.size())
                throw UsageError("--eigvec exceeds the number of languages");
            OutputLock lock(dir);
            const auto r = stage_crossprev(corpus, lg, cons, k, {config_hash(cfg), corpus_hash(corpus)}, dir);
            write_crossprev(std::cout, r.table);
        };
    });

    auto* overlap = app.add_subcommand("overlap", "markedness-hierarchy overlap per language");
    Flags fo;
    add_common(overlap, fo, true, false);
    overlap->callback([&] {
        action = [&] {
            const auto cfg = fo.resolve();
            const auto dir = require_out(cfg);
            const auto corpus = require_corpus(cfg);
            const auto ph = network_spectrum(project_phonet(build_bipartite(corpus)), cfg.eig());
            OutputLock lock(dir);
            const auto m = stage_overlap(corpus, ph, {config_hash(cfg), corpus_hash(corpus)}, dir);
            std::cout << "mean overlap " << fmt_num(m.mean) << " over " << m.scored << " languages\n";
        };
    });

    auto* nullmodel = app.add_subcommand("nullmodel", "frequency-preserving random control");
    Flags fn;
    add_common(nullmodel, fn, true, true);
    fn.o_seed = nullmodel->add_option("--seed", fn.seed, "master seed (default 1)");
    fn.o_reps = nullmodel->add_option("--replicates", fn.replicates, "number of replicates (default 10)");
    fn.o_eigvec = nullmodel->add_option("--eigvec", fn.eigvec, "1-based eigenvectors (default 2 3)");
    nullmodel->callback([&] {
        action = [&] {
            const auto cfg = fn.resolve();
            const auto dir = require_out(cfg);
            const auto corpus = require_corpus(cfg);
            OutputLock lock(dir);
            const auto r = stage_nullmodel(corpus, cfg, {config_hash(cfg), corpus_hash(corpus)}, dir);
            write_control_summary(std::cout, r);
        };
    });

    auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
    SynthesisOptions so;
    std::string synth_out, profile = "uniform", freq_list;
    synth->add_option("--out", synth_out, "corpus file to write")->required();
    synth->add_option("--languages", so.n_languages, "number of languages")->capture_default_str();
    synth->add_option("--consonants", so.n_consonants, "number of consonants")->capture_default_str();
    synth->add_option("--features", so.n_features, "number of binary features")->capture_default_str();
    synth->add_option("--profile", profile, "frequency profile")
        ->check(CLI::IsMember({"uniform", "geometric", "explicit"}))
        ->capture_default_str();
    synth->add_option("--density", so.profile.density, "uniform inclusion probability")->capture_default_str();
    synth->add_option("--head", so.profile.head, "geometric: inclusion probability of consonant 0")
        ->capture_default_str();
    synth->add_option("--ratio", so.profile.ratio, "geometric: decay per consonant id")->capture_default_str();
    synth->add_option("--frequencies", freq_list, "explicit: comma-separated per-consonant frequencies");
    synth->add_option("--feature-density", so.feature_density, "probability of each feature bit")
        ->capture_default_str();
    synth->add_option("--seed", so.seed, "random seed")->capture_default_str();
    synth->callback([&] {
        action = [&] {
            if (profile == "geometric") {
                so.profile.kind = FrequencyProfile::Kind::geometric;
            } else if (profile == "explicit") {
                if (freq_list.empty())
                    throw UsageError("--profile explicit needs --frequencies");
                so.profile.kind = FrequencyProfile::Kind::explicit_counts;
                std::stringstream ss(freq_list);
                for (std::string t; std::getline(ss, t, ',');)
                    so.profile.counts.push_back(detail::parse_index(detail::trim(t), "frequency", 0));
            }
            save_corpus(synth_out, synthesize_corpus(so));
            std::cout << "wrote " << synth_out << '\n';
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        action();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
