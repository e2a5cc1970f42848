#ifndef PHONET_PIPELINE_HPP
#define PHONET_PIPELINE_HPP

// Stage orchestration: corpus -> networks -> spectra -> typology -> null model.
// Each stage writes its artifacts into an output directory; run_pipeline calls
// the same stage functions, so monolithic and stage-by-stage runs produce the
// same files. A "key = value" config format mirrors the CLI flags.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "phonet/corpus.hpp"
#include "phonet/error.hpp"
#include "phonet/netbuild.hpp"
#include "phonet/nullmodel.hpp"
#include "phonet/report.hpp"
#include "phonet/spectra.hpp"
#include "phonet/typology.hpp"

namespace phonet {

namespace fs = std::filesystem;

struct RunConfig {
    std::string corpus_path;
    std::string output_dir;
    double bin_width = 20.0;
    std::size_t top_k = 50;
    std::size_t min_freq = 5;
    double neutral_fraction = 0.15;
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::size_t replicates = 10;
    std::size_t min_leaf = 2;
    std::size_t frobenius_k = 10;
    /// 1-based eigenvector indices for the typology experiments.
    std::vector<std::size_t> eigvecs = {2, 3};

    ExperimentParams experiment() const { return {min_freq, neutral_fraction, min_leaf, false}; }
    EigOptions eig() const {
        EigOptions o;
        o.tol = tol;
        return o;
    }
};

inline void validate_config(const RunConfig& c) {
    if (!(c.bin_width > 0.0))
        throw ValidationError("bin-width must be positive");
    if (c.top_k < 2)
        throw ValidationError("top-k must be at least 2");
    if (!(c.neutral_fraction > 0.0 && c.neutral_fraction < 1.0))
        throw ValidationError("neutral-fraction must lie in (0, 1)");
    if (!(c.tol > 0.0 && c.tol < 1.0))
        throw ValidationError("tol must lie in (0, 1)");
    if (c.min_leaf < 1)
        throw ValidationError("min-leaf must be at least 1");
    if (c.frobenius_k < 1)
        throw ValidationError("frobenius-k must be at least 1");
    for (std::size_t k : c.eigvecs)
        if (k < 1)
            throw ValidationError("eigenvector indices are 1-based");
}

/// Parses "key = value" lines ('#' comments). Keys use the CLI flag names
/// without dashes: corpus, out, bin-width, top-k, min-freq, neutral-fraction,
/// tol, seed, replicates, min-leaf, frobenius-k, eigvec (comma list).
inline void apply_config_text(RunConfig& cfg, std::istream& in) {
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineno);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (val.empty())
            throw ParseError("empty value for '" + key + "'", lineno);
        auto real = [&]() {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(val, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != val.size())
                throw ParseError("'" + key + "' expects a number, got '" + val + "'", lineno);
            return v;
        };
        auto count = [&]() { return detail::parse_index(val, key, lineno); };
        if (key == "corpus")
            cfg.corpus_path = val;
        else if (key == "out")
            cfg.output_dir = val;
        else if (key == "bin-width")
            cfg.bin_width = real();
        else if (key == "top-k")
            cfg.top_k = count();
        else if (key == "min-freq")
            cfg.min_freq = count();
        else if (key == "neutral-fraction")
            cfg.neutral_fraction = real();
        else if (key == "tol")
            cfg.tol = real();
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(count());
        else if (key == "replicates")
            cfg.replicates = count();
        else if (key == "min-leaf")
            cfg.min_leaf = count();
        else if (key == "frobenius-k")
            cfg.frobenius_k = count();
        else if (key == "eigvec") {
            cfg.eigvecs.clear();
            std::stringstream ss(val);
            for (std::string t; std::getline(ss, t, ',');)
                cfg.eigvecs.push_back(detail::parse_index(detail::trim(t), key, lineno));
        } else
            throw ParseError("unknown config key '" + key + "'", lineno);
    }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open config file '" + path + "'");
    apply_config_text(cfg, in);
}

/// Canonical text of the analysis parameters (paths excluded).
inline std::string canonical_config(const RunConfig& c) {
    std::ostringstream os;
    os << "bin-width=" << fmt_num(c.bin_width) << ";top-k=" << c.top_k << ";min-freq=" << c.min_freq
       << ";neutral-fraction=" << fmt_num(c.neutral_fraction) << ";tol=" << fmt_num(c.tol) << ";seed=" << c.seed
       << ";replicates=" << c.replicates << ";min-leaf=" << c.min_leaf << ";frobenius-k=" << c.frobenius_k
       << ";eigvec=";
    for (std::size_t i = 0; i < c.eigvecs.size(); ++i)
        os << (i ? "," : "") << c.eigvecs[i];
    return os.str();
}

inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a64(canonical_config(c))); }

/// Exclusive writer lock on an output directory, released on destruction.
class OutputLock {
public:
    explicit OutputLock(const fs::path& dir) : path_(dir / ".phonet.lock") {
        fs::create_directories(dir);
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f)
            throw ValidationError("output directory '" + dir.string() + "' is locked by another run (" +
                                  path_.string() + ")");
        std::fclose(f);
    }
    ~OutputLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path path_;
};

/// Writes `dir/name`, prefixed with the provenance line.
inline void write_artifact(const fs::path& dir, const std::string& name, const Provenance& prov,
                           const std::function<void(std::ostream&)>& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out)
        throw ParseError("cannot write '" + (dir / name).string() + "'");
    out << prov.line() << '\n';
    body(out);
    if (!out)
        throw ParseError("write failed for '" + (dir / name).string() + "'");
}

/// Provenance line of an existing artifact, or empty.
inline std::string read_first_line(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
}

// --- stages ------------------------------------------------------------------------

struct BuildResult {
    BipartiteMatrix bipartite;
    CooccurrenceNetwork phonet;
    CooccurrenceNetwork langgraph;
};

inline BuildResult stage_build(const InventoryCorpus& corpus, const Provenance& prov, const fs::path& dir) {
    BuildResult r{build_bipartite(corpus), {}, {}};
    r.phonet = project_phonet(r.bipartite);
    r.langgraph = project_langgraph(r.bipartite);
    write_artifact(dir, "bipartite_edges.txt", prov, [&](std::ostream& o) { write_bipartite_edges(o, r.bipartite); });
    for (const auto* net : {&r.phonet, &r.langgraph}) {
        const std::string k = to_string(net->kind);
        write_artifact(dir, k + "_network.txt", prov, [&](std::ostream& o) { write_network(o, *net); });
        write_artifact(dir, k + "_edges.txt", prov, [&](std::ostream& o) { write_edge_list(o, *net); });
    }
    return r;
}

struct SpectrumResult {
    Spectrum spectrum;
    std::vector<double> fractions; ///< k = 1..min(frobenius_k, n)
    std::optional<PowerLawFit> fits[2];
    std::string fit_notes[2];
    std::optional<double> first_correlation;
    BinnedSpectrum binned;
};

/// Spectral artifacts of one network, files prefixed by its kind.
inline SpectrumResult stage_spectrum(const CooccurrenceNetwork& net, const RunConfig& cfg, const Provenance& prov,
                                     const fs::path& dir) {
    SpectrumResult r{network_spectrum(net, cfg.eig()), {}, {}, {}, {}, {}};
    const Spectrum& s = r.spectrum;
    const std::string k = to_string(net.kind);
    write_artifact(dir, k + "_spectrum.csv", prov, [&](std::ostream& o) { write_spectrum_table(o, s); });
    r.binned = bin_spectrum(s, cfg.bin_width);
    write_artifact(dir, k + "_binned.csv", prov, [&](std::ostream& o) { write_binned(o, r.binned); });
    if (s.size() > 0 && s.source_frobenius > 0.0) {
        for (std::size_t i = 1; i <= std::min(cfg.frobenius_k, s.size()); ++i)
            r.fractions.push_back(frobenius_fraction(s, i));
        write_artifact(dir, k + "_frobenius.csv", prov, [&](std::ostream& o) { write_frobenius(o, s, cfg.frobenius_k); });
    }
    for (SpectrumEnd end : {SpectrumEnd::positive, SpectrumEnd::negative}) {
        const auto ranked = ranked_magnitudes(s, end);
        write_artifact(dir, k + "_ranked_" + to_string(end) + ".csv", prov,
                       [&](std::ostream& o) { write_ranked(o, ranked); });
        const int e = end == SpectrumEnd::positive ? 0 : 1;
        try {
            r.fits[e] = fit_power_law_tail(s, end, cfg.top_k);
        } catch (const NumericalError& err) {
            r.fit_notes[e] = err.what();
        }
    }
    write_artifact(dir, k + "_powerlaw.csv", prov, [&](std::ostream& o) {
        o << "end,exponent,intercept,r_squared,n_points,note\n";
        for (int e = 0; e < 2; ++e) {
            o << (e == 0 ? "positive" : "negative") << ',';
            if (r.fits[e])
                o << fmt_num(r.fits[e]->exponent) << ',' << fmt_num(r.fits[e]->intercept) << ','
                  << fmt_num(r.fits[e]->r_squared) << ',' << r.fits[e]->n_points << ",\n";
            else
                o << "NA,NA,NA,0," << csv_field(r.fit_notes[e]) << '\n';
        }
    });
    for (std::size_t idx = 0; idx < std::min<std::size_t>(3, s.size()); ++idx)
        write_artifact(dir, k + "_eigvec" + std::to_string(idx + 1) + ".csv", prov,
                       [&](std::ostream& o) { write_eigenvector_table(o, s, idx, net); });
    const auto freq = to_doubles(net.node_weight);
    try {
        if (s.size() > 0)
            r.first_correlation = eigvec_frequency_correlation(s, 0, freq).r;
    } catch (const NumericalError&) {
    }
    return r;
}

inline std::size_t zero_based(std::size_t eigvec) {
    if (eigvec < 1)
        throw ValidationError("eigenvector indices are 1-based");
    return eigvec - 1;
}

/// Experiment I for one eigenvector (1-based): labels and tree files.
inline EigenvectorExplanation stage_classify(const InventoryCorpus& corpus, const Spectrum& phonet,
                                             std::size_t eigvec, const RunConfig& cfg, const Provenance& prov,
                                             const fs::path& dir) {
    auto ex = explain_eigenvector(corpus, phonet, zero_based(eigvec), cfg.experiment());
    const std::string p = "consonants_eigvec" + std::to_string(eigvec);
    write_artifact(dir, p + "_labels.csv", prov, [&](std::ostream& o) {
        write_labeling(o, ex.labels, [&](std::size_t id) { return corpus.consonants[id].symbol; });
    });
    write_artifact(dir, p + "_tree.txt", prov, [&](std::ostream& o) {
        if (!ex.tree) {
            o << "# no tree: " << ex.note << '\n';
            return;
        }
        o << "# training_error=" << fmt_num(ex.tree->training_error()) << " examples=" << ex.tree->training_size()
          << " leaves=" << ex.tree->leaf_count() << '\n';
        write_tree_text(o, *ex.tree, corpus.catalog);
        o << "\n# rules\n";
        write_tree_rules(o, *ex.tree, corpus.catalog);
    });
    write_artifact(dir, p + "_tree.json", prov, [&](std::ostream& o) {
        nlohmann::ordered_json doc;
        if (ex.tree) {
            doc = tree_to_json(*ex.tree, corpus.catalog);
            doc["training_error"] = ex.tree->training_error();
        } else {
            doc["note"] = ex.note;
        }
        o << doc.dump(2) << '\n';
    });
    return ex;
}

struct CrossPrevalenceResult {
    ClassLabeling languages;
    CrossPrevalenceTable table;
};

/// Experiment II for one eigenvector (1-based), given the consonant labeling.
inline CrossPrevalenceResult stage_crossprev(const InventoryCorpus& corpus, const Spectrum& langgraph,
                                             const ClassLabeling& consonants, std::size_t eigvec,
                                             const Provenance& prov, const fs::path& dir) {
    CrossPrevalenceResult r{classify_languages(langgraph, zero_based(eigvec)), {}};
    r.table = cross_prevalence(corpus, r.languages, consonants);
    const std::string p = "languages_eigvec" + std::to_string(eigvec);
    write_artifact(dir, p + "_labels.csv", prov, [&](std::ostream& o) {
        write_labeling(o, r.languages, [&](std::size_t id) { return corpus.languages[id].name; });
    });
    write_artifact(dir, "crossprev_eigvec" + std::to_string(eigvec) + ".txt", prov,
                   [&](std::ostream& o) { write_crossprev(o, r.table); });
    return r;
}

inline MarkednessOverlap stage_overlap(const InventoryCorpus& corpus, const Spectrum& phonet, const Provenance& prov,
                                       const fs::path& dir) {
    auto m = markedness_overlap(corpus, phonet);
    write_artifact(dir, "markedness_overlap.csv", prov, [&](std::ostream& o) { write_overlap(o, m, corpus); });
    return m;
}

inline ControlReport stage_nullmodel(const InventoryCorpus& corpus, const RunConfig& cfg, const Provenance& prov,
                                     const fs::path& dir) {
    std::vector<std::size_t> idx;
    for (std::size_t k : cfg.eigvecs)
        idx.push_back(zero_based(k));
    auto r = control_report(NullModelConfig::from_corpus(corpus, cfg.seed, cfg.replicates), corpus, cfg.experiment(),
                            cfg.eig(), idx);
    write_artifact(dir, "control_replicates.csv", prov, [&](std::ostream& o) { write_control_table(o, r); });
    write_artifact(dir, "control_summary.txt", prov, [&](std::ostream& o) { write_control_summary(o, r); });
    return r;
}

// --- full run ------------------------------------------------------------------------

struct PipelineResult {
    std::vector<std::string> warnings;
    std::vector<std::string> artifacts;
};

/// Runs every stage on cfg.corpus_path into cfg.output_dir and writes summary.txt.
/// Exceptions carry the failing stage name in their message.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.corpus_path.empty())
        throw ValidationError("no corpus given");
    if (cfg.output_dir.empty())
        throw ValidationError("no output directory given");
    const fs::path dir = cfg.output_dir;
    OutputLock lock(dir);

    auto staged = [](const char* stage, auto&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const ParseError& e) {
            throw ParseError(std::string("[") + stage + "] " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("[") + stage + "] " + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError(std::string("[") + stage + "] " + e.what());
        }
    };

    PipelineResult result;
    const InventoryCorpus corpus = staged("load", [&] { return load_corpus(cfg.corpus_path); });
    result.warnings = validate_corpus(corpus);
    const Provenance prov{config_hash(cfg), corpus_hash(corpus)};

    const auto built = staged("build", [&] { return stage_build(corpus, prov, dir); });
    const auto ph = staged("spectrum", [&] { return stage_spectrum(built.phonet, cfg, prov, dir); });
    const auto lg = staged("spectrum", [&] { return stage_spectrum(built.langgraph, cfg, prov, dir); });

    std::ostringstream sum;
    sum << "[census]\n"
        << "languages = " << corpus.languages.size() << '\n'
        << "consonants = " << corpus.consonants.size() << '\n'
        << "bipartite_edges = " << built.bipartite.ones() << '\n'
        << "phonet_edges = " << built.phonet.edge_count() << '\n'
        << "langgraph_edges = " << built.langgraph.edge_count() << '\n'
        << "warnings = " << result.warnings.size() << '\n';
    sum << "\n[spectrum.phonet]\n";
    for (std::size_t i = 0; i < ph.fractions.size() && i < 3; ++i)
        sum << "frobenius_fraction.k" << i + 1 << " = " << fmt_num(ph.fractions[i]) << '\n';
    sum << "first_eigvec_frequency_r = " << fmt_opt(ph.first_correlation) << '\n';
    for (int e = 0; e < 2; ++e) {
        const char* end = e == 0 ? "positive" : "negative";
        if (ph.fits[e])
            sum << "powerlaw." << end << " = " << fmt_num(ph.fits[e]->exponent)
                << " (r2=" << fmt_num(ph.fits[e]->r_squared) << ", n=" << ph.fits[e]->n_points << ")\n";
        else
            sum << "powerlaw." << end << " = NA (" << ph.fit_notes[e] << ")\n";
    }
    {
        std::size_t bulk = 0;
        for (std::size_t b = 1; b < ph.binned.bins(); ++b)
            if (ph.binned.counts[b] > ph.binned.counts[bulk])
                bulk = b;
        sum << "largest_bin = [" << fmt_num(ph.binned.bin_edges[bulk]) << ", " << fmt_num(ph.binned.bin_edges[bulk + 1])
            << ") count " << ph.binned.counts[bulk] << '\n';
    }
    sum << "\n[spectrum.langgraph]\n"
        << "principal_eigenvalue = " << (lg.spectrum.size() ? fmt_num(lg.spectrum.eigenvalues[0]) : "NA") << '\n'
        << "first_eigvec_inventory_size_r = " << fmt_opt(lg.first_correlation) << '\n';

    for (std::size_t k : cfg.eigvecs) {
        sum << "\n[experiment.eigvec" << k << "]\n";
        if (zero_based(k) >= ph.spectrum.size() || zero_based(k) >= lg.spectrum.size()) {
            sum << "skipped = eigenvector index exceeds network order\n";
            continue;
        }
        const auto ex = staged("classify", [&] { return stage_classify(corpus, ph.spectrum, k, cfg, prov, dir); });
        const auto cp = staged("crossprev", [&] { return stage_crossprev(corpus, lg.spectrum, ex.labels, k, prov, dir); });
        sum << "consonants = +" << ex.labels.count(Label::positive) << " -" << ex.labels.count(Label::negative)
            << " neutral " << ex.labels.count(Label::neutral) << " excluded " << ex.labels.count(Label::excluded)
            << '\n';
        sum << "tree_training_error = " << (ex.tree ? fmt_num(ex.tree->training_error()) : "NA") << '\n';
        sum << "languages = +" << cp.languages.count(Label::positive) << " -" << cp.languages.count(Label::negative)
            << '\n';
        sum << "crossprev (L+C+, L+C-, L-C+, L-C-) = " << fmt_opt(cp.table.cells[0]) << ", "
            << fmt_opt(cp.table.cells[1]) << ", " << fmt_opt(cp.table.cells[2]) << ", " << fmt_opt(cp.table.cells[3])
            << '\n';
    }

    const auto ov = staged("overlap", [&] { return stage_overlap(corpus, ph.spectrum, prov, dir); });
    sum << "\n[markedness]\nmean_overlap = " << fmt_num(ov.mean) << " (languages=" << ov.scored << ")\n";

    const auto ctl = staged("nullmodel", [&] { return stage_nullmodel(corpus, cfg, prov, dir); });
    sum << "\n[control]\n";
    write_control_summary(sum, ctl);

    write_artifact(dir, "summary.txt", prov, [&](std::ostream& o) { o << sum.str(); });

    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().filename() != ".phonet.lock")
            result.artifacts.push_back(entry.path().filename().string());
    std::sort(result.artifacts.begin(), result.artifacts.end());
    return result;
}

} // namespace phonet

#endif // PHONET_PIPELINE_HPP
