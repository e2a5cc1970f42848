#ifndef PHONET_NULLMODEL_HPP
#define PHONET_NULLMODEL_HPP

// Frequency-preserving random inventories: each consonant c is packed into f_c
// languages ("bins") drawn uniformly without replacement, independently of
// every other consonant. The control report runs the consonant-side
// experiments on such replicates next to the observed corpus.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phonet/corpus.hpp"
#include "phonet/netbuild.hpp"
#include "phonet/random.hpp"
#include "phonet/spectra.hpp"
#include "phonet/typology.hpp"

namespace phonet {

struct NullModelConfig {
    std::uint64_t seed = 1;
    std::size_t n_replicates = 10;
    std::vector<std::size_t> source_frequencies;
    std::size_t n_languages = 0;

    static NullModelConfig from_corpus(const InventoryCorpus& corpus, std::uint64_t seed, std::size_t replicates) {
        return {seed, replicates, consonant_frequencies(corpus), corpus.languages.size()};
    }
};

inline void validate_null_config(const NullModelConfig& cfg) {
    if (cfg.n_languages == 0)
        throw ValidationError("null model: need at least one language bin");
    for (std::size_t c = 0; c < cfg.source_frequencies.size(); ++c)
        if (cfg.source_frequencies[c] > cfg.n_languages)
            throw ValidationError("null model: consonant " + std::to_string(c) + " frequency " +
                                  std::to_string(cfg.source_frequencies[c]) + " exceeds " +
                                  std::to_string(cfg.n_languages) + " languages");
}

/// One random corpus drawn with `cfg.seed`. Consonants are processed in id
/// order; for each, a fresh bin array 0..n_languages-1 is partially
/// Fisher-Yates shuffled and the first f_c bins receive the consonant.
/// Languages left empty are kept.
inline InventoryCorpus generate_random_corpus(const NullModelConfig& cfg, const FeatureCatalog& catalog,
                                              const std::vector<Consonant>& consonants) {
    validate_null_config(cfg);
    if (cfg.source_frequencies.size() != consonants.size())
        throw ValidationError("null model: frequency vector length does not match consonant count");
    InventoryCorpus corpus;
    corpus.catalog = catalog;
    corpus.consonants = consonants;
    for (std::size_t l = 0; l < cfg.n_languages; ++l)
        corpus.languages.push_back({l, "R" + std::to_string(l), {}});
    RandomStream rng(cfg.seed);
    for (std::size_t c = 0; c < consonants.size(); ++c)
        for (std::size_t bin : rng.sample_without_replacement(cfg.n_languages, cfg.source_frequencies[c]))
            corpus.languages[bin].inventory.push_back(c);
    validate_corpus(corpus, {.allow_empty_languages = true});
    return corpus;
}

/// Replicate `index` uses the sub-seed replicate_seed(cfg.seed, index).
inline InventoryCorpus generate_replicate(const NullModelConfig& cfg, const InventoryCorpus& base, std::size_t index) {
    NullModelConfig sub = cfg;
    sub.seed = replicate_seed(cfg.seed, index);
    return generate_random_corpus(sub, base.catalog, base.consonants);
}

struct EigenvectorMetrics {
    std::size_t eigvec_index = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t neutral = 0;
    std::size_t excluded = 0;
    std::optional<double> tree_error;
    std::size_t leaves = 0;
    std::string note;
};

struct ReplicateMetrics {
    std::string name; ///< "observed" or "replicate <k>"
    std::uint64_t seed = 0;
    std::size_t empty_languages = 0;
    std::optional<double> first_correlation;
    std::vector<EigenvectorMetrics> eigvecs;
};

struct ControlReport {
    ReplicateMetrics observed;
    std::vector<ReplicateMetrics> replicates;
};

inline ReplicateMetrics corpus_metrics(const InventoryCorpus& corpus, const ExperimentParams& params,
                                       const EigOptions& eig, const std::vector<std::size_t>& eigvec_indices) {
    ReplicateMetrics m;
    for (const auto& l : corpus.languages)
        m.empty_languages += l.inventory.empty();
    const auto net = project_phonet(build_bipartite(corpus));
    const auto spec = network_spectrum(net, eig);
    const auto freq = to_doubles(consonant_frequencies(corpus));
    try {
        m.first_correlation = eigvec_frequency_correlation(spec, 0, freq).r;
    } catch (const NumericalError&) {
    }
    for (std::size_t k : eigvec_indices) {
        EigenvectorMetrics e;
        e.eigvec_index = k;
        if (k >= spec.size()) {
            e.note = "eigenvector index out of range";
            m.eigvecs.push_back(e);
            continue;
        }
        try {
            const auto ex = explain_eigenvector(corpus, spec, k, params);
            e.positive = ex.labels.count(Label::positive);
            e.negative = ex.labels.count(Label::negative);
            e.neutral = ex.labels.count(Label::neutral);
            e.excluded = ex.labels.count(Label::excluded);
            if (ex.tree) {
                e.tree_error = ex.tree->training_error();
                e.leaves = ex.tree->leaf_count();
            }
            e.note = ex.note;
        } catch (const std::runtime_error& err) {
            e.note = err.what();
        }
        m.eigvecs.push_back(std::move(e));
    }
    return m;
}

/// Observed-corpus metrics plus the same metrics on cfg.n_replicates random
/// replicates. `eigvec_indices` are 0-based (1 and 2 for the second and third
/// eigenvectors).
inline ControlReport control_report(const NullModelConfig& cfg, const InventoryCorpus& base,
                                    const ExperimentParams& params, const EigOptions& eig = {},
                                    const std::vector<std::size_t>& eigvec_indices = {1, 2}) {
    validate_null_config(cfg);
    ControlReport r;
    r.observed = corpus_metrics(base, params, eig, eigvec_indices);
    r.observed.name = "observed";
    for (std::size_t i = 0; i < cfg.n_replicates; ++i) {
        auto rep = corpus_metrics(generate_replicate(cfg, base, i), params, eig, eigvec_indices);
        rep.name = "replicate " + std::to_string(i);
        rep.seed = replicate_seed(cfg.seed, i);
        r.replicates.push_back(std::move(rep));
    }
    return r;
}

struct Aggregate {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation; 0 when n < 2
};

inline Aggregate aggregate(const std::vector<double>& v) {
    Aggregate a;
    a.n = v.size();
    if (v.empty())
        return a;
    for (double x : v)
        a.mean += x;
    a.mean /= static_cast<double>(a.n);
    if (a.n > 1) {
        double ss = 0.0;
        for (double x : v)
            ss += (x - a.mean) * (x - a.mean);
        a.sd = std::sqrt(ss / static_cast<double>(a.n - 1));
    }
    return a;
}

} // namespace phonet

#endif // PHONET_NULLMODEL_HPP
