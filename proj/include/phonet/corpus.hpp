#ifndef PHONET_CORPUS_HPP
#define PHONET_CORPUS_HPP

// Phoneme-inventory corpora: a feature catalog, consonants described by binary
// feature vectors, and languages described by their consonant inventories.
// The on-disk format is documented in docs/corpus_format.md.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "phonet/error.hpp"
#include "phonet/random.hpp"

namespace phonet {

using FeatureBits = std::vector<bool>;

struct FeatureCatalog {
    std::vector<std::string> names;

    std::size_t count() const noexcept { return names.size(); }
    bool operator==(const FeatureCatalog&) const = default;
};

struct Consonant {
    std::size_t id = 0;
    std::string symbol;
    FeatureBits features;

    bool operator==(const Consonant&) const = default;
};

struct Language {
    std::size_t id = 0;
    std::string name;
    std::vector<std::size_t> inventory; ///< consonant ids, ascending

    bool operator==(const Language&) const = default;
};

struct InventoryCorpus {
    FeatureCatalog catalog;
    std::vector<Consonant> consonants; ///< consonants[i].id == i
    std::vector<Language> languages;   ///< languages[i].id == i

    std::size_t edge_count() const noexcept {
        std::size_t n = 0;
        for (const auto& l : languages)
            n += l.inventory.size();
        return n;
    }

    bool operator==(const InventoryCorpus&) const = default;
};

struct ValidationOptions {
    /// Random corpora from the null model may leave a language empty.
    bool allow_empty_languages = false;
};

namespace detail {

inline bool is_token(const std::string& s) {
    return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char ch) {
        return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r';
    });
}

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::size_t parse_index(const std::string& tok, const std::string& what, std::size_t line) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return c >= '0' && c <= '9'; }))
        throw ParseError("expected non-negative integer " + what + ", got '" + tok + "'", line);
    try {
        return static_cast<std::size_t>(std::stoull(tok));
    } catch (const std::out_of_range&) {
        throw ParseError(what + " out of range: '" + tok + "'", line);
    }
}

} // namespace detail

/// Checks every corpus invariant. Throws ValidationError naming the offending
/// record; returns non-fatal warnings (isolated consonants, empty languages
/// when allowed).
inline std::vector<std::string> validate_corpus(const InventoryCorpus& corpus,
                                                ValidationOptions opts = {}) {
    std::vector<std::string> warnings;
    const auto& cat = corpus.catalog;
    if (cat.count() == 0)
        throw ValidationError("feature catalog is empty");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < cat.count(); ++i) {
        if (!detail::is_token(cat.names[i]))
            throw ValidationError("feature " + std::to_string(i) + ": name must be a non-empty token");
        if (!seen.insert(cat.names[i]).second)
            throw ValidationError("feature '" + cat.names[i] + "': duplicate name");
    }

    const std::size_t nc = corpus.consonants.size();
    for (std::size_t i = 0; i < nc; ++i) {
        const auto& c = corpus.consonants[i];
        if (c.id != i)
            throw ValidationError("consonant '" + c.symbol + "': id " + std::to_string(c.id) +
                                  " is not contiguous (expected " + std::to_string(i) + ")");
        if (!detail::is_token(c.symbol))
            throw ValidationError("consonant " + std::to_string(i) + ": symbol must be a non-empty token");
        if (c.features.size() != cat.count())
            throw ValidationError("consonant " + std::to_string(i) + " ('" + c.symbol + "'): feature vector has " +
                                  std::to_string(c.features.size()) + " bits, catalog has " +
                                  std::to_string(cat.count()));
    }

    std::vector<std::size_t> freq(nc, 0);
    for (std::size_t i = 0; i < corpus.languages.size(); ++i) {
        const auto& l = corpus.languages[i];
        const std::string who = "language " + std::to_string(l.id) + " ('" + l.name + "')";
        if (l.id != i)
            throw ValidationError(who + ": id is not contiguous (expected " + std::to_string(i) + ")");
        if (!detail::is_token(l.name))
            throw ValidationError("language " + std::to_string(i) + ": name must be a non-empty token");
        if (l.inventory.empty()) {
            if (!opts.allow_empty_languages)
                throw ValidationError(who + ": empty inventory");
            warnings.push_back(who + ": empty inventory");
        }
        for (std::size_t k = 0; k < l.inventory.size(); ++k) {
            const std::size_t c = l.inventory[k];
            if (c >= nc)
                throw ValidationError(who + ": references undefined consonant id " + std::to_string(c));
            if (k > 0 && l.inventory[k - 1] >= c)
                throw ValidationError(who + (l.inventory[k - 1] == c ? ": duplicate consonant id " : ": inventory not ascending at id ") +
                                      std::to_string(c));
            ++freq[c];
        }
    }
    for (std::size_t c = 0; c < nc; ++c)
        if (freq[c] == 0)
            warnings.push_back("consonant " + std::to_string(c) + " ('" + corpus.consonants[c].symbol +
                               "') occurs in no language");
    return warnings;
}

/// f_c: number of languages whose inventory contains consonant c.
inline std::vector<std::size_t> consonant_frequencies(const InventoryCorpus& corpus) {
    std::vector<std::size_t> f(corpus.consonants.size(), 0);
    for (const auto& l : corpus.languages)
        for (std::size_t c : l.inventory)
            ++f[c];
    return f;
}

inline std::vector<std::size_t> inventory_sizes(const InventoryCorpus& corpus) {
    std::vector<std::size_t> s;
    s.reserve(corpus.languages.size());
    for (const auto& l : corpus.languages)
        s.push_back(l.inventory.size());
    return s;
}

// --- text format -----------------------------------------------------------

inline InventoryCorpus parse_corpus(std::istream& in) {
    enum class Section { none, features, consonants, languages };
    Section section = Section::none;
    InventoryCorpus corpus;
    std::vector<Consonant> consonants;
    std::vector<Language> languages;
    bool saw[3] = {false, false, false};

    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        if (line.front() == '[') {
            if (line == "[features]")
                section = Section::features;
            else if (line == "[consonants]")
                section = Section::consonants;
            else if (line == "[languages]")
                section = Section::languages;
            else
                throw ParseError("unknown section header " + line, lineno);
            const int idx = static_cast<int>(section) - 1;
            if (saw[idx])
                throw ParseError("section " + line + " appears twice", lineno);
            saw[idx] = true;
            continue;
        }
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;)
            tok.push_back(t);
        switch (section) {
        case Section::none:
            throw ParseError("record before any section header", lineno);
        case Section::features:
            if (tok.size() != 1)
                throw ParseError("feature record must be a single name", lineno);
            corpus.catalog.names.push_back(tok[0]);
            break;
        case Section::consonants: {
            if (tok.size() != 3)
                throw ParseError("consonant record must be '<id> <symbol> <bits>'", lineno);
            Consonant c;
            c.id = detail::parse_index(tok[0], "consonant id", lineno);
            c.symbol = tok[1];
            for (char ch : tok[2]) {
                if (ch != '0' && ch != '1')
                    throw ParseError("consonant " + tok[0] + ": feature bits must be '0'/'1'", lineno);
                c.features.push_back(ch == '1');
            }
            consonants.push_back(std::move(c));
            break;
        }
        case Section::languages: {
            if (tok.size() < 2)
                throw ParseError("language record must be '<id> <name> <consonant ids...>'", lineno);
            Language l;
            l.id = detail::parse_index(tok[0], "language id", lineno);
            l.name = tok[1];
            for (std::size_t k = 2; k < tok.size(); ++k)
                l.inventory.push_back(detail::parse_index(tok[k], "consonant id", lineno));
            languages.push_back(std::move(l));
            break;
        }
        }
    }
    for (int i = 0; i < 3; ++i)
        if (!saw[i])
            throw ParseError(std::string("missing section [") +
                             (i == 0 ? "features" : i == 1 ? "consonants" : "languages") + "]");

    auto place = [](auto& records, const char* what) {
        using Rec = typename std::decay_t<decltype(records)>::value_type;
        std::vector<Rec> out(records.size());
        std::vector<bool> filled(records.size(), false);
        for (auto& r : records) {
            if (r.id >= records.size())
                throw ValidationError(std::string(what) + " id " + std::to_string(r.id) +
                                      " is out of range (ids must be contiguous from 0)");
            if (filled[r.id])
                throw ValidationError(std::string("duplicate ") + what + " id " + std::to_string(r.id));
            filled[r.id] = true;
            out[r.id] = std::move(r);
        }
        return out;
    };
    corpus.consonants = place(consonants, "consonant");
    corpus.languages = place(languages, "language");
    for (auto& l : corpus.languages) {
        std::sort(l.inventory.begin(), l.inventory.end());
        const auto dup = std::adjacent_find(l.inventory.begin(), l.inventory.end());
        if (dup != l.inventory.end())
            throw ValidationError("language " + std::to_string(l.id) + " ('" + l.name +
                                  "'): duplicate consonant id " + std::to_string(*dup));
    }
    validate_corpus(corpus);
    return corpus;
}

inline InventoryCorpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open corpus file '" + path + "'");
    return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, const InventoryCorpus& corpus) {
    out << "# phonet corpus v1\n[features]\n";
    for (const auto& n : corpus.catalog.names)
        out << n << '\n';
    out << "[consonants]\n";
    for (const auto& c : corpus.consonants) {
        out << c.id << ' ' << c.symbol << ' ';
        for (bool b : c.features)
            out << (b ? '1' : '0');
        out << '\n';
    }
    out << "[languages]\n";
    for (const auto& l : corpus.languages) {
        out << l.id << ' ' << l.name;
        for (std::size_t c : l.inventory)
            out << ' ' << c;
        out << '\n';
    }
}

inline std::string corpus_to_string(const InventoryCorpus& corpus) {
    std::ostringstream os;
    write_corpus(os, corpus);
    return os.str();
}

inline void save_corpus(const std::string& path, const InventoryCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot write corpus file '" + path + "'");
    write_corpus(out, corpus);
}

// --- synthesis ---------------------------------------------------------------

struct FrequencyProfile {
    enum class Kind { uniform, geometric, explicit_counts };

    Kind kind = Kind::uniform;
    /// uniform: every consonant joins each language with this probability.
    double density = 0.5;
    /// geometric: consonant c joins each language with probability head * ratio^c.
    double head = 0.9;
    double ratio = 0.99;
    /// explicit_counts: consonant c is placed in exactly counts[c] languages.
    std::vector<std::size_t> counts;

    static FrequencyProfile uniform(double p) {
        FrequencyProfile f;
        f.density = p;
        return f;
    }
    static FrequencyProfile geometric(double head, double ratio) {
        FrequencyProfile f;
        f.kind = Kind::geometric;
        f.head = head;
        f.ratio = ratio;
        return f;
    }
    static FrequencyProfile explicit_counts(std::vector<std::size_t> counts) {
        FrequencyProfile f;
        f.kind = Kind::explicit_counts;
        f.counts = std::move(counts);
        return f;
    }

    /// Per-language inclusion probability of consonant c (uniform/geometric).
    double inclusion_probability(std::size_t c) const {
        return kind == Kind::uniform ? density : head * std::pow(ratio, static_cast<double>(c));
    }
};

struct SynthesisOptions {
    std::size_t n_languages = 10;
    std::size_t n_consonants = 20;
    std::size_t n_features = 8;
    FrequencyProfile profile;
    double feature_density = 0.5;
    std::uint64_t seed = 1;
};

/// Deterministic synthetic corpus. Draw order: feature bits (consonant-major),
/// then memberships. For probabilistic profiles a language whose row comes out
/// empty is redrawn; for explicit counts the whole packing is redrawn until no
/// language is empty.
inline InventoryCorpus synthesize_corpus(const SynthesisOptions& opt) {
    if (opt.n_languages == 0 || opt.n_consonants == 0 || opt.n_features == 0)
        throw ValidationError("synthesize_corpus: counts must be >= 1");
    if (!(opt.feature_density >= 0.0 && opt.feature_density <= 1.0))
        throw ValidationError("synthesize_corpus: feature density must be in [0, 1]");
    const auto& prof = opt.profile;
    using Kind = FrequencyProfile::Kind;
    if (prof.kind == Kind::explicit_counts) {
        if (prof.counts.size() != opt.n_consonants)
            throw ValidationError("synthesize_corpus: explicit frequency vector has " +
                                  std::to_string(prof.counts.size()) + " entries, expected " +
                                  std::to_string(opt.n_consonants));
        std::size_t total = 0;
        for (std::size_t c = 0; c < prof.counts.size(); ++c) {
            if (prof.counts[c] > opt.n_languages)
                throw ValidationError("synthesize_corpus: consonant " + std::to_string(c) + " frequency " +
                                      std::to_string(prof.counts[c]) + " exceeds language count");
            total += prof.counts[c];
        }
        if (total < opt.n_languages)
            throw ValidationError("synthesize_corpus: explicit frequencies cannot fill every language");
    } else {
        for (std::size_t c = 0; c < opt.n_consonants; ++c) {
            const double p = prof.inclusion_probability(c);
            if (!(p >= 0.0 && p <= 1.0))
                throw ValidationError("synthesize_corpus: inclusion probability of consonant " +
                                      std::to_string(c) + " outside [0, 1]");
        }
        if (prof.inclusion_probability(0) <= 0.0 && prof.kind == Kind::geometric)
            throw ValidationError("synthesize_corpus: geometric profile with zero head");
        if (prof.kind == Kind::uniform && prof.density <= 0.0)
            throw ValidationError("synthesize_corpus: uniform profile with zero density");
    }

    RandomStream rng(opt.seed);
    InventoryCorpus corpus;
    for (std::size_t k = 0; k < opt.n_features; ++k)
        corpus.catalog.names.push_back("f" + std::to_string(k));
    for (std::size_t c = 0; c < opt.n_consonants; ++c) {
        Consonant con{c, "c" + std::to_string(c), FeatureBits(opt.n_features)};
        for (std::size_t k = 0; k < opt.n_features; ++k)
            con.features[k] = rng.bernoulli(opt.feature_density);
        corpus.consonants.push_back(std::move(con));
    }
    for (std::size_t l = 0; l < opt.n_languages; ++l)
        corpus.languages.push_back({l, "L" + std::to_string(l), {}});

    constexpr int max_attempts = 10000;
    if (prof.kind == Kind::explicit_counts) {
        for (int attempt = 0;; ++attempt) {
            if (attempt == max_attempts)
                throw ValidationError("synthesize_corpus: explicit profile keeps leaving languages empty");
            for (auto& l : corpus.languages)
                l.inventory.clear();
            for (std::size_t c = 0; c < opt.n_consonants; ++c)
                for (std::size_t l : rng.sample_without_replacement(opt.n_languages, prof.counts[c]))
                    corpus.languages[l].inventory.push_back(c);
            if (std::none_of(corpus.languages.begin(), corpus.languages.end(),
                             [](const Language& l) { return l.inventory.empty(); }))
                break;
        }
    } else {
        for (auto& l : corpus.languages) {
            for (int attempt = 0; l.inventory.empty(); ++attempt) {
                if (attempt == max_attempts)
                    throw ValidationError("synthesize_corpus: profile keeps producing empty inventories");
                for (std::size_t c = 0; c < opt.n_consonants; ++c)
                    if (rng.bernoulli(prof.inclusion_probability(c)))
                        l.inventory.push_back(c);
            }
        }
    }
    validate_corpus(corpus);
    return corpus;
}

} // namespace phonet

#endif // PHONET_CORPUS_HPP
