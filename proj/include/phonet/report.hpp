#ifndef PHONET_REPORT_HPP
#define PHONET_REPORT_HPP

// Text and CSV emitters for every artifact. Numbers use 12 significant digits
// ("%.12g"); every file starts with a provenance line.

#include <cinttypes>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "phonet/corpus.hpp"
#include "phonet/netbuild.hpp"
#include "phonet/nullmodel.hpp"
#include "phonet/spectra.hpp"
#include "phonet/typology.hpp"

namespace phonet {

inline constexpr const char* tool_version = "0.1.0";

inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string("NA"); }

/// FNV-1a, 64 bit.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

struct Provenance {
    std::string config_hash;
    std::string corpus_hash;

    std::string line() const {
        return std::string("# phonet ") + tool_version + " config=" + config_hash + " corpus=" + corpus_hash;
    }
};

inline std::string corpus_hash(const InventoryCorpus& c) { return hex64(fnv1a64(corpus_to_string(c))); }

/// Extracts key=value from a provenance line; empty if absent.
inline std::string provenance_field(const std::string& line, const std::string& key) {
    const auto at = line.find(" " + key + "=");
    if (line.rfind("# phonet ", 0) != 0 || at == std::string::npos)
        return {};
    const auto start = at + key.size() + 2;
    return line.substr(start, line.find(' ', start) - start);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + "\"";
}

// --- spectra -----------------------------------------------------------------------

inline void write_spectrum_table(std::ostream& out, const Spectrum& s) {
    out << "index,eigenvalue,residual\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << i << ',' << fmt_num(s.eigenvalues[i]) << ',' << fmt_num(s.residual_norms[i]) << '\n';
}

/// "node_id,frequency,component" for eigenvector `index` (0-based).
inline void write_eigenvector_table(std::ostream& out, const Spectrum& s, std::size_t index,
                                    const CooccurrenceNetwork& net) {
    out << "node_id,frequency,component\n";
    const auto x = s.eigenvector(index);
    for (std::size_t i = 0; i < s.size(); ++i)
        out << net.node_index[i] << ',' << net.node_weight[i] << ',' << fmt_num(x[i]) << '\n';
}

inline void write_binned(std::ostream& out, const BinnedSpectrum& b) {
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t k = 0; k < b.bins(); ++k)
        out << fmt_num(b.bin_edges[k]) << ',' << fmt_num(b.bin_edges[k + 1]) << ',' << b.counts[k] << '\n';
}

inline void write_ranked(std::ostream& out, const std::vector<double>& ranked) {
    out << "rank,magnitude\n";
    for (std::size_t i = 0; i < ranked.size(); ++i)
        out << i + 1 << ',' << fmt_num(ranked[i]) << '\n';
}

inline void write_frobenius(std::ostream& out, const Spectrum& s, std::size_t kmax) {
    out << "k,fraction\n";
    for (std::size_t k = 1; k <= std::min(kmax, s.size()); ++k)
        out << k << ',' << fmt_num(frobenius_fraction(s, k)) << '\n';
}

// --- typology ------------------------------------------------------------------------

template <class NameOf>
void write_labeling(std::ostream& out, const ClassLabeling& l, NameOf&& name_of) {
    out << "# eigvec_index=" << l.eigvec_index + 1 << " max_plus=" << fmt_num(l.max_plus)
        << " max_minus=" << fmt_num(l.max_minus) << " fraction=" << fmt_num(l.fraction) << " min_freq=" << l.min_freq
        << '\n';
    out << "node_id,name,component,label\n";
    for (std::size_t i = 0; i < l.labels.size(); ++i)
        out << l.node_ids[i] << ',' << csv_field(name_of(l.node_ids[i])) << ',' << fmt_num(l.components[i]) << ','
            << to_string(l.labels[i]) << '\n';
}

/// Reads a labeling written by write_labeling (provenance and '#' lines skipped).
inline ClassLabeling read_labeling(std::istream& in) {
    ClassLabeling l;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        if (!header) {
            if (line != "node_id,name,component,label")
                throw ParseError("expected labeling header 'node_id,name,component,label'", lineno);
            header = true;
            continue;
        }
        const auto first = line.find(',');
        const auto last = line.rfind(',');
        const auto mid = line.rfind(',', last - 1);
        if (first == std::string::npos || mid == std::string::npos || mid < first)
            throw ParseError("malformed labeling row", lineno);
        l.node_ids.push_back(detail::parse_index(line.substr(0, first), "node id", lineno));
        try {
            l.components.push_back(std::stod(line.substr(mid + 1, last - mid - 1)));
        } catch (const std::exception&) {
            throw ParseError("malformed component value", lineno);
        }
        const std::string lab = line.substr(last + 1);
        if (lab == "positive")
            l.labels.push_back(Label::positive);
        else if (lab == "negative")
            l.labels.push_back(Label::negative);
        else if (lab == "neutral")
            l.labels.push_back(Label::neutral);
        else if (lab == "excluded")
            l.labels.push_back(Label::excluded);
        else
            throw ParseError("unknown label '" + lab + "'", lineno);
    }
    if (!header)
        throw ParseError("labeling file has no header");
    return l;
}

inline void write_crossprev(std::ostream& out, const CrossPrevalenceTable& t) {
    out << "        C+            C-\n";
    out << "L+  " << fmt_opt(t.at(Label::positive, Label::positive)) << "  "
        << fmt_opt(t.at(Label::positive, Label::negative)) << '\n';
    out << "L-  " << fmt_opt(t.at(Label::negative, Label::positive)) << "  "
        << fmt_opt(t.at(Label::negative, Label::negative)) << '\n';
}

inline void write_overlap(std::ostream& out, const MarkednessOverlap& m, const InventoryCorpus& corpus) {
    out << "# hierarchy ties: higher frequency first, then lower consonant id\n";
    out << "# mean_overlap=" << fmt_num(m.mean) << " languages_scored=" << m.scored << '\n';
    out << "language_id,name,inventory_size,overlap\n";
    for (std::size_t i = 0; i < corpus.languages.size(); ++i) {
        const auto& l = corpus.languages[i];
        out << l.id << ',' << csv_field(l.name) << ',' << l.inventory.size() << ',' << fmt_opt(m.per_language[i])
            << '\n';
    }
}

// --- control report ---------------------------------------------------------------------

inline void write_control_table(std::ostream& out, const ControlReport& r) {
    out << "name,seed,empty_languages,first_eigvec_r";
    const auto& ev = r.observed.eigvecs;
    for (const auto& e : ev) {
        const std::string p = "eigvec" + std::to_string(e.eigvec_index + 1) + "_";
        out << ',' << p << "positive," << p << "negative," << p << "neutral," << p << "excluded," << p
            << "tree_error," << p << "leaves";
    }
    out << '\n';
    auto row = [&](const ReplicateMetrics& m) {
        out << csv_field(m.name) << ',' << m.seed << ',' << m.empty_languages << ',' << fmt_opt(m.first_correlation);
        for (const auto& e : m.eigvecs)
            out << ',' << e.positive << ',' << e.negative << ',' << e.neutral << ',' << e.excluded << ','
                << fmt_opt(e.tree_error) << ',' << e.leaves;
        out << '\n';
    };
    row(r.observed);
    for (const auto& m : r.replicates)
        row(m);
}

inline void write_control_summary(std::ostream& out, const ControlReport& r) {
    std::vector<double> corr;
    for (const auto& m : r.replicates)
        if (m.first_correlation)
            corr.push_back(*m.first_correlation);
    const auto a = aggregate(corr);
    out << "replicates = " << r.replicates.size() << '\n';
    out << "observed.first_eigvec_r = " << fmt_opt(r.observed.first_correlation) << '\n';
    out << "random.first_eigvec_r = " << fmt_num(a.mean) << " +- " << fmt_num(a.sd) << " (n=" << a.n << ")\n";
    for (std::size_t k = 0; k < r.observed.eigvecs.size(); ++k) {
        const auto& obs = r.observed.eigvecs[k];
        std::vector<double> err;
        for (const auto& m : r.replicates)
            if (m.eigvecs[k].tree_error)
                err.push_back(*m.eigvecs[k].tree_error);
        const auto e = aggregate(err);
        const std::string p = "eigvec" + std::to_string(obs.eigvec_index + 1);
        out << "observed." << p << ".tree_error = " << fmt_opt(obs.tree_error) << '\n';
        out << "random." << p << ".tree_error = " << fmt_num(e.mean) << " +- " << fmt_num(e.sd) << " (n=" << e.n
            << ")\n";
    }
}

} // namespace phonet

#endif // PHONET_REPORT_HPP
