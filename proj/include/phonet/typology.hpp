#ifndef PHONET_TYPOLOGY_HPP
#define PHONET_TYPOLOGY_HPP

// Typology induction from eigenvectors: sign/threshold labelings of consonants
// and languages, a gain-ratio decision tree over binary features that explains
// a consonant labeling, cross-prevalence of labeled consonant classes within
// labeled language classes, and the markedness-hierarchy overlap.

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phonet/corpus.hpp"
#include "phonet/error.hpp"
#include "phonet/spectra.hpp"

namespace phonet {

enum class Label { positive = 0, negative = 1, neutral = 2, excluded = 3 };

inline const char* to_string(Label l) {
    switch (l) {
    case Label::positive: return "positive";
    case Label::negative: return "negative";
    case Label::neutral: return "neutral";
    case Label::excluded: return "excluded";
    }
    return "?";
}

inline Label flipped(Label l) {
    if (l == Label::positive)
        return Label::negative;
    if (l == Label::negative)
        return Label::positive;
    return l;
}

struct ClassLabeling {
    std::vector<std::size_t> node_ids;
    std::vector<double> components;
    std::vector<Label> labels;
    std::size_t eigvec_index = 0; ///< 0-based, descending eigenvalue order
    double max_plus = 0.0;
    double max_minus = 0.0;
    double fraction = 0.0;
    std::size_t min_freq = 0;

    std::vector<std::size_t> members(Label l) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == l)
                out.push_back(node_ids[i]);
        return out;
    }

    std::size_t count(Label l) const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
    }
};

/// Consonant-side labeling. Nodes with freq < min_freq are excluded; among the
/// rest, a positive component at least fraction * MAX+ is positive, a negative
/// component at least fraction * MAX- in magnitude is negative, and everything
/// else is neutral. A side with no components leaves its MAX at 0.
inline ClassLabeling classify_by_eigenvector(const Spectrum& s, std::size_t eigvec_index,
                                             std::span<const double> freq, std::size_t min_freq = 5,
                                             double fraction = 0.15) {
    if (eigvec_index >= s.size())
        throw ValidationError("eigenvector index " + std::to_string(eigvec_index) + " out of range (order " +
                              std::to_string(s.size()) + ")");
    if (freq.size() != s.size())
        throw ValidationError("frequency vector length does not match spectrum order");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValidationError("neutral fraction must lie in (0, 1)");

    ClassLabeling out;
    out.eigvec_index = eigvec_index;
    out.fraction = fraction;
    out.min_freq = min_freq;
    const auto x = s.eigenvector(eigvec_index);
    bool any_survivor = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.node_ids.push_back(i);
        out.components.push_back(x[i]);
        const bool keep = freq[i] >= static_cast<double>(min_freq);
        out.labels.push_back(keep ? Label::neutral : Label::excluded);
        if (!keep)
            continue;
        any_survivor = true;
        if (x[i] > 0.0)
            out.max_plus = std::max(out.max_plus, x[i]);
        else if (x[i] < 0.0)
            out.max_minus = std::max(out.max_minus, -x[i]);
    }
    if (!any_survivor)
        throw ValidationError("classify_by_eigenvector: every node falls below the frequency filter");
    if (out.max_plus == 0.0 && out.max_minus == 0.0)
        throw NumericalError("classify_by_eigenvector: eigenvector vanishes on all surviving nodes");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (out.labels[i] == Label::excluded)
            continue;
        if (x[i] > 0.0 && x[i] >= fraction * out.max_plus)
            out.labels[i] = Label::positive;
        else if (x[i] < 0.0 && -x[i] >= fraction * out.max_minus)
            out.labels[i] = Label::negative;
    }
    return out;
}

/// Language-side labeling: strict sign split, exact zeros neutral.
inline ClassLabeling classify_languages(const Spectrum& lang, std::size_t eigvec_index) {
    if (eigvec_index >= lang.size())
        throw ValidationError("eigenvector index " + std::to_string(eigvec_index) + " out of range (order " +
                              std::to_string(lang.size()) + ")");
    ClassLabeling out;
    out.eigvec_index = eigvec_index;
    const auto x = lang.eigenvector(eigvec_index);
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.node_ids.push_back(i);
        out.components.push_back(x[i]);
        out.labels.push_back(x[i] > 0.0 ? Label::positive : x[i] < 0.0 ? Label::negative : Label::neutral);
        if (x[i] > 0.0)
            out.max_plus = std::max(out.max_plus, x[i]);
        else
            out.max_minus = std::max(out.max_minus, -x[i]);
    }
    if (out.max_plus == 0.0 && out.max_minus == 0.0)
        throw NumericalError("classify_languages: eigenvector is identically zero");
    return out;
}

// --- decision tree ---------------------------------------------------------------

struct TrainingExample {
    FeatureBits features;
    Label label = Label::positive;
};

struct TreeOptions {
    /// A split is admissible only if both branches keep at least this many examples.
    std::size_t min_leaf = 2;
};

class DecisionTree {
public:
    static constexpr std::size_t n_classes = 3;
    using Counts = std::array<std::size_t, n_classes>;

    struct Node {
        bool leaf = true;
        std::size_t feature = 0;  ///< split nodes: tested feature
        std::size_t absent = 0;   ///< child index when the feature bit is 0
        std::size_t present = 0;  ///< child index when the feature bit is 1
        Label label = Label::positive; ///< majority class of the training examples here
        Counts counts{};
        std::size_t size() const { return counts[0] + counts[1] + counts[2]; }
        std::size_t errors() const { return size() - counts[static_cast<std::size_t>(label)]; }
    };

    struct Rule {
        std::vector<std::pair<std::size_t, bool>> conditions; ///< (feature, required bit)
        Label label = Label::positive;
        std::size_t support = 0;
        std::size_t errors = 0;
    };

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t feature_count() const noexcept { return n_features_; }
    std::size_t training_size() const noexcept { return nodes_.empty() ? 0 : nodes_[0].size(); }

    std::size_t training_errors() const {
        std::size_t e = 0;
        for (const auto& n : nodes_)
            if (n.leaf)
                e += n.errors();
        return e;
    }

    double training_error() const {
        return training_size() ? static_cast<double>(training_errors()) / static_cast<double>(training_size()) : 0.0;
    }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
    }

    std::size_t leaf_for(const FeatureBits& bits) const {
        std::size_t at = 0;
        while (!nodes_[at].leaf)
            at = bits[nodes_[at].feature] ? nodes_[at].present : nodes_[at].absent;
        return at;
    }

    Label classify(const FeatureBits& bits) const { return nodes_[leaf_for(bits)].label; }

    std::vector<Rule> rules() const {
        std::vector<Rule> out;
        std::vector<std::pair<std::size_t, bool>> path;
        collect_rules(0, path, out);
        return out;
    }

    bool operator==(const DecisionTree& o) const {
        if (nodes_.size() != o.nodes_.size() || n_features_ != o.n_features_)
            return false;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& a = nodes_[i];
            const Node& b = o.nodes_[i];
            if (a.leaf != b.leaf || a.label != b.label || a.counts != b.counts ||
                (!a.leaf && (a.feature != b.feature || a.absent != b.absent || a.present != b.present)))
                return false;
        }
        return true;
    }

    friend DecisionTree learn_tree(std::span<const TrainingExample>, TreeOptions);

private:
    void collect_rules(std::size_t at, std::vector<std::pair<std::size_t, bool>>& path, std::vector<Rule>& out) const {
        const Node& n = nodes_[at];
        if (n.leaf) {
            out.push_back({path, n.label, n.size(), n.errors()});
            return;
        }
        path.emplace_back(n.feature, true);
        collect_rules(n.present, path, out);
        path.back().second = false;
        collect_rules(n.absent, path, out);
        path.pop_back();
    }

    std::vector<Node> nodes_;
    std::size_t n_features_ = 0;
};

namespace detail {

inline double entropy(const DecisionTree::Counts& c) {
    const double n = static_cast<double>(c[0] + c[1] + c[2]);
    double h = 0.0;
    for (std::size_t k : c)
        if (k) {
            const double p = static_cast<double>(k) / n;
            h -= p * std::log2(p);
        }
    return h;
}

inline double binary_entropy(std::size_t a, std::size_t b) {
    return entropy(DecisionTree::Counts{a, b, 0});
}

inline Label majority(const DecisionTree::Counts& c) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < c.size(); ++k)
        if (c[k] > c[best])
            best = k;
    return static_cast<Label>(best);
}

} // namespace detail

/// Greedy top-down induction with C4.5's split criterion on binary features:
/// among features with positive information gain and gain at least the
/// average gain of those candidates, the largest gain ratio wins; exact ties
/// go to the lowest feature id. No pruning. Depends only on the multiset of
/// examples, not their order.
inline DecisionTree learn_tree(std::span<const TrainingExample> examples, TreeOptions opt = {}) {
    if (examples.size() < 2)
        throw ValidationError("learn_tree: need at least two examples");
    const std::size_t nf = examples[0].features.size();
    if (nf == 0)
        throw ValidationError("learn_tree: empty feature set");
    DecisionTree::Counts total{};
    for (const auto& e : examples) {
        if (e.features.size() != nf)
            throw ValidationError("learn_tree: feature vectors differ in length");
        if (e.label == Label::excluded)
            throw ValidationError("learn_tree: excluded examples cannot be training targets");
        ++total[static_cast<std::size_t>(e.label)];
    }
    if (std::count_if(total.begin(), total.end(), [](std::size_t k) { return k > 0; }) < 2)
        throw ValidationError("learn_tree: training set contains a single class");

    const std::size_t min_leaf = std::max<std::size_t>(opt.min_leaf, 1);
    DecisionTree tree;
    tree.n_features_ = nf;

    struct Pending {
        std::size_t node;
        std::vector<std::size_t> members;
        std::vector<bool> used;
    };
    std::vector<Pending> stack;
    tree.nodes_.emplace_back();
    {
        std::vector<std::size_t> all(examples.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        stack.push_back({0, std::move(all), std::vector<bool>(nf, false)});
    }
    // Depth-first, present-branch first, so node numbering is reproducible.
    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        DecisionTree::Counts counts{};
        for (std::size_t i : job.members)
            ++counts[static_cast<std::size_t>(examples[i].label)];
        auto& node = tree.nodes_[job.node];
        node.counts = counts;
        node.label = detail::majority(counts);
        node.leaf = true;
        const std::size_t n = job.members.size();
        const double h = detail::entropy(counts);
        if (h == 0.0 || n < 2 * min_leaf)
            continue;

        struct Candidate {
            std::size_t feature;
            double gain;
            double ratio;
        };
        std::vector<Candidate> cands;
        for (std::size_t f = 0; f < nf; ++f) {
            if (job.used[f])
                continue;
            DecisionTree::Counts on{}, off{};
            for (std::size_t i : job.members)
                ++(examples[i].features[f] ? on : off)[static_cast<std::size_t>(examples[i].label)];
            const std::size_t n1 = on[0] + on[1] + on[2];
            const std::size_t n0 = n - n1;
            if (n1 < min_leaf || n0 < min_leaf)
                continue;
            const double w1 = static_cast<double>(n1) / static_cast<double>(n);
            const double w0 = static_cast<double>(n0) / static_cast<double>(n);
            const double gain = h - w1 * detail::entropy(on) - w0 * detail::entropy(off);
            if (gain <= 1e-12)
                continue;
            cands.push_back({f, gain, gain / detail::binary_entropy(n0, n1)});
        }
        if (cands.empty())
            continue;
        double avg = 0.0;
        for (const auto& c : cands)
            avg += c.gain;
        avg /= static_cast<double>(cands.size());
        const Candidate* best = nullptr;
        for (const auto& c : cands)
            if (c.gain >= avg - 1e-12 && (!best || c.ratio > best->ratio))
                best = &c;

        const std::size_t feature = best->feature;
        std::vector<std::size_t> present, absent;
        for (std::size_t i : job.members)
            (examples[i].features[feature] ? present : absent).push_back(i);
        auto used = job.used;
        used[feature] = true;
        const std::size_t present_id = tree.nodes_.size();
        const std::size_t absent_id = present_id + 1;
        tree.nodes_.emplace_back();
        tree.nodes_.emplace_back();
        auto& split = tree.nodes_[job.node];
        split.leaf = false;
        split.feature = feature;
        split.present = present_id;
        split.absent = absent_id;
        stack.push_back({absent_id, std::move(absent), used});
        stack.push_back({present_id, std::move(present), std::move(used)});
    }
    return tree;
}

/// Training set for explaining a consonant labeling: positive and negative
/// consonants, plus neutral ones when requested.
inline std::vector<TrainingExample> training_examples(const InventoryCorpus& corpus, const ClassLabeling& labels,
                                                      bool include_neutral = false) {
    std::vector<TrainingExample> out;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const Label l = labels.labels[i];
        if (l == Label::positive || l == Label::negative || (include_neutral && l == Label::neutral))
            out.push_back({corpus.consonants.at(labels.node_ids[i]).features, l});
    }
    return out;
}


// --- Experiment I composition ------------------------------------------------------

struct ExperimentParams {
    std::size_t min_freq = 5;
    double neutral_fraction = 0.15;
    std::size_t min_leaf = 2;
    bool include_neutral = false;
};

/// Consonant labeling from one eigenvector plus the tree explaining it. The
/// tree is absent (with a note) when the labeling leaves fewer than two classes
/// to train on.
struct EigenvectorExplanation {
    ClassLabeling labels;
    std::optional<DecisionTree> tree;
    std::string note;
};

inline EigenvectorExplanation explain_eigenvector(const InventoryCorpus& corpus, const Spectrum& phonet,
                                                  std::size_t eigvec_index, const ExperimentParams& p) {
    const auto freq = to_doubles(consonant_frequencies(corpus));
    EigenvectorExplanation out{classify_by_eigenvector(phonet, eigvec_index, freq, p.min_freq, p.neutral_fraction), {}, {}};
    const auto examples = training_examples(corpus, out.labels, p.include_neutral);
    try {
        out.tree = learn_tree(examples, TreeOptions{p.min_leaf});
    } catch (const ValidationError& e) {
        out.note = e.what();
    }
    return out;
}

// --- tree export -------------------------------------------------------------------

namespace detail {

inline std::string leaf_text(const DecisionTree::Node& n) {
    return std::string(to_string(n.label)) + " (" + std::to_string(n.size()) + "/" + std::to_string(n.errors()) + ")";
}

inline void write_subtree(std::ostream& out, const DecisionTree& tree, const FeatureCatalog& catalog, std::size_t at,
                          std::size_t depth) {
    const auto& nodes = tree.nodes();
    const auto& n = nodes[at];
    const std::size_t children[2] = {n.present, n.absent};
    for (int b = 0; b < 2; ++b) {
        const auto& child = nodes[children[b]];
        for (std::size_t d = 0; d < depth; ++d)
            out << "|   ";
        out << catalog.names.at(n.feature) << " = " << (b == 0 ? 1 : 0);
        if (child.leaf) {
            out << ": " << leaf_text(child) << '\n';
        } else {
            out << '\n';
            write_subtree(out, tree, catalog, children[b], depth + 1);
        }
    }
}

} // namespace detail

/// Indented listing, one line per branch; leaves read "label (support/errors)".
inline void write_tree_text(std::ostream& out, const DecisionTree& tree, const FeatureCatalog& catalog) {
    if (tree.nodes().front().leaf)
        out << ": " << detail::leaf_text(tree.nodes().front()) << '\n';
    else
        detail::write_subtree(out, tree, catalog, 0, 0);
}

/// Root-to-leaf rules, "IF a = 1 AND b = 0 THEN label  [support=.. errors=..]".
inline void write_tree_rules(std::ostream& out, const DecisionTree& tree, const FeatureCatalog& catalog) {
    for (const auto& r : tree.rules()) {
        out << "IF ";
        if (r.conditions.empty())
            out << "TRUE";
        for (std::size_t i = 0; i < r.conditions.size(); ++i)
            out << (i ? " AND " : "") << catalog.names.at(r.conditions[i].first) << " = "
                << (r.conditions[i].second ? 1 : 0);
        out << " THEN " << to_string(r.label) << "  [support=" << r.support << " errors=" << r.errors << "]\n";
    }
}

inline nlohmann::ordered_json tree_to_json(const DecisionTree& tree, const FeatureCatalog& catalog) {
    nlohmann::ordered_json doc;
    doc["features"] = catalog.names;
    doc["training_size"] = tree.training_size();
    doc["training_errors"] = tree.training_errors();
    doc["leaves"] = tree.leaf_count();
    auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const auto& n = tree.nodes()[i];
        nlohmann::ordered_json j;
        j["id"] = i;
        j["leaf"] = n.leaf;
        if (!n.leaf) {
            j["feature"] = n.feature;
            j["feature_name"] = catalog.names.at(n.feature);
            j["present"] = n.present;
            j["absent"] = n.absent;
        }
        j["label"] = to_string(n.label);
        j["counts"] = {{"positive", n.counts[0]}, {"negative", n.counts[1]}, {"neutral", n.counts[2]}};
        nodes.push_back(std::move(j));
    }
    return doc;
}

// --- cross-prevalence --------------------------------------------------------------

/// Cells in the order (L+,C+), (L+,C-), (L-,C+), (L-,C-). A cell whose language
/// or consonant class is empty has no value.
struct CrossPrevalenceTable {
    std::array<std::optional<double>, 4> cells;

    static constexpr std::size_t cell(Label lang, Label cons) {
        return (lang == Label::positive ? 0 : 2) + (cons == Label::positive ? 0 : 1);
    }
    const std::optional<double>& at(Label lang, Label cons) const { return cells[cell(lang, cons)]; }
};

/// (sum over l in L of |inventory(l) & C|) / (|L| |C|).
inline std::optional<double> prevalence(const InventoryCorpus& corpus, std::span<const std::size_t> langs,
                                        std::span<const std::size_t> cons) {
    if (langs.empty() || cons.empty())
        return std::nullopt;
    std::vector<std::size_t> sorted(cons.begin(), cons.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t hits = 0;
    for (std::size_t l : langs) {
        const auto& inv = corpus.languages.at(l).inventory;
        std::vector<std::size_t> common;
        std::set_intersection(inv.begin(), inv.end(), sorted.begin(), sorted.end(), std::back_inserter(common));
        hits += common.size();
    }
    return static_cast<double>(hits) / (static_cast<double>(langs.size()) * static_cast<double>(sorted.size()));
}

inline CrossPrevalenceTable cross_prevalence(const InventoryCorpus& corpus, const ClassLabeling& lang_labels,
                                             const ClassLabeling& cons_labels) {
    CrossPrevalenceTable t;
    for (Label l : {Label::positive, Label::negative}) {
        const auto langs = lang_labels.members(l);
        for (Label c : {Label::positive, Label::negative}) {
            const auto cons = cons_labels.members(c);
            t.cells[CrossPrevalenceTable::cell(l, c)] = prevalence(corpus, langs, cons);
        }
    }
    return t;
}

// --- markedness overlap --------------------------------------------------------------

struct MarkednessOverlap {
    double mean = 0.0;                               ///< unweighted over scored languages
    std::vector<std::optional<double>> per_language; ///< empty inventories are not scored
    std::vector<std::size_t> hierarchy;              ///< consonant ids, least marked first
    std::size_t scored = 0;
};

/// Consonants ordered by principal-eigenvector component (descending), ties by
/// higher frequency and then lower id.
inline std::vector<std::size_t> markedness_hierarchy(std::span<const double> principal,
                                                     std::span<const std::size_t> freq) {
    std::vector<std::size_t> order(principal.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (principal[a] != principal[b])
            return principal[a] > principal[b];
        if (freq[a] != freq[b])
            return freq[a] > freq[b];
        return a < b;
    });
    return order;
}

/// overlap(l) = |inventory(l) & first s entries of the hierarchy| / s, s = |inventory(l)|.
inline MarkednessOverlap markedness_overlap(const InventoryCorpus& corpus, std::span<const double> principal) {
    if (principal.size() != corpus.consonants.size())
        throw ValidationError("markedness_overlap: eigenvector length does not match consonant count");
    const auto freq = consonant_frequencies(corpus);
    MarkednessOverlap out;
    out.hierarchy = markedness_hierarchy(principal, freq);
    std::vector<std::size_t> rank(out.hierarchy.size());
    for (std::size_t r = 0; r < out.hierarchy.size(); ++r)
        rank[out.hierarchy[r]] = r;
    double sum = 0.0;
    for (const auto& l : corpus.languages) {
        const std::size_t s = l.inventory.size();
        if (s == 0) {
            out.per_language.emplace_back();
            continue;
        }
        std::size_t hits = 0;
        for (std::size_t c : l.inventory)
            hits += rank[c] < s;
        const double v = static_cast<double>(hits) / static_cast<double>(s);
        out.per_language.emplace_back(v);
        sum += v;
        ++out.scored;
    }
    out.mean = out.scored ? sum / static_cast<double>(out.scored) : 0.0;
    return out;
}

inline MarkednessOverlap markedness_overlap(const InventoryCorpus& corpus, const Spectrum& phonet) {
    if (phonet.size() == 0)
        throw ValidationError("markedness_overlap: empty spectrum");
    return markedness_overlap(corpus, phonet.eigenvector(0));
}

} // namespace phonet

#endif // PHONET_TYPOLOGY_HPP
