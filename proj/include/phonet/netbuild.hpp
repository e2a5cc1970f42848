#ifndef PHONET_NETBUILD_HPP
#define PHONET_NETBUILD_HPP

// Bipartite consonant x language incidence matrix and its two one-mode
// projections: the consonant co-occurrence network B = A A^T - D and the
// language network B' = A^T A - D'. Weights stay integral.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "phonet/corpus.hpp"
#include "phonet/matrix.hpp"

namespace phonet {

struct BipartiteMatrix {
    DenseMatrix<std::uint8_t> entries; ///< rows: consonants, cols: languages
    std::vector<std::size_t> row_index; ///< consonant id of each row
    std::vector<std::size_t> col_index; ///< language id of each column

    std::size_t ones() const {
        std::size_t n = 0;
        for (auto v : entries.data())
            n += v;
        return n;
    }
};

enum class NetworkKind { phonet, langgraph };

inline const char* to_string(NetworkKind k) { return k == NetworkKind::phonet ? "phonet" : "langgraph"; }

struct CooccurrenceNetwork {
    NetworkKind kind = NetworkKind::phonet;
    DenseMatrix<std::int64_t> weights;
    std::vector<std::size_t> node_index;
    /// Subtracted diagonal: f_c for phonet, inventory size for langgraph.
    std::vector<std::int64_t> node_weight;

    std::size_t size() const noexcept { return node_index.size(); }

    /// Number of unordered pairs with positive weight.
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < weights.rows(); ++i)
            for (std::size_t j = i + 1; j < weights.cols(); ++j)
                n += weights(i, j) > 0;
        return n;
    }

    /// Sum of weights over unordered pairs.
    std::int64_t total_weight() const {
        std::int64_t s = 0;
        for (std::size_t i = 0; i < weights.rows(); ++i)
            for (std::size_t j = i + 1; j < weights.cols(); ++j)
                s += weights(i, j);
        return s;
    }
};

inline BipartiteMatrix build_bipartite(const InventoryCorpus& corpus) {
    BipartiteMatrix a;
    a.entries = DenseMatrix<std::uint8_t>(corpus.consonants.size(), corpus.languages.size());
    for (const auto& c : corpus.consonants)
        a.row_index.push_back(c.id);
    for (const auto& l : corpus.languages) {
        a.col_index.push_back(l.id);
        for (std::size_t c : l.inventory)
            a.entries(c, l.id) = 1;
    }
    return a;
}

namespace detail {

// G = X X^T with X given as rows of 0/1 entries; returns G - diag(G).
inline DenseMatrix<std::int64_t> gram_minus_diagonal(const DenseMatrix<std::uint8_t>& x,
                                                     std::vector<std::int64_t>& diagonal) {
    const std::size_t n = x.rows();
    DenseMatrix<std::int64_t> g(n, n);
    diagonal.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = x.row(i);
        for (std::size_t j = i; j < n; ++j) {
            const auto rj = x.row(j);
            std::int64_t s = 0;
            for (std::size_t k = 0; k < ri.size(); ++k)
                s += ri[k] & rj[k];
            if (i == j)
                diagonal[i] = s;
            else
                g(i, j) = g(j, i) = s;
        }
    }
    return g;
}

} // namespace detail

inline CooccurrenceNetwork project_phonet(const BipartiteMatrix& a) {
    CooccurrenceNetwork net;
    net.kind = NetworkKind::phonet;
    net.node_index = a.row_index;
    net.weights = detail::gram_minus_diagonal(a.entries, net.node_weight);
    return net;
}

inline CooccurrenceNetwork project_langgraph(const BipartiteMatrix& a) {
    DenseMatrix<std::uint8_t> at(a.entries.cols(), a.entries.rows());
    for (std::size_t i = 0; i < a.entries.rows(); ++i)
        for (std::size_t j = 0; j < a.entries.cols(); ++j)
            at(j, i) = a.entries(i, j);
    CooccurrenceNetwork net;
    net.kind = NetworkKind::langgraph;
    net.node_index = a.col_index;
    net.weights = detail::gram_minus_diagonal(at, net.node_weight);
    return net;
}

// --- export ------------------------------------------------------------------

/// "i j weight" per unordered positive-weight pair, i < j, in node-id terms.
inline void write_edge_list(std::ostream& out, const CooccurrenceNetwork& net) {
    for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = i + 1; j < net.size(); ++j)
            if (net.weights(i, j) > 0)
                out << net.node_index[i] << ' ' << net.node_index[j] << ' ' << net.weights(i, j) << '\n';
}

/// "consonant_id language_id" per 1-entry.
inline void write_bipartite_edges(std::ostream& out, const BipartiteMatrix& a) {
    for (std::size_t i = 0; i < a.entries.rows(); ++i)
        for (std::size_t j = 0; j < a.entries.cols(); ++j)
            if (a.entries(i, j))
                out << a.row_index[i] << ' ' << a.col_index[j] << '\n';
}

/// Dense network file; see docs/network_format.md.
inline void write_network(std::ostream& out, const CooccurrenceNetwork& net) {
    out << "kind " << to_string(net.kind) << '\n' << "nodes " << net.size() << '\n';
    for (std::size_t i = 0; i < net.size(); ++i)
        out << "node " << net.node_index[i] << ' ' << net.node_weight[i] << '\n';
    out << "matrix\n";
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (std::size_t j = 0; j < net.size(); ++j)
            out << (j ? " " : "") << net.weights(i, j);
        out << '\n';
    }
}

inline CooccurrenceNetwork read_network(std::istream& in) {
    CooccurrenceNetwork net;
    std::string raw;
    std::size_t lineno = 0;
    auto next = [&]() -> std::string {
        while (std::getline(in, raw)) {
            ++lineno;
            std::string t = detail::trim(raw);
            if (!t.empty() && t.front() != '#')
                return t;
        }
        throw ParseError("unexpected end of network file", lineno);
    };
    auto expect = [&](const std::string& key) {
        std::istringstream ls(next());
        std::string k, v;
        ls >> k >> v;
        if (k != key || v.empty())
            throw ParseError("expected '" + key + " <value>'", lineno);
        return v;
    };
    const std::string kind = expect("kind");
    if (kind == "phonet")
        net.kind = NetworkKind::phonet;
    else if (kind == "langgraph")
        net.kind = NetworkKind::langgraph;
    else
        throw ParseError("unknown network kind '" + kind + "'", lineno);
    const std::size_t n = detail::parse_index(expect("nodes"), "node count", lineno);
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream ls(next());
        std::string k, id, w, extra;
        ls >> k >> id >> w >> extra;
        if (k != "node" || w.empty() || !extra.empty())
            throw ParseError("expected 'node <id> <weight>'", lineno);
        net.node_index.push_back(detail::parse_index(id, "node id", lineno));
        net.node_weight.push_back(static_cast<std::int64_t>(detail::parse_index(w, "node weight", lineno)));
    }
    if (next() != "matrix")
        throw ParseError("expected 'matrix'", lineno);
    net.weights = DenseMatrix<std::int64_t>(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::istringstream ls(next());
        std::string tok;
        for (std::size_t j = 0; j < n; ++j) {
            if (!(ls >> tok))
                throw ParseError("matrix row " + std::to_string(i) + " is short", lineno);
            net.weights(i, j) = static_cast<std::int64_t>(detail::parse_index(tok, "weight", lineno));
        }
        if (ls >> tok)
            throw ParseError("matrix row " + std::to_string(i) + " is long", lineno);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (net.weights(i, i) != 0)
            throw ValidationError("network diagonal entry " + std::to_string(i) + " is nonzero");
        for (std::size_t j = i + 1; j < n; ++j)
            if (net.weights(i, j) != net.weights(j, i))
                throw ValidationError("network matrix is not symmetric at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
    }
    return net;
}

} // namespace phonet

#endif // PHONET_NETBUILD_HPP
