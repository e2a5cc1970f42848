#ifndef PHONET_SPECTRA_HPP
#define PHONET_SPECTRA_HPP

// Full eigendecomposition of dense symmetric matrices and the spectrum-level
// statistics built on it: binned spectra, Frobenius-norm fractions, ranked
// eigenvalue power-law fits and eigenvector/frequency correlation.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phonet/error.hpp"
#include "phonet/matrix.hpp"
#include "phonet/netbuild.hpp"

namespace phonet {

struct EigOptions {
    /// Residual contract: ||M x - lambda x|| <= tol * ||M||_F for every pair.
    double tol = 1e-8;
    int max_sweeps = 100;
    /// Eigenvalues closer than this times ||M||_F are reported as one cluster.
    double degeneracy_gap = 1e-8;
};

struct Spectrum {
    std::vector<double> eigenvalues;    ///< descending by signed value
    DenseMatrix<double> vectors;        ///< row i is the unit eigenvector of eigenvalues[i]
    std::vector<double> residual_norms; ///< ||M x_i - lambda_i x_i||
    double source_frobenius = 0.0;
    double source_trace = 0.0;
    double tol = 1e-8;
    int sweeps = 0;
    /// Half-open index ranges [first, last) of numerically degenerate eigenvalues
    /// (only ranges of length >= 2). Vectors inside are an arbitrary basis.
    std::vector<std::pair<std::size_t, std::size_t>> degenerate_clusters;

    std::size_t size() const noexcept { return eigenvalues.size(); }
    std::span<const double> eigenvector(std::size_t i) const { return vectors.row(i); }

    /// Eigenvalues with magnitude at or below this are treated as zero.
    double zero_threshold() const noexcept { return tol * source_frobenius; }

    bool degenerate(std::size_t i) const {
        return std::any_of(degenerate_clusters.begin(), degenerate_clusters.end(),
                           [i](const auto& r) { return i >= r.first && i < r.second; });
    }

    /// Indices ordered by |lambda| descending; ties keep the signed order.
    std::vector<std::size_t> order_by_magnitude() const {
        std::vector<std::size_t> idx(size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
            return std::abs(eigenvalues[a]) > std::abs(eigenvalues[b]);
        });
        return idx;
    }
};

namespace detail {

// Cyclic Jacobi on a (symmetric, modified in place); vt rows accumulate the
// eigenvectors. Returns the number of sweeps performed, or -1 if the sweep cap
// was hit with rotations still pending.
inline int jacobi_sweeps(DenseMatrix<double>& a, DenseMatrix<double>& vt, double scale, int max_sweeps) {
    const std::size_t n = a.rows();
    const double floor = DBL_EPSILON * 1e-3 * scale;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        std::size_t rotations = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= floor) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double g = 100.0 * std::abs(apq);
                if (sweep > 4 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                ++rotations;
                const double theta = (aqq - app) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150)
                    t = 0.5 / theta;
                else
                    t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q)
                        continue;
                    const double akp = a(p, k);
                    const double akq = a(q, k);
                    const double np = c * akp - s * akq;
                    const double nq = s * akp + c * akq;
                    a(p, k) = a(k, p) = np;
                    a(q, k) = a(k, q) = nq;
                }
                auto vp = vt.row(p);
                auto vq = vt.row(q);
                for (std::size_t k = 0; k < n; ++k) {
                    const double xp = vp[k];
                    const double xq = vq[k];
                    vp[k] = c * xp - s * xq;
                    vq[k] = s * xp + c * xq;
                }
            }
        }
        if (rotations == 0)
            return sweep;
    }
    return -1;
}

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return std::sqrt(s);
}

} // namespace detail

/// Orients `x` in place: nonnegative dot product with `reference` when that dot
/// product is clearly nonzero, otherwise the first component of largest
/// magnitude is made positive.
inline void orient_vector(std::span<double> x, std::span<const double> reference) {
    bool flip = false;
    bool decided = false;
    if (!reference.empty()) {
        double dot = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            dot += x[k] * reference[k];
        if (std::abs(dot) > 1e-12 * detail::norm2(reference)) {
            flip = dot < 0.0;
            decided = true;
        }
    }
    if (!decided && !x.empty()) {
        double big = 0.0;
        for (double v : x)
            big = std::max(big, std::abs(v));
        for (double v : x) {
            if (std::abs(v) >= big - 1e-12) {
                flip = v < 0.0;
                break;
            }
        }
    }
    if (flip)
        for (double& v : x)
            v = -v;
}

/// Full eigendecomposition of a symmetric matrix. `orientation` (node
/// frequencies, or empty) fixes eigenvector signs; see orient_vector.
inline Spectrum eig_symmetric(const DenseMatrix<double>& m, EigOptions opt = {},
                              std::span<const double> orientation = {}) {
    if (!m.square())
        throw ValidationError("eig_symmetric: matrix is " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + ", not square");
    if (!(opt.tol > 0.0))
        throw ValidationError("eig_symmetric: tolerance must be positive");
    const std::size_t n = m.rows();
    if (!orientation.empty() && orientation.size() != n)
        throw ValidationError("eig_symmetric: orientation vector length does not match matrix order");
    const double fro = frobenius_norm(m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * fro)
                throw ValidationError("eig_symmetric: matrix is not symmetric at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");

    DenseMatrix<double> a = m;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
    DenseMatrix<double> vt = DenseMatrix<double>::identity(n);
    const int sweeps = detail::jacobi_sweeps(a, vt, fro, opt.max_sweeps);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    Spectrum s;
    s.source_frobenius = fro;
    s.source_trace = trace(m);
    s.tol = opt.tol;
    s.sweeps = sweeps < 0 ? opt.max_sweeps : sweeps;
    s.vectors = DenseMatrix<double>(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        s.eigenvalues.push_back(a(order[i], order[i]));
        auto dst = s.vectors.row(i);
        const auto src = vt.row(order[i]);
        std::copy(src.begin(), src.end(), dst.begin());
        orient_vector(dst, orientation);
    }

    double worst = 0.0;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = s.eigenvector(i);
        for (std::size_t row = 0; row < n; ++row) {
            double acc = 0.0;
            const auto mr = m.row(row);
            for (std::size_t k = 0; k < n; ++k)
                acc += mr[k] * x[k];
            r[row] = acc - s.eigenvalues[i] * x[row];
        }
        s.residual_norms.push_back(detail::norm2(r));
        worst = std::max(worst, s.residual_norms.back());
    }
    if (sweeps < 0 || worst > opt.tol * fro)
        throw NumericalError("eig_symmetric: no convergence after " + std::to_string(s.sweeps) +
                             " sweeps; worst residual " + std::to_string(worst) + " exceeds " +
                             std::to_string(opt.tol * fro));

    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && s.eigenvalues[j - 1] - s.eigenvalues[j] <= opt.degeneracy_gap * fro)
            ++j;
        if (j - i >= 2)
            s.degenerate_clusters.emplace_back(i, j);
        i = j;
    }
    return s;
}

/// Spectrum of a co-occurrence network, oriented by its node weights (the
/// frequency vector for the consonant network).
inline Spectrum network_spectrum(const CooccurrenceNetwork& net, EigOptions opt = {}) {
    std::vector<double> orient(net.node_weight.begin(), net.node_weight.end());
    return eig_symmetric(net.weights.cast<double>(), opt, orient);
}

// --- binned spectrum -----------------------------------------------------------

struct BinnedSpectrum {
    double bin_width = 0.0;
    std::vector<double> bin_edges; ///< bins are [edges[k], edges[k+1])
    std::vector<std::size_t> counts;

    std::size_t bins() const noexcept { return counts.size(); }
};

inline BinnedSpectrum bin_values(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        throw ValidationError("bin width must be positive");
    if (values.empty())
        throw ValidationError("cannot bin an empty spectrum");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn;
    const std::size_t nbins = static_cast<std::size_t>(std::floor((*mx - lo) / bin_width)) + 1;
    BinnedSpectrum b;
    b.bin_width = bin_width;
    b.counts.assign(nbins, 0);
    for (std::size_t k = 0; k <= nbins; ++k)
        b.bin_edges.push_back(lo + static_cast<double>(k) * bin_width);
    for (double v : values) {
        auto k = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
        ++b.counts[std::min(k, nbins - 1)];
    }
    return b;
}

inline BinnedSpectrum bin_spectrum(const Spectrum& s, double bin_width) {
    return bin_values(s.eigenvalues, bin_width);
}

// --- Frobenius fractions ---------------------------------------------------------

/// Share of sum(lambda^2) carried by the k eigenvalues of largest magnitude.
inline double frobenius_fraction(const Spectrum& s, std::size_t k) {
    if (k < 1 || k > s.size())
        throw ValidationError("frobenius_fraction: k must be in [1, " + std::to_string(s.size()) + "]");
    const auto order = s.order_by_magnitude();
    double total = 0.0, top = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double sq = s.eigenvalues[order[i]] * s.eigenvalues[order[i]];
        total += sq;
        if (i < k)
            top += sq;
    }
    if (total == 0.0)
        throw NumericalError("frobenius_fraction: zero matrix");
    return k == s.size() ? 1.0 : top / total;
}

// --- power-law fits --------------------------------------------------------------

enum class SpectrumEnd { positive, negative };

inline const char* to_string(SpectrumEnd e) { return e == SpectrumEnd::positive ? "positive" : "negative"; }

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw NumericalError("fit_line: need at least two paired points");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw NumericalError("fit_line: abscissae have zero variance");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssres = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ssres += e * e;
    }
    f.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ssres / syy, 0.0, 1.0);
    return f;
}

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0; ///< log10 |lambda| at log10 rank = 0
    double r_squared = 0.0;
    std::size_t n_points = 0;
    std::size_t rank_offset = 0;
    SpectrumEnd end = SpectrumEnd::positive;
};

/// |lambda| of the nonzero eigenvalues of one sign, largest first.
inline std::vector<double> ranked_magnitudes(const Spectrum& s, SpectrumEnd end) {
    std::vector<double> mags;
    const double zero = s.zero_threshold();
    for (double v : s.eigenvalues)
        if (end == SpectrumEnd::positive ? v > zero : v < -zero)
            mags.push_back(std::abs(v));
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return mags;
}

/// Base-10 log-log least-squares fit of |lambda| against rank. Ranks count from
/// 1 over the whole ranked list; `rank_offset` skips that many leading ranks,
/// so the fitted ranks are rank_offset + 1 .. rank_offset + top_k.
inline PowerLawFit fit_ranked_power_law(std::span<const double> ranked, std::size_t top_k,
                                        std::size_t rank_offset = 0) {
    if (top_k < 2)
        throw ValidationError("power-law fit needs top_k >= 2");
    if (ranked.size() < rank_offset + top_k)
        throw NumericalError("power-law fit: only " + std::to_string(ranked.size()) +
                             " nonzero eigenvalues, need " + std::to_string(rank_offset + top_k));
    std::vector<double> lx, ly;
    for (std::size_t i = rank_offset; i < rank_offset + top_k; ++i) {
        if (!(ranked[i] > 0.0))
            throw NumericalError("power-law fit: nonpositive magnitude at rank " + std::to_string(i + 1));
        lx.push_back(std::log10(static_cast<double>(i + 1)));
        ly.push_back(std::log10(ranked[i]));
    }
    const LineFit f = fit_line(lx, ly);
    PowerLawFit p;
    p.exponent = f.slope;
    p.intercept = f.intercept;
    p.r_squared = f.r_squared;
    p.n_points = top_k;
    p.rank_offset = rank_offset;
    return p;
}

inline PowerLawFit fit_power_law_tail(const Spectrum& s, SpectrumEnd end, std::size_t top_k = 50,
                                      std::size_t rank_offset = 0) {
    const auto ranked = ranked_magnitudes(s, end);
    if (ranked.size() < rank_offset + top_k)
        throw NumericalError(std::string("power-law fit: ") + to_string(end) + " end has only " +
                             std::to_string(ranked.size()) + " nonzero eigenvalues, need " +
                             std::to_string(rank_offset + top_k));
    PowerLawFit p = fit_ranked_power_law(ranked, top_k, rank_offset);
    p.end = end;
    return p;
}

// --- correlation -------------------------------------------------------------------

struct CorrelationResult {
    double r = 0.0;
    std::size_t n = 0;
};

inline CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size())
        throw ValidationError("pearson: length mismatch");
    if (n < 2)
        throw NumericalError("pearson: need at least two samples");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw NumericalError("pearson: zero variance input");
    return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), n};
}

template <class Freq>
std::vector<double> to_doubles(const std::vector<Freq>& v) {
    return {v.begin(), v.end()};
}

/// Pearson r between eigenvector `index` (0-based, descending eigenvalue order)
/// and a node frequency vector.
inline CorrelationResult eigvec_frequency_correlation(const Spectrum& s, std::size_t index,
                                                      std::span<const double> freq) {
    if (index >= s.size())
        throw ValidationError("eigenvector index " + std::to_string(index) + " out of range");
    if (freq.size() != s.size())
        throw ValidationError("frequency vector length does not match spectrum order");
    return pearson(s.eigenvector(index), freq);
}

} // namespace phonet

#endif // PHONET_SPECTRA_HPP
