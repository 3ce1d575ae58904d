#pragma once

// Dyadic frequency bands, multilevel random subsampling (with replacement),
// coherence-driven per-band sample allocation, and the subsampled measurement
// operator A = P_I D V Psi^* (V = Fourier or Walsh, Psi = Haar DWT).
//
// Flat frequency enumeration: row-major over axes, each axis enumerated by
// array position; in the Fourier case position q on an axis of length K holds
// the centered frequency w = q - (K/2 - 1), in the Walsh case position q holds
// sequency w = q.
//
// 2-D band multi-indices k = (k1, k2) in {1..r}^2 are scalarised row-major:
// flat band id = (k1-1)*r + (k2-1).

#include <map>

#include "sparsity.hpp"
#include "transforms.hpp"

namespace firenet {

enum class TransformKind { Fourier, Walsh };

/// One-dimensional band number (1-based) of a centered Fourier frequency.
inline std::size_t fourier_band_of(long long w) {
    if (w == 0 || w == 1) return 1;
    if (w >= 2) {
        std::size_t k = 2;
        while (!((1LL << (k - 2)) < w && w <= (1LL << (k - 1)))) ++k;
        return k;
    }
    std::size_t k = 2;
    long long aw = -w;
    while (!((1LL << (k - 2)) <= aw && aw <= (1LL << (k - 1)) - 1)) ++k;
    return k;
}

/// One-dimensional band number (1-based) of a Walsh sequency.
inline std::size_t walsh_band_of(long long w) {
    if (w == 0 || w == 1) return 1;
    std::size_t k = 2;
    while (!((1LL << (k - 1)) <= w && w <= (1LL << k) - 1)) ++k;
    return k;
}

struct BandStructure {
    TransformKind kind;
    int r = 0;
    int d = 1;
    /// bands[flat band id] = flat frequency indices belonging to that band.
    std::vector<std::vector<std::size_t>> bands;

    std::size_t n_bands() const { return bands.size(); }
    std::size_t K() const { return std::size_t{1} << r; }
    std::size_t N() const {
        std::size_t n = 1;
        for (int i = 0; i < d; ++i) n *= K();
        return n;
    }
    /// Multi-index (1-based per axis) of a flat band id.
    std::vector<std::size_t> band_multi_index(std::size_t flat) const {
        std::vector<std::size_t> k(d);
        for (int i = d - 1; i >= 0; --i) {
            k[i] = flat % r + 1;
            flat /= r;
        }
        return k;
    }
};

inline BandStructure build_bands(TransformKind kind, int r, int d) {
    if (r < 1) throw std::invalid_argument("build_bands: r >= 1 required");
    if (d != 1 && d != 2) throw std::invalid_argument("build_bands: d must be 1 or 2");
    BandStructure bs;
    bs.kind = kind;
    bs.r = r;
    bs.d = d;
    const std::size_t K = std::size_t{1} << r;
    // per-axis band number of each array position
    std::vector<std::size_t> axis_band(K);
    for (std::size_t q = 0; q < K; ++q) {
        long long w = (kind == TransformKind::Fourier) ? fourier_freq_at(q, K)
                                                       : static_cast<long long>(q);
        axis_band[q] = (kind == TransformKind::Fourier) ? fourier_band_of(w) : walsh_band_of(w);
    }
    std::size_t n_bands = 1;
    for (int i = 0; i < d; ++i) n_bands *= static_cast<std::size_t>(r);
    bs.bands.assign(n_bands, {});
    if (d == 1) {
        for (std::size_t q = 0; q < K; ++q) bs.bands[axis_band[q] - 1].push_back(q);
    } else {
        for (std::size_t q1 = 0; q1 < K; ++q1)
            for (std::size_t q2 = 0; q2 < K; ++q2) {
                std::size_t id = (axis_band[q1] - 1) * r + (axis_band[q2] - 1);
                bs.bands[id].push_back(q1 * K + q2);
            }
    }
    return bs;
}

/// M_F(s,k): coherence-weighted effective sparsity seen by Fourier band k.
inline double allocation_MF(const LevelModel& lm, const std::vector<std::size_t>& k) {
    const std::size_t r = lm.r();
    std::size_t kmax = *std::max_element(k.begin(), k.end());
    double total = 0.0;
    for (std::size_t j = 1; j <= r; ++j) {
        double prod = 1.0;
        for (auto ki : k)
            prod *= std::pow(2.0, -std::abs(static_cast<double>(ki) - static_cast<double>(j)));
        double extra = (j > kmax) ? std::pow(2.0, -2.0 * (static_cast<double>(j) -
                                                          static_cast<double>(kmax)))
                                  : 1.0;
        total += static_cast<double>(lm.s[j - 1]) * extra * prod;
    }
    return total;
}

/// M_W(s,k): Walsh counterpart (single term at j = ||k||_inf).
inline double allocation_MW(const LevelModel& lm, const std::vector<std::size_t>& k) {
    std::size_t kmax = *std::max_element(k.begin(), k.end());
    double prod = 1.0;
    for (auto ki : k)
        prod *= std::pow(2.0, -std::abs(static_cast<double>(ki) - static_cast<double>(kmax)));
    return static_cast<double>(lm.s[kmax - 1]) * prod;
}

/// Z = max{1, max_j w_(j) sqrt(M_j - M_{j-1}) / sqrt(xi)}; feeds the layer
/// count bound.
inline double sampling_Z(const LevelModel& lm) {
    auto q = xi_zeta_kappa(lm);
    double mx = 1.0;
    for (std::size_t j = 0; j < lm.r(); ++j)
        mx = std::max(mx, lm.w_levels[j] * std::sqrt(static_cast<double>(lm.level_size(j))) /
                              std::sqrt(q.xi));
    return mx;
}

/// Per-band sample counts m_k = min(|B_k|, ceil(scale * kappa * M(s,k) * L)).
/// The log(2m) term in L is resolved by a two-pass fixed point (start with
/// m = N, recompute once). Natural logarithms throughout.
inline std::vector<std::size_t> sample_allocation(const LevelModel& lm, TransformKind kind,
                                                  int d, double epsP, double scale) {
    if (lm.r() == 0) throw std::invalid_argument("sample_allocation: empty model");
    const int r = static_cast<int>(lm.r());
    BandStructure bs = build_bands(kind, r, d);
    auto q = xi_zeta_kappa(lm);
    const double s_total = static_cast<double>(lm.total_sparsity());
    const double log_sk = std::log(std::max(2.0, s_total * q.kappa));

    auto compute = [&](double m_for_log) {
        double L = d * static_cast<double>(r) * r * std::log(2.0 * std::max(1.0, m_for_log)) *
                       log_sk * log_sk +
                   std::log(1.0 / epsP);
        std::vector<std::size_t> m(bs.n_bands());
        for (std::size_t b = 0; b < bs.n_bands(); ++b) {
            auto k = bs.band_multi_index(b);
            double Mk = (kind == TransformKind::Fourier) ? allocation_MF(lm, k)
                                                         : allocation_MW(lm, k);
            double want = std::ceil(scale * q.kappa * Mk * L);
            double cap = static_cast<double>(bs.bands[b].size());
            m[b] = static_cast<std::size_t>(std::max(1.0, std::min(cap, want)));
        }
        return m;
    };

    auto m = compute(static_cast<double>(bs.N()));
    double tot = 0.0;
    for (auto v : m) tot += static_cast<double>(v);
    return compute(tot);
}

/// Bisection on the allocation scale so that the total sample count is as
/// close as possible to `fraction * N` (allocation totals are step functions
/// of the scale, so the match is to the nearest achievable step).
inline std::vector<std::size_t> allocation_for_fraction(const LevelModel& lm, TransformKind kind,
                                                        int d, double epsP, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("allocation_for_fraction: fraction in (0, 1]");
    BandStructure bs = build_bands(kind, static_cast<int>(lm.r()), d);
    const double target = fraction * static_cast<double>(bs.N());
    auto total = [&](double scale) {
        auto m = sample_allocation(lm, kind, d, epsP, scale);
        std::size_t t = 0;
        for (auto v : m) t += v;
        return t;
    };
    double lo = 0.0, hi = 1.0;
    while (static_cast<double>(total(hi)) < target && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (static_cast<double>(total(mid)) < target) lo = mid;
        else hi = mid;
    }
    // hi is the smallest bracketed scale reaching the target; pick the closer
    // of the two endpoint allocations
    auto m_lo = sample_allocation(lm, kind, d, epsP, lo);
    auto m_hi = sample_allocation(lm, kind, d, epsP, hi);
    double t_lo = 0.0, t_hi = 0.0;
    for (auto v : m_lo) t_lo += static_cast<double>(v);
    for (auto v : m_hi) t_hi += static_cast<double>(v);
    return (std::abs(t_lo - target) < std::abs(t_hi - target)) ? m_lo : m_hi;
}

struct SamplingScheme {
    TransformKind kind;
    int r = 0;
    int d = 1;
    std::uint64_t seed = 0;
    std::vector<std::size_t> m_per_band;       // flat band id -> count
    std::vector<std::size_t> indices;          // flat frequency indices, with repeats
    std::vector<double> scaling;               // D value per drawn index

    std::size_t m() const { return indices.size(); }
    std::size_t N() const {
        std::size_t K = std::size_t{1} << r;
        return d == 1 ? K : K * K;
    }
};

/// Draw the multilevel scheme: per band take the whole band when m_k == |B_k|,
/// otherwise m_k uniform draws with replacement. D = sqrt(|B_k| / m_k).
inline SamplingScheme draw_scheme(const BandStructure& bs,
                                  const std::vector<std::size_t>& m_per_band,
                                  std::uint64_t seed) {
    if (m_per_band.size() != bs.n_bands())
        throw std::invalid_argument("draw_scheme: m_per_band size mismatch");
    SamplingScheme sc;
    sc.kind = bs.kind;
    sc.r = bs.r;
    sc.d = bs.d;
    sc.seed = seed;
    sc.m_per_band = m_per_band;
    Rng rng(seed);
    for (std::size_t b = 0; b < bs.n_bands(); ++b) {
        const auto& band = bs.bands[b];
        const std::size_t mk = m_per_band[b];
        if (mk == 0 || mk > band.size())
            throw std::invalid_argument("draw_scheme: m_k out of range for band " +
                                        std::to_string(b));
        double D = std::sqrt(static_cast<double>(band.size()) / static_cast<double>(mk));
        if (mk == band.size()) {
            for (auto idx : band) {
                sc.indices.push_back(idx);
                sc.scaling.push_back(1.0);
            }
        } else {
            for (std::size_t t = 0; t < mk; ++t) {
                sc.indices.push_back(band[rng.uniform_below(band.size())]);
                sc.scaling.push_back(D);
            }
        }
    }
    return sc;
}

enum class OperatorDomain { WaveletCoeffs, Image };

/// A = P_I D V Psi^* (WaveletCoeffs domain) or P_I D V (Image domain).
struct MeasurementOperator {
    SamplingScheme scheme;
    OperatorDomain domain = OperatorDomain::WaveletCoeffs;

    std::size_t N() const { return scheme.N(); }
    std::size_t m() const { return scheme.m(); }

    std::vector<std::size_t> tensor_dims() const {
        std::size_t K = std::size_t{1} << scheme.r;
        return scheme.d == 1 ? std::vector<std::size_t>{K} : std::vector<std::size_t>{K, K};
    }

    CVec forward(const CVec& x) const {
        if (x.size() != N()) throw std::invalid_argument("MeasurementOperator: forward dim mismatch");
        ComplexTensor t(tensor_dims(), x);
        if (domain == OperatorDomain::WaveletCoeffs) t = haar_idwt(t, scheme.r);
        t = (scheme.kind == TransformKind::Fourier) ? dft_forward(t) : wht_forward(t);
        CVec y(m());
        for (std::size_t i = 0; i < m(); ++i)
            y[i] = scheme.scaling[i] * t.data[scheme.indices[i]];
        return y;
    }

    CVec adjoint(const CVec& y) const {
        if (y.size() != m()) throw std::invalid_argument("MeasurementOperator: adjoint dim mismatch");
        ComplexTensor t(tensor_dims());
        for (std::size_t i = 0; i < m(); ++i)
            t.data[scheme.indices[i]] += scheme.scaling[i] * y[i];
        t = (scheme.kind == TransformKind::Fourier) ? dft_inverse(t) : wht_inverse(t);
        if (domain == OperatorDomain::WaveletCoeffs) t = haar_dwt(t, scheme.r);
        return t.data;
    }

    LinOp as_linop() const {
        MeasurementOperator self = *this;
        return LinOp{N(), m(), [self](const CVec& x) { return self.forward(x); },
                     [self](const CVec& y) { return self.adjoint(y); }};
    }
};

/// Index ranges of the wavelet sparsity levels matching the flat Haar layout:
/// d=1: M_j = 2^j; d=2: M_j = 4^j.
inline std::vector<std::size_t> wavelet_level_bounds(int r, int d) {
    std::vector<std::size_t> M(r);
    for (int j = 1; j <= r; ++j) M[j - 1] = std::size_t{1} << (d * j);
    return M;
}

/// Exact local coherence mu(U^{k,j}) = |B_k| max |entry|^2 of the band-k /
/// wavelet-level-j block of U = V Psi^*, by explicit construction. Small sizes
/// only.
inline double local_coherence(TransformKind kind, int r, int d,
                              const std::vector<std::size_t>& k, std::size_t j) {
    if (r * d > 12) throw std::invalid_argument("local_coherence: size too large");
    if (j < 1 || j > static_cast<std::size_t>(r))
        throw std::invalid_argument("local_coherence: level out of range");
    BandStructure bs = build_bands(kind, r, d);
    std::size_t flat = 0;
    for (auto ki : k) flat = flat * r + (ki - 1);
    const auto& band = bs.bands[flat];

    // column range of wavelet level j in the flat Haar layout
    std::size_t col_b, col_e;
    if (d == 1) {
        col_b = (j == 1) ? 0 : (std::size_t{1} << (j - 1));
        col_e = std::size_t{1} << j;
    } else {
        col_b = (j == 1) ? 0 : (std::size_t{1} << (2 * (j - 1)));
        col_e = std::size_t{1} << (2 * j);
    }

    std::size_t K = std::size_t{1} << r;
    std::vector<std::size_t> dims = d == 1 ? std::vector<std::size_t>{K}
                                           : std::vector<std::size_t>{K, K};
    double mx = 0.0;
    for (std::size_t c = col_b; c < col_e; ++c) {
        ComplexTensor e(dims);
        e.data[c] = 1.0;
        ComplexTensor u = haar_idwt(e, r);
        u = (kind == TransformKind::Fourier) ? dft_forward(u) : wht_forward(u);
        for (auto row : band) mx = std::max(mx, std::norm(u.data[row]));
    }
    return static_cast<double>(band.size()) * mx;
}

}  // namespace firenet
