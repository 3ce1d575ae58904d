#pragma once

// Sparsity-in-levels model: level boundaries M, per-level budgets s and
// weights w, the derived quantities xi/zeta/kappa, best level-restricted
// approximation error, and the null-space-property constant arithmetic used
// by the recovery bounds.

#include <algorithm>
#include <limits>
#include <optional>

#include "linalg.hpp"

namespace firenet {

struct LevelModel {
    std::vector<std::size_t> M;   // strictly increasing, M.back() == N
    std::vector<std::size_t> s;   // 0 < s_k <= M_k - M_{k-1}
    std::vector<double> w_levels; // positive, one per level

    LevelModel() = default;
    LevelModel(std::vector<std::size_t> M_, std::vector<std::size_t> s_,
               std::vector<double> w_)
        : M(std::move(M_)), s(std::move(s_)), w_levels(std::move(w_)) {
        validate();
    }

    std::size_t r() const { return M.size(); }
    std::size_t N() const { return M.empty() ? 0 : M.back(); }
    std::size_t level_size(std::size_t k) const { return M[k] - (k == 0 ? 0 : M[k - 1]); }
    std::size_t level_begin(std::size_t k) const { return k == 0 ? 0 : M[k - 1]; }

    std::size_t total_sparsity() const {
        std::size_t t = 0;
        for (auto v : s) t += v;
        return t;
    }

    /// Expanded weight vector: w_i = w_{(k)} for i in level k.
    std::vector<double> expanded_weights() const {
        std::vector<double> w(N());
        for (std::size_t k = 0; k < r(); ++k)
            std::fill(w.begin() + level_begin(k), w.begin() + M[k], w_levels[k]);
        return w;
    }

    void validate() const {
        if (M.empty() || M.size() != s.size() || M.size() != w_levels.size())
            throw std::invalid_argument("LevelModel: M, s, w must be nonempty and equal length");
        std::size_t prev = 0;
        for (std::size_t k = 0; k < M.size(); ++k) {
            if (M[k] <= prev) throw std::invalid_argument("LevelModel: M must be strictly increasing");
            if (s[k] == 0 || s[k] > M[k] - prev)
                throw std::invalid_argument("LevelModel: need 0 < s_k <= M_k - M_{k-1}");
            if (!(w_levels[k] > 0.0)) throw std::invalid_argument("LevelModel: weights must be positive");
            prev = M[k];
        }
    }
};

struct RnsplConstants {
    double rho;    // in (0,1)
    double gamma;  // > 0
};

struct XiZetaKappa {
    double xi;
    double zeta;
    double kappa;
};

inline XiZetaKappa xi_zeta_kappa(const LevelModel& lm) {
    double xi = 0.0, zeta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lm.r(); ++k) {
        double t = lm.w_levels[k] * lm.w_levels[k] * static_cast<double>(lm.s[k]);
        xi += t;
        zeta = std::min(zeta, t);
    }
    return {xi, zeta, xi / zeta};
}

/// w_{(j)} = sqrt(s / s_j) with s the total sparsity; makes kappa == r.
inline std::vector<double> optimal_weights(const std::vector<std::size_t>& M,
                                           const std::vector<std::size_t>& s) {
    LevelModel probe(M, s, std::vector<double>(M.size(), 1.0));  // validates (M, s)
    double total = static_cast<double>(probe.total_sparsity());
    std::vector<double> w(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) w[j] = std::sqrt(total / static_cast<double>(s[j]));
    return w;
}

/// Weighted l1 distance to the set of (s,M)-sparse vectors: per level keep the
/// s_k largest-modulus entries (ties keep the lowest index), sum w|x| over the
/// rest.
inline double sigma_sM(const CVec& x, const LevelModel& lm) {
    if (x.size() != lm.N()) throw std::invalid_argument("sigma_sM: length mismatch");
    double total = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < lm.r(); ++k) {
        const std::size_t b = lm.level_begin(k), e = lm.M[k];
        idx.resize(e - b);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = b + i;
        // sort by modulus descending; stable so ties keep lowest index first
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) {
            return std::abs(x[a]) > std::abs(x[c]);
        });
        for (std::size_t i = lm.s[k]; i < idx.size(); ++i)
            total += lm.w_levels[k] * std::abs(x[idx[i]]);
    }
    return total;
}

inline double sigma_sM(const ComplexTensor& x, const LevelModel& lm) {
    return sigma_sM(x.data, lm);
}

inline bool is_sM_sparse(const CVec& x, const LevelModel& lm, double tol = -1.0) {
    if (x.size() != lm.N()) throw std::invalid_argument("is_sM_sparse: length mismatch");
    if (tol < 0.0) {
        double mx = 0.0;
        for (const auto& v : x) mx = std::max(mx, std::abs(v));
        tol = 1e-12 * mx;
    }
    for (std::size_t k = 0; k < lm.r(); ++k) {
        std::size_t count = 0;
        for (std::size_t i = lm.level_begin(k); i < lm.M[k]; ++i)
            if (std::abs(x[i]) > tol) ++count;
        if (count > lm.s[k]) return false;
    }
    return true;
}

/// Admissibility threshold for perturbing the null-space-property constants.
inline double rnspl_perturbation_threshold(const RnsplConstants& c, const LevelModel& lm) {
    auto q = xi_zeta_kappa(lm);
    double wmin = *std::min_element(lm.w_levels.begin(), lm.w_levels.end());
    return (1.0 - c.rho) / (c.gamma * (1.0 + std::sqrt(q.xi) / wmin));
}

inline RnsplConstants rnspl_perturbed_constants(const RnsplConstants& c, const LevelModel& lm,
                                                double deltaA) {
    if (deltaA < 0.0) throw std::invalid_argument("rnspl_perturbed_constants: deltaA < 0");
    double thr = rnspl_perturbation_threshold(c, lm);
    if (!(deltaA < thr))
        throw std::invalid_argument(
            "rnspl_perturbed_constants: perturbation " + std::to_string(deltaA) +
            " exceeds admissible threshold " + std::to_string(thr));
    auto q = xi_zeta_kappa(lm);
    double wmin = *std::min_element(lm.w_levels.begin(), lm.w_levels.end());
    double denom = 1.0 - c.gamma * deltaA;
    return {(c.rho + c.gamma * std::sqrt(q.xi) * deltaA / wmin) / denom, c.gamma / denom};
}

struct TheoremConstants {
    double C1;
    double C2;
};

inline TheoremConstants theorem_constants(const RnsplConstants& c, double kappa) {
    const double rho = c.rho, k4 = std::pow(kappa, 0.25);
    double C1 = ((1.0 + rho) / 2.0 + (3.0 + rho) * k4 / 4.0) * ((3.0 + rho) / (1.0 - rho));
    double C2 = 2.0 * ((3.0 + rho) / (1.0 - rho) + (7.0 + rho) / (1.0 - rho) * k4 / 2.0) * c.gamma;
    return {C1, C2};
}

/// The support set maximizing ||x_Delta||_2 over (s,M)-support sets: per level
/// the s_k largest-modulus entries.
inline std::vector<std::size_t> best_sM_support(const CVec& x, const LevelModel& lm) {
    std::vector<std::size_t> support;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < lm.r(); ++k) {
        const std::size_t b = lm.level_begin(k), e = lm.M[k];
        idx.resize(e - b);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = b + i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t c) {
            return std::abs(x[a]) > std::abs(x[c]);
        });
        for (std::size_t i = 0; i < lm.s[k]; ++i) support.push_back(idx[i]);
    }
    return support;
}

/// Heuristic search for a violation of the weighted robust null space property
/// in levels. Returns a certified violating vector, or nullopt if none was
/// found (which proves nothing).
inline std::optional<CVec> rnspl_falsify(const LinOp& A, const LevelModel& lm,
                                         const RnsplConstants& c, Rng& rng, int budget = 50) {
    const std::size_t N = lm.N();
    if (A.n_in != N) throw std::invalid_argument("rnspl_falsify: operator/model dim mismatch");
    auto q = xi_zeta_kappa(lm);
    auto w = lm.expanded_weights();

    auto violates = [&](const CVec& x) -> bool {
        double nx = norm_l2(x);
        if (nx < 1e-14) return false;
        auto sup = best_sM_support(x, lm);
        std::vector<char> on(N, 0);
        for (auto i : sup) on[i] = 1;
        double lhs = 0.0, tail = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            if (on[i]) lhs += std::norm(x[i]);
            else tail += w[i] * std::abs(x[i]);
        }
        lhs = std::sqrt(lhs);
        double rhs = c.rho * tail / std::sqrt(q.xi) + c.gamma * norm_l2(A.apply(x));
        return lhs > rhs + 1e-10;
    };

    for (int trial = 0; trial < budget; ++trial) {
        CVec x(N);
        for (auto& v : x) v = rng.cnormal();
        double nx = norm_l2(x);
        for (auto& v : x) v /= nx;
        // drive x towards the null space of A: gradient steps on ||Ax||^2
        for (int step = 0; step < 60; ++step) {
            if (violates(x)) return x;
            CVec Ax = A.apply(x);
            double res = norm_l2(Ax);
            if (res < 1e-15) break;
            CVec g = A.apply_adj(Ax);
            double gn = norm_l2(g);
            if (gn < 1e-15) break;
            // exact minimizing step for the quadratic ||A(x - t g)||^2
            CVec Ag = A.apply(g);
            double denom = norm_l2(Ag);
            double t = denom > 1e-15 ? std::real(dot(Ag, Ax)) / (denom * denom) : 0.0;
            if (t == 0.0) break;
            for (std::size_t i = 0; i < N; ++i) x[i] -= t * g[i];
            double n2 = norm_l2(x);
            if (n2 < 1e-14) break;
            for (auto& v : x) v /= n2;
        }
        if (violates(x)) return x;
    }
    return std::nullopt;
}

}  // namespace firenet
