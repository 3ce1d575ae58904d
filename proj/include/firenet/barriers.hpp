#pragma once

// Analytic minimiser sets for the three sparse-regression problems on 1 x N
// row matrices (the closed-form "phase transition" solutions), the Omega_K
// family of near-identical instances whose minimisers stay 10^K-type
// distances apart, and the breakdown table driving the accuracy-barrier
// experiment.

#include "solver.hpp"
#include "transforms.hpp"

namespace firenet {

/// Convex hull of vertices; every minimiser set produced here is a simplex
/// over canonical directions, all vertices sharing one objective value.
struct SolutionSet {
    std::vector<CVec> vertices;
};

namespace detail {

inline std::vector<std::size_t> argmin_indices(const std::vector<double>& rho) {
    double mn = *std::min_element(rho.begin(), rho.end());
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < rho.size(); ++j)
        if (rho[j] <= mn) idx.push_back(j);
    return idx;
}

inline void check_rho_w(const std::vector<double>& rho, const std::vector<double>& w,
                        double upper) {
    if (rho.empty() || rho.size() != w.size())
        throw std::invalid_argument("solution set: rho/w size mismatch");
    for (double v : rho)
        if (!(v > 0) || (upper > 0 && !(v < upper)))
            throw std::invalid_argument("solution set: rho out of admissible range");
    for (double v : w)
        if (!(v > 0)) throw std::invalid_argument("solution set: nonpositive weight");
}

}  // namespace detail

/// Basis pursuit with A = (w_j / rho_j) row, y = 1, residual tolerance eps:
/// vertices (1 - eps) rho_j / w_j e_j over argmin-rho indices.
inline SolutionSet bp_solution_set(const std::vector<double>& rho, const std::vector<double>& w,
                                   double eps) {
    detail::check_rho_w(rho, w, 0.0);
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("bp_solution_set: eps in [0,1)");
    SolutionSet set;
    for (auto j : detail::argmin_indices(rho)) {
        CVec v(rho.size(), cplx{0, 0});
        v[j] = (1.0 - eps) * rho[j] / w[j];
        set.vertices.push_back(std::move(v));
    }
    return set;
}

/// LASSO (residual squared) with A = lambda (w_j / rho_j), y = 1, rho_j < 2:
/// vertices (1 - min rho / 2) rho_j / (lambda w_j) e_j.
inline SolutionSet lasso_solution_set(const std::vector<double>& rho,
                                      const std::vector<double>& w, double lambda) {
    detail::check_rho_w(rho, w, 2.0);
    if (!(lambda > 0)) throw std::invalid_argument("lasso_solution_set: lambda > 0");
    double mn = *std::min_element(rho.begin(), rho.end());
    SolutionSet set;
    for (auto j : detail::argmin_indices(rho)) {
        CVec v(rho.size(), cplx{0, 0});
        v[j] = (1.0 - mn / 2.0) * rho[j] / (lambda * w[j]);
        set.vertices.push_back(std::move(v));
    }
    return set;
}

/// Square-root LASSO with A = lambda (w_j / rho_j), y = 1, rho_j < 1:
/// vertices rho_j / (lambda w_j) e_j.
inline SolutionSet sqrt_lasso_solution_set(const std::vector<double>& rho,
                                           const std::vector<double>& w, double lambda) {
    detail::check_rho_w(rho, w, 1.0);
    if (!(lambda > 0)) throw std::invalid_argument("sqrt_lasso_solution_set: lambda > 0");
    SolutionSet set;
    for (auto j : detail::argmin_indices(rho)) {
        CVec v(rho.size(), cplx{0, 0});
        v[j] = rho[j] / (lambda * w[j]);
        set.vertices.push_back(std::move(v));
    }
    return set;
}

/// Euclidean distance to the convex hull of the vertex set. Closed form for
/// one or two vertices; projected-gradient over the simplex otherwise.
inline double dist_to_solution_set(const CVec& x, const SolutionSet& set) {
    if (set.vertices.empty()) throw std::invalid_argument("dist_to_solution_set: empty set");
    const std::size_t n = x.size();
    for (const auto& v : set.vertices)
        if (v.size() != n) throw std::invalid_argument("dist_to_solution_set: dim mismatch");
    auto dist_to = [&](const CVec& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i] - v[i]);
        return std::sqrt(s);
    };
    if (set.vertices.size() == 1) return dist_to(set.vertices[0]);
    if (set.vertices.size() == 2) {
        const CVec &a = set.vertices[0], &b = set.vertices[1];
        CVec d(n), xa(n);
        double dd = 0.0, num = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = b[i] - a[i];
            xa[i] = x[i] - a[i];
            dd += std::norm(d[i]);
            num += d[i].real() * xa[i].real() + d[i].imag() * xa[i].imag();
        }
        double t = dd > 0 ? std::clamp(num / dd, 0.0, 1.0) : 0.0;
        CVec proj(n);
        for (std::size_t i = 0; i < n; ++i) proj[i] = a[i] + t * d[i];
        return dist_to(proj);
    }
    // small QP over the simplex: minimize ||x - V t||^2, t >= 0, sum t = 1
    const std::size_t kv = set.vertices.size();
    std::vector<double> t(kv, 1.0 / static_cast<double>(kv));
    auto point_at = [&](const std::vector<double>& tt) {
        CVec p(n, cplx{0, 0});
        for (std::size_t v = 0; v < kv; ++v)
            for (std::size_t i = 0; i < n; ++i) p[i] += tt[v] * set.vertices[v][i];
        return p;
    };
    double step = 0.5;
    for (int it = 0; it < 2000; ++it) {
        CVec p = point_at(t);
        // gradient wrt t_v: 2 Re <V_v, p - x>
        std::vector<double> g(kv, 0.0);
        for (std::size_t v = 0; v < kv; ++v)
            for (std::size_t i = 0; i < n; ++i) {
                cplx diff = p[i] - x[i];
                g[v] += 2.0 * (set.vertices[v][i].real() * diff.real() +
                               set.vertices[v][i].imag() * diff.imag());
            }
        std::vector<double> tn(kv);
        for (std::size_t v = 0; v < kv; ++v) tn[v] = t[v] - step * g[v];
        // project onto the simplex (sort-based)
        std::vector<double> srt = tn;
        std::sort(srt.begin(), srt.end(), std::greater<double>());
        double csum = 0.0, theta = 0.0;
        for (std::size_t i = 0; i < kv; ++i) {
            csum += srt[i];
            double th = (csum - 1.0) / static_cast<double>(i + 1);
            if (srt[i] - th > 0) theta = th;
        }
        double move = 0.0;
        for (std::size_t v = 0; v < kv; ++v) {
            double nv = std::max(0.0, tn[v] - theta);
            move += std::abs(nv - t[v]);
            t[v] = nv;
        }
        if (move < 1e-14) break;
    }
    return dist_to(point_at(t));
}

struct OmegaInstance {
    DenseMatrix A_true, A_n;
    CVec y_true, y_n;
    CVec x_true;             // analytic minimiser of the true instance
    SolutionSet true_set;    // minimiser set of (A_true, y_true)
    CVec x_approx_min;       // analytic minimiser of the perturbed instance
    int K = 0, n = 0;
    std::size_t N1 = 2, N2 = 18;
    double lambda = 1.0;
    double delta_geom = 1.0 / 6.0;
    double gamma_K = 0.0;
    double eps_perturb = 0.0;  // coordinate perturbation after rescaling
};

/// The near-identical instance pair: the "true" matrix perturbs rho in
/// coordinate 1, the approximation in coordinate 2, with the perturbation
/// magnitude chosen so that ||A_true - A_n|| == 2^{-n} exactly. The source
/// text prints the coordinate perturbation with a plus sign, which would put
/// the perturbed entry *above* the others and contradict the argmin-based
/// minimiser it states; the default here uses the minus sign so the stated
/// minimisers are the actual ones. `plus_sign_variant` reproduces the printed
/// text for experimentation.
inline OmegaInstance build_omega_instance(int K, int n, std::size_t N1 = 2, std::size_t N2 = 18,
                                          double lambda = 1.0, bool plus_sign_variant = false,
                                          std::uint64_t seed = 1234) {
    if (K < 1 || n < 1 || N1 < 2) throw std::invalid_argument("build_omega_instance: bad dims");
    OmegaInstance inst;
    inst.K = K;
    inst.n = n;
    inst.N1 = N1;
    inst.N2 = N2;
    inst.lambda = lambda;
    const double delta = inst.delta_geom;
    const double gamma = (std::sqrt(2.0) / (3.0 * lambda)) * (1.0 - delta) * std::pow(10.0, K);
    inst.gamma_K = gamma;

    // Perturbation size: the two rho vectors share the same multiset of
    // entries ({1-delta-eps at one coordinate, 1-delta elsewhere}), so the
    // matrices differ only in the first (pre-rotation) row and
    //   ||A_true - A_n|| = gamma * sqrt(2) * |1/(1-delta-eps) - 1/(1-delta)|.
    // Solve for eps making this exactly 2^{-n}.
    const double c = std::pow(2.0, -n) / (gamma * std::sqrt(2.0));
    double eps = (1.0 - delta) - 1.0 / (1.0 / (1.0 - delta) + c);
    if (plus_sign_variant) eps = -((1.0 / (std::max(1e-300, 1.0 / (1.0 - delta) - c))) - (1.0 - delta));
    inst.eps_perturb = eps;

    std::vector<double> rho_true(N1, 1.0 - delta), rho_n(N1, 1.0 - delta);
    rho_true[0] = 1.0 - delta - eps;
    rho_n[1] = 1.0 - delta - eps;

    auto a_of = [&](const std::vector<double>& rho) {
        std::vector<double> a(N1);
        for (std::size_t j = 0; j < N1; ++j) a[j] = gamma / rho[j];
        return a;
    };
    auto a_true = a_of(rho_true);
    auto a_n = a_of(rho_n);
    double na = 0.0;
    for (double v : a_true) na += v * v;
    na = std::sqrt(na);

    const std::size_t N = N1 + N2, m = N2 + 1;
    DenseMatrix D = dct_matrix(m);
    auto assemble = [&](const std::vector<double>& a) {
        DenseMatrix B(m, N);
        for (std::size_t j = 0; j < N1; ++j) B(0, j) = a[j];
        for (std::size_t i = 0; i < N2; ++i) B(i + 1, N1 + i) = na;
        DenseMatrix A(m, N);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                cplx s{0, 0};
                for (std::size_t k = 0; k < m; ++k) s += D(i, k) * B(k, j);
                A(i, j) = s;
            }
        return A;
    };
    inst.A_true = assemble(a_true);
    inst.A_n = assemble(a_n);

    // planted 5-sparse second block
    Rng rng(seed ^ (static_cast<std::uint64_t>(K) << 32) ^ static_cast<std::uint64_t>(n));
    std::vector<double> x2(N2, 0.0);
    {
        std::vector<std::size_t> pos(N2);
        for (std::size_t i = 0; i < N2; ++i) pos[i] = i;
        for (std::size_t i = 0; i < 5 && i < N2; ++i) {
            std::size_t j = i + rng.uniform_below(N2 - i);
            std::swap(pos[i], pos[j]);
            x2[pos[i]] = rng.normal();
        }
    }
    CVec pre(m, cplx{0, 0});
    pre[0] = 1.0;
    for (std::size_t i = 0; i < N2; ++i) pre[i + 1] = na * x2[i];
    CVec y(m, cplx{0, 0});
    for (std::size_t i = 0; i < m; ++i) {
        cplx s{0, 0};
        for (std::size_t k = 0; k < m; ++k) s += D(i, k) * pre[k];
        y[i] = s;
    }
    inst.y_true = y;
    inst.y_n = y;  // identical by construction (same ||a|| and same x2)

    auto planted = [&](const std::vector<double>& rho, std::size_t coord) {
        CVec v(N, cplx{0, 0});
        v[coord] = rho[coord] / (lambda * gamma);
        for (std::size_t i = 0; i < N2; ++i) v[N1 + i] = x2[i];
        return v;
    };
    inst.x_true = planted(rho_true, 0);
    inst.x_approx_min = planted(rho_n, 1);
    inst.true_set.vertices = {inst.x_true};
    return inst;
}

struct BreakdownRow {
    int K = 0, n = 0;
    double dist = 0.0;
    double lower = 0.0, upper = 0.0;
    bool pass = false;
};

/// Run the solver on the 2^{-n}-accurate inputs (A_n, y_n) and measure the
/// distance of the output to the analytic minimiser set of the true instance.
inline std::vector<BreakdownRow> breakdown_table(const std::vector<int>& K_list,
                                                 const std::vector<int>& n_list,
                                                 int inner_total = 4000,
                                                 bool plus_sign_variant = false) {
    std::vector<BreakdownRow> rows;
    for (int K : K_list) {
        for (int n : n_list) {
            OmegaInstance inst = build_omega_instance(K, n, 2, 18, 1.0, plus_sign_variant);
            LinOp A = inst.A_n.as_linop();
            double normA = operator_norm_dense(inst.A_n);
            SolverConfig cfg;
            cfg.lambda = inst.lambda;
            cfg.w.assign(A.n_in, 1.0);
            // normalize so the unit step sizes satisfy the step condition
            double cscale = 1.02 * normA;
            DenseMatrix An = inst.A_n;
            for (auto& v : An.a) v /= cscale;
            LinOp As = An.as_linop();
            CVec ys = scaled(inst.y_n, 1.0 / cscale);
            cfg.lambda = inst.lambda / cscale;
            cfg.n = 60;
            cfg.p = std::max(1, inner_total / cfg.n);
            cfg.delta = 1e-14;
            CVec xh = firenet_solve(ys, As, 1.0 / 1.02, cfg).x;
            BreakdownRow row;
            row.K = K;
            row.n = n;
            row.dist = dist_to_solution_set(xh, inst.true_set);
            row.lower = std::pow(10.0, -K);
            row.upper = std::pow(10.0, -K + 1);
            row.pass = row.dist > row.lower && row.dist <= row.upper;
            rows.push_back(row);
        }
    }
    return rows;
}

inline void write_breakdown_csv(std::ostream& os, const std::vector<BreakdownRow>& rows) {
    os << "K,n,dist,lower_bound,upper_bound,pass\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.K << ',' << r.n << ',' << r.dist << ',' << r.lower << ',' << r.upper << ','
           << (r.pass ? 1 : 0) << '\n';
}

}  // namespace firenet
