#pragma once

// Restarted primal-dual solver for the square-root LASSO
//   F3(x) = lambda ||x||_{l1_w} + ||A x - y||_{l2}.
//
// One inner run performs p Chambolle-Pock updates (primal prox first, then
// the dual ball projection) from (x^0 = x0, y^0 = 0) and returns the ergodic
// average X of x^1..x^p. The outer loop restarts n times with the schedule
// eps_k = upsilon (delta + eps_{k-1}), beta_k = eps_k / (2 ||A||): each
// restart divides the data and the warm start by p*beta_k, runs the inner
// loop, and multiplies the result back, which converts the O(1/p) ergodic
// gap guarantee into geometric decay of the reconstruction error.
//
// Optional tapes record every prox/projection input so a reverse-mode sweep
// can compute exact vector-Jacobian products through the whole unrolled
// solver (used by the worst-case perturbation search).

#include <ostream>

#include "linalg.hpp"

namespace firenet {

struct SolverConfig {
    double lambda = 0.00025;
    double tau = 1.0;
    double sigma = 1.0;
    int p = 5;                    // inner iterations per restart
    int n = 5;                    // restarts
    double delta = 1e-9;
    double eps0 = -1.0;           // < 0 means "use ||y||_2"
    double upsilon = 0.36787944117144233;  // e^{-1}
    std::vector<double> w;        // weights, size N

    void validate(std::size_t N) const {
        if (!(lambda > 0) || !(tau > 0) || !(sigma > 0) || p < 1 || n < 0 || !(delta > 0) ||
            !(upsilon > 0 && upsilon < 1))
            throw std::invalid_argument("SolverConfig: invalid parameter");
        if (w.size() != N) throw std::invalid_argument("SolverConfig: weight vector size mismatch");
        for (double x : w)
            if (!(x > 0)) throw std::invalid_argument("SolverConfig: nonpositive weight");
    }
};

struct TraceRow {
    int restart = 0;
    int inner = 0;
    double objective = 0.0;
    double objective_gap = std::numeric_limits<double>::quiet_NaN();
    double l2_error_to_ref = std::numeric_limits<double>::quiet_NaN();
    double epsilon_k = 0.0;
    double beta_k = 0.0;
};

struct ConvergenceTrace {
    std::vector<TraceRow> rows;

    void write_csv(std::ostream& os) const {
        os << "restart,inner,objective,objective_gap,l2_error_to_ref,epsilon_k,beta_k\n";
        os.precision(17);
        for (const auto& r : rows) {
            os << r.restart << ',' << r.inner << ',' << r.objective << ',';
            if (std::isfinite(r.objective_gap)) os << r.objective_gap;
            os << ',';
            if (std::isfinite(r.l2_error_to_ref)) os << r.l2_error_to_ref;
            os << ',' << r.epsilon_k << ',' << r.beta_k << '\n';
        }
    }
};

/// Componentwise complex soft threshold by modulus; 0 stays 0.
inline CVec prox_shrink(const CVec& x, double beta) {
    if (beta < 0) throw std::invalid_argument("prox_shrink: negative threshold");
    CVec out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        double a = std::abs(x[j]);
        out[j] = (a > beta) ? (1.0 - beta / a) * x[j] : cplx{0, 0};
    }
    return out;
}

/// Exact prox of z -> tau_lambda ||z||_{l1_w} + 1/2 ||z - x||^2:
/// B prox_shrink(B^{-1} x, tau_lambda) with B = diag(w).
inline CVec prox_l1w(const CVec& x, double tau_lambda, const std::vector<double>& w) {
    if (x.size() != w.size()) throw std::invalid_argument("prox_l1w: weight size mismatch");
    CVec out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(w[j] > 0)) throw std::invalid_argument("prox_l1w: nonpositive weight");
        double t = tau_lambda * w[j];  // per-component threshold on x directly
        double a = std::abs(x[j]);
        out[j] = (a > t) ? (1.0 - t / a) * x[j] : cplx{0, 0};
    }
    return out;
}

/// Radial projection onto the closed unit l2 ball.
inline CVec project_ball(const CVec& y) {
    double n = norm_l2(y);
    if (n <= 1.0) return y;
    return scaled(y, 1.0 / n);
}

inline double objective_F3(const CVec& x, const CVec& y, const LinOp& A, double lambda,
                           const std::vector<double>& w) {
    CVec Ax = A.apply(x);
    if (Ax.size() != y.size()) throw std::invalid_argument("objective_F3: dim mismatch");
    double res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) res += std::norm(Ax[i] - y[i]);
    return lambda * norm_l1w(x, w) + std::sqrt(res);
}

/// Per-restart record of all nonlinearity inputs, for reverse-mode sweeps.
struct InnerTape {
    std::vector<CVec> u;  // inputs to the weighted shrink, one per inner step
    std::vector<CVec> v;  // inputs to the ball projection, one per inner step
};

struct InnerResult {
    CVec ergodic;  // X = mean of x^1..x^p
    CVec last;     // x^p
};

/// p primal-dual updates from (x^0 = x0, y^0 = 0). `on_iter`, if set, is
/// called after update j (1-based) with the running ergodic average and x^j.
template <typename Callback = std::nullptr_t>
InnerResult inner_iterations(const CVec& y, const CVec& x0, const LinOp& A,
                             const SolverConfig& cfg, double normA, InnerTape* tape = nullptr,
                             Callback&& on_iter = nullptr) {
    const std::size_t N = A.n_in, m = A.n_out;
    if (y.size() != m || x0.size() != N)
        throw std::invalid_argument("inner_iterations: dim mismatch");
    cfg.validate(N);
    if (!(cfg.tau * cfg.sigma * normA * normA < 1.0))
        throw std::invalid_argument("inner_iterations: step-size condition tau*sigma*||A||^2 < 1 violated");

    CVec x = x0;
    CVec ydual(m, cplx{0, 0});
    CVec X(N, cplx{0, 0});
    if (tape) {
        tape->u.clear();
        tape->v.clear();
        tape->u.reserve(cfg.p);
        tape->v.reserve(cfg.p);
    }
    for (int k = 0; k < cfg.p; ++k) {
        CVec Aty = A.apply_adj(ydual);
        CVec u(N);
        for (std::size_t j = 0; j < N; ++j) u[j] = x[j] - cfg.tau * Aty[j];
        if (tape) tape->u.push_back(u);
        CVec xn = prox_l1w(u, cfg.tau * cfg.lambda, cfg.w);

        CVec two_xn(N);
        for (std::size_t j = 0; j < N; ++j) two_xn[j] = 2.0 * xn[j] - x[j];
        CVec Ax = A.apply(two_xn);
        CVec v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = ydual[i] + cfg.sigma * (Ax[i] - y[i]);
        if (tape) tape->v.push_back(v);
        ydual = project_ball(v);

        x = std::move(xn);
        for (std::size_t j = 0; j < N; ++j) X[j] += x[j];
        if constexpr (!std::is_same_v<std::decay_t<Callback>, std::nullptr_t>) {
            CVec part(N);
            double inv = 1.0 / static_cast<double>(k + 1);
            for (std::size_t j = 0; j < N; ++j) part[j] = X[j] * inv;
            on_iter(k + 1, part, x);
        }
    }
    double invp = 1.0 / static_cast<double>(cfg.p);
    for (auto& c : X) c *= invp;
    return {std::move(X), std::move(x)};
}

struct RestartTape {
    double scale = 1.0;  // p * beta_k
    InnerTape inner;
};

struct SolveTape {
    std::vector<RestartTape> restarts;
    std::size_t N = 0, m = 0;
    SolverConfig cfg;
    double normA = 0.0;
};

struct SolveResult {
    CVec x;
    ConvergenceTrace trace;
};

/// The restarted solver (Algorithm semantics described at the top of this
/// file), operating on a raw linear map with a known norm estimate. Trace
/// rows are recorded after every inner iteration using the running ergodic
/// average scaled back to the original variables. `obj_scale` multiplies the
/// recorded objective values (used by wrappers that solve an equivalent
/// rescaled problem but want to report objectives of the original one).
inline SolveResult firenet_solve(const CVec& y, const LinOp& A, double normA, SolverConfig cfg,
                                 const CVec* x_init = nullptr, const CVec* ref = nullptr,
                                 double f3_star = std::numeric_limits<double>::quiet_NaN(),
                                 SolveTape* tape = nullptr, double obj_scale = 1.0,
                                 bool record_trace = true) {
    const std::size_t N = A.n_in;
    cfg.validate(N);
    if (!(normA > 0)) throw std::invalid_argument("firenet_solve: need a positive norm estimate");
    double eps = cfg.eps0 < 0 ? norm_l2(y) : cfg.eps0;
    if (eps <= 0) eps = 1.0;  // y = 0 edge case: any positive scale, output stays 0

    CVec x = x_init ? *x_init : CVec(N, cplx{0, 0});
    if (x.size() != N) throw std::invalid_argument("firenet_solve: x_init dim mismatch");

    SolveResult res;
    if (tape) {
        tape->restarts.clear();
        tape->N = N;
        tape->m = A.n_out;
        tape->cfg = cfg;
        tape->normA = normA;
    }
    for (int k = 1; k <= cfg.n; ++k) {
        eps = cfg.upsilon * (cfg.delta + eps);
        double beta = eps / (2.0 * normA);
        double scale = static_cast<double>(cfg.p) * beta;
        CVec ys = scaled(y, 1.0 / scale);
        CVec xs = scaled(x, 1.0 / scale);
        InnerTape* itape = nullptr;
        if (tape) {
            tape->restarts.push_back({scale, {}});
            itape = &tape->restarts.back().inner;
        }
        auto cb = [&](int inner, const CVec& part, const CVec&) {
            if (!record_trace) return;
            CVec cur = scaled(part, scale);
            TraceRow row;
            row.restart = k;
            row.inner = inner;
            row.objective = obj_scale * objective_F3(cur, y, A, cfg.lambda, cfg.w);
            if (std::isfinite(f3_star)) row.objective_gap = row.objective - f3_star;
            if (ref) {
                double e2 = 0.0;
                for (std::size_t j = 0; j < N; ++j) e2 += std::norm(cur[j] - (*ref)[j]);
                row.l2_error_to_ref = std::sqrt(e2);
            }
            row.epsilon_k = eps;
            row.beta_k = beta;
            res.trace.rows.push_back(row);
        };
        InnerResult ir = inner_iterations(ys, xs, A, cfg, normA, itape, cb);
        x = scaled(ir.ergodic, scale);
    }
    res.x = std::move(x);
    return res;
}

/// Non-restarted variant: one rescaled inner run of n_total iterations.
/// beta <= 0 selects the default ||y|| / ||A||.
inline CVec firenet_no_restart(const CVec& y, const CVec& x0, const LinOp& A, double normA,
                               int n_total, SolverConfig cfg, double beta = -1.0) {
    if (n_total < 1) throw std::invalid_argument("firenet_no_restart: n_total >= 1");
    if (beta <= 0) beta = norm_l2(y) / normA;
    if (beta <= 0) return CVec(A.n_in, cplx{0, 0});
    cfg.p = n_total;
    double scale = static_cast<double>(n_total) * beta;
    InnerResult ir = inner_iterations(scaled(y, 1.0 / scale), scaled(x0, 1.0 / scale), A, cfg,
                                      normA);
    return scaled(ir.ergodic, scale);
}

/// n <= ceil(log(Z / delta) kappa^{1/4} Z); default restart count for the
/// sampling-theorem setups.
inline int layer_count(double delta, double Z, double kappa) {
    if (!(delta > 0 && delta < 1) || !(Z >= 1.0) || !(kappa >= 1.0))
        throw std::invalid_argument("layer_count: need delta in (0,1), Z >= 1, kappa >= 1");
    return static_cast<int>(std::ceil(std::log(Z / delta) * std::pow(kappa, 0.25) * Z));
}

/// Internal-lambda helper from the recovery-theorem constants; exposed for
/// experimentation, never forced.
inline double theorem_lambda(double C1, double C2, double xi) {
    return C1 / (C2 * std::sqrt(xi));
}

// ---------------------------------------------------------------------------
// Reverse-mode sweep through a taped solve.
// ---------------------------------------------------------------------------

namespace detail {

/// Adjoint of the (real-symmetric) a.e. Jacobian of the weighted shrink at
/// taped input u, applied to cotangent g. Derivative taken as 0 at kinks.
inline CVec prox_l1w_vjp(const CVec& u, double tau_lambda, const std::vector<double>& w,
                         const CVec& g) {
    CVec out(u.size(), cplx{0, 0});
    for (std::size_t j = 0; j < u.size(); ++j) {
        double t = tau_lambda * w[j];
        double a = std::abs(u[j]);
        if (a > t) {
            // J = I - (t/a)(I - uu^T/a^2) in the real 2-vector sense
            double re = u[j].real() * g[j].real() + u[j].imag() * g[j].imag();
            out[j] = g[j] - (t / a) * (g[j] - (re / (a * a)) * u[j]);
        }
    }
    return out;
}

/// Adjoint of the a.e. Jacobian of the unit-ball projection at taped input v.
inline CVec project_ball_vjp(const CVec& v, const CVec& g) {
    double n = norm_l2(v);
    if (n <= 1.0) return g;
    double re = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        re += v[i].real() * g[i].real() + v[i].imag() * g[i].imag();
    CVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = (g[i] - (re / (n * n)) * v[i]) / n;
    return out;
}

}  // namespace detail

/// Given a taped solve x = phi(y) and a cotangent xbar on the output, return
/// the cotangent on the measurement vector y (the real-linear adjoint of the
/// a.e. Jacobian of phi).
inline CVec firenet_vjp(const SolveTape& tape, const LinOp& A, CVec xbar) {
    const std::size_t N = tape.N, m = tape.m;
    const SolverConfig& cfg = tape.cfg;
    CVec ybar(m, cplx{0, 0});
    for (std::size_t k = tape.restarts.size(); k-- > 0;) {
        const RestartTape& rt = tape.restarts[k];
        const double scale = rt.scale;
        // output of restart k was scale * X; cotangent on X:
        CVec Xbar = scaled(xbar, scale);
        // reverse the inner loop: cotangents on x^j and y^j (scaled variables)
        CVec xb(N, cplx{0, 0});
        CVec yb(m, cplx{0, 0});
        CVec ysb(m, cplx{0, 0});  // cotangent on the scaled data vector ys
        const double invp = 1.0 / static_cast<double>(cfg.p);
        for (int j = cfg.p - 1; j >= 0; --j) {
            // forward step j: u = x^j - tau A* y^j ; x^{j+1} = prox(u)
            //                 v = y^j + sigma (A(2 x^{j+1} - x^j) - ys) ; y^{j+1} = ball(v)
            // ergodic output contributes Xbar/p to every x^{j+1}
            for (std::size_t i = 0; i < N; ++i) xb[i] += invp * Xbar[i];
            // y^{j+1} cotangent is yb
            CVec vb = detail::project_ball_vjp(rt.inner.v[j], yb);
            yb = vb;  // contribution to y^j via the identity term of v
            CVec Atvb = A.apply_adj(vb);
            for (std::size_t i = 0; i < N; ++i) xb[i] += 2.0 * cfg.sigma * Atvb[i];
            CVec x_prev_extra(N);
            for (std::size_t i = 0; i < N; ++i) x_prev_extra[i] = -cfg.sigma * Atvb[i];
            for (std::size_t i = 0; i < m; ++i) ysb[i] -= cfg.sigma * vb[i];
            // x^{j+1} cotangent is xb; pull back through the prox
            CVec ub = detail::prox_l1w_vjp(rt.inner.u[j], cfg.tau * cfg.lambda, cfg.w, xb);
            // u = x^j - tau A* y^j
            CVec Aub = A.apply(ub);
            for (std::size_t i = 0; i < m; ++i) yb[i] -= cfg.tau * Aub[i];
            xb = ub;
            for (std::size_t i = 0; i < N; ++i) xb[i] += x_prev_extra[i];
        }
        // inputs of the restart: ys = y/scale, xs = x_prev/scale
        for (std::size_t i = 0; i < m; ++i) ybar[i] += ysb[i] / scale;
        xbar = scaled(xb, 1.0 / scale);  // cotangent on previous restart's output
    }
    return ybar;
}

}  // namespace firenet
