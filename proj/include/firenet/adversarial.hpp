#pragma once

// Worst-case perturbation search against an arbitrary reconstruction map:
// momentum gradient ascent on
//   Q(r) = 1/2 ||phi(y + A r) - x||^2 - (lambda_pen/2) ||r||^2,
// where r lives in the image domain and A maps image perturbations to
// measurements. Gradients are computed either by reverse mode through the
// reconstruction map (exact a.e.) or by central finite differences over the
// real coordinates.

#include <memory>

#include "solver.hpp"

namespace firenet {

enum class GradientMode { Backprop, FiniteDiff };

struct AttackConfig {
    double lambda_pen = 1.0;
    double gamma_mom = 0.9;
    double eta = 1e-2;         // initial learning rate; warmup adapts it
    int steps = 100;
    int restarts = 5;
    std::uint64_t seed = 0;
    GradientMode gradient_mode = GradientMode::Backprop;
    double fd_step = 1e-6;
    double init_norm_frac = 0.01;  // ||r(0)|| = frac * ||x||
    bool allow_large_fd = false;   // cost guard for finite differences

    void validate() const {
        if (steps < 1 || restarts < 1 || !(eta > 0) || gamma_mom < 0 || !(fd_step > 0))
            throw std::invalid_argument("AttackConfig: invalid parameter");
    }
};

/// Reconstruction map with an optional exact vector-Jacobian product.
struct ReconMap {
    std::function<CVec(const CVec&)> apply;                 // y -> x
    std::function<CVec(const CVec&, const CVec&)> vjp;      // (y, xbar) -> ybar, may be null
};

/// Reconstruction map given by a taped restarted solve. The restart schedule
/// must be a fixed parameter of the map: a data-dependent eps0 (the < 0
/// default) would make the output scales functions of y, which the reverse
/// sweep does not differentiate.
inline ReconMap firenet_recon_map(const LinOp& A, double normA, SolverConfig cfg) {
    if (cfg.eps0 < 0)
        throw std::invalid_argument("firenet_recon_map: eps0 must be fixed (>= 0)");
    auto shared_tape = std::make_shared<SolveTape>();
    ReconMap rm;
    rm.apply = [A, normA, cfg, shared_tape](const CVec& y) {
        return firenet_solve(y, A, normA, cfg, nullptr, nullptr,
                             std::numeric_limits<double>::quiet_NaN(), shared_tape.get(), 1.0,
                             false)
            .x;
    };
    rm.vjp = [A, shared_tape](const CVec& y, const CVec& xbar) {
        // the tape always holds the most recent forward pass; re-run to be safe
        (void)y;
        return firenet_vjp(*shared_tape, A, xbar);
    };
    return rm;
}

inline double q_value(const ReconMap& recon, const LinOp& A, const CVec& x, const CVec& y,
                      const CVec& r, double lambda_pen) {
    if (r.size() != A.n_in || x.size() == 0) throw std::invalid_argument("q_value: dim mismatch");
    CVec Ar = A.apply(r);
    CVec yr(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yr[i] = y[i] + Ar[i];
    CVec rec = recon.apply(yr);
    if (rec.size() != x.size()) throw std::invalid_argument("q_value: recon output dim mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += std::norm(rec[i] - x[i]);
    double r2 = 0.0;
    for (const auto& c : r) r2 += std::norm(c);
    return 0.5 * d2 - 0.5 * lambda_pen * r2;
}

/// Gradient of Q with respect to r, as a complex vector whose real/imaginary
/// parts are the partial derivatives in the real parametrization.
inline CVec q_gradient(const ReconMap& recon, const LinOp& A, const CVec& x, const CVec& y,
                       const CVec& r, const AttackConfig& cfg) {
    if (cfg.gradient_mode == GradientMode::Backprop) {
        if (!recon.vjp) throw std::invalid_argument("q_gradient: recon has no vjp");
        CVec Ar = A.apply(r);
        CVec yr(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) yr[i] = y[i] + Ar[i];
        CVec rec = recon.apply(yr);
        CVec resid(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) resid[i] = rec[i] - x[i];
        CVec ybar = recon.vjp(yr, resid);
        CVec g = A.apply_adj(ybar);
        for (std::size_t i = 0; i < r.size(); ++i) g[i] -= cfg.lambda_pen * r[i];
        return g;
    }
    // finite differences over the 2 * n_in real coordinates
    if (r.size() > 64 && !cfg.allow_large_fd)
        throw std::invalid_argument(
            "q_gradient: finite differences on N > 64 requires allow_large_fd");
    CVec g(r.size(), cplx{0, 0});
    CVec rp = r;
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (int part = 0; part < 2; ++part) {
            cplx step = part == 0 ? cplx{cfg.fd_step, 0} : cplx{0, cfg.fd_step};
            rp[i] = r[i] + step;
            double qp = q_value(recon, A, x, y, rp, cfg.lambda_pen);
            rp[i] = r[i] - step;
            double qm = q_value(recon, A, x, y, rp, cfg.lambda_pen);
            rp[i] = r[i];
            double der = (qp - qm) / (2.0 * cfg.fd_step);
            g[i] += part == 0 ? cplx{der, 0} : cplx{0, der};
        }
    }
    return g;
}

struct PerturbationReport {
    CVec r_star;
    double Q_value = 0.0;
    double norm_r = 0.0;
    double norm_Ar = 0.0;
    double norm_recon_shift = 0.0;   // ||phi(y + Ar) - phi(y)||
    double norm_damage = 0.0;        // ||phi(y + Ar) - x||
    double baseline_error = 0.0;     // ||phi(y) - x||
    int best_restart = 0;
    std::vector<double> q_trace;     // Q per step of the winning run
};

/// Momentum ascent with an initial doubling/halving learning-rate warmup.
/// Runs `restarts` independent searches and keeps the one with the largest
/// final reconstruction damage (ties: lowest restart index).
inline PerturbationReport perturbation_search(const ReconMap& recon, const LinOp& A,
                                              const CVec& x, const AttackConfig& cfg) {
    cfg.validate();
    CVec y = A.apply(x);
    CVec rec0 = recon.apply(y);
    double baseline = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) baseline += std::norm(rec0[i] - x[i]);
    baseline = std::sqrt(baseline);

    PerturbationReport best;
    best.norm_damage = -1.0;
    Rng root(cfg.seed);

    for (int run = 0; run < cfg.restarts; ++run) {
        Rng rng = root.fork(static_cast<std::uint64_t>(run) + 1);
        CVec r(A.n_in);
        for (auto& c : r) c = rng.cnormal();
        double nr = norm_l2(r);
        double target = cfg.init_norm_frac * norm_l2(x);
        if (nr > 0 && target > 0)
            for (auto& c : r) c *= target / nr;

        // learning-rate warmup: find an eta whose single step increases Q
        double eta = cfg.eta;
        double q0 = q_value(recon, A, x, y, r, cfg.lambda_pen);
        {
            CVec g = q_gradient(recon, A, x, y, r, cfg);
            double gn = norm_l2(g);
            if (gn > 1e-14) {
                auto try_eta = [&](double e) {
                    CVec rt = r;
                    for (std::size_t i = 0; i < r.size(); ++i) rt[i] += e * g[i];
                    return q_value(recon, A, x, y, rt, cfg.lambda_pen);
                };
                if (try_eta(eta) > q0) {
                    while (try_eta(eta * 2.0) > try_eta(eta) && eta < 1e6) eta *= 2.0;
                } else {
                    int halvings = 0;
                    while (try_eta(eta) <= q0 && halvings++ < 40) eta *= 0.5;
                }
            }
        }

        CVec v(A.n_in, cplx{0, 0});
        std::vector<double> trace;
        trace.reserve(cfg.steps + 1);
        trace.push_back(q0);
        for (int step = 0; step < cfg.steps; ++step) {
            CVec g = q_gradient(recon, A, x, y, r, cfg);
            for (std::size_t i = 0; i < r.size(); ++i) {
                v[i] = cfg.gamma_mom * v[i] + eta * g[i];
                r[i] += v[i];
            }
            trace.push_back(q_value(recon, A, x, y, r, cfg.lambda_pen));
        }

        CVec Ar = A.apply(r);
        CVec yr(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) yr[i] = y[i] + Ar[i];
        CVec rec = recon.apply(yr);
        double damage = 0.0, shift = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            damage += std::norm(rec[i] - x[i]);
            shift += std::norm(rec[i] - rec0[i]);
        }
        damage = std::sqrt(damage);
        shift = std::sqrt(shift);
        if (damage > best.norm_damage) {
            best.r_star = r;
            best.Q_value = trace.back();
            best.norm_r = norm_l2(r);
            best.norm_Ar = norm_l2(Ar);
            best.norm_recon_shift = shift;
            best.norm_damage = damage;
            best.baseline_error = baseline;
            best.best_restart = run;
            best.q_trace = std::move(trace);
        }
    }
    return best;
}

}  // namespace firenet
