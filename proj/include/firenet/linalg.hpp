#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "tensor.hpp"

namespace firenet {

using CVec = std::vector<cplx>;

inline double norm_l2(const CVec& x) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return std::sqrt(s);
}

inline double norm_l2(const ComplexTensor& x) { return norm_l2(x.data); }

inline double norm_l1w(const CVec& x, const std::vector<double>& w) {
    if (x.size() != w.size()) throw std::invalid_argument("norm_l1w: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(w[j] > 0.0)) throw std::invalid_argument("norm_l1w: nonpositive weight");
        s += w[j] * std::abs(x[j]);
    }
    return s;
}

inline double norm_l1w(const ComplexTensor& x, const std::vector<double>& w) {
    return norm_l1w(x.data, w);
}

/// ⟨x,y⟩ = Σ conj(x_j) y_j
inline cplx dot(const CVec& x, const CVec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < x.size(); ++j) s += std::conj(x[j]) * y[j];
    return s;
}

inline void axpy(CVec& y, cplx a, const CVec& x) {
    for (std::size_t j = 0; j < x.size(); ++j) y[j] += a * x[j];
}

inline CVec scaled(const CVec& x, double a) {
    CVec y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = a * x[j];
    return y;
}

/// Generic linear map with explicit forward/adjoint closures.
struct LinOp {
    std::size_t n_in = 0;   // domain dimension
    std::size_t n_out = 0;  // range dimension
    std::function<CVec(const CVec&)> fwd;
    std::function<CVec(const CVec&)> adj;

    CVec apply(const CVec& x) const {
        if (x.size() != n_in) throw std::invalid_argument("LinOp: forward dimension mismatch");
        return fwd(x);
    }
    CVec apply_adj(const CVec& y) const {
        if (y.size() != n_out) throw std::invalid_argument("LinOp: adjoint dimension mismatch");
        return adj(y);
    }
};

/// Small dense complex matrix, row-major.
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<cplx> a;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, cplx{0, 0}) {}

    cplx& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    CVec mv(const CVec& x) const {
        if (x.size() != cols) throw std::invalid_argument("DenseMatrix::mv: dim mismatch");
        CVec y(rows, cplx{0, 0});
        for (std::size_t i = 0; i < rows; ++i) {
            cplx s{0, 0};
            for (std::size_t j = 0; j < cols; ++j) s += a[i * cols + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    CVec mv_adj(const CVec& y) const {
        if (y.size() != rows) throw std::invalid_argument("DenseMatrix::mv_adj: dim mismatch");
        CVec x(cols, cplx{0, 0});
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) x[j] += std::conj(a[i * cols + j]) * y[i];
        return x;
    }

    LinOp as_linop() const {
        DenseMatrix self = *this;
        return LinOp{cols, rows, [self](const CVec& x) { return self.mv(x); },
                     [self](const CVec& y) { return self.mv_adj(y); }};
    }

    /// Build a dense matrix from any linear map by applying it to basis vectors.
    static DenseMatrix from_linop(const LinOp& op) {
        DenseMatrix M(op.n_out, op.n_in);
        CVec e(op.n_in, cplx{0, 0});
        for (std::size_t j = 0; j < op.n_in; ++j) {
            e[j] = 1.0;
            CVec col = op.apply(e);
            for (std::size_t i = 0; i < op.n_out; ++i) M(i, j) = col[i];
            e[j] = 0.0;
        }
        return M;
    }
};

struct OperatorNormResult {
    double value = 0.0;
    bool converged = false;
    /// Estimate inflated by the 1.05 safety factor when the iteration did not
    /// converge within the budget; equal to value otherwise.
    double safe_upper() const { return converged ? value : 1.05 * value; }
};

/// Power iteration on A*A estimating the largest singular value of A.
inline OperatorNormResult operator_norm(const LinOp& op, double tol, int max_iters, Rng& rng) {
    if (!(tol > 0.0)) throw std::invalid_argument("operator_norm: tol must be positive");
    CVec v(op.n_in);
    for (auto& c : v) c = rng.cnormal();
    double nv = norm_l2(v);
    if (nv == 0.0) v[0] = 1.0, nv = 1.0;
    for (auto& c : v) c /= nv;

    OperatorNormResult res;
    double sigma_prev = -1.0;
    for (int it = 0; it < max_iters; ++it) {
        CVec u = op.apply(v);
        double sigma = norm_l2(u);
        if (sigma == 0.0) {
            // A v = 0; restart from a fresh direction, or accept 0 if it persists
            if (it > 4) {
                res.value = 0.0;
                res.converged = true;
                return res;
            }
            for (auto& c : v) c = rng.cnormal();
            double n2 = norm_l2(v);
            for (auto& c : v) c /= n2;
            continue;
        }
        v = op.apply_adj(u);
        double nw = norm_l2(v);
        for (auto& c : v) c /= nw;
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) <= tol * sigma) {
            res.value = sigma;
            res.converged = true;
            return res;
        }
        sigma_prev = sigma;
    }
    res.value = sigma_prev > 0.0 ? sigma_prev : 0.0;
    res.converged = false;
    return res;
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
/// O(n^3) per sweep; intended for test oracles and tiny instances only.
inline std::vector<double> hermitian_eigenvalues(DenseMatrix H, double tol = 1e-13,
                                                 int max_sweeps = 100) {
    if (H.rows != H.cols) throw std::invalid_argument("hermitian_eigenvalues: not square");
    const std::size_t n = H.rows;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(H(p, q));
        if (off < tol * tol) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                cplx hpq = H(p, q);
                double apq = std::abs(hpq);
                if (apq < tol * 1e-3) continue;
                // unitary 2x2 diagonalization of [[hpp, hpq],[conj(hpq), hqq]]
                double hpp = H(p, p).real(), hqq = H(q, q).real();
                cplx phase = hpq / apq;
                double theta = 0.5 * std::atan2(2.0 * apq, hpp - hqq);
                double c = std::cos(theta), s = std::sin(theta);
                cplx sp = s * phase;
                // rows: H <- U* H
                for (std::size_t k = 0; k < n; ++k) {
                    cplx hpk = H(p, k), hqk = H(q, k);
                    H(p, k) = c * hpk + sp * hqk;
                    H(q, k) = -std::conj(sp) * hpk + c * hqk;
                }
                // columns: H <- H U
                for (std::size_t k = 0; k < n; ++k) {
                    cplx hkp = H(k, p), hkq = H(k, q);
                    H(k, p) = c * hkp + std::conj(sp) * hkq;
                    H(k, q) = -sp * hkp + c * hkq;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = H(i, i).real();
    return ev;
}

/// Largest singular value via the Jacobi eigensolver on A*A (dense oracle path).
inline double operator_norm_dense(const DenseMatrix& A) {
    const std::size_t n = A.cols;
    DenseMatrix G(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s{0, 0};
            for (std::size_t k = 0; k < A.rows; ++k) s += std::conj(A(k, i)) * A(k, j);
            G(i, j) = s;
        }
    auto ev = hermitian_eigenvalues(G);
    double mx = 0.0;
    for (double e : ev) mx = std::max(mx, e);
    return std::sqrt(std::max(0.0, mx));
}

}  // namespace firenet
