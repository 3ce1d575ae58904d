#pragma once

// Unitary fast transforms on power-of-two grids.
//
// Conventions fixed here and relied on everywhere else:
//  * DFT: [F x](w) = K^{-d/2} sum_t x(t) exp(+2*pi*i w.t / K), frequencies
//    enumerated per axis as w in {-K/2+1, ..., K/2} (position q holds
//    w = q - (K/2 - 1)).
//  * WHT: sequency (sign-change) ordered, w in {0..K-1} per axis; the matrix
//    is real symmetric and self-inverse.
//  * Haar DWT: full-depth decomposition. 1-D layout: index 0 is the scaling
//    coefficient, the level-j wavelet block (j = 1..r) occupies
//    [2^{j-1}, 2^j) and holds <psi_{j-1,p}, x> for p = 0..2^{j-1}-1, where
//    psi_{j,p} is +2^{(j-r)/2} on the first half of its support and
//    -2^{(j-r)/2} on the second half. 2-D layout: index 0 is the scaling
//    coefficient; the level-j block occupies [4^{j-1}, 4^j) and consists of
//    three sub-blocks of size 4^{j-1} in the order q = (0,1), (1,0), (1,1)
//    (q1 acts on the row/axis-0 factor), each sub-block row-major over
//    p = (p1, p2) in {0..2^{j-1}-1}^2.

#include <cmath>

#include "linalg.hpp"
#include "tensor.hpp"

namespace firenet {

namespace detail {

constexpr double kPi = 3.14159265358979323846;

// In-place radix-2 FFT on a stride-1 buffer, sign = +1 or -1 in the exponent.
// No normalization.
inline void fft_pow2(CVec& a, int sign) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * kPi / static_cast<double>(len);
        cplx wlen{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            cplx w{1.0, 0.0};
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = a[i + j];
                cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Fast unnormalized Hadamard (natural order) butterfly.
inline void hadamard_pow2(CVec& a) {
    const std::size_t n = a.size();
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                cplx u = a[j], v = a[j + h];
                a[j] = u + v;
                a[j + h] = u - v;
            }
        }
    }
}

inline std::size_t bit_reverse(std::size_t v, int bits) {
    std::size_t r = 0;
    for (int i = 0; i < bits; ++i) {
        r = (r << 1) | (v & 1);
        v >>= 1;
    }
    return r;
}

// Natural (Hadamard) row index holding sequency row w: bitrev(gray(w)).
inline std::size_t sequency_to_natural(std::size_t w, int bits) {
    return bit_reverse(w ^ (w >> 1), bits);
}

// Apply a 1-D in-place operation along every axis line of a row-major tensor.
template <typename F>
void for_each_axis_line(ComplexTensor& t, std::size_t axis, F&& f) {
    const auto& dims = t.dims;
    std::size_t stride = 1;
    for (std::size_t a = axis + 1; a < dims.size(); ++a) stride *= dims[a];
    std::size_t len = dims[axis];
    std::size_t outer = t.size() / (stride * len);
    CVec line(len);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < stride; ++s) {
            std::size_t base = o * stride * len + s;
            for (std::size_t i = 0; i < len; ++i) line[i] = t.data[base + i * stride];
            f(line);
            for (std::size_t i = 0; i < len; ++i) t.data[base + i * stride] = line[i];
        }
    }
}

}  // namespace detail

/// Centered frequency value at array position q on an axis of length K.
inline long long fourier_freq_at(std::size_t q, std::size_t K) {
    return static_cast<long long>(q) - (static_cast<long long>(K) / 2 - 1);
}

/// Array position of centered frequency w on an axis of length K.
inline std::size_t fourier_pos_of(long long w, std::size_t K) {
    return static_cast<std::size_t>(w + static_cast<long long>(K) / 2 - 1);
}

inline ComplexTensor dft_forward(const ComplexTensor& x) {
    ComplexTensor out = x;
    for (std::size_t axis = 0; axis < out.ndim(); ++axis) {
        const std::size_t K = out.dims[axis];
        detail::for_each_axis_line(out, axis, [K](CVec& line) {
            detail::fft_pow2(line, +1);
            double sc = 1.0 / std::sqrt(static_cast<double>(K));
            for (auto& v : line) v *= sc;
            // standard index k (w mod K) -> centered position q = w + K/2 - 1
            CVec centered(K);
            for (std::size_t q = 0; q < K; ++q)
                centered[q] = line[(q + K / 2 + 1) % K];
            line = centered;
        });
    }
    return out;
}

inline ComplexTensor dft_inverse(const ComplexTensor& X) {
    ComplexTensor out = X;
    for (std::size_t axis = 0; axis < out.ndim(); ++axis) {
        const std::size_t K = out.dims[axis];
        detail::for_each_axis_line(out, axis, [K](CVec& line) {
            CVec std_order(K);
            for (std::size_t q = 0; q < K; ++q) std_order[(q + K / 2 + 1) % K] = line[q];
            detail::fft_pow2(std_order, -1);
            double sc = 1.0 / std::sqrt(static_cast<double>(K));
            for (auto& v : std_order) v *= sc;
            line = std_order;
        });
    }
    return out;
}

inline ComplexTensor wht_forward(const ComplexTensor& x) {
    ComplexTensor out = x;
    for (std::size_t axis = 0; axis < out.ndim(); ++axis) {
        const std::size_t K = out.dims[axis];
        const int bits = log2_exact(K);
        detail::for_each_axis_line(out, axis, [K, bits](CVec& line) {
            detail::hadamard_pow2(line);
            double sc = 1.0 / std::sqrt(static_cast<double>(K));
            CVec seq(K);
            for (std::size_t w = 0; w < K; ++w)
                seq[w] = sc * line[detail::sequency_to_natural(w, bits)];
            line = seq;
        });
    }
    return out;
}

/// The sequency WHT matrix is real symmetric and self-inverse.
inline ComplexTensor wht_inverse(const ComplexTensor& X) { return wht_forward(X); }

namespace detail {

inline void haar_fwd_1d(CVec& a) {
    const std::size_t n = a.size();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CVec buf(n);
    std::size_t len = n;
    while (len > 1) {
        std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            buf[i] = (a[2 * i] + a[2 * i + 1]) * inv_sqrt2;        // approx
            buf[half + i] = (a[2 * i] - a[2 * i + 1]) * inv_sqrt2; // detail
        }
        // details for this scale land at [half, len); approx recursed on [0, half)
        for (std::size_t i = 0; i < len; ++i) a[i] = buf[i];
        len = half;
    }
}

inline void haar_inv_1d(CVec& a) {
    const std::size_t n = a.size();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CVec buf(n);
    std::size_t len = 2;
    while (len <= n) {
        std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            buf[2 * i] = (a[i] + a[half + i]) * inv_sqrt2;
            buf[2 * i + 1] = (a[i] - a[half + i]) * inv_sqrt2;
        }
        for (std::size_t i = 0; i < len; ++i) a[i] = buf[i];
        len <<= 1;
    }
}

}  // namespace detail

inline void check_haar_dims(const ComplexTensor& x, int r) {
    const std::size_t K = std::size_t{1} << r;
    for (auto d : x.dims)
        if (d != K) throw std::invalid_argument("haar: dims must all equal 2^r");
    if (x.ndim() < 1 || x.ndim() > 2) throw std::invalid_argument("haar: d must be 1 or 2");
}

inline ComplexTensor haar_dwt(const ComplexTensor& x, int r) {
    check_haar_dims(x, r);
    ComplexTensor out = x;
    if (x.ndim() == 1) {
        detail::haar_fwd_1d(out.data);
        return out;
    }
    // d = 2: separable cascade. At each stage the active approx block is the
    // leading side x side square of the working grid (row-major, full width K).
    const std::size_t K = x.dims[0];
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<cplx> work = x.data;  // row-major K x K grid
    ComplexTensor coeffs({K, K});
    std::size_t side = K;
    int j = r;  // producing level-j coefficients at each stage
    while (side > 1) {
        std::size_t half = side / 2;
        // filter rows then columns on the leading side x side block
        std::vector<cplx> tmp(side * side);
        for (std::size_t i = 0; i < side; ++i)  // along axis 1
            for (std::size_t c = 0; c < half; ++c) {
                tmp[i * side + c] = (work[i * K + 2 * c] + work[i * K + 2 * c + 1]) * inv_sqrt2;
                tmp[i * side + half + c] =
                    (work[i * K + 2 * c] - work[i * K + 2 * c + 1]) * inv_sqrt2;
            }
        std::vector<cplx> tmp2(side * side);
        for (std::size_t c = 0; c < side; ++c)  // along axis 0
            for (std::size_t i = 0; i < half; ++i) {
                tmp2[i * side + c] = (tmp[2 * i * side + c] + tmp[(2 * i + 1) * side + c]) * inv_sqrt2;
                tmp2[(half + i) * side + c] =
                    (tmp[2 * i * side + c] - tmp[(2 * i + 1) * side + c]) * inv_sqrt2;
            }
        // tmp2 quadrants: [0,half)x[0,half) = approx (aa); [0,half)x[half,side) = (0,1);
        // [half,side)x[0,half) = (1,0); [half,side)x[half,side) = (1,1).
        const std::size_t block = std::size_t{1} << (2 * (j - 1));  // 4^{j-1}
        const std::size_t off = block;
        for (std::size_t p1 = 0; p1 < half; ++p1)
            for (std::size_t p2 = 0; p2 < half; ++p2) {
                std::size_t pm = p1 * half + p2;
                coeffs.data[off + pm] = tmp2[p1 * side + half + p2];                 // q=(0,1)
                coeffs.data[off + block + pm] = tmp2[(half + p1) * side + p2];       // q=(1,0)
                coeffs.data[off + 2 * block + pm] = tmp2[(half + p1) * side + half + p2];  // q=(1,1)
            }
        // copy approx back into the working grid
        for (std::size_t p1 = 0; p1 < half; ++p1)
            for (std::size_t p2 = 0; p2 < half; ++p2) work[p1 * K + p2] = tmp2[p1 * side + p2];
        side = half;
        --j;
    }
    coeffs.data[0] = work[0];
    return coeffs;
}

inline ComplexTensor haar_idwt(const ComplexTensor& coeffs, int r) {
    check_haar_dims(coeffs, r);
    ComplexTensor out = coeffs;
    if (coeffs.ndim() == 1) {
        detail::haar_inv_1d(out.data);
        return out;
    }
    const std::size_t K = coeffs.dims[0];
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<cplx> work(K * K, cplx{0, 0});
    work[0] = coeffs.data[0];
    std::size_t side = 2;
    for (int j = 1; j <= r; ++j, side <<= 1) {
        std::size_t half = side / 2;
        const std::size_t block = std::size_t{1} << (2 * (j - 1));
        const std::size_t off = block;
        // assemble quadrant image in tmp2 (side x side)
        std::vector<cplx> tmp2(side * side);
        for (std::size_t p1 = 0; p1 < half; ++p1)
            for (std::size_t p2 = 0; p2 < half; ++p2) {
                std::size_t pm = p1 * half + p2;
                tmp2[p1 * side + p2] = work[p1 * K + p2];
                tmp2[p1 * side + half + p2] = coeffs.data[off + pm];
                tmp2[(half + p1) * side + p2] = coeffs.data[off + block + pm];
                tmp2[(half + p1) * side + half + p2] = coeffs.data[off + 2 * block + pm];
            }
        // invert columns (axis 0) then rows (axis 1)
        std::vector<cplx> tmp(side * side);
        for (std::size_t c = 0; c < side; ++c)
            for (std::size_t i = 0; i < half; ++i) {
                tmp[2 * i * side + c] = (tmp2[i * side + c] + tmp2[(half + i) * side + c]) * inv_sqrt2;
                tmp[(2 * i + 1) * side + c] =
                    (tmp2[i * side + c] - tmp2[(half + i) * side + c]) * inv_sqrt2;
            }
        for (std::size_t i = 0; i < side; ++i)
            for (std::size_t c = 0; c < half; ++c) {
                work[i * K + 2 * c] = (tmp[i * side + c] + tmp[i * side + half + c]) * inv_sqrt2;
                work[i * K + 2 * c + 1] = (tmp[i * side + c] - tmp[i * side + half + c]) * inv_sqrt2;
            }
    }
    out.data = work;
    return out;
}

/// Orthonormal DCT-II (forward) / DCT-III (inverse). Explicit O(N^2); only
/// used on small instances. Works on plain vectors of any length.
inline CVec dct_orthonormal(const CVec& x, bool inverse) {
    const std::size_t n = x.size();
    CVec out(n);
    const double pi = detail::kPi;
    for (std::size_t k = 0; k < n; ++k) {
        cplx s{0, 0};
        for (std::size_t t = 0; t < n; ++t) {
            if (!inverse) {
                double c = std::cos(pi * (2.0 * t + 1.0) * k / (2.0 * n));
                double w = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
                s += w * c * x[t];
            } else {
                double c = std::cos(pi * (2.0 * k + 1.0) * t / (2.0 * n));
                double w = (t == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
                s += w * c * x[t];
            }
        }
        out[k] = s;
    }
    return out;
}

inline ComplexTensor dct_orthonormal(const ComplexTensor& x, bool inverse) {
    if (x.ndim() != 1) throw std::invalid_argument("dct_orthonormal: 1-D input required");
    return ComplexTensor(x.dims, dct_orthonormal(x.data, inverse));
}

/// Unitary DCT-II matrix of size n (rows indexed by frequency).
inline DenseMatrix dct_matrix(std::size_t n) {
    DenseMatrix D(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t t = 0; t < n; ++t) {
            double w = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            D(k, t) = w * std::cos(detail::kPi * (2.0 * t + 1.0) * k / (2.0 * n));
        }
    return D;
}

}  // namespace firenet
