#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <firenet/transforms.hpp>

using namespace firenet;

namespace {

// O(N^2) DFT oracle straight from the definition:
// out(q) = K^{-1/2} sum_t x(t) exp(+2 pi i w(q) t / K), w(q) = q - (K/2 - 1).
CVec naive_dft_1d(const CVec& x) {
    const std::size_t K = x.size();
    CVec out(K);
    for (std::size_t q = 0; q < K; ++q) {
        long long w = fourier_freq_at(q, K);
        cplx s{0, 0};
        for (std::size_t t = 0; t < K; ++t) {
            double ang = 2.0 * M_PI * static_cast<double>(w) * static_cast<double>(t) /
                         static_cast<double>(K);
            s += x[t] * cplx{std::cos(ang), std::sin(ang)};
        }
        out[q] = s / std::sqrt(static_cast<double>(K));
    }
    return out;
}

// Walsh function from the binary-expansion formula:
// v_w(z) = (-1)^{sum_j (w_j + w_{j+1}) z_j}, z_j the j-th binary digit of z.
int walsh_sign(std::size_t w, std::size_t t, int bits) {
    int acc = 0;
    for (int j = 1; j <= bits; ++j) {
        int zj = static_cast<int>((t >> (bits - j)) & 1);
        int wj = static_cast<int>((w >> (j - 1)) & 1);
        int wj1 = static_cast<int>((w >> j) & 1);
        acc += (wj + wj1) * zj;
    }
    return (acc % 2 == 0) ? 1 : -1;
}

DenseMatrix walsh_matrix(std::size_t K) {
    int bits = log2_exact(K);
    DenseMatrix W(K, K);
    double sc = 1.0 / std::sqrt(static_cast<double>(K));
    for (std::size_t w = 0; w < K; ++w)
        for (std::size_t t = 0; t < K; ++t) W(w, t) = sc * walsh_sign(w, t, bits);
    return W;
}

// Explicit 1-D Haar synthesis matrix: column c holds the c-th basis vector of
// the documented coefficient layout.
DenseMatrix haar_synthesis_1d(int r) {
    const std::size_t K = std::size_t{1} << r;
    DenseMatrix B(K, K);
    for (std::size_t t = 0; t < K; ++t) B(t, 0) = std::pow(2.0, -0.5 * r);
    for (int j = 1; j <= r; ++j) {
        std::size_t block = std::size_t{1} << (j - 1);
        std::size_t supp = std::size_t{1} << (r - j + 1);
        double val = std::pow(2.0, 0.5 * (j - 1 - r));
        for (std::size_t p = 0; p < block; ++p) {
            std::size_t start = p * supp;
            for (std::size_t t = 0; t < supp; ++t)
                B(start + t, block + p) = (t < supp / 2) ? val : -val;
        }
    }
    return B;
}

// 1-D scaling / wavelet factor value at position t (0 if outside support).
double haar_factor(int type, int jm1, int r, std::size_t p, std::size_t t) {
    std::size_t supp = std::size_t{1} << (r - jm1);
    std::size_t start = p * supp;
    if (t < start || t >= start + supp) return 0.0;
    double val = std::pow(2.0, 0.5 * (jm1 - r));
    if (type == 0) return val;  // scaling
    return (t - start < supp / 2) ? val : -val;
}

// Explicit 2-D Haar synthesis matrix over the documented flat layout.
DenseMatrix haar_synthesis_2d(int r) {
    const std::size_t K = std::size_t{1} << r;
    const std::size_t N = K * K;
    DenseMatrix B(N, N);
    for (std::size_t t = 0; t < N; ++t) B(t, 0) = std::pow(2.0, -static_cast<double>(r));
    const int qs[3][2] = {{0, 1}, {1, 0}, {1, 1}};
    for (int j = 1; j <= r; ++j) {
        std::size_t block = std::size_t{1} << (2 * (j - 1));  // 4^{j-1}
        std::size_t side = std::size_t{1} << (j - 1);
        for (int qi = 0; qi < 3; ++qi)
            for (std::size_t p1 = 0; p1 < side; ++p1)
                for (std::size_t p2 = 0; p2 < side; ++p2) {
                    std::size_t col = block + qi * block + p1 * side + p2;
                    for (std::size_t t1 = 0; t1 < K; ++t1)
                        for (std::size_t t2 = 0; t2 < K; ++t2)
                            B(t1 * K + t2, col) =
                                haar_factor(qs[qi][0], j - 1, r, p1, t1) *
                                haar_factor(qs[qi][1], j - 1, r, p2, t2);
                }
    }
    return B;
}

CVec random_cvec(std::size_t n, Rng& rng) {
    CVec x(n);
    for (auto& v : x) v = rng.cnormal();
    return x;
}

double max_abs_diff(const CVec& a, const CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("dft: delta and constant inputs at K=4") {
    ComplexTensor x({4});
    x.data[0] = 1.0;
    auto X = dft_forward(x);
    for (auto& v : X.data) CHECK(std::abs(v - cplx{0.5, 0}) < 1e-14);

    ComplexTensor c({4});
    for (auto& v : c.data) v = 0.5;  // 1/sqrt(4)
    auto C = dft_forward(c);
    // frequency 0 sits at array position K/2 - 1 = 1
    for (std::size_t q = 0; q < 4; ++q) {
        cplx expect = (q == 1) ? cplx{1, 0} : cplx{0, 0};
        CHECK(std::abs(C.data[q] - expect) < 1e-13);
    }
}

TEST_CASE("dft matches the naive oracle at K=8 and roundtrips") {
    Rng rng(21);
    ComplexTensor x({8}, random_cvec(8, rng));
    auto X = dft_forward(x);
    CHECK(max_abs_diff(X.data, naive_dft_1d(x.data)) < 1e-12);
    auto back = dft_inverse(X);
    CHECK(max_abs_diff(back.data, x.data) < 1e-12);
}

TEST_CASE("dft_inverse of a single frequency is a complex exponential") {
    const std::size_t K = 8;
    ComplexTensor X({K});
    long long w = 3;
    X.data[fourier_pos_of(w, K)] = 1.0;
    auto x = dft_inverse(X);
    for (std::size_t t = 0; t < K; ++t) {
        double ang = -2.0 * M_PI * static_cast<double>(w) * static_cast<double>(t) / K;
        cplx expect = cplx{std::cos(ang), std::sin(ang)} / std::sqrt(static_cast<double>(K));
        CHECK(std::abs(x.data[t] - expect) < 1e-13);
    }
}

TEST_CASE("dft 2-D matches separable naive oracle") {
    Rng rng(31);
    const std::size_t K = 4;
    ComplexTensor x({K, K}, random_cvec(K * K, rng));
    auto X = dft_forward(x);
    // oracle: transform rows then columns with the 1-D naive DFT
    std::vector<CVec> rows(K, CVec(K));
    for (std::size_t i = 0; i < K; ++i) {
        CVec row(K);
        for (std::size_t j2 = 0; j2 < K; ++j2) row[j2] = x.data[i * K + j2];
        rows[i] = naive_dft_1d(row);
    }
    for (std::size_t j2 = 0; j2 < K; ++j2) {
        CVec col(K);
        for (std::size_t i = 0; i < K; ++i) col[i] = rows[i][j2];
        CVec out = naive_dft_1d(col);
        for (std::size_t i = 0; i < K; ++i)
            CHECK(std::abs(X.data[i * K + j2] - out[i]) < 1e-12);
    }
}

TEST_CASE("wht: K=4 rows from the binary-expansion formula") {
    ComplexTensor d0({4});
    d0.data[0] = 1.0;
    auto W0 = wht_forward(d0);
    for (auto& v : W0.data) CHECK(std::abs(v - cplx{0.5, 0}) < 1e-14);

    ComplexTensor d1({4});
    d1.data[1] = 1.0;
    auto W1 = wht_forward(d1);
    double expect1[4] = {0.5, 0.5, -0.5, -0.5};  // column t=1 of the sequency matrix
    for (std::size_t w = 0; w < 4; ++w) CHECK(std::abs(W1.data[w] - expect1[w]) < 1e-14);

    // full rows: w=2 -> (+,-,-,+), w=3 -> (+,-,+,-)
    auto M = walsh_matrix(4);
    double row2[4] = {0.5, -0.5, -0.5, 0.5}, row3[4] = {0.5, -0.5, 0.5, -0.5};
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(std::abs(M(2, t) - row2[t]) < 1e-14);
        CHECK(std::abs(M(3, t) - row3[t]) < 1e-14);
    }
}

TEST_CASE("wht matches formula matrix and is self-inverse") {
    for (std::size_t K : {8u, 16u}) {
        auto M = walsh_matrix(K);
        for (std::size_t t = 0; t < K; ++t) {
            ComplexTensor e({K});
            e.data[t] = 1.0;
            auto col = wht_forward(e);
            for (std::size_t w = 0; w < K; ++w) CHECK(std::abs(col.data[w] - M(w, t)) < 1e-12);
        }
    }
    Rng rng(5);
    ComplexTensor x({16}, random_cvec(16, rng));
    auto twice = wht_forward(wht_forward(x));
    CHECK(max_abs_diff(twice.data, x.data) < 1e-12);
}

TEST_CASE("wht sequency rows have exactly w sign changes") {
    for (std::size_t K : {4u, 8u, 16u, 32u}) {
        auto M = walsh_matrix(K);
        for (std::size_t w = 0; w < K; ++w) {
            ComplexTensor e({K});
            std::size_t changes = 0;
            CVec row(K);
            for (std::size_t t = 0; t < K; ++t) {
                ComplexTensor d({K});
                d.data[t] = 1.0;
                row[t] = wht_forward(d).data[w];
            }
            for (std::size_t t = 1; t < K; ++t)
                if (row[t].real() * row[t - 1].real() < 0) ++changes;
            CHECK(changes == w);
        }
    }
}

TEST_CASE("haar 1-D basics") {
    const double is2 = 1.0 / std::sqrt(2.0);
    ComplexTensor x({2});
    x.data[0] = is2;
    x.data[1] = is2;
    auto c = haar_dwt(x, 1);
    CHECK(std::abs(c.data[0] - cplx{1, 0}) < 1e-14);
    CHECK(std::abs(c.data[1]) < 1e-14);

    ComplexTensor z({4});
    z.data[0] = 1.0;
    z.data[1] = -1.0;
    auto c2 = haar_dwt(z, 2);
    auto B = haar_synthesis_1d(2);
    // analysis = B^T (real orthogonal)
    for (std::size_t i = 0; i < 4; ++i) {
        cplx s{0, 0};
        for (std::size_t t = 0; t < 4; ++t) s += B(t, i) * z.data[t];
        CHECK(std::abs(c2.data[i] - s) < 1e-13);
    }
}

TEST_CASE("haar 1-D matches explicit synthesis matrix at r=3,4") {
    for (int r : {3, 4}) {
        const std::size_t K = std::size_t{1} << r;
        auto B = haar_synthesis_1d(r);
        // idwt of each coefficient basis vector reproduces the column
        for (std::size_t cidx = 0; cidx < K; ++cidx) {
            ComplexTensor e({K});
            e.data[cidx] = 1.0;
            auto v = haar_idwt(e, r);
            for (std::size_t t = 0; t < K; ++t) CHECK(std::abs(v.data[t] - B(t, cidx)) < 1e-12);
        }
        Rng rng(r);
        ComplexTensor x({K}, random_cvec(K, rng));
        auto round = haar_idwt(haar_dwt(x, r), r);
        CHECK(max_abs_diff(round.data, x.data) < 1e-12);
    }
}

TEST_CASE("haar single level-1 coefficient reproduces the mother wavelet") {
    const std::size_t K = 4;
    ComplexTensor e({K});
    e.data[1] = 1.0;
    auto v = haar_idwt(e, 2);
    for (std::size_t t = 0; t < K; ++t)
        CHECK(std::abs(v.data[t] - cplx{t < 2 ? 0.5 : -0.5, 0}) < 1e-14);
}

TEST_CASE("haar 2-D matches explicit tensor-product matrix at r=1,2") {
    for (int r : {1, 2}) {
        const std::size_t K = std::size_t{1} << r, N = K * K;
        auto B = haar_synthesis_2d(r);
        for (std::size_t cidx = 0; cidx < N; ++cidx) {
            ComplexTensor e({K, K});
            e.data[cidx] = 1.0;
            auto v = haar_idwt(e, r);
            for (std::size_t t = 0; t < N; ++t) CHECK(std::abs(v.data[t] - B(t, cidx)) < 1e-12);
        }
        // analysis matches B^T on a delta image
        ComplexTensor img({K, K});
        img.data[0] = 1.0;
        auto c = haar_dwt(img, r);
        for (std::size_t i = 0; i < N; ++i) CHECK(std::abs(c.data[i] - B(0, i)) < 1e-12);
        Rng rng(10 + r);
        ComplexTensor x({K, K}, random_cvec(N, rng));
        auto round = haar_idwt(haar_dwt(x, r), r);
        CHECK(max_abs_diff(round.data, x.data) < 1e-12);
    }
}

TEST_CASE("dct: constant input, roundtrip, explicit matrix") {
    const std::size_t n = 6;
    CVec c(n, cplx{1, 0});
    auto C = dct_orthonormal(c, false);
    CHECK(std::abs(C[0] - cplx{std::sqrt(static_cast<double>(n)), 0}) < 1e-13);
    for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(C[k]) < 1e-13);

    Rng rng(77);
    CVec x = random_cvec(19, rng);
    auto round = dct_orthonormal(dct_orthonormal(x, false), true);
    CHECK(max_abs_diff(round, x) < 1e-12);

    // explicit orthonormal DCT-II at length 4
    CVec x4 = random_cvec(4, rng);
    auto y4 = dct_orthonormal(x4, false);
    for (std::size_t k = 0; k < 4; ++k) {
        cplx s{0, 0};
        for (std::size_t t = 0; t < 4; ++t) {
            double w = (k == 0) ? 0.5 : std::sqrt(0.5);
            s += w * std::cos(M_PI * (2.0 * t + 1.0) * k / 8.0) * x4[t];
        }
        CHECK(std::abs(y4[k] - s) < 1e-13);
    }
    // dct_matrix agrees with the transform
    auto D = dct_matrix(4);
    auto via_mat = D.mv(x4);
    CHECK(max_abs_diff(via_mat, y4) < 1e-13);
}

TEST_CASE("Parseval and linearity for all transforms") {
    Rng rng(55);
    auto check_transform = [&](auto&& T, const std::vector<std::size_t>& dims) {
        ComplexTensor x(dims, random_cvec([&] {
                            std::size_t n = 1;
                            for (auto d : dims) n *= d;
                            return n;
                        }(),
                        rng));
        ComplexTensor y(dims, random_cvec(x.size(), rng));
        cplx a = rng.cnormal(), b = rng.cnormal();
        CHECK(norm_l2(T(x)) == doctest::Approx(norm_l2(x)).epsilon(1e-12));
        ComplexTensor lin(dims);
        for (std::size_t i = 0; i < x.size(); ++i) lin.data[i] = a * x.data[i] + b * y.data[i];
        auto lhs = T(lin);
        auto tx = T(x), ty = T(y);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::abs(lhs.data[i] - (a * tx.data[i] + b * ty.data[i])) < 1e-12);
    };
    check_transform([](const ComplexTensor& t) { return dft_forward(t); }, {16});
    check_transform([](const ComplexTensor& t) { return dft_forward(t); }, {8, 8});
    check_transform([](const ComplexTensor& t) { return wht_forward(t); }, {16});
    check_transform([](const ComplexTensor& t) { return wht_forward(t); }, {8, 8});
    check_transform([](const ComplexTensor& t) { return haar_dwt(t, 4); }, {16});
    check_transform([](const ComplexTensor& t) { return haar_dwt(t, 3); }, {8, 8});
    check_transform([](const ComplexTensor& t) { return dct_orthonormal(t, false); }, {16});
}

TEST_CASE("fast DFT equals oracle matrix at K=16") {
    const std::size_t K = 16;
    for (std::size_t t = 0; t < K; ++t) {
        ComplexTensor e({K});
        e.data[t] = 1.0;
        auto fast = dft_forward(e);
        CVec slow = naive_dft_1d(e.data);
        CHECK(max_abs_diff(fast.data, slow) < 1e-12);
    }
}

TEST_CASE("transforms reject invalid shapes") {
    ComplexTensor ok({4});
    CHECK_THROWS_AS(haar_dwt(ok, 3), std::invalid_argument);
    CHECK_THROWS_AS(dct_orthonormal(ComplexTensor({2, 2}), false), std::invalid_argument);
}
