#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <firenet/linalg.hpp>

using namespace firenet;

TEST_CASE("norm_l2 basics") {
    CHECK(norm_l2(ComplexTensor::vec({cplx{0, 0}, cplx{0, 0}})) == 0.0);
    CHECK(norm_l2(ComplexTensor::vec({cplx{3, 0}, cplx{0, 4}})) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("norm_l2 matches componentwise oracle") {
    Rng rng(42);
    CVec x(64);
    for (auto& v : x) v = rng.cnormal();
    double acc = 0.0;
    for (const auto& v : x) acc += v.real() * v.real() + v.imag() * v.imag();
    CHECK(norm_l2(x) == doctest::Approx(std::sqrt(acc)).epsilon(1e-14));
}

TEST_CASE("norm_l1w basics") {
    CVec e1{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}};
    CHECK(norm_l1w(e1, {1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    CVec x{cplx{1, 0}, cplx{0, 1}};
    CHECK(norm_l1w(x, {2, 3}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS(norm_l1w(x, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(norm_l1w(x, {1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("norm_l1w matches loop oracle and unweighted l1") {
    Rng rng(7);
    CVec x(32);
    std::vector<double> w(32);
    for (auto& v : x) v = rng.cnormal();
    for (auto& v : w) v = 0.5 + rng.uniform();
    double acc = 0.0, l1 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        acc += w[j] * std::abs(x[j]);
        l1 += std::abs(x[j]);
    }
    CHECK(norm_l1w(x, w) == doctest::Approx(acc).epsilon(1e-14));
    CHECK(norm_l1w(x, std::vector<double>(32, 1.0)) == doctest::Approx(l1).epsilon(1e-14));
}

TEST_CASE("inner product consistency") {
    Rng rng(9);
    CVec x(16);
    for (auto& v : x) v = rng.cnormal();
    double n = norm_l2(x);
    CHECK(n * n == doctest::Approx(std::real(dot(x, x))).epsilon(1e-12));
}

TEST_CASE("operator_norm on identity and diagonal maps") {
    Rng rng(1);
    LinOp id{8, 8, [](const CVec& x) { return x; }, [](const CVec& x) { return x; }};
    auto r1 = operator_norm(id, 1e-10, 200, rng);
    CHECK(r1.converged);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-9));

    DenseMatrix D(3, 3);
    D(0, 0) = 1;
    D(1, 1) = 2;
    D(2, 2) = 3;
    auto r2 = operator_norm(D.as_linop(), 1e-12, 2000, rng);
    CHECK(r2.converged);
    CHECK(r2.value == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("operator_norm matches dense eigen oracle on random matrices") {
    Rng rng(11);
    DenseMatrix A(10, 20);
    for (auto& v : A.a) v = rng.cnormal();
    auto est = operator_norm(A.as_linop(), 1e-12, 5000, rng);
    double exact = operator_norm_dense(A);
    CHECK(est.value == doctest::Approx(exact).epsilon(1e-8));

    // adjoint has the same norm
    DenseMatrix At(20, 10);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 20; ++j) At(j, i) = std::conj(A(i, j));
    auto est_adj = operator_norm(At.as_linop(), 1e-12, 5000, rng);
    CHECK(std::abs(est_adj.value - est.value) <= 2e-8 * est.value);
}

TEST_CASE("operator_norm handles the zero map and flags non-convergence") {
    Rng rng(3);
    LinOp zero{4, 4, [](const CVec& x) { return CVec(x.size(), cplx{0, 0}); },
               [](const CVec& x) { return CVec(x.size(), cplx{0, 0}); }};
    auto r = operator_norm(zero, 1e-10, 100, rng);
    CHECK(r.value == 0.0);

    DenseMatrix A(6, 6);
    Rng rng2(5);
    for (auto& v : A.a) v = rng2.cnormal();
    auto tight = operator_norm(A.as_linop(), 1e-14, 1, rng2);  // cannot converge in 1 iter
    CHECK_FALSE(tight.converged);
    CHECK(tight.safe_upper() == doctest::Approx(1.05 * tight.value));
}

TEST_CASE("Rng streams are reproducible and forks are decorrelated") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(123);
    for (int i = 0; i < 1000; ++i) {
        double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(c.uniform_below(17) < 17);
    }
    // normal() has roughly the right first two moments
    Rng d(99);
    double s = 0, s2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double v = d.normal();
        s += v;
        s2 += v * v;
    }
    CHECK(std::abs(s / n) < 0.03);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("hermitian eigenvalues: known small matrices") {
    DenseMatrix H(2, 2);
    H(0, 0) = 2;
    H(1, 1) = 2;
    H(0, 1) = cplx{0, 1};
    H(1, 0) = cplx{0, -1};
    auto ev = hermitian_eigenvalues(H);
    std::sort(ev.begin(), ev.end());
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("ComplexTensor validates shapes") {
    CHECK_THROWS_AS(ComplexTensor({3}), std::invalid_argument);
    CHECK_THROWS_AS(ComplexTensor({4, 4}, std::vector<cplx>(5)), std::invalid_argument);
    ComplexTensor t({2, 4});
    CHECK(t.size() == 8);
    CHECK(t.ndim() == 2);
}
