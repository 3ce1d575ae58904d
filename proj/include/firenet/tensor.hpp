#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace firenet {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
    if (!is_pow2(n)) throw std::invalid_argument("log2_exact: not a power of two");
    int r = 0;
    while ((std::size_t{1} << r) < n) ++r;
    return r;
}

/// Dense d-dimensional complex array (d in {1,2} throughout this project),
/// flat data in row-major order. Every side length is a power of two.
struct ComplexTensor {
    std::vector<std::size_t> dims;
    std::vector<cplx> data;

    ComplexTensor() = default;

    explicit ComplexTensor(std::vector<std::size_t> d)
        : dims(std::move(d)), data(checked_size(dims), cplx{0.0, 0.0}) {}

    ComplexTensor(std::vector<std::size_t> d, std::vector<cplx> v)
        : dims(std::move(d)), data(std::move(v)) {
        if (checked_size(dims) != data.size())
            throw std::invalid_argument("ComplexTensor: dims/data size mismatch");
    }

    static ComplexTensor vec(std::vector<cplx> v) {
        std::size_t n = v.size();
        if (!is_pow2(n)) throw std::invalid_argument("ComplexTensor::vec: length not a power of two");
        return ComplexTensor({n}, std::move(v));
    }

    std::size_t size() const { return data.size(); }
    std::size_t ndim() const { return dims.size(); }

    cplx& operator[](std::size_t i) { return data[i]; }
    const cplx& operator[](std::size_t i) const { return data[i]; }

private:
    static std::size_t checked_size(const std::vector<std::size_t>& d) {
        if (d.empty()) throw std::invalid_argument("ComplexTensor: empty dims");
        std::size_t n = 1;
        for (auto s : d) {
            if (!is_pow2(s)) throw std::invalid_argument("ComplexTensor: dim not a power of two");
            n *= s;
        }
        return n;
    }
};

/// Deterministic PRNG used everywhere randomness is needed. The stream is the
/// raw mt19937_64 output (fully specified by the standard), and every
/// derived draw below is computed from that stream without touching
/// platform-dependent std distributions, so identical seeds give identical
/// results on all platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in {0,...,n-1} via masked rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below(0)");
        std::uint64_t mask = ~std::uint64_t{0};
        std::uint64_t limit = n - 1;
        int bits = 0;
        while ((limit >> bits) != 0) ++bits;
        mask = (bits >= 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
        std::uint64_t v;
        do {
            v = gen_() & mask;
        } while (v >= n);
        return v;
    }

    /// Standard normal, Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cplx cnormal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }

    Rng fork(std::uint64_t stream) {
        // child seeded from the parent stream, decorrelated by a fixed odd constant
        return Rng(next_u64() ^ (stream * 0x9E3779B97F4A7C15ULL));
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace firenet
