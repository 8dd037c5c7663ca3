#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "opsys/complex_matrix.hpp"
#include "opsys/eig.hpp"

namespace opsys {

/// Seeded random stream. Gaussian sampling is hand-rolled (Box-Muller over the
/// raw 64-bit stream) so that identical seeds give identical draws on every
/// platform; std::normal_distribution leaves the algorithm unspecified.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent per-trial stream derived from (seed, index) by splitmix64 mixing.
    static Rng derive(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return Rng(z);
    }

    double uniform01() {
        // 53-bit mantissa in (0,1]
        return ((gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    cplx gaussian_complex() { return cplx(gaussian(), gaussian()); }

    std::uint64_t bits() { return gen_(); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols) {
        ComplexMatrix g(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) g(i, j) = gaussian_complex();
        return g;
    }

    /// G + G* with i.i.d. standard normal complex entries.
    HermitianMatrix random_hermitian(std::size_t dim) {
        auto g = gaussian_matrix(dim, dim);
        return HermitianMatrix(g + g.adjoint());
    }

    /// G G*, positive semidefinite by construction.
    HermitianMatrix random_psd(std::size_t dim) {
        auto g = gaussian_matrix(dim, dim);
        return HermitianMatrix(g * g.adjoint());
    }

    /// Haar-ish random isometry V in M_{p,k}, V*V = I_k (requires k <= p):
    /// modified Gram-Schmidt on a Gaussian matrix.
    ComplexMatrix random_isometry(std::size_t p, std::size_t k) {
        if (k > p) throw input_error("random_isometry: k must not exceed p");
        ComplexMatrix g = gaussian_matrix(p, k);
        for (std::size_t j = 0; j < k; ++j) {
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t l = 0; l < j; ++l) {
                    cplx ip = 0.0;
                    for (std::size_t i = 0; i < p; ++i) ip += std::conj(g(i, l)) * g(i, j);
                    for (std::size_t i = 0; i < p; ++i) g(i, j) -= ip * g(i, l);
                }
            }
            double nn = 0.0;
            for (std::size_t i = 0; i < p; ++i) nn += std::norm(g(i, j));
            nn = std::sqrt(nn);
            if (nn < 1e-12) throw internal_error("random_isometry: degenerate draw");
            for (std::size_t i = 0; i < p; ++i) g(i, j) /= nn;
        }
        return g;
    }

    ComplexMatrix random_unitary(std::size_t n) { return random_isometry(n, n); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace opsys
