#ifndef FLEETAGG_GAUSSIAN_HPP
#define FLEETAGG_GAUSSIAN_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fleetagg/random.hpp"

namespace fleetagg {

/// Standard normal CDF through erfc. Each half-line is evaluated from its
/// own tail, so Phi(-z) and 1 - Phi(z) agree to one rounding.
template <class Scalar>
Scalar std_normal_cdf(Scalar z) {
    if (std::isnan(z)) {
        throw std::invalid_argument("std_normal_cdf: NaN input");
    }
    constexpr Scalar inv_sqrt2 = Scalar(0.70710678118654752440084436210484903928);
    if (z < Scalar(0)) {
        return Scalar(0.5) * std::erfc(-z * inv_sqrt2);
    }
    return Scalar(1) - Scalar(0.5) * std::erfc(z * inv_sqrt2);
}

namespace detail {

// Lower-tail normal quantile for 0 < p <= 0.5. Acklam's rational
// approximation (relative error ~1e-9) followed by one Halley step on
// erfc, which brings the error down to a few ulps.
template <class Scalar>
Scalar lower_normal_quantile(Scalar p) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                             6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                             3.754408661907416e+00};
    constexpr Scalar p_low = Scalar(0.02425);

    Scalar x;
    if (p < p_low) {
        const Scalar q = std::sqrt(Scalar(-2) * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + Scalar(1));
    } else {
        const Scalar q = p - Scalar(0.5);
        const Scalar r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + Scalar(1));
    }

    constexpr Scalar inv_sqrt2 = Scalar(0.70710678118654752440084436210484903928);
    constexpr Scalar sqrt_2pi = Scalar(2.50662827463100050241576528481104525);
    const Scalar e = Scalar(0.5) * std::erfc(-x * inv_sqrt2) - p;
    const Scalar u = e * sqrt_2pi * std::exp(x * x / Scalar(2));
    return x - u / (Scalar(1) + x * u / Scalar(2));
}

}  // namespace detail

/// Inverse standard normal CDF on the open interval (0,1).
template <class Scalar>
Scalar std_normal_inv(Scalar u) {
    if (!(u > Scalar(0) && u < Scalar(1))) {
        throw std::domain_error("std_normal_inv: probability must lie strictly inside (0,1)");
    }
    if (u == Scalar(0.5)) {
        return Scalar(0);
    }
    if (u < Scalar(0.5)) {
        return detail::lower_normal_quantile(u);
    }
    return -detail::lower_normal_quantile(Scalar(1) - u);
}

/// Lower Cholesky factor L with L * L^T = m + jitter * I.
template <class Scalar>
struct CholeskyFactor {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Eigen::Index dim = 0;
    Matrix lower;
    Scalar jitter_used = 0;

    static CholeskyFactor identity(Eigen::Index n) { return {n, Matrix::Identity(n, n), Scalar(0)}; }
};

/// Cholesky factorization with a diagonal jitter ladder 0, 1e-10, 1e-8, 1e-6,
/// 1e-4. The first rung that factors is kept and reported in jitter_used.
template <class Derived>
CholeskyFactor<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    using Matrix = typename CholeskyFactor<Scalar>::Matrix;
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument("cholesky: matrix must be square and non-empty");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("cholesky: matrix has non-finite entries");
    }
    const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
        throw std::invalid_argument("cholesky: matrix is not symmetric");
    }

    constexpr std::array<double, 5> ladder{0.0, 1e-10, 1e-8, 1e-6, 1e-4};
    const Eigen::Index n = m.rows();
    for (double jitter : ladder) {
        Matrix shifted = m;
        shifted.diagonal().array() += Scalar(jitter);
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() != Eigen::Success) {
            continue;
        }
        Matrix lower = llt.matrixL();
        if ((lower.diagonal().array() > Scalar(0)).all()) {
            return {n, std::move(lower), Scalar(jitter)};
        }
    }
    throw std::runtime_error("cholesky: matrix not PSD-repairable");
}

/// Fills an n x s_count matrix with i.i.d. standard normals, column by column.
template <class Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> standard_normal_matrix(Eigen::Index n, Eigen::Index s_count,
                                                                              std::uint64_t seed) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(n, s_count);
    NormalSampler normal(seed);
    for (Eigen::Index s = 0; s < s_count; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) {
            g(i, s) = Scalar(normal());
        }
    }
    return g;
}

/// N x S draws from MVN(0, L L^T): Z = L G with G standard normal.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sample_mvn(const CholeskyFactor<Scalar>& factor,
                                                                  Eigen::Index s_count, std::uint64_t seed) {
    if (s_count < 1) {
        throw std::invalid_argument("sample_mvn: s_count must be at least 1");
    }
    auto g = standard_normal_matrix<Scalar>(factor.dim, s_count, seed);
    return factor.lower.template triangularView<Eigen::Lower>() * g;
}

}  // namespace fleetagg

#endif  // FLEETAGG_GAUSSIAN_HPP
