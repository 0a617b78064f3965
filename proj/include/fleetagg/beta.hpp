#ifndef FLEETAGG_BETA_HPP
#define FLEETAGG_BETA_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fleetagg {

namespace detail {

// Continued fraction for the incomplete beta function, modified Lentz.
template <class Scalar>
Scalar beta_continued_fraction(Scalar x, Scalar a, Scalar b) {
    constexpr int max_iter = 500;
    constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
    constexpr Scalar tiny = std::numeric_limits<Scalar>::min() / eps;
    const Scalar qab = a + b;
    const Scalar qap = a + Scalar(1);
    const Scalar qam = a - Scalar(1);
    Scalar c = 1;
    Scalar d = Scalar(1) - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = Scalar(1) / d;
    Scalar h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const Scalar m2 = Scalar(2 * m);
        Scalar aa = Scalar(m) * (b - Scalar(m)) * x / ((qam + m2) * (a + m2));
        d = Scalar(1) + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = Scalar(1) + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = Scalar(1) / d;
        h *= d * c;
        aa = -(a + Scalar(m)) * (qab + Scalar(m)) * x / ((a + m2) * (qap + m2));
        d = Scalar(1) + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = Scalar(1) + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = Scalar(1) / d;
        const Scalar del = d * c;
        h *= del;
        if (std::abs(del - Scalar(1)) <= Scalar(4) * eps) {
            return h;
        }
    }
    return h;
}

template <class Scalar>
Scalar log_beta_prefactor(Scalar x, Scalar a, Scalar b) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b), the Beta(a, b) CDF.
template <class Scalar>
Scalar beta_cdf(Scalar x, Scalar a, Scalar b) {
    if (!(a > Scalar(0) && b > Scalar(0))) {
        throw std::invalid_argument("beta_cdf: shape parameters must be positive");
    }
    if (std::isnan(x)) {
        throw std::invalid_argument("beta_cdf: NaN input");
    }
    if (x <= Scalar(0)) return Scalar(0);
    if (x >= Scalar(1)) return Scalar(1);
    const Scalar front = std::exp(detail::log_beta_prefactor(x, a, b));
    if (x < (a + Scalar(1)) / (a + b + Scalar(2))) {
        return front * detail::beta_continued_fraction(x, a, b) / a;
    }
    return Scalar(1) - front * detail::beta_continued_fraction(Scalar(1) - x, b, a) / b;
}

/// Beta(a, b) density.
template <class Scalar>
Scalar beta_pdf(Scalar x, Scalar a, Scalar b) {
    if (x <= Scalar(0) || x >= Scalar(1)) return Scalar(0);
    return std::exp(detail::log_beta_prefactor(x, a, b)) / (x * (Scalar(1) - x));
}

/// Inverse of beta_cdf: safeguarded Newton iteration inside a shrinking
/// bisection bracket.
template <class Scalar>
Scalar beta_quantile(Scalar p, Scalar a, Scalar b) {
    if (!(p >= Scalar(0) && p <= Scalar(1))) {
        throw std::invalid_argument("beta_quantile: probability outside [0,1]");
    }
    if (p == Scalar(0)) return Scalar(0);
    if (p == Scalar(1)) return Scalar(1);
    Scalar lo = 0;
    Scalar hi = 1;
    Scalar x = a / (a + b);
    for (int iter = 0; iter < 200; ++iter) {
        const Scalar f = beta_cdf(x, a, b) - p;
        if (f == Scalar(0)) return x;
        (f < Scalar(0) ? lo : hi) = x;
        const Scalar dens = beta_pdf(x, a, b);
        Scalar next = dens > Scalar(0) ? x - f / dens : Scalar(-1);
        if (!(next > lo && next < hi)) {
            next = Scalar(0.5) * (lo + hi);
        }
        if (std::abs(next - x) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * std::max(x, Scalar(1e-300)) ||
            hi - lo <= std::numeric_limits<Scalar>::epsilon()) {
            return next;
        }
        x = next;
    }
    return x;
}

}  // namespace fleetagg

#endif  // FLEETAGG_BETA_HPP
