#pragma once

#include <cmath>
#include <stdexcept>

// Pointwise truncation/regularization operators and the scalar analytical
// bounds (truncation comparison inequality, discrete Gronwall estimate)
// that the time scheme and its diagnostics rely on. All functions here are
// pure and thread-safe.

namespace chns {

/// Lower truncation: clamps x from below at alpha.
inline double t_alpha(double x, double alpha) {
    return x <= alpha ? alpha : x;
}

/// Lower-upper truncation: clamps x to [0, m].
inline double t0m(double x, double m) {
    if (x <= 0.0) return 0.0;
    if (x >= m) return m;
    return x;
}

/// Regularized power x^s/s, linearized above m so that the result is C^1.
///   x <= 0      -> 0
///   0 <= x <= m -> x^s / s
///   x >= m      -> m x^{s-1}/(s-1) - m^s/(s(s-1))
inline double g0m(double x, double m, double s) {
    if (x <= 0.0) return 0.0;
    if (x <= m) return std::pow(x, s) / s;
    return m * std::pow(x, s - 1.0) / (s - 1.0) -
           std::pow(m, s) / (s * (s - 1.0));
}

/// Derivative of g0m: T_0^m(x) x^{s-2} for x > 0, continuously extended by
/// 0 at x <= 0 (for s < 2 the one-sided limit is x^{s-1} -> 0).
inline double g0m_prime(double x, double m, double s) {
    if (x <= 0.0) return 0.0;
    if (x <= m) return std::pow(x, s - 1.0);
    return m * std::pow(x, s - 2.0);
}

/// Truncation comparison inequality: x^{s-q} T_0^m(x)^q <= s G_0^m(x).
/// Exact inequality; the slack only absorbs IEEE rounding of the two
/// closed forms (scaled by magnitude, since both sides can reach ~1e10).
inline bool comparison_holds(double x, double s, double q, double m) {
    if (x <= 0.0) return true;  // both sides vanish
    const double lhs = std::pow(x, s - q) * std::pow(t0m(x, m), q);
    const double rhs = s * g0m(x, m, s);
    const double slack = 1e-12 * std::max({1.0, lhs, rhs});
    return lhs <= rhs + slack;
}

/// Closed-form bound of the discrete Gronwall lemma: any nonnegative
/// sequence with delta_t a^n + lambda a^n <= C satisfies
///   a^n <= (1+lambda k)^{-n} a0 + (C/lambda)(1 - (1+lambda k)^{-n}).
inline double gronwall_bound(double a0, double lambda, double c, double k,
                             long n) {
    const double decay = std::pow(1.0 + lambda * k, -static_cast<double>(n));
    return decay * a0 + (c / lambda) * (1.0 - decay);
}

/// Scalar parameters of the truncated scheme. The alpha smallness
/// conditions (alpha < 1 and alpha < 2/s) are enforced here because the
/// scheme's bounds are only guaranteed in that regime.
struct TruncParams {
    double alpha;  ///< lower truncation level for z
    double m;      ///< upper truncation level for n
    double s;      ///< consumption exponent

    TruncParams(double alpha_, double m_, double s_)
        : alpha(alpha_), m(m_), s(s_) {
        if (!(s > 1.0))
            throw std::invalid_argument("TruncParams: s must be > 1");
        if (!(m > 0.0))
            throw std::invalid_argument("TruncParams: m must be > 0");
        if (!(alpha > 0.0))
            throw std::invalid_argument("TruncParams: alpha must be > 0");
        if (!(alpha < std::min(1.0, 2.0 / s)))
            throw std::invalid_argument(
                "TruncParams: alpha must be < min(1, 2/s)");
    }

    /// Default truncation level used when the configuration leaves alpha
    /// unset: one tenth of the admissible range.
    static double default_alpha(double s) {
        return 0.1 * std::min(1.0, 2.0 / s);
    }
};

}  // namespace chns
