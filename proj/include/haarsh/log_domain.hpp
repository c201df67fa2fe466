#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace haarsh {

/// Signed scalar kept in base-2 log domain: value = sign * 2^log2_abs.
/// Quantities like a_n, delta_j, beta_j drop far below the smallest
/// positive double (2^-1074) at realistic truncation generations, so all
/// magnitude bookkeeping happens here and conversion to double is explicit.
struct LogMagnitude {
    double log2_abs = -std::numeric_limits<double>::infinity();
    int sign = 0;

    LogMagnitude() = default;
    LogMagnitude(double l2, int s) : log2_abs(l2), sign(s) {
        if (s == 0) log2_abs = -std::numeric_limits<double>::infinity();
    }

    static LogMagnitude zero() { return {}; }

    static LogMagnitude pow2(double exponent) { return {exponent, +1}; }

    static LogMagnitude from_double(double v) {
        if (v == 0.0) return zero();
        if (!std::isfinite(v)) throw std::invalid_argument("LogMagnitude: non-finite input");
        return {std::log2(std::fabs(v)), v > 0 ? +1 : -1};
    }

    bool is_zero() const { return sign == 0; }

    /// May underflow to 0 or overflow to +-inf; that is the caller's problem.
    double to_double() const {
        if (sign == 0) return 0.0;
        return sign * std::exp2(log2_abs);
    }

    LogMagnitude operator*(const LogMagnitude& o) const {
        if (sign == 0 || o.sign == 0) return zero();
        return {log2_abs + o.log2_abs, sign * o.sign};
    }

    LogMagnitude operator/(const LogMagnitude& o) const {
        if (o.sign == 0) throw std::domain_error("LogMagnitude: division by zero");
        if (sign == 0) return zero();
        return {log2_abs - o.log2_abs, sign * o.sign};
    }

    LogMagnitude abs() const { return {log2_abs, sign == 0 ? 0 : +1}; }

    LogMagnitude negate() const { return {log2_abs, -sign}; }

    /// |*this| < |o|
    bool abs_less(const LogMagnitude& o) const {
        if (o.sign == 0) return false;
        if (sign == 0) return true;
        return log2_abs < o.log2_abs;
    }

    bool less(const LogMagnitude& o) const {
        if (sign != o.sign) return sign < o.sign;
        if (sign == 0) return false;
        return sign > 0 ? log2_abs < o.log2_abs : log2_abs > o.log2_abs;
    }

    /// Log-domain addition. Guarded: exact cancellation of equal magnitudes
    /// with opposite signs yields zero; near-cancellation keeps the log1p
    /// path, which is as accurate as the representation permits.
    LogMagnitude add(const LogMagnitude& o) const {
        if (sign == 0) return o;
        if (o.sign == 0) return *this;
        const LogMagnitude& big = abs_less(o) ? o : *this;
        const LogMagnitude& small = abs_less(o) ? *this : o;
        double diff = small.log2_abs - big.log2_abs;  // <= 0
        if (sign == o.sign) {
            return {big.log2_abs + std::log1p(std::exp2(diff)) / M_LN2, sign};
        }
        if (diff == 0.0) return zero();
        double red = std::log1p(-std::exp2(diff));
        return {big.log2_abs + red / M_LN2, big.sign};
    }
};

}  // namespace haarsh
