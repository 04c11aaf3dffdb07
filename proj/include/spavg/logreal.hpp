#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace spavg {

/// Signed real stored as (sign, ln|v|). Products, quotients and powers are
/// exact in the log; sums use log-sum-exp. Used for quantities like
/// exp(T L (1 + S L e^{L S})) that overflow a double long before they stop
/// being meaningful.
class LogReal {
public:
    constexpr LogReal() = default;

    static LogReal from(double v) {
        if (v == 0.0) return LogReal{};
        return LogReal(v > 0 ? 1 : -1, std::log(std::abs(v)));
    }
    static LogReal from_log(double log_abs, int sign = 1) {
        if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity()) return LogReal{};
        return LogReal(sign > 0 ? 1 : -1, log_abs);
    }
    /// e^a
    static LogReal exp(double a) { return from_log(a); }

    [[nodiscard]] int sign() const noexcept { return sign_; }
    [[nodiscard]] bool is_zero() const noexcept { return sign_ == 0; }
    /// ln|v|; -inf for zero.
    [[nodiscard]] double log_abs() const noexcept {
        return sign_ == 0 ? -std::numeric_limits<double>::infinity() : log_;
    }
    /// Plain double; +-inf on overflow, 0 on underflow.
    [[nodiscard]] double value() const noexcept { return sign_ == 0 ? 0.0 : sign_ * std::exp(log_); }

    [[nodiscard]] LogReal pow(double p) const;
    [[nodiscard]] LogReal abs() const noexcept { return from_log(log_abs(), sign_ == 0 ? 0 : 1); }
    [[nodiscard]] LogReal operator-() const noexcept {
        LogReal r = *this;
        r.sign_ = -r.sign_;
        return r;
    }

    friend LogReal operator*(const LogReal& a, const LogReal& b) {
        if (a.sign_ == 0 || b.sign_ == 0) return LogReal{};
        return LogReal(a.sign_ * b.sign_, a.log_ + b.log_);
    }
    friend LogReal operator/(const LogReal& a, const LogReal& b);
    friend LogReal operator+(const LogReal& a, const LogReal& b);
    friend LogReal operator-(const LogReal& a, const LogReal& b) { return a + (-b); }

    friend LogReal operator*(const LogReal& a, double b) { return a * from(b); }
    friend LogReal operator*(double a, const LogReal& b) { return from(a) * b; }
    friend LogReal operator+(const LogReal& a, double b) { return a + from(b); }
    friend LogReal operator+(double a, const LogReal& b) { return from(a) + b; }

    friend bool operator<(const LogReal& a, const LogReal& b);
    friend bool operator<=(const LogReal& a, const LogReal& b) { return !(b < a); }
    friend bool operator>(const LogReal& a, const LogReal& b) { return b < a; }
    friend bool operator>=(const LogReal& a, const LogReal& b) { return !(a < b); }

private:
    LogReal(int sign, double log_abs) : sign_(sign), log_(log_abs) {}

    int sign_ = 0;
    double log_ = 0.0;
};

/// "log|v|" or "-inf" rendered with shortest round-trip formatting.
[[nodiscard]] std::string format_log(const LogReal& v);

}  // namespace spavg
