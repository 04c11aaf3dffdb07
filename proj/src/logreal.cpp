#include "spavg/logreal.hpp"

#include "spavg/error.hpp"
#include "spavg/numfmt.hpp"

namespace spavg {

LogReal LogReal::pow(double p) const {
    if (sign_ == 0) {
        require(p > 0.0, "LogReal: zero to a non-positive power");
        return LogReal{};
    }
    require(sign_ > 0 || p == std::floor(p), "LogReal: negative base to a fractional power");
    int s = 1;
    if (sign_ < 0 && std::fmod(std::abs(p), 2.0) == 1.0) s = -1;
    return LogReal(s, p * log_);
}

LogReal operator/(const LogReal& a, const LogReal& b) {
    if (b.sign_ == 0) fail(ErrorKind::Numeric, "LogReal: division by zero");
    if (a.sign_ == 0) return LogReal{};
    return LogReal(a.sign_ * b.sign_, a.log_ - b.log_);
}

LogReal operator+(const LogReal& a, const LogReal& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    const bool a_big = a.log_ >= b.log_;
    const LogReal& big = a_big ? a : b;
    const LogReal& small = a_big ? b : a;
    const double d = std::exp(small.log_ - big.log_);  // in (0, 1]
    if (big.sign_ == small.sign_) return LogReal(big.sign_, big.log_ + std::log1p(d));
    if (d == 1.0) return LogReal{};
    return LogReal(big.sign_, big.log_ + std::log1p(-d));
}

bool operator<(const LogReal& a, const LogReal& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
    if (a.sign_ == 0) return false;
    return a.sign_ > 0 ? a.log_ < b.log_ : a.log_ > b.log_;
}

std::string format_log(const LogReal& v) { return fmt_double(v.log_abs()); }

}  // namespace spavg
