#include "chemoproof/enclosure.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace chemoproof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMax = DBL_MAX;
constexpr double kEta = std::numeric_limits<double>::denorm_min();
// Below this magnitude an FMA residual may itself be rounded, so the sign
// test is not trusted and the endpoint is widened unconditionally.
constexpr double kTiny = 0x1p-960;

}  // namespace

namespace rounding {

double next_up(double x) noexcept {
    if (std::isnan(x) || x == kInf) return x;
    if (x == 0.0) return kEta;
    auto bits = std::bit_cast<std::uint64_t>(x);
    bits = x > 0.0 ? bits + 1 : bits - 1;
    return std::bit_cast<double>(bits);
}

double next_down(double x) noexcept { return -next_up(-x); }

double add_down(double a, double b) noexcept {
    const double s = a + b;
    if (!std::isfinite(s)) {
        if (s == kInf && std::isfinite(a) && std::isfinite(b)) return kMax;
        return s;
    }
    const double bp = s - a;
    const double ap = s - bp;
    const double err = (a - ap) + (b - bp);
    if (std::isnan(err)) return next_down(s);
    return err < 0.0 ? next_down(s) : s;
}

double add_up(double a, double b) noexcept { return -add_down(-a, -b); }
double sub_down(double a, double b) noexcept { return add_down(a, -b); }
double sub_up(double a, double b) noexcept { return add_up(a, -b); }

double mul_down(double a, double b) noexcept {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) {
        if (p == kInf && std::isfinite(a) && std::isfinite(b)) return kMax;
        return p;
    }
    if (std::fabs(p) < kTiny) return next_down(p);
    const double e = std::fma(a, b, -p);
    return e < 0.0 ? next_down(p) : p;
}

double mul_up(double a, double b) noexcept { return -mul_down(-a, b); }

double div_down(double a, double b) noexcept {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q)) {
        if (q == kInf && std::isfinite(a)) return kMax;
        return q;
    }
    if (std::isinf(b)) return q == 0.0 && std::signbit(q) ? -kEta : q;
    if (std::fabs(q) < kTiny || std::fabs(a) < 0x1p-900) return next_down(q);
    const double r = std::fma(-q, b, a);
    const bool below = r != 0.0 && ((r < 0.0) != (b < 0.0));
    return below ? next_down(q) : q;
}

double div_up(double a, double b) noexcept { return -div_down(-a, b); }

double sqrt_down(double a) noexcept {
    const double s = std::sqrt(a);
    if (a == 0.0 || std::isinf(a)) return s;
    if (a < 0x1p-900) return std::max(0.0, next_down(s));
    const double r = std::fma(-s, s, a);
    return r < 0.0 ? next_down(s) : s;
}

double sqrt_up(double a) noexcept {
    const double s = std::sqrt(a);
    if (a == 0.0 || std::isinf(a)) return s;
    if (a < 0x1p-900) return next_up(s);
    const double r = std::fma(-s, s, a);
    return r > 0.0 ? next_up(s) : s;
}

}  // namespace rounding

using namespace rounding;

Enclosure::Enclosure(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo_ <= hi_)) {
        throw EnclosureError("invalid enclosure [" + to_hex(lo_) + ", " + to_hex(hi_) + "]");
    }
}

Enclosure Enclosure::entire() { return {-kInf, kInf}; }

double Enclosure::mid() const noexcept {
    if (lo == -kInf && hi == kInf) return 0.0;
    if (lo == -kInf) return -kMax;
    if (hi == kInf) return kMax;
    const double m = 0.5 * lo + 0.5 * hi;
    return std::clamp(m, lo, hi);
}

double Enclosure::rad() const noexcept {
    const double m = mid();
    return std::max(sub_up(m, lo), sub_up(hi, m));
}

bool Enclosure::is_finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

Enclosure& Enclosure::operator+=(const Enclosure& y) { return *this = *this + y; }
Enclosure& Enclosure::operator-=(const Enclosure& y) { return *this = *this - y; }
Enclosure& Enclosure::operator*=(const Enclosure& y) { return *this = *this * y; }
Enclosure& Enclosure::operator/=(const Enclosure& y) { return *this = *this / y; }

Enclosure operator-(const Enclosure& x) noexcept {
    Enclosure r;
    r.lo = -x.hi;
    r.hi = -x.lo;
    return r;
}

Enclosure operator+(const Enclosure& x, const Enclosure& y) noexcept {
    Enclosure r;
    r.lo = add_down(x.lo, y.lo);
    r.hi = add_up(x.hi, y.hi);
    return r;
}

Enclosure operator-(const Enclosure& x, const Enclosure& y) noexcept {
    Enclosure r;
    r.lo = sub_down(x.lo, y.hi);
    r.hi = sub_up(x.hi, y.lo);
    return r;
}

Enclosure operator*(const Enclosure& x, const Enclosure& y) noexcept {
    Enclosure r;
    if (x.lo >= 0.0 && y.lo >= 0.0) {
        r.lo = mul_down(x.lo, y.lo);
        r.hi = mul_up(x.hi, y.hi);
        return r;
    }
    r.lo = std::min({mul_down(x.lo, y.lo), mul_down(x.lo, y.hi), mul_down(x.hi, y.lo), mul_down(x.hi, y.hi)});
    r.hi = std::max({mul_up(x.lo, y.lo), mul_up(x.lo, y.hi), mul_up(x.hi, y.lo), mul_up(x.hi, y.hi)});
    return r;
}

Enclosure operator/(const Enclosure& x, const Enclosure& y) {
    if (y.contains_zero()) {
        throw EnclosureError("division by an enclosure containing zero [" + to_hex(y.lo) + ", " + to_hex(y.hi) + "]");
    }
    Enclosure r;
    r.lo = std::min({div_down(x.lo, y.lo), div_down(x.lo, y.hi), div_down(x.hi, y.lo), div_down(x.hi, y.hi)});
    r.hi = std::max({div_up(x.lo, y.lo), div_up(x.lo, y.hi), div_up(x.hi, y.lo), div_up(x.hi, y.hi)});
    return r;
}

Enclosure sqrt(const Enclosure& x) {
    if (x.lo < 0.0) {
        throw EnclosureError("sqrt of an enclosure with negative part [" + to_hex(x.lo) + ", " + to_hex(x.hi) + "]");
    }
    Enclosure r;
    r.lo = sqrt_down(x.lo);
    r.hi = sqrt_up(x.hi);
    return r;
}

namespace {

double exp_down(double x) noexcept {
    if (x == 0.0) return 1.0;
    const double e = std::exp(x);
    if (e == kInf) return kMax;
    return std::max(0.0, next_down(e));
}

double exp_up(double x) noexcept {
    if (x == 0.0) return 1.0;
    return next_up(std::exp(x));
}

double pow_down_nonneg(double base, unsigned n) noexcept {
    double result = 1.0;
    while (n > 0) {
        if (n & 1U) result = mul_down(result, base);
        n >>= 1U;
        if (n > 0) base = mul_down(base, base);
    }
    return result;
}

double pow_up_nonneg(double base, unsigned n) noexcept {
    double result = 1.0;
    while (n > 0) {
        if (n & 1U) result = mul_up(result, base);
        n >>= 1U;
        if (n > 0) base = mul_up(base, base);
    }
    return result;
}

}  // namespace

Enclosure exp(const Enclosure& x) noexcept {
    Enclosure r;
    r.lo = exp_down(x.lo);
    r.hi = exp_up(x.hi);
    return r;
}

Enclosure abs(const Enclosure& x) noexcept {
    if (x.lo >= 0.0) return x;
    if (x.hi <= 0.0) return -x;
    Enclosure r;
    r.lo = 0.0;
    r.hi = std::max(-x.lo, x.hi);
    return r;
}

Enclosure pow(const Enclosure& x, int n) {
    if (n == 0) return Enclosure(1.0);
    if (n < 0) return Enclosure(1.0) / pow(x, -n);
    const auto un = static_cast<unsigned>(n);
    Enclosure r;
    if (un % 2 == 0) {
        r.lo = pow_down_nonneg(inf_abs(x), un);
        r.hi = pow_up_nonneg(sup_abs(x), un);
        return r;
    }
    r.lo = x.lo >= 0.0 ? pow_down_nonneg(x.lo, un) : -pow_up_nonneg(-x.lo, un);
    r.hi = x.hi >= 0.0 ? pow_up_nonneg(x.hi, un) : -pow_down_nonneg(-x.hi, un);
    return r;
}

Enclosure min(const Enclosure& x, const Enclosure& y) noexcept {
    Enclosure r;
    r.lo = std::min(x.lo, y.lo);
    r.hi = std::min(x.hi, y.hi);
    return r;
}

Enclosure max(const Enclosure& x, const Enclosure& y) noexcept {
    Enclosure r;
    r.lo = std::max(x.lo, y.lo);
    r.hi = std::max(x.hi, y.hi);
    return r;
}

Enclosure hull(const Enclosure& x, const Enclosure& y) noexcept {
    Enclosure r;
    r.lo = std::min(x.lo, y.lo);
    r.hi = std::max(x.hi, y.hi);
    return r;
}

std::optional<Enclosure> intersect(const Enclosure& x, const Enclosure& y) noexcept {
    const double lo = std::max(x.lo, y.lo);
    const double hi = std::min(x.hi, y.hi);
    if (lo > hi) return std::nullopt;
    Enclosure r;
    r.lo = lo;
    r.hi = hi;
    return r;
}

double sup_abs(const Enclosure& x) noexcept { return std::max(std::fabs(x.lo), std::fabs(x.hi)); }

double inf_abs(const Enclosure& x) noexcept {
    if (x.lo > 0.0) return x.lo;
    if (x.hi < 0.0) return -x.hi;
    return 0.0;
}

Enclosure pi() { return {0x1.921fb54442d18p+1, 0x1.921fb54442d19p+1}; }

namespace {

// Bound for gamma_n * (1 + gamma_n) with some headroom, gamma_n = n u / (1 - n u).
double summation_gamma(std::size_t terms) noexcept {
    return static_cast<double>(terms + 2) * 0x1p-52;
}

Enclosure finish_midrad(double s, double t, double r, std::size_t terms) {
    const double g = summation_gamma(terms);
    double err = add_up(mul_up(g, t), mul_up(r, add_up(1.0, g)));
    err = add_up(err, mul_up(static_cast<double>(4 * terms), kEta));
    Enclosure out;
    out.lo = sub_down(s, err);
    out.hi = add_up(s, err);
    return out;
}

Enclosure from_midrad(double m, double r) noexcept {
    Enclosure e;
    e.lo = sub_down(m, r);
    e.hi = add_up(m, r);
    return e;
}

}  // namespace

Enclosure dot(std::span<const double> a, std::span<const double> xmid, std::span<const double> xrad) {
    const std::size_t n = a.size();
    double s = 0.0;
    double t = 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = a[i] * xmid[i];
        s += p;
        t += std::fabs(p);
        r += std::fabs(a[i]) * xrad[i];
    }
    if (std::isfinite(s) && std::isfinite(t) && std::isfinite(r)) return finish_midrad(s, t, r, n);
    Enclosure acc(0.0);
    for (std::size_t i = 0; i < n; ++i) acc += Enclosure(a[i]) * from_midrad(xmid[i], xrad[i]);
    return acc;
}

Enclosure dot(std::span<const double> amid, std::span<const double> arad,
              std::span<const double> bmid, std::span<const double> brad) {
    const std::size_t n = amid.size();
    double s = 0.0;
    double t = 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = amid[i] * bmid[i];
        s += p;
        t += std::fabs(p);
        r += std::fabs(amid[i]) * brad[i] + arad[i] * (std::fabs(bmid[i]) + brad[i]);
    }
    if (std::isfinite(s) && std::isfinite(t) && std::isfinite(r)) return finish_midrad(s, t, r, n + 3);
    Enclosure acc(0.0);
    for (std::size_t i = 0; i < n; ++i) acc += from_midrad(amid[i], arad[i]) * from_midrad(bmid[i], brad[i]);
    return acc;
}

Enclosure dot(std::span<const Enclosure> x, std::span<const Enclosure> y) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
    std::vector<double> xm, xr, ym, yr;
    if (!split_midrad(x, xm, xr) || !split_midrad(y, ym, yr)) {
        Enclosure acc(0.0);
        for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
        return acc;
    }
    return dot(xm, xr, ym, yr);
}

Enclosure midrad_enclosure(double s, double t, double r, std::size_t terms) {
    if (!(std::isfinite(s) && std::isfinite(t) && std::isfinite(r))) return Enclosure::entire();
    return finish_midrad(s, t, r, terms + 3);
}

Enclosure sum(std::span<const Enclosure> x) {
    Enclosure acc(0.0);
    for (const auto& e : x) acc += e;
    return acc;
}

bool split_midrad(std::span<const Enclosure> x, std::vector<double>& mid, std::vector<double>& rad) {
    mid.resize(x.size());
    rad.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i].is_finite()) return false;
        mid[i] = x[i].mid();
        rad[i] = x[i].rad();
    }
    return true;
}

std::string to_hex(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

double parse_hex(std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw std::invalid_argument("not a float literal: '" + s + "'");
    return v;
}

}  // namespace chemoproof
