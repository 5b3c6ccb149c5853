// Outward-rounded interval arithmetic over IEEE doubles.
//
// Every operation returns an interval containing the exact real result for
// any choice of members of its operands. Rounding is realized without touching
// the FPU rounding mode: results are computed in round-to-nearest, the exact
// rounding error is recovered with error-free transformations (TwoSum, FMA),
// and the endpoint is moved one float outward only when the result was inexact
// in the wrong direction. Exactly representable results stay exact.
//
// exp wraps the C library exponential (glibc documents < 1 ulp error) and pads
// one ulp outward on each side.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chemoproof {

class EnclosureError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace rounding {

double next_up(double x) noexcept;
double next_down(double x) noexcept;

double add_down(double a, double b) noexcept;
double add_up(double a, double b) noexcept;
double sub_down(double a, double b) noexcept;
double sub_up(double a, double b) noexcept;
double mul_down(double a, double b) noexcept;
double mul_up(double a, double b) noexcept;
double div_down(double a, double b) noexcept;
double div_up(double a, double b) noexcept;
double sqrt_down(double a) noexcept;
double sqrt_up(double a) noexcept;

}  // namespace rounding

struct Enclosure {
    double lo = 0.0;
    double hi = 0.0;

    constexpr Enclosure() = default;
    // A double converts to the degenerate interval [x, x].
    constexpr Enclosure(double x) : lo(x), hi(x) {}  // NOLINT(google-explicit-constructor)
    // Throws EnclosureError unless lo <= hi (NaN endpoints are rejected too).
    Enclosure(double lo_, double hi_);

    static Enclosure entire();

    [[nodiscard]] double mid() const noexcept;
    // Upper bound on max(mid - lo, hi - mid).
    [[nodiscard]] double rad() const noexcept;
    [[nodiscard]] double width() const noexcept { return rounding::sub_up(hi, lo); }
    [[nodiscard]] bool is_point() const noexcept { return lo == hi; }
    [[nodiscard]] bool is_finite() const noexcept;
    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    [[nodiscard]] bool contains(const Enclosure& x) const noexcept { return lo <= x.lo && x.hi <= hi; }
    [[nodiscard]] bool contains_zero() const noexcept { return lo <= 0.0 && 0.0 <= hi; }

    Enclosure& operator+=(const Enclosure& y);
    Enclosure& operator-=(const Enclosure& y);
    Enclosure& operator*=(const Enclosure& y);
    Enclosure& operator/=(const Enclosure& y);

    friend bool operator==(const Enclosure&, const Enclosure&) = default;
};

Enclosure operator-(const Enclosure& x) noexcept;
Enclosure operator+(const Enclosure& x, const Enclosure& y) noexcept;
Enclosure operator-(const Enclosure& x, const Enclosure& y) noexcept;
Enclosure operator*(const Enclosure& x, const Enclosure& y) noexcept;
// Throws EnclosureError when y contains zero.
Enclosure operator/(const Enclosure& x, const Enclosure& y);

// Throws EnclosureError when x.lo < 0. Tolerance for slightly negative lower
// endpoints is zero: a radicand must be proven nonnegative.
Enclosure sqrt(const Enclosure& x);
Enclosure exp(const Enclosure& x) noexcept;
Enclosure abs(const Enclosure& x) noexcept;
Enclosure pow(const Enclosure& x, int n);
Enclosure min(const Enclosure& x, const Enclosure& y) noexcept;
Enclosure max(const Enclosure& x, const Enclosure& y) noexcept;
Enclosure hull(const Enclosure& x, const Enclosure& y) noexcept;
std::optional<Enclosure> intersect(const Enclosure& x, const Enclosure& y) noexcept;

// Upper bound of |xi| over xi in x.
double sup_abs(const Enclosure& x) noexcept;
// Lower bound of |xi| over xi in x (the mignitude).
double inf_abs(const Enclosure& x) noexcept;

// Certified enclosure of pi.
Enclosure pi();

// Dot products via midpoint-radius splitting with an a priori bound on the
// floating-point summation error. Much faster than per-element interval
// operations for long vectors; the enclosure is slightly wider.
Enclosure dot(std::span<const double> a, std::span<const double> xmid, std::span<const double> xrad);
Enclosure dot(std::span<const double> amid, std::span<const double> arad,
              std::span<const double> bmid, std::span<const double> brad);
Enclosure dot(std::span<const Enclosure> x, std::span<const Enclosure> y);
Enclosure sum(std::span<const Enclosure> x);

// Encloses an exact dot product of `terms` products from its floating-point
// evaluation in any order: s = computed sum, t = computed sum of |products|,
// r = computed bound of the contribution of the input radii.
Enclosure midrad_enclosure(double s, double t, double r, std::size_t terms);

// Splits intervals into midpoints and rigorous radii. Returns false when an
// endpoint is infinite (the split is then unusable).
bool split_midrad(std::span<const Enclosure> x, std::vector<double>& mid, std::vector<double>& rad);

// Hexadecimal float text ("%a"), lowercase; round trips bit-exactly.
std::string to_hex(double x);
double parse_hex(std::string_view text);

}  // namespace chemoproof
