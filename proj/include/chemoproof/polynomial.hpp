// Real polynomials with interval coefficients, and their action on sequences.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chemoproof/enclosure.hpp"
#include "chemoproof/seqspace.hpp"

namespace chemoproof {

struct Polynomial {
    std::vector<Enclosure> c;  // c[k] multiplies x^k

    Polynomial() = default;
    explicit Polynomial(std::vector<Enclosure> coeffs);
    static Polynomial constant(Enclosure a) { return Polynomial({a}); }
    static Polynomial from_doubles(const std::vector<double>& coeffs);

    // "1 + x^9", "2 - 0.5*x + x^3", "1, 0, 2" (coefficient list, x^0 first),
    // or "[1, 0, 2]". Throws std::invalid_argument with a diagnostic.
    static Polynomial parse(std::string_view text);

    // Degree after dropping exactly-zero leading coefficients; -1 for 0.
    [[nodiscard]] int degree() const;
    [[nodiscard]] bool is_zero() const { return degree() < 0; }
    [[nodiscard]] Polynomial derivative() const;

    [[nodiscard]] Enclosure operator()(const Enclosure& x) const;
    [[nodiscard]] double eval(double x) const;
    // |P|(r) = sum |c_k| r^k, an upper bound for r >= 0.
    [[nodiscard]] double abs_eval_up(double r) const;
    // |P'|(r) = sum k |c_k| r^(k-1).
    [[nodiscard]] double abs_derivative_up(double r) const;

    [[nodiscard]] std::string to_string() const;
};

Polynomial operator+(const Polynomial& p, const Polynomial& q);
Polynomial operator-(const Polynomial& p, const Polynomial& q);
Polynomial operator*(const Polynomial& p, const Polynomial& q);
Polynomial operator*(const Enclosure& a, const Polynomial& p);

// P(v) in the convolution algebra, exactly (no truncation): the result has
// degree deg(P) * deg(v).
GeoSeq apply(const Polynomial& p, const GeoSeq& v);

}  // namespace chemoproof
