// Approximation-with-error calculus in l1_nu.
//
// An ApproxPair (h, d) stands for an unknown element x with ||x - h|| <= d.
// The operations below return pairs with that property for products,
// inverses, quotients, polynomials, the exponential and the motility
// functions gamma built from them.
#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "chemoproof/enclosure.hpp"
#include "chemoproof/polynomial.hpp"
#include "chemoproof/seqspace.hpp"

namespace chemoproof {

// A Neumann-series (or similar) criterion could not be verified.
class CriterionError : public std::runtime_error {
public:
    CriterionError(std::string stage, double value);
    [[nodiscard]] const std::string& stage() const { return stage_; }
    // Upper bound of the quantity that had to be < 1 (NaN when not computed).
    [[nodiscard]] double value() const { return value_; }

private:
    std::string stage_;
    double value_;
};

struct ApproxPair {
    GeoSeq head;
    // Point interval holding the upper-rounded error bound.
    Enclosure delta{0.0};

    static ApproxPair exact(GeoSeq h) { return {std::move(h), Enclosure(0.0)}; }
    [[nodiscard]] double bound() const { return delta.hi; }
};

// Cut the head to `degree`, moving the discarded part into the error.
ApproxPair truncated(const ApproxPair& x, int degree);
// (v - c*1, same error)
ApproxPair shifted(const ApproxPair& v, double c);
ApproxPair scaled(const Enclosure& c, const ApproxPair& x);

// Float-level reciprocal of zhat on >= 4*(target_degree+1) midpoint samples.
// Throws CriterionError("candidate_inverse") when a sample is within 1e-12 of 0.
GeoSeq candidate_inverse(const GeoSeq& zhat, int target_degree);

// ||a*zhat - 1|| + ||a|| delta_z
Enclosure inverse_criterion(const ApproxPair& z, const GeoSeq& a);

ApproxPair approx_inverse(const ApproxPair& z, const GeoSeq& a);
// max_degree >= 0 folds the head back to that degree.
ApproxPair approx_product(const ApproxPair& x, const ApproxPair& y, int max_degree = -1);
ApproxPair approx_quotient(const ApproxPair& x, const ApproxPair& y, const GeoSeq& a);

// P(v) with the exact head P(vhat) and error |P'|(||vhat|| + d_v) d_v.
ApproxPair polynomial_apply(const Polynomial& p, const ApproxPair& v);

// gamma(v) = P(v) / Q(v)
struct Rational {
    Polynomial P;
    Polynomial Q;
};
// gamma(v) = 1 / (1 + exp(alpha (v - shift)))
struct ExpFraction {
    double alpha = 9.0;
    double shift = 1.0;
};
// f(v) = exp(alpha v)
struct ScaledExp {
    double alpha = 1.0;
};
using GammaSpec = std::variant<Rational, ExpFraction, ScaledExp>;

// Human-readable description, e.g. "rational P=1 Q=1 + x^9".
std::string describe(const GammaSpec& g);

// Smallest K <= 60 with |alpha|^K r^K / K! e^{|alpha| r} <= 1e-14 (1 + r);
// throws std::runtime_error when there is none.
int select_taylor_order(double alpha, double r);

// exp(alpha v) from the Taylor polynomial of order K in vhat. Powers are
// kept at working_degree (default 2 deg(vhat)) with the cut-off parts
// folded into the error. The derivative term of the error uses the smaller
// of |alpha| e^{|alpha|(||vhat|| + d)} and (|alpha| ||f(vhat)||) e^{|alpha| d}.
ApproxPair entire_apply(const ScaledExp& f, const ApproxPair& v, int K, int working_degree = -1);

// 1 + exp(alpha (v - shift)), Taylor-expanded in powers of vhat - shift.
ApproxPair exp_fraction_denominator(const ExpFraction& spec, const ApproxPair& v, int K, int working_degree = -1);
ApproxPair exp_fraction_apply(const ExpFraction& spec, const ApproxPair& v, int K, const GeoSeq& a,
                              int working_degree = -1);
ApproxPair rational_apply(const Rational& spec, const ApproxPair& v, const GeoSeq& a);

struct GammaOptions {
    int out_degree = -1;      // degree of the returned heads; default deg(vhat)
    int working_degree = -1;  // candidates and intermediate products; default 2 deg(vhat)
    int taylor_order = 0;     // 0 selects automatically
};

struct GammaTriple {
    ApproxPair g0;  // gamma(v)
    ApproxPair g1;  // gamma'(v)
    ApproxPair g2;  // gamma''(v)
};

// gamma, gamma', gamma'' on the ball around v. Criterion failures are
// rethrown with the stage ("gamma", "gamma'", "gamma''") in the message.
GammaTriple gamma_derivatives(const GammaSpec& spec, const ApproxPair& v, const GammaOptions& opt = {});

// Plain floating-point values for the finder and the instability test.
struct GammaScalar {
    double g0;
    double g1;
    double g2;
};
GammaScalar gamma_scalar(const GammaSpec& spec, double x);

}  // namespace chemoproof
