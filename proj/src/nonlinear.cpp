#include "chemoproof/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemoproof/cosine.hpp"

namespace chemoproof {

CriterionError::CriterionError(std::string stage, double value)
    : std::runtime_error(stage + ": criterion not verified (value " + std::to_string(value) + ", need < 1)"),
      stage_(std::move(stage)),
      value_(value) {}

namespace {

// Upper endpoint as a point interval; bounds enter the formulas this way.
Enclosure up(const Enclosure& e) { return Enclosure(e.hi); }
Enclosure up(double x) { return Enclosure(x); }
Enclosure nrm(const GeoSeq& s) { return up(norm_nu(s)); }

ApproxPair sum(const ApproxPair& x, const ApproxPair& y) {
    return {x.head + y.head, up(x.delta + y.delta)};
}

ApproxPair rethrow_stage(const char* stage, const auto& fn) {
    try {
        return fn();
    } catch (const CriterionError& e) {
        throw CriterionError(std::string(stage) + "/" + e.stage(), e.value());
    }
}

}  // namespace

ApproxPair truncated(const ApproxPair& x, int degree) {
    auto [head, tail] = truncate(x.head, degree);
    return {std::move(head), up(x.delta + up(tail))};
}

ApproxPair shifted(const ApproxPair& v, double c) {
    ApproxPair r = v;
    r.head[0] -= Enclosure(c);
    return r;
}

ApproxPair scaled(const Enclosure& c, const ApproxPair& x) {
    return {c * x.head, up(up(sup_abs(c)) * x.delta)};
}

GeoSeq candidate_inverse(const GeoSeq& zhat, int target_degree) {
    target_degree = std::max(target_degree, 0);
    const CosineGrid grid(std::max(4 * (target_degree + 1), 64));
    std::vector<double> f = grid.synthesize(zhat.mids());
    for (double& x : f) {
        if (!(std::fabs(x) > 1e-12)) throw CriterionError("candidate_inverse", std::numeric_limits<double>::quiet_NaN());
        x = 1.0 / x;
    }
    const std::vector<double> c = grid.analyze(f, target_degree);
    return GeoSeq::from_doubles(zhat.geom, c);
}

Enclosure inverse_criterion(const ApproxPair& z, const GeoSeq& a) {
    GeoSeq defect = conv(a, z.head);
    defect[0] -= Enclosure(1.0);
    return up(nrm(defect) + nrm(a) * z.delta);
}

ApproxPair approx_inverse(const ApproxPair& z, const GeoSeq& a) {
    const Enclosure c = inverse_criterion(z, a);
    if (!(c.hi < 1.0)) throw CriterionError("inverse", c.hi);
    return {a, up(nrm(a) * c / (Enclosure(1.0) - c))};
}

ApproxPair approx_product(const ApproxPair& x, const ApproxPair& y, int max_degree) {
    ApproxPair r{conv(x.head, y.head), up(nrm(x.head) * y.delta + nrm(y.head) * x.delta + x.delta * y.delta)};
    return max_degree >= 0 ? truncated(r, max_degree) : r;
}

ApproxPair approx_quotient(const ApproxPair& x, const ApproxPair& y, const GeoSeq& a) {
    const Enclosure c = inverse_criterion(y, a);
    if (!(c.hi < 1.0)) throw CriterionError("quotient", c.hi);
    return {conv(x.head, a), up(nrm(a) * (nrm(x.head) * c + x.delta) / (Enclosure(1.0) - c))};
}

ApproxPair polynomial_apply(const Polynomial& p, const ApproxPair& v) {
    GeoSeq head = apply(p, v.head);
    if (v.delta.hi == 0.0) return ApproxPair::exact(std::move(head));
    const double r = (nrm(v.head) + v.delta).hi;
    return {std::move(head), up(up(p.derivative().abs_eval_up(r)) * v.delta)};
}

std::string describe(const GammaSpec& g) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* r = std::get_if<Rational>(&g)) {
        os << "rational P=" << r->P.to_string() << " Q=" << r->Q.to_string();
    } else if (const auto* e = std::get_if<ExpFraction>(&g)) {
        os << "expfraction alpha=" << e->alpha << " shift=" << e->shift;
    } else {
        os << "exp alpha=" << std::get<ScaledExp>(g).alpha;
    }
    return os.str();
}

int select_taylor_order(double alpha, double r) {
    const Enclosure t = up(abs(Enclosure(alpha)) * Enclosure(r));
    const Enclosure e = exp(t);
    const double target = 1e-14 * (1.0 + r);
    Enclosure term(1.0);  // t^K / K!
    for (int K = 1; K <= 60; ++K) {
        term = term * t / Enclosure(static_cast<double>(K));
        if ((term * e).hi <= target) return K;
    }
    throw std::runtime_error("Taylor order: no K <= 60 reaches the remainder target for |alpha| r = " +
                             std::to_string(t.hi));
}

ApproxPair entire_apply(const ScaledExp& f, const ApproxPair& v, int K, int working_degree) {
    if (K < 1) throw std::invalid_argument("entire_apply: K must be >= 1");
    const GeoSeq& y = v.head;
    const int W = working_degree >= 0 ? working_degree : 2 * y.degree();
    const Enclosure alpha(f.alpha);
    const Enclosure aa = abs(alpha);
    const Enclosure ny = nrm(y);

    // term_k ~ alpha^k y^k / k!, err_k bounds the distance to the exact power.
    GeoSeq term = GeoSeq::constant(y.geom, Enclosure(1.0));
    GeoSeq head = GeoSeq::constant(y.geom, Enclosure(1.0), W);
    Enclosure err(0.0);
    Enclosure err_sum(0.0);
    for (int k = 1; k < K; ++k) {
        const Enclosure s = alpha / Enclosure(static_cast<double>(k));
        auto [cut, tail] = truncate(s * conv(y, term), W);
        err = up(up(sup_abs(s)) * ny * err + up(tail));
        err_sum = up(err_sum + err);
        term = std::move(cut);
        head = head + term;
    }
    // Lagrange remainder with sup ||f^(K)|| <= |alpha|^K e^{|alpha| ||y||}
    const Enclosure t = aa * ny;
    Enclosure rem = exp(t);
    for (int k = 1; k <= K; ++k) rem = rem * t / Enclosure(static_cast<double>(k));
    const Enclosure d_hat = up(rem + err_sum);

    if (v.delta.hi == 0.0) return {std::move(head), d_hat};
    const Enclosure dv = v.delta;
    const Enclosure coarse = aa * exp(aa * (ny + dv));
    const Enclosure sharp = aa * (nrm(head) + d_hat) * exp(aa * dv);
    const Enclosure deriv = up(std::min(coarse.hi, sharp.hi));
    return {std::move(head), up(d_hat + deriv * dv)};
}

ApproxPair exp_fraction_denominator(const ExpFraction& spec, const ApproxPair& v, int K, int working_degree) {
    ApproxPair g = entire_apply(ScaledExp{spec.alpha}, shifted(v, spec.shift), K, working_degree);
    g.head[0] += Enclosure(1.0);
    return g;
}

ApproxPair exp_fraction_apply(const ExpFraction& spec, const ApproxPair& v, int K, const GeoSeq& a,
                              int working_degree) {
    return approx_inverse(exp_fraction_denominator(spec, v, K, working_degree), a);
}

ApproxPair rational_apply(const Rational& spec, const ApproxPair& v, const GeoSeq& a) {
    return approx_quotient(polynomial_apply(spec.P, v), polynomial_apply(spec.Q, v), a);
}

namespace {

GammaTriple rational_symbolic(const Rational& r, const ApproxPair& v, int W) {
    const Polynomial& P = r.P;
    const Polynomial& Q = r.Q;
    const Polynomial P1 = P.derivative();
    const Polynomial Q1 = Q.derivative();
    const Polynomial N1 = P1 * Q - P * Q1;
    const Polynomial N2 = (P1.derivative() * Q - P * Q1.derivative()) * Q - Enclosure(2.0) * Q1 * N1;
    const Polynomial Q2 = Q * Q;
    const Polynomial Q3 = Q2 * Q;

    auto stage = [&](const char* name, const Rational& spec) {
        return rethrow_stage(name, [&] {
            const GeoSeq a = candidate_inverse(apply(spec.Q, v.head), W);
            return rational_apply(spec, v, a);
        });
    };
    return {stage("gamma", r), stage("gamma'", Rational{N1, Q2}), stage("gamma''", Rational{N2, Q3})};
}

// Same three functions through R = 1/Q:
//   g = P R,  g' = P' R - P Q' R^2,  g'' = P'' R - (2 P' Q' + P Q'') R^2 + 2 P Q'^2 R^3.
// Only Q itself has to pass the inverse criterion.
GammaTriple rational_composed(const Rational& r, const ApproxPair& v, int W) {
    const Polynomial& P = r.P;
    const Polynomial& Q = r.Q;
    const Polynomial P1 = P.derivative();
    const Polynomial P2 = P1.derivative();
    const Polynomial Q1 = Q.derivative();
    const Polynomial Q2 = Q1.derivative();

    const ApproxPair Qv = polynomial_apply(Q, v);
    const ApproxPair R = rethrow_stage("gamma", [&] { return approx_inverse(Qv, candidate_inverse(Qv.head, W)); });
    const ApproxPair R2 = approx_product(R, R, W);
    const ApproxPair R3 = approx_product(R2, R, W);
    auto poly = [&](const Polynomial& p) { return truncated(polynomial_apply(p, v), W); };
    auto times = [&](const ApproxPair& x, const ApproxPair& y) { return approx_product(x, y, W); };

    const ApproxPair g0 = times(poly(P), R);
    const ApproxPair g1 = sum(times(poly(P1), R), scaled(Enclosure(-1.0), times(poly(P * Q1), R2)));
    const ApproxPair g2 = sum(sum(times(poly(P2), R), scaled(Enclosure(-1.0), times(poly(Enclosure(2.0) * P1 * Q1 + P * Q2), R2))),
                              times(poly(Enclosure(2.0) * P * Q1 * Q1), R3));
    return {g0, g1, g2};
}

}  // namespace

GammaTriple gamma_derivatives(const GammaSpec& spec, const ApproxPair& v, const GammaOptions& opt) {
    const int deg = v.head.degree();
    const int out = opt.out_degree >= 0 ? opt.out_degree : deg;
    const int W = opt.working_degree >= 0 ? opt.working_degree : 2 * deg;

    GammaTriple t;
    if (const auto* r = std::get_if<Rational>(&spec)) {
        try {
            t = rational_symbolic(*r, v, W);
        } catch (const CriterionError&) {
            // the symbolic denominators Q^2, Q^3 have large |Q'|-type
            // constants; fall back to powers of 1/Q
            t = rational_composed(*r, v, W);
        }
    } else if (const auto* e = std::get_if<ExpFraction>(&spec)) {
        const int K = opt.taylor_order > 0 ? opt.taylor_order
                                           : select_taylor_order(e->alpha, norm_nu(shifted(v, e->shift).head).hi);
        const ApproxPair g = exp_fraction_denominator(*e, v, K, W);
        t.g0 = rethrow_stage("gamma", [&] { return approx_inverse(g, candidate_inverse(g.head, W)); });
        // With E g^-1 = 1 - g^-1:  g' = -alpha (y - y^2),  g'' = alpha^2 (y - 3 y^2 + 2 y^3),  y = g^-1.
        const double a = e->alpha;
        t.g1 = polynomial_apply(Polynomial({Enclosure(0.0), Enclosure(-a), Enclosure(a)}), t.g0);
        const Enclosure a2 = Enclosure(a) * Enclosure(a);
        t.g2 = polynomial_apply(Polynomial({Enclosure(0.0), a2, Enclosure(-3.0) * a2, Enclosure(2.0) * a2}), t.g0);
    } else {
        const double a = std::get<ScaledExp>(spec).alpha;
        const int K = opt.taylor_order > 0 ? opt.taylor_order : select_taylor_order(a, norm_nu(v.head).hi);
        t.g0 = entire_apply(ScaledExp{a}, v, K, W);
        t.g1 = scaled(Enclosure(a), t.g0);
        t.g2 = scaled(Enclosure(a) * Enclosure(a), t.g0);
    }
    return {truncated(t.g0, out), truncated(t.g1, out), truncated(t.g2, out)};
}

GammaScalar gamma_scalar(const GammaSpec& spec, double x) {
    if (const auto* r = std::get_if<Rational>(&spec)) {
        const Polynomial P1 = r->P.derivative();
        const Polynomial Q1 = r->Q.derivative();
        const double p = r->P.eval(x), q = r->Q.eval(x);
        const double p1 = P1.eval(x), q1 = Q1.eval(x);
        const double p2 = P1.derivative().eval(x), q2 = Q1.derivative().eval(x);
        const double g0 = p / q;
        const double g1 = (p1 - g0 * q1) / q;
        const double g2 = (p2 - 2.0 * g1 * q1 - g0 * q2) / q;
        return {g0, g1, g2};
    }
    if (const auto* e = std::get_if<ExpFraction>(&spec)) {
        // t = 1/(1+E), E t = 1 - t; stable for either sign of the exponent
        const double t = 1.0 / (1.0 + std::exp(e->alpha * (x - e->shift)));
        return {t, -e->alpha * (1.0 - t) * t, e->alpha * e->alpha * (1.0 - t) * (1.0 - 2.0 * t) * t};
    }
    const double a = std::get<ScaledExp>(spec).alpha;
    const double g = std::exp(a * x);
    return {g, a * g, a * a * g};
}

}  // namespace chemoproof
