#include "doctest.h"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "chemoproof/finder.hpp"

using namespace chemoproof;

namespace {

Params hill(double sigma) {
    Params p;
    p.sigma = sigma;
    p.d = 1.0;
    p.geom = Geometry(0.0, 3.0 * M_PI, 1.0001, Enclosure(3.0) * pi());
    p.gamma = Rational{Polynomial::parse("1"), Polynomial::parse("1 + x^9")};
    return p;
}

Params logistic_switch() {
    Params p;
    p.sigma = 0.6;
    p.d = 1.0;
    p.geom = Geometry(0.0, 4.0 * M_PI, 1.0001, Enclosure(4.0) * pi());
    p.gamma = ExpFraction{9.0, 1.0};
    return p;
}

FloatSeqPair seeded(const Params& p, int N, int mode, double amp) {
    FloatSeqPair s = FloatSeqPair::homogeneous(p.geom, N);
    s.u[static_cast<std::size_t>(mode)] += 0.5 * amp;
    s.v[static_cast<std::size_t>(mode)] += 0.5 * amp;
    return s;
}

}  // namespace

TEST_CASE("the homogeneous state is a fixed point") {
    const Params p = hill(0.053);
    const FloatSeqPair one = FloatSeqPair::homogeneous(p.geom, 20);
    // gamma(v) goes through sampling and cosine analysis, so zero means rounding level
    for (double f : galerkin_residual(one, p)) CHECK(std::abs(f) < 1e-14);
    const NewtonResult r = newton_refine(one, p);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.residual < 1e-13);
    CHECK(distance(r.state, one) == 0.0);
    CHECK(amplitude(one) == 0.0);
}

TEST_CASE("amplitude of a single cosine") {
    FloatSeqPair s = FloatSeqPair::homogeneous(Geometry(0.0, 1.0, 1.0), 3);
    s.u[1] = 0.1;  // 1 + 0.2 cos(pi x)
    CHECK(amplitude(s) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("linear instability of (1, 1)") {
    SUBCASE("constant gamma") {
        Params p = hill(0.5);
        p.gamma = Rational{Polynomial::parse("1"), Polynomial::parse("1")};
        const InstabilityResult r = instability_test(p, 10);
        CHECK_FALSE(r.unstable);
        CHECK(r.trace == doctest::Approx(1.5));
        CHECK(r.modes.empty());
    }
    SUBCASE("gamma(1) + gamma'(1) >= 0") {
        Params p = hill(0.0);
        p.gamma = Rational{Polynomial::parse("1 + 0.5*x"), Polynomial::parse("1")};
        for (double s : {0.0, 0.1, 1.0, 10.0}) {
            p.sigma = s;
            CHECK_FALSE(instability_test(p, 10).unstable);
            CHECK(instability_test(p, 10).modes.empty());
        }
    }
    SUBCASE("Hill gamma at sigma d = 0.053") {
        const InstabilityResult r = instability_test(hill(0.053), 12);
        CHECK(r.unstable);
        CHECK(r.trace == doctest::Approx(0.053 + 0.5 - 2.25).epsilon(1e-12));
        CHECK(r.discriminant == doctest::Approx(std::pow(0.053 + 0.5 - 2.25, 2) - 4 * 0.053 * 0.5).epsilon(1e-12));
        CHECK(r.modes == std::vector<int>{1, 2, 3, 4, 5});
    }
    SUBCASE("logistic switch") {
        const InstabilityResult r = instability_test(logistic_switch(), 12);
        CHECK(r.unstable);
        CHECK(r.modes == std::vector<int>{4});
    }
    SUBCASE("large sigma") { CHECK_FALSE(instability_test(hill(3.0), 12).unstable); }
}

TEST_CASE("nonhomogeneous state from a mode-2 seed") {
    const Params p = hill(0.053);
    const NewtonResult r = relax_then_refine(seeded(p, 100, 2, 0.1), p, 1e-12, 50);
    CHECK(r.converged);
    CHECK(r.residual < 1e-12);
    // regression, first reproduction
    CHECK(amplitude(r.state) == doctest::Approx(1.91748).epsilon(1e-4));
    CHECK(residual_norm(r.state, p) < 1e-7);
}

TEST_CASE("logistic switch state from a mode-4 seed") {
    const Params p = logistic_switch();
    const NewtonResult r = relax_then_refine(seeded(p, 100, 4, 0.1), p, 1e-12, 50);
    CHECK(r.converged);
    CHECK(r.residual < 1e-12);
    CHECK(amplitude(r.state) == doctest::Approx(0.222356).epsilon(1e-4));
}

TEST_CASE("Newton converges quadratically") {
    const Params p = logistic_switch();
    const NewtonResult base = relax_then_refine(seeded(p, 40, 4, 0.1), p, 1e-13, 50);
    REQUIRE(base.converged);
    FloatSeqPair s = base.state;
    for (std::size_t n = 0; n < s.u.size(); ++n) {
        s.u[n] += 2e-3 * std::cos(0.7 * static_cast<double>(n)) * std::pow(0.7, static_cast<double>(n));
        s.v[n] -= 1e-3 * std::pow(0.6, static_cast<double>(n));
    }
    const NewtonResult r = newton_refine(s, p, 1e-13, 50);
    REQUIRE(r.converged);
    int checked = 0;
    for (std::size_t k = 0; k + 1 < r.history.size(); ++k) {
        const double a = r.history[k], b = r.history[k + 1];
        if (a < 1e-7) continue;  // below this the floor is rounding
        CHECK(b <= 100.0 * a * a);
        ++checked;
    }
    CHECK(checked >= 2);
}

TEST_CASE("even seeds stay even about the midpoint") {
    const Params p = hill(0.053);
    FloatSeqPair s = FloatSeqPair::homogeneous(p.geom, 100);
    s.u[2] += 0.5;
    s.v[2] += 0.5;
    s.u[4] -= 0.01;
    const NewtonResult r = newton_refine(s, p, 1e-12, 50);
    CHECK(r.converged);
    CHECK(amplitude(r.state) > 0.1);
    double odd = 0.0;
    for (std::size_t n = 1; n < r.state.u.size(); n += 2) {
        odd = std::max({odd, std::abs(r.state.u[n]), std::abs(r.state.v[n])});
    }
    CHECK(odd < 1e-13);
}

TEST_CASE("sweep with large sigma finds only the homogeneous state") {
    SweepOptions o;
    o.N = 24;
    o.threads = 2;
    const auto pts = sweep_diagram(hill(2.0), {2.0, 2.5, 3.0}, o);
    REQUIRE(pts.size() == 3);
    for (const auto& bp : pts) {
        CHECK(bp.converged);
        CHECK(bp.amplitude == 0.0);
    }
    CHECK(sweep_diagram(hill(2.0), {}, o).empty());
}

TEST_CASE("sweep at sigma = 0.053 contains the refined state, any thread count") {
    SweepOptions o;
    o.N = 100;
    o.modes = {2};
    o.seed_amplitudes = {0.1};
    o.threads = 1;
    const auto a = sweep_diagram(hill(0.053), {0.05, 0.053}, o);
    o.threads = 3;
    const auto b = sweep_diagram(hill(0.053), {0.05, 0.053}, o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].sigma == b[i].sigma);
        CHECK(a[i].amplitude == b[i].amplitude);
        CHECK(a[i].state.u == b[i].state.u);
    }
    bool found = false;
    for (const auto& bp : a) {
        if (bp.sigma == 0.053 && bp.converged && std::abs(bp.amplitude - 1.91748) < 1e-4) found = true;
    }
    CHECK(found);
}

TEST_CASE("parallel_for visits every index and rethrows") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](int i) {
                                     if (i == 7) throw std::runtime_error("seven");
                                 }),
                    std::runtime_error);
}
