#include "doctest.h"

#include <cmath>
#include <random>

#include "chemoproof/certify.hpp"
#include "chemoproof/finder.hpp"
#include "support/cases.hpp"
#include "support/hp.hpp"

using namespace chemoproof;
using hp::Real;

namespace {

const Geometry kGeom(0.0, 3.0, 1.0001);

Params poly_params(double sigma, double d, std::vector<double> c) {
    Params p;
    p.sigma = sigma;
    p.d = d;
    p.geom = kGeom;
    p.gamma = Rational{Polynomial::from_doubles(c), Polynomial::parse("1")};
    return p;
}

SeqPair near_one(int N, double amp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GeoSeq a = GeoSeq::constant(kGeom, 1.0, N), b = GeoSeq::constant(kGeom, 1.0, N);
    for (int n = 1; n <= N; ++n) {
        a[n] = Enclosure(amp * u(rng) * std::pow(0.5, n));
        b[n] = Enclosure(amp * u(rng) * std::pow(0.5, n));
    }
    return {a, b};
}

GammaTriple gammas_at(const Params& p, const SeqPair& U, double dv = 0.0) {
    const int N = working_order(U);
    return gamma_derivatives(p.gamma, {U.v, Enclosure(dv)}, GammaOptions{N, 2 * N, 0});
}

// Exact polynomial composition (no truncation).
GeoSeq poly_of(const std::vector<double>& c, const GeoSeq& v) {
    GeoSeq acc = GeoSeq::zeros(v.geom, 0);
    GeoSeq pw = GeoSeq::constant(v.geom, 1.0);
    for (double cj : c) {
        acc = acc + Enclosure(cj) * pw;
        pw = conv(pw, v);
    }
    return acc;
}

std::vector<double> derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t j = 1; j < c.size(); ++j) d.push_back(static_cast<double>(j) * c[j]);
    return d;
}

double pair_norm(const SeqPair& x) { return (norm_nu(x.u) + norm_nu(x.v)).hi; }

}  // namespace

TEST_CASE("nk_check on reference bound triples") {
    SUBCASE("sigma = 0.053 triple") {
        const Certificate c = nk_check(Enclosure(2.4051e-8), Enclosure(3.1194e-2), Enclosure(3.6100e4), 1e-6);
        CHECK(c.status == Status::Proved);
        CHECK(c.r_min.hi >= 2.47e-8);
        CHECK(c.r_min.hi <= 2.52e-8);
        // exact left endpoint in 50 digits
        const Real Y("2.4051e-8"), Z1("3.1194e-2"), Z2("3.6100e4");
        const Real Yd(2.4051e-8), Z1d(3.1194e-2), Z2d(3.6100e4);
        const Real exact = (1 - Z1d - sqrt((1 - Z1d) * (1 - Z1d) - 2 * Yd * Z2d)) / Z2d;
        CHECK(hp::inside(c.r_min, exact));
        const Real decimal = (1 - Z1 - sqrt((1 - Z1) * (1 - Z1) - 2 * Y * Z2)) / Z2;
        CHECK(std::abs(static_cast<double>(decimal / exact - 1)) < 1e-12);
        CHECK(c.r_max.lo == 1e-6);
    }
    SUBCASE("sigma = 0.6 triple") {
        const Certificate c = nk_check(Enclosure(1.5327e-12), Enclosure(2.4338e-2), Enclosure(6.4843e2), 1e-6);
        CHECK(c.status == Status::Proved);
        CHECK(c.r_min.hi <= 1.6956e-12 * (1 + 1e-2));
        const Real Y(1.5327e-12), Z1(2.4338e-2), Z2(6.4843e2);
        CHECK(hp::inside(c.r_min, (1 - Z1 - sqrt((1 - Z1) * (1 - Z1) - 2 * Y * Z2)) / Z2));
    }
    SUBCASE("failures") {
        CHECK(nk_check(Enclosure(1e-8), Enclosure(1.5), Enclosure(1.0), 1e-6).status == Status::FailedZ1);
        CHECK(nk_check(Enclosure(1.0), Enclosure(0.5), Enclosure(1.0), 1e-6).status == Status::FailedDisc);
        CHECK(nk_check(Enclosure(2.4051e-8), Enclosure(3.1194e-2), Enclosure(3.6100e4), 1e-9).status ==
              Status::FailedRadius);
    }
    SUBCASE("Z2 = 0 limit") {
        const Certificate c = nk_check(Enclosure(1e-10), Enclosure(0.5), Enclosure(0.0), 1e-6);
        CHECK(c.status == Status::Proved);
        CHECK(c.r_min.contains(2e-10));
        CHECK(c.r_max.lo == 1e-6);
    }
}

TEST_CASE("r_min encloses the exact radius for random triples") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> e(-12, -2), z(0.0, 0.9);
    int proved = 0;
    for (int i = 0; i < 2000; ++i) {
        const double Y = std::pow(10.0, e(rng)), Z1 = z(rng), Z2 = std::pow(10.0, -e(rng) / 2);
        const Certificate c = nk_check(Enclosure(Y), Enclosure(Z1), Enclosure(Z2), 1.0);
        const Real disc = (1 - Real(Z1)) * (1 - Real(Z1)) - 2 * Real(Y) * Real(Z2);
        if (disc <= 0) {
            CHECK(c.status != Status::Proved);
            continue;
        }
        if (c.status == Status::FailedDisc) continue;  // borderline, conservative
        ++proved;
        const Real exact = (1 - Real(Z1) - sqrt(disc)) / Real(Z2);
        CHECK(hp::inside(c.r_min, exact));
    }
    CHECK(proved > 1000);
}

TEST_CASE("approximate inverse tails") {
    SUBCASE("gamma = 1, d = 2") {
        const Params p = poly_params(0.5, 2.0, {1.0});
        const SeqPair U{GeoSeq::constant(kGeom, 1.0, 3), GeoSeq::constant(kGeom, 1.0, 3)};
        const BlockTailOperator A = build_A(U, p, gammas_at(p, U));
        CHECK(A.w[0][0].at(0).mid() == doctest::Approx(1.0).epsilon(1e-14));
        for (int n = 1; n <= A.w[0][0].degree(); ++n) CHECK(std::abs(A.w[0][0][n].mid()) < 1e-14);
        CHECK(norm_nu(A.w[0][1]).hi < 1e-14);
        CHECK(A.w[1][1].at(0).contains(0.5));
        CHECK(A.w[1][1].degree() == 0);
        CHECK(norm_nu(A.w[1][0]).hi == 0.0);
        CHECK(A.head[0][0].rows() == 4 * 3);
        CHECK(A.head[0][0].cols() == 2 * 3);
    }
    SUBCASE("singular truncation") {
        // sigma = 0 at the constant state: mode 0 of DF is singular
        const Params p = poly_params(0.0, 1.0, {1.0});
        const SeqPair U{GeoSeq::constant(kGeom, 1.0, 2), GeoSeq::constant(kGeom, 1.0, 2)};
        CHECK_THROWS_AS(build_A(U, p, gammas_at(p, U)), SingularError);
        CHECK(certify(U, p).status == Status::FailedSingular);
    }
}

TEST_CASE("exact-inverse toy: constant state") {
    const Params p = poly_params(0.4, 1.0, {1.5, -0.3});
    double prev = INFINITY;
    for (int N : {2, 8}) {
        const SeqPair U{GeoSeq::constant(kGeom, 1.0, N), GeoSeq::constant(kGeom, 1.0, N)};
        const GammaTriple g = gammas_at(p, U);
        const BlockTailOperator A = build_A(U, p, g);
        // DF is diagonal here, so the heads invert it exactly on columns < 2N
        const GeoSeq gpu = gamma_prime_times_u(g.g1, U.u);
        for (int k = 0; k < 2 * N; ++k) {
            const DFColumn c = DF_column(U, p, g.g0.head, gpu, k);
            const SeqPair a = A.apply({c.c11, c.c21});
            const SeqPair b = A.apply({c.c12, c.c22});
            CHECK(pair_norm({a.u - GeoSeq::basis(kGeom, k), a.v}) < 1e-12);
            CHECK(pair_norm({b.u, b.v - GeoSeq::basis(kGeom, k)}) < 1e-12);
        }
        const ANorms n = opnorms_A(A, U.u);
        const Z1Parts z = bound_Z1(A, U, p, g, 0, n);
        CHECK(z.K == 4 * N - 1);
        // remaining columns only see the lower-order terms through the tails: O(1 / lambda_2N)
        CHECK(z.finite.hi < prev / 10);
        prev = z.finite.hi;
        const Certificate c = certify(U, p);
        CHECK(c.status == Status::Proved);
        CHECK(c.r_min.hi < 1e-13);
    }
}

TEST_CASE("brute-force domination at N = 4") {
    std::mt19937_64 rng(23);
    const std::vector<double> coeffs{1.2, -0.4, 0.1};
    const Params p = poly_params(0.3, 0.9, coeffs);
    // a full pipeline per case (a few ms)
    const long trials = hp::property_cases(40);
    for (long trial = 0; trial < trials; ++trial) {
        const int N = 4 - static_cast<int>(trial % 4), T = 10 * N;
        const SeqPair U = near_one(N, 0.3, rng);
        const GammaTriple g = gammas_at(p, U);
        const BlockTailOperator A = build_A(U, p, g);
        const ANorms n = opnorms_A(A, U.u);
        const ResidualPair res = F_head(U, p, g.g0);
        const Enclosure Y = bound_Y(A, res, n, U.u);
        const Z1Parts z1 = bound_Z1(A, U, p, g, 0, n);

        const GeoSeq gam = poly_of(coeffs, U.v);
        const GeoSeq gpu = conv(poly_of(derivative(coeffs), U.v), U.u);
        const Enclosure s(p.sigma);
        const SeqPair F{laplacian(conv(gam, U.u)) + s * conv(U.u, GeoSeq::constant(kGeom, 1.0) - U.u),
                        Enclosure(p.d) * laplacian(U.v) + U.u - U.v};
        const SeqPair AF = A.apply(F);
        CHECK(pair_norm(AF) <= Y.hi);
        CHECK(pair_norm(A.apply(res.head)) <= Y.hi);

        double worst = 0.0;
        for (int k = 0; k < T; ++k) {
            const DFColumn c = DF_column(U, p, gam, gpu, k);
            const SeqPair cols[2] = {{c.c11, c.c21}, {c.c12, c.c22}};
            for (int j = 0; j < 2; ++j) {
                const SeqPair ADF = A.apply(cols[j]);
                GeoSeq e = GeoSeq::basis(kGeom, k);
                const SeqPair B{(j == 0 ? e : GeoSeq::zeros(kGeom, 0)) - ADF.u,
                                (j == 1 ? e : GeoSeq::zeros(kGeom, 0)) - ADF.v};
                worst = std::max(worst, pair_norm(B) / xi(k, kGeom.nu));
            }
        }
        CHECK(worst <= z1.total.hi);
        CHECK(worst > 0.0);
    }
}

TEST_CASE("K monotonicity") {
    std::mt19937_64 rng(29);
    const Params p = poly_params(0.3, 0.9, {1.2, -0.4, 0.1});
    const SeqPair U = near_one(5, 0.3, rng);
    const GammaTriple g = gammas_at(p, U);
    const BlockTailOperator A = build_A(U, p, g);
    const ANorms n = opnorms_A(A, U.u);
    CHECK_THROWS(bound_Z1(A, U, p, g, 4 * 5 - 2, n));
    double prev = INFINITY;
    for (int K : {19, 25, 40, 80}) {
        const Z1Parts z = bound_Z1(A, U, p, g, K, n);
        CHECK(z.tail.hi <= prev);
        prev = z.tail.hi;
    }
    const SeqPair one{GeoSeq::constant(kGeom, 1.0, 5), GeoSeq::constant(kGeom, 1.0, 5)};
    CertifyOptions o;
    o.rstar = 1e-4;
    const Certificate c0 = certify(one, p, o);
    REQUIRE(c0.proved());
    o.K = 60;
    const Certificate c1 = certify(one, p, o);
    CHECK(c1.proved());
    CHECK(c1.K == 60);
}

TEST_CASE("operator norm bounds dominate random applications") {
    std::mt19937_64 rng(31);
    const Params p = poly_params(0.6, 1.1, {1.0, 0.5, -0.2});
    const int N = 5;
    const SeqPair U = near_one(N, 0.4, rng);
    const GammaTriple g = gammas_at(p, U);
    const BlockTailOperator A = build_A(U, p, g);
    const ANorms n = opnorms_A(A, U.u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(0, 8 * N);
    for (int i = 0; i < 200; ++i) {
        const int D = deg(rng);
        GeoSeq x = GeoSeq::zeros(kGeom, D);
        for (int k = 0; k <= D; ++k) x[k] = Enclosure(u(rng) * (i % 2 ? 1.0 : std::pow(0.8, k)));
        const double nx = norm_nu(x).hi;
        const GeoSeq z = GeoSeq::zeros(kGeom, 0);
        const SeqPair Ax = A.apply({x, z});
        CHECK(norm_nu(Ax.u).lo <= n.a11.hi * nx);
        CHECK(norm_nu(Ax.v).lo <= n.a21.hi * nx);
        const SeqPair ALx = A.apply({laplacian(x), z});
        CHECK(norm_nu(ALx.u).lo <= n.a11_lap.hi * nx);
        CHECK(norm_nu(ALx.v).lo <= n.a21_lap.hi * nx);
        const SeqPair AUx = A.apply({conv(U.u, x), z});
        CHECK(norm_nu(AUx.u).lo <= n.a11_u.hi * nx);
        CHECK(norm_nu(AUx.v).lo <= n.a21_u.hi * nx);
    }
}

TEST_CASE("Z2 vanishes for sigma = 0 and constant gamma") {
    const Params p = poly_params(0.0, 1.0, {2.0});
    std::mt19937_64 rng(37);
    const SeqPair U = near_one(3, 0.3, rng);
    const GammaTriple g = gammas_at(p, U, 1e-6);
    ANorms n;
    n.a11_lap = n.a21_lap = n.a11 = n.a21 = n.a11_u = n.a21_u = n.W = Enclosure(10.0);
    const Z2Parts z = bound_Z2(n, p, g, U.u, 1e-6);
    CHECK(z.total.hi < 1e-12);
    CHECK(z.c.hi == 0.0);
}

TEST_CASE("certificate output") {
    const Params p = poly_params(0.4, 1.0, {1.5, -0.3});
    const SeqPair U{GeoSeq::constant(kGeom, 1.0, 3), GeoSeq::constant(kGeom, 1.0, 3)};
    Certificate c = certify(U, p);
    c.input_digest = sha256_hex("abc");
    CHECK(c.input_digest == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const std::string line = status_line(c);
    CHECK(line.rfind("PROVED Y=", 0) == 0);
    CHECK(line.find(" Z1=") != std::string::npos);
    CHECK(line.find(" rmin=") != std::string::npos);
    const std::string js = certificate_json(c);
    CHECK(js.find("\"status\": \"PROVED\"") != std::string::npos);
    CHECK(js.find(to_hex(c.Y.hi)) != std::string::npos);
    CHECK(js == certificate_json(c));
    CHECK(to_string(Status::FailedRadius) == "FAILED_RADIUS");
}

TEST_CASE("a truncated candidate loses the proof or its radius") {
    Params p;
    p.sigma = 0.6;
    p.d = 1.0;
    p.geom = Geometry(0.0, 4.0 * M_PI, 1.0001, Enclosure(4.0) * pi());
    p.gamma = ExpFraction{9.0, 1.0};
    FloatSeqPair s = FloatSeqPair::homogeneous(p.geom, 60);
    s.u[4] += 0.05;
    s.v[4] += 0.05;
    const NewtonResult r = relax_then_refine(s, p);
    REQUIRE(r.converged);
    REQUIRE(amplitude(r.state) > 0.1);
    const Certificate full = certify(r.state.to_seqpair(), p);
    REQUIRE(full.proved());
    FloatSeqPair cut = r.state;
    cut.u.resize(11);
    cut.v.resize(11);
    const Certificate c = certify(cut.to_seqpair(), p);
    CHECK((!c.proved() || c.r_min.hi >= 10 * full.r_min.hi));
}
