#include "chemoproof/system.hpp"

#include <algorithm>
#include <stdexcept>

namespace chemoproof {

void Params::validate() const {
    if (!(d > 0.0)) throw std::invalid_argument("params: d must be > 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("params: sigma must be >= 0");
}

int working_order(const SeqPair& U) { return std::max(U.u.degree(), U.v.degree()); }

namespace {

GeoSeq one_minus(const GeoSeq& u) { return GeoSeq::constant(u.geom, 1.0) - u; }

GeoSeq padded(const GeoSeq& x, int degree) {
    if (x.degree() > degree) throw std::logic_error("system: head degree overflow");
    return x.resized(degree);
}

}  // namespace

ResidualPair F_head(const SeqPair& U, const Params& p, const ApproxPair& gamma_v) {
    require_same(U.u.geom, U.v.geom, "F_head");
    const int N = working_order(U);
    if (gamma_v.head.degree() > N) throw std::logic_error("F_head: gamma head degree exceeds N");
    const Enclosure sigma(p.sigma);
    const GeoSeq f1 = laplacian(conv(gamma_v.head, U.u)) + sigma * conv(U.u, one_minus(U.u));
    const GeoSeq f2 = Enclosure(p.d) * laplacian(U.v) + U.u - U.v;
    return {{padded(f1, 2 * N), padded(f2, 2 * N)}, gamma_v.delta};
}

GeoSeq gamma_prime_times_u(const ApproxPair& gamma_prime_v, const GeoSeq& u) { return conv(gamma_prime_v.head, u); }

DFColumn DF_column(const SeqPair& U, const Params& p, const GeoSeq& gamma_head, const GeoSeq& gpu, int k) {
    const Geometry& g = U.u.geom;
    const GeoSeq ek = GeoSeq::basis(g, k);
    const Enclosure sigma(p.sigma);
    DFColumn c;
    c.c11 = laplacian(conv(gamma_head, ek)) + sigma * (ek - Enclosure(2.0) * conv(U.u, ek));
    c.c12 = laplacian(conv(gpu, ek));
    c.c21 = ek;
    c.c22 = Enclosure(p.d) * laplacian(ek) - ek;
    return c;
}

DFBlocks DF_blocks(const SeqPair& U, const Params& p, const GeoSeq& gamma_head, const GeoSeq& gpu, int rows,
                   int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("DF_blocks: negative shape");
    const Geometry& g = U.u.geom;
    DFBlocks B{FiniteOperator(g, rows, cols), FiniteOperator(g, rows, cols), FiniteOperator(g, rows, cols),
               FiniteOperator(g, rows, cols)};
    for (int k = 0; k < cols; ++k) {
        const DFColumn c = DF_column(U, p, gamma_head, gpu, k);
        for (int n = 0; n < rows; ++n) {
            B.b11(n, k) = c.c11.at(n);
            B.b12(n, k) = c.c12.at(n);
            B.b21(n, k) = c.c21.at(n);
            B.b22(n, k) = c.c22.at(n);
        }
    }
    return B;
}

D2FIngredients D2F_ingredients(const Params& p, const ApproxPair& gamma_dd_v, const ApproxPair& u) {
    D2FIngredients r;
    r.gdd_u = norm_nu(conv(gamma_dd_v.head, u.head));
    r.gdd = norm_nu(gamma_dd_v.head);
    r.gdd_err = gamma_dd_v.delta;
    r.u_norm = norm_nu(u.head);
    r.two_sigma = Enclosure(2.0) * Enclosure(p.sigma);
    return r;
}

SeqPair D2F_apply(const SeqPair& U, const Params& p, const GeoSeq& gp, const GeoSeq& gpp, const SeqPair& h1,
                  const SeqPair& h2) {
    const GeoSeq cross = conv(h1.u, h2.v) + conv(h1.v, h2.u);
    const GeoSeq phi = conv(gp, cross) + conv(conv(gpp, U.u), conv(h1.v, h2.v));
    const GeoSeq first = laplacian(phi) - Enclosure(2.0) * Enclosure(p.sigma) * conv(h1.u, h2.u);
    return {first, GeoSeq::zeros(U.u.geom, 0)};
}

}  // namespace chemoproof
