// The steady-state system in cosine coefficients:
//
//   F(u, v) = ( Lap(gamma(v) * u) + sigma u * (1 - u),  d Lap v + u - v ).
//
// F_head evaluates it with gamma(v) replaced by its computable head, DF_blocks
// returns finite slices of the derivative at that head, and D2F_ingredients
// collects the norms that enter the second-derivative bound.
#pragma once

#include "chemoproof/enclosure.hpp"
#include "chemoproof/nonlinear.hpp"
#include "chemoproof/seqspace.hpp"

namespace chemoproof {

struct Params {
    double sigma = 0.0;
    double d = 1.0;
    Geometry geom;
    GammaSpec gamma = ScaledExp{0.0};  // gamma == 1

    void validate() const;  // throws std::invalid_argument
};

struct ResidualPair {
    SeqPair head;           // degree exactly 2N
    Enclosure gamma_error;  // delta of gamma(vbar), carried for Y
};

// N is max(deg u, deg v); gamma_v.head must have degree <= N.
int working_order(const SeqPair& U);

ResidualPair F_head(const SeqPair& U, const Params& p, const ApproxPair& gamma_v);

struct DFBlocks {
    FiniteOperator b11;  // Lap M(g) + sigma (I - 2 M(u))
    FiniteOperator b12;  // Lap M(g' * u)
    FiniteOperator b21;  // I
    FiniteOperator b22;  // d Lap - I
};

// Rows 0..rows-1 and columns 0..cols-1 of the four blocks of DF at the heads.
// gpu is gamma'(vbar) * ubar (computed once by the caller, see gamma_prime_times_u).
DFBlocks DF_blocks(const SeqPair& U, const Params& p, const GeoSeq& gamma_head, const GeoSeq& gpu, int rows,
                   int cols);
GeoSeq gamma_prime_times_u(const ApproxPair& gamma_prime_v, const GeoSeq& u);

// Column k of each block only, rows 0..k+band. Matches DF_blocks entrywise.
struct DFColumn {
    GeoSeq c11, c12, c21, c22;
};
DFColumn DF_column(const SeqPair& U, const Params& p, const GeoSeq& gamma_head, const GeoSeq& gpu, int k);

struct D2FIngredients {
    Enclosure gdd_u;    // ||gamma''^(vbar) * ubar||
    Enclosure gdd;      // ||gamma''^(vbar)||
    Enclosure gdd_err;  // delta of gamma''(v) on the ball
    Enclosure u_norm;   // ||ubar||
    Enclosure two_sigma;
};
D2FIngredients D2F_ingredients(const Params& p, const ApproxPair& gamma_dd_v, const ApproxPair& u);

// D^2F(U)(h1, h2) with gamma', gamma'' given by their heads; only the first
// component is nonzero:
//   Lap(g' * (u1 * v2 + v1 * u2) + g'' * u * v1 * v2) - 2 sigma u * u1 * u2.
SeqPair D2F_apply(const SeqPair& U, const Params& p, const GeoSeq& gp, const GeoSeq& gpp, const SeqPair& h1,
                  const SeqPair& h2);

}  // namespace chemoproof
