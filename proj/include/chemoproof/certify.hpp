// Newton-Kantorovich certification of a candidate steady state.
//
// A is the approximate inverse of DF(Ubar): dense heads taking modes 0..2N-1 to
// modes 0..4N-1, cut from a floating-point inverse of the 4N truncation, and
// the tails M(w) Lap^{-1} on modes >= 2N with w inverting the principal part. Y, Z1, Z2 are
// certified upper bounds of ||A F(Ubar)||, ||I - A DF(Ubar)|| and
// sup ||A D^2F|| over the ball of radius r*.
#pragma once

#include <stdexcept>
#include <string>

#include "chemoproof/nonlinear.hpp"
#include "chemoproof/seqspace.hpp"
#include "chemoproof/system.hpp"

namespace chemoproof {

enum class Status { Proved, FailedZ1, FailedDisc, FailedRadius, FailedGamma, FailedSingular };
std::string to_string(Status s);

class SingularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BlockTailOperator {
    Geometry geom;
    int N = 0;
    FiniteOperator head[2][2];  // 4N x 2N, point intervals
    GeoSeq w[2][2];             // tails M(w^{ij}) Lap^{-1} on modes >= 2N

    [[nodiscard]] int head_size() const { return 2 * N; }  // columns
    [[nodiscard]] int head_rows() const { return 4 * N; }
    // A x for finite x (any degree), exactly in interval arithmetic.
    [[nodiscard]] SeqPair apply(const SeqPair& x) const;
};

// U of degree <= N; g from gamma_derivatives at delta_v = 0 with heads of degree N.
// Throws SingularError when the 4N truncation cannot be inverted.
BlockTailOperator build_A(const SeqPair& U, const Params& p, const GammaTriple& g);

struct ANorms {
    Enclosure a11_lap, a21_lap;  // ||A^{i1} Lap||
    Enclosure a11, a21;          // ||A^{i1}||
    Enclosure a11_u, a21_u;      // ||A^{i1} M(ubar)||
    Enclosure W;                 // block norm of the w-convolution matrix
};
ANorms opnorms_A(const BlockTailOperator& A, const GeoSeq& ubar);

Enclosure bound_Y(const BlockTailOperator& A, const ResidualPair& res, const ANorms& n, const GeoSeq& ubar);

struct Z1Parts {
    int K = 0;
    Enclosure finite;
    Enclosure tail;
    Enclosure gamma;  // (||A11 Lap|| + ||A21 Lap||)(d_gamma + ||ubar|| d_gamma')
    Enclosure total;
};
// K >= 4N-1 is required (columns past K must not reach the heads); K <= 0 picks 4N-1.
Z1Parts bound_Z1(const BlockTailOperator& A, const SeqPair& U, const Params& p, const GammaTriple& g, int K,
                 const ANorms& n);

struct Z2Parts {
    Enclosure a, b, c;
    Enclosure total;
};
// g evaluated with delta_v = rstar.
Z2Parts bound_Z2(const ANorms& n, const Params& p, const GammaTriple& g, const GeoSeq& ubar, double rstar);

struct Certificate {
    Params params;
    int N = 0;
    int K = 0;
    double rstar = 0.0;
    double rstar_requested = 0.0;
    Enclosure Y, Z1, Z2;
    Enclosure r_min, r_max;
    Status status = Status::FailedZ1;
    std::string message;
    std::string input_digest;  // SHA-256 of the candidate file, when known

    // diagnostics
    Z1Parts z1;
    Z2Parts z2;
    ANorms norms;
    double gamma_delta = 0.0, gamma1_delta = 0.0, gamma2_delta_rstar = 0.0;
    double seconds = 0.0;

    [[nodiscard]] bool proved() const { return status == Status::Proved; }
};

// Conditions Z1 < 1, 2 Y Z2 < (1 - Z1)^2 and the radius window, on upper bounds.
Certificate nk_check(const Enclosure& Y, const Enclosure& Z1, const Enclosure& Z2, double rstar);

struct CertifyOptions {
    double rstar = 1e-6;
    int K = 0;             // 0: 4N - 1
    int N = 0;             // 0: degree of the candidate
    int max_halvings = 6;  // r* retries when the gamma stage fails at delta_v = r*
};

Certificate certify(const SeqPair& U, const Params& p, const CertifyOptions& opt = {});

// JSON document with hex-float endpoints; deterministic key order.
std::string certificate_json(const Certificate& c);
// One line: STATUS Y=... Z1=... Z2=... rmin=... (5 significant digits)
std::string status_line(const Certificate& c);

std::string sha256_hex(std::string_view data);

}  // namespace chemoproof
