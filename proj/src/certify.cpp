#include "chemoproof/certify.hpp"

#include <Eigen/Dense>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace chemoproof {

std::string to_string(Status s) {
    switch (s) {
        case Status::Proved: return "PROVED";
        case Status::FailedZ1: return "FAILED_Z1";
        case Status::FailedDisc: return "FAILED_DISC";
        case Status::FailedRadius: return "FAILED_RADIUS";
        case Status::FailedGamma: return "FAILED_GAMMA";
        case Status::FailedSingular: return "FAILED_SINGULAR";
    }
    return "UNKNOWN";
}

namespace {

using Mat = Eigen::MatrixXd;

Mat mid_matrix(const FiniteOperator& L) {
    Mat M(L.rows(), L.cols());
    for (int c = 0; c < L.cols(); ++c) {
        for (int r = 0; r < L.rows(); ++r) M(r, c) = L(r, c).mid();
    }
    return M;
}

// Interval matrix as midpoint and radius parts.
struct MidRadMat {
    Mat mid, rad;
};

// Encloses H * X for a point matrix H and an interval matrix X, entrywise.
// Result is column-major, H.rows() x X.cols().
std::vector<Enclosure> point_times(const Mat& H, const MidRadMat& X) {
    const Mat absH = H.cwiseAbs();
    const Mat S = H * X.mid;
    const Mat T = absH * X.mid.cwiseAbs();
    const Mat R = absH * X.rad;
    std::vector<Enclosure> out(static_cast<std::size_t>(S.size()));
    const auto terms = static_cast<std::size_t>(H.cols());
    for (Eigen::Index c = 0; c < S.cols(); ++c) {
        for (Eigen::Index r = 0; r < S.rows(); ++r) {
            out[static_cast<std::size_t>(c * S.rows() + r)] = midrad_enclosure(S(r, c), T(r, c), R(r, c), terms);
        }
    }
    return out;
}

GeoSeq head_part(const GeoSeq& x, int h) {
    return x.resized(std::min(x.degree(), h - 1));
}

// x with modes < h set to zero (degree unchanged); empty when there is no tail.
bool tail_part(const GeoSeq& x, int h, GeoSeq& out) {
    if (x.degree() < h) return false;
    out = x;
    for (int n = 0; n < h; ++n) out[n] = Enclosure(0.0);
    return true;
}

bool is_zero(const GeoSeq& w) {
    return std::all_of(w.coeffs.begin(), w.coeffs.end(), [](const Enclosure& e) { return e == Enclosure(0.0); });
}

// w * Lap^{-1} (x restricted to modes >= h)
GeoSeq tail_apply(const GeoSeq& w, const GeoSeq& x, int h) {
    GeoSeq t;
    if (is_zero(w) || !tail_part(x, h, t)) return GeoSeq::zeros(x.geom, 0);
    return conv(w, inv_laplacian(t));
}

Enclosure up_only(const Enclosure& e) { return Enclosure(e.hi); }

Enclosure over_xi(const Enclosure& norm, const XiTable& xt, int k) {
    return norm / Enclosure(xt.lo[static_cast<std::size_t>(k)], xt.hi[static_cast<std::size_t>(k)]);
}

Enclosure nrm(const GeoSeq& x) { return norm_nu(x); }

}  // namespace

SeqPair BlockTailOperator::apply(const SeqPair& x) const {
    const int h = head_size();
    const GeoSeq* in[2] = {&x.u, &x.v};
    const int hr = head_rows();
    GeoSeq out[2] = {GeoSeq::zeros(geom, hr - 1), GeoSeq::zeros(geom, hr - 1)};
    for (int i = 0; i < 2; ++i) {
        for (int l = 0; l < 2; ++l) {
            const GeoSeq xh = head_part(*in[l], h).resized(h - 1);
            MidRadMat X{Mat(h, 1), Mat(h, 1)};
            for (int n = 0; n < h; ++n) {
                X.mid(n, 0) = xh[n].mid();
                X.rad(n, 0) = xh[n].rad();
            }
            const auto prod = point_times(mid_matrix(head[i][l]), X);
            GeoSeq hp = GeoSeq::zeros(geom, hr - 1);
            for (int n = 0; n < hr; ++n) hp[n] = prod[static_cast<std::size_t>(n)];
            out[i] = out[i] + hp + tail_apply(w[i][l], *in[l], h);
        }
    }
    return {out[0], out[1]};
}

BlockTailOperator build_A(const SeqPair& U, const Params& p, const GammaTriple& g) {
    const int N = working_order(U);
    if (g.g0.head.degree() > N) throw std::logic_error("build_A: gamma head degree exceeds N");
    const Geometry& geom = U.u.geom;
    const int M = 4 * N;
    const int h = 2 * N;
    const GeoSeq gpu = gamma_prime_times_u(g.g1, U.u);
    const DFBlocks B = DF_blocks(U, p, g.g0.head, gpu, M, M);

    Mat J(2 * M, 2 * M);
    J.block(0, 0, M, M) = mid_matrix(B.b11);
    J.block(0, M, M, M) = mid_matrix(B.b12);
    J.block(M, 0, M, M) = mid_matrix(B.b21);
    J.block(M, M, M, M) = mid_matrix(B.b22);
    const Eigen::PartialPivLU<Mat> lu(J);
    const double rc = lu.rcond();
    if (!(rc > 1e-13)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "build_A: 4N truncation of DF is numerically singular (rcond %.3g)", rc);
        throw SingularError(buf);
    }
    const Mat inv = lu.inverse();

    BlockTailOperator A;
    A.geom = geom;
    A.N = N;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            A.head[i][j] = FiniteOperator(geom, M, h);
            for (int c = 0; c < h; ++c) {
                for (int r = 0; r < M; ++r) A.head[i][j](r, c) = Enclosure(inv(i * M + r, j * M + c));
            }
        }
    }
    const double dinv = 1.0 / p.d;
    A.w[0][0] = candidate_inverse(g.g0.head, h);
    std::vector<double> w12 = conv(A.w[0][0], gpu, h).mids();
    for (double& x : w12) x *= -dinv;
    A.w[0][1] = GeoSeq::from_doubles(geom, w12);
    A.w[1][0] = GeoSeq::zeros(geom, 0);
    A.w[1][1] = GeoSeq::constant(geom, Enclosure(1.0) / Enclosure(p.d));
    return A;
}

namespace {

// max over head columns of (1/xi_k) ||H(., k)|| scale_k
Enclosure head_column_norm(const FiniteOperator& H, const std::vector<Enclosure>& scale) {
    FiniteOperator S = H;
    for (int c = 0; c < H.cols(); ++c) {
        for (int r = 0; r < H.rows(); ++r) S(r, c) = H(r, c) * scale[static_cast<std::size_t>(c)];
    }
    return opnorm_finite(S);
}

// ||H^{il} M(u) + tail|| over columns k with explicit computation up to k < 3N,
// and the analytic bound ||w|| ||u|| / lambda_{2N} beyond.
Enclosure times_multiplication_norm(const BlockTailOperator& A, int i, const GeoSeq& u) {
    const int N = A.N;
    const int h = A.head_size();
    const int cols = 3 * N;
    const XiTable xt(A.geom.nu, cols + N + 1);
    const Mat H = mid_matrix(A.head[i][0]);
    const GeoSeq& w = A.w[i][0];

    std::vector<GeoSeq> colseq(static_cast<std::size_t>(cols));
    MidRadMat X{Mat::Zero(h, cols), Mat::Zero(h, cols)};
    for (int k = 0; k < cols; ++k) {
        colseq[static_cast<std::size_t>(k)] = conv(u, GeoSeq::basis(A.geom, k));
        const GeoSeq& c = colseq[static_cast<std::size_t>(k)];
        for (int n = 0; n < h && n <= c.degree(); ++n) {
            X.mid(n, k) = c[n].mid();
            X.rad(n, k) = c[n].rad();
        }
    }
    const auto prod = point_times(H, X);
    Enclosure best(0.0);
    const int hr = A.head_rows();
    for (int k = 0; k < cols; ++k) {
        GeoSeq col = GeoSeq::zeros(A.geom, hr - 1);
        for (int n = 0; n < hr; ++n) col[n] = prod[static_cast<std::size_t>(k * hr + n)];
        col = col + tail_apply(w, colseq[static_cast<std::size_t>(k)], h);
        best = max(best, over_xi(nrm(col), xt, k));
    }
    const Enclosure beyond = nrm(w) * nrm(u) / laplacian_eigenvalue(A.geom, h);
    return up_only(max(best, beyond));
}

}  // namespace

ANorms opnorms_A(const BlockTailOperator& A, const GeoSeq& ubar) {
    const int h = A.head_size();
    std::vector<Enclosure> lam(static_cast<std::size_t>(h)), one(static_cast<std::size_t>(h), Enclosure(1.0));
    for (int k = 0; k < h; ++k) lam[static_cast<std::size_t>(k)] = laplacian_eigenvalue(A.geom, k);
    const Enclosure lam_tail = laplacian_eigenvalue(A.geom, h);

    ANorms n;
    Enclosure* lap[2] = {&n.a11_lap, &n.a21_lap};
    Enclosure* plain[2] = {&n.a11, &n.a21};
    Enclosure* mult[2] = {&n.a11_u, &n.a21_u};
    for (int i = 0; i < 2; ++i) {
        const Enclosure wn = nrm(A.w[i][0]);
        *lap[i] = up_only(max(head_column_norm(A.head[i][0], lam), wn));
        *plain[i] = up_only(max(head_column_norm(A.head[i][0], one), wn / lam_tail));
        *mult[i] = times_multiplication_norm(A, i, ubar);
    }
    n.W = up_only(max(nrm(A.w[0][0]) + nrm(A.w[1][0]), nrm(A.w[0][1]) + nrm(A.w[1][1])));
    return n;
}

Enclosure bound_Y(const BlockTailOperator& A, const ResidualPair& res, const ANorms& n, const GeoSeq& ubar) {
    const SeqPair AF = A.apply(res.head);
    const Enclosure finite = nrm(AF.u) + nrm(AF.v);
    return up_only(finite + (n.a11_lap + n.a21_lap) * nrm(ubar) * res.gamma_error);
}

Z1Parts bound_Z1(const BlockTailOperator& A, const SeqPair& U, const Params& p, const GammaTriple& g, int K,
                 const ANorms& n) {
    const int N = A.N;
    const int h = A.head_size();
    if (K <= 0) K = 4 * N - 1;
    if (K < 4 * N - 1) throw std::invalid_argument("bound_Z1: K must be at least 4N-1");
    const Geometry& geom = A.geom;
    const GeoSeq gpu = gamma_prime_times_u(g.g1, U.u);
    const GeoSeq& ubar = U.u;

    // DF columns 0..K, blocks [l][j]
    const int cols = K + 1;
    std::vector<GeoSeq> dfc[2][2];
    for (auto& row : dfc) {
        for (auto& v : row) v.resize(static_cast<std::size_t>(cols));
    }
    for (int k = 0; k < cols; ++k) {
        const DFColumn c = DF_column(U, p, g.g0.head, gpu, k);
        dfc[0][0][static_cast<std::size_t>(k)] = c.c11;
        dfc[0][1][static_cast<std::size_t>(k)] = c.c12;
        dfc[1][0][static_cast<std::size_t>(k)] = c.c21;
        dfc[1][1][static_cast<std::size_t>(k)] = c.c22;
    }

    // Heads: H^{il} times the first 2N rows of DF^{lj}.
    std::vector<Enclosure> headprod[2][2][2];  // [i][l][j], column-major h x cols
    Mat H[2][2];
    for (int i = 0; i < 2; ++i) {
        for (int l = 0; l < 2; ++l) H[i][l] = mid_matrix(A.head[i][l]);
    }
    for (int l = 0; l < 2; ++l) {
        for (int j = 0; j < 2; ++j) {
            MidRadMat X{Mat::Zero(h, cols), Mat::Zero(h, cols)};
            for (int k = 0; k < cols; ++k) {
                const GeoSeq& c = dfc[l][j][static_cast<std::size_t>(k)];
                for (int r = 0; r < h && r <= c.degree(); ++r) {
                    X.mid(r, k) = c[r].mid();
                    X.rad(r, k) = c[r].rad();
                }
            }
            for (int i = 0; i < 2; ++i) headprod[i][l][j] = point_times(H[i][l], X);
        }
    }

    const XiTable xt(geom.nu, K + 6 * N + 2);
    const int hr = A.head_rows();
    Enclosure finite(0.0);
    for (int k = 0; k < cols; ++k) {
        for (int j = 0; j < 2; ++j) {
            Enclosure colnorm(0.0);
            for (int i = 0; i < 2; ++i) {
                GeoSeq b = GeoSeq::zeros(geom, hr - 1);
                for (int l = 0; l < 2; ++l) {
                    const auto& hp = headprod[i][l][j];
                    for (int r = 0; r < hr; ++r) b[r] += hp[static_cast<std::size_t>(k * hr + r)];
                    b = b + tail_apply(A.w[i][l], dfc[l][j][static_cast<std::size_t>(k)], h);
                }
                b = -b;
                if (i == j) b = b + GeoSeq::basis(geom, k);
                colnorm += nrm(b);
            }
            finite = max(finite, over_xi(colnorm, xt, k));
        }
    }

    // Tail: ||I - W * DPhi|| + L^2 / (pi^2 (K-N+1)^2) ||W|| (sigma ||1 - 2u|| + 1)
    const GeoSeq one = GeoSeq::constant(geom, 1.0);
    const Enclosure d(p.d);
    const GeoSeq& gh = g.g0.head;
    const GeoSeq e11 = one - conv(A.w[0][0], gh);
    const GeoSeq e12 = -(conv(A.w[0][0], gpu) + d * A.w[0][1]);
    const GeoSeq e21 = -conv(A.w[1][0], gh);
    const GeoSeq e22 = one - conv(A.w[1][0], gpu) - d * A.w[1][1];
    const Enclosure t1 = max(nrm(e11) + nrm(e21), nrm(e12) + nrm(e22));
    const Enclosure lam = laplacian_eigenvalue(geom, K - N + 1);  // (pi (K-N+1) / L)^2
    const GeoSeq one_2u = one - Enclosure(2.0) * ubar;
    const Enclosure t2 = n.W * (Enclosure(p.sigma) * nrm(one_2u) + Enclosure(1.0)) / lam;

    Z1Parts z;
    z.K = K;
    z.finite = up_only(finite);
    z.tail = up_only(t1 + t2);
    z.gamma = up_only((n.a11_lap + n.a21_lap) * (g.g0.delta + nrm(ubar) * g.g1.delta));
    z.total = up_only(z.finite + z.tail + z.gamma);
    return z;
}

Z2Parts bound_Z2(const ANorms& n, const Params& p, const GammaTriple& g, const GeoSeq& ubar, double rstar) {
    const Enclosure r(rstar);
    const Enclosure lap = n.a11_lap + n.a21_lap;
    const D2FIngredients ing = D2F_ingredients(p, g.g2, ApproxPair::exact(ubar));
    Z2Parts z;
    z.a = up_only(lap * (nrm(g.g1.head) + g.g1.delta));
    z.b = up_only(lap * (ing.gdd_u + ing.gdd * r + (ing.u_norm + r) * ing.gdd_err));
    // D^2 of sigma u (1 - u) is -2 sigma u1 u2 with no ubar factor, so
    // 2 sigma (||A11|| + ||A21||) is needed; the ubar-weighted form is kept as a floor.
    z.c = up_only(ing.two_sigma * max(n.a11_u + n.a21_u + (n.a11 + n.a21) * r, n.a11 + n.a21));
    z.total = up_only(max(z.a, max(z.b, z.c)));
    return z;
}

Certificate nk_check(const Enclosure& Y, const Enclosure& Z1, const Enclosure& Z2, double rstar) {
    Certificate c;
    c.rstar = rstar;
    c.rstar_requested = rstar;
    c.Y = Y;
    c.Z1 = Z1;
    c.Z2 = Z2;
    c.r_min = Enclosure(INFINITY);
    c.r_max = Enclosure(0.0);
    if (!(Y.lo >= 0.0 && Z1.lo >= 0.0 && Z2.lo >= 0.0)) {
        c.status = Status::FailedZ1;
        c.message = "bounds must be nonnegative";
        return c;
    }
    if (!(Z1.hi < 1.0)) {
        c.status = Status::FailedZ1;
        c.message = "Z1 >= 1";
        return c;
    }
    const Enclosure one_z1 = Enclosure(1.0) - Z1;
    const Enclosure disc = one_z1 * one_z1 - Enclosure(2.0) * Y * Z2;
    if (!(disc.lo > 0.0)) {
        c.status = Status::FailedDisc;
        c.message = "2 Y Z2 >= (1 - Z1)^2";
        return c;
    }
    // (1 - Z1 - sqrt(disc)) / Z2 without cancellation; Y / (1 - Z1) when Z2 = 0
    c.r_min = Enclosure(2.0) * Y / (one_z1 + sqrt(disc));
    const double cap = Z2.hi > 0.0 ? (one_z1 / Z2).lo : INFINITY;
    c.r_max = Enclosure(std::min(rstar, cap));
    if (c.r_min.hi < c.r_max.lo) {
        c.status = Status::Proved;
        c.message = "proved";
    } else {
        c.status = Status::FailedRadius;
        c.message = "r_min is not below min(r*, (1 - Z1) / Z2)";
    }
    return c;
}

Certificate certify(const SeqPair& U0, const Params& p, const CertifyOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    p.validate();
    const int N = opt.N > 0 ? opt.N : working_order(U0);
    const SeqPair U{U0.u.resized(N), U0.v.resized(N)};
    const GammaOptions go{N, 2 * N, 0};

    Certificate fail;
    fail.params = p;
    fail.N = N;
    fail.rstar = fail.rstar_requested = opt.rstar;
    fail.Y = fail.Z1 = fail.Z2 = Enclosure(INFINITY);
    fail.r_min = Enclosure(INFINITY);
    fail.r_max = Enclosure(0.0);
    auto finish = [&](Certificate c) {
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return c;
    };

    GammaTriple g0;
    try {
        g0 = gamma_derivatives(p.gamma, ApproxPair::exact(U.v), go);
    } catch (const std::exception& e) {
        fail.status = Status::FailedGamma;
        fail.message = e.what();
        return finish(fail);
    }
    BlockTailOperator A;
    try {
        A = build_A(U, p, g0);
    } catch (const std::exception& e) {
        fail.status = Status::FailedSingular;
        fail.message = e.what();
        return finish(fail);
    }
    const ANorms norms = opnorms_A(A, U.u);
    const ResidualPair res = F_head(U, p, g0.g0);
    const Enclosure Y = bound_Y(A, res, norms, U.u);
    const Z1Parts z1 = bound_Z1(A, U, p, g0, opt.K, norms);

    double rstar = opt.rstar;
    std::string gamma_msg;
    for (int attempt = 0; attempt <= opt.max_halvings; ++attempt, rstar *= 0.5) {
        GammaTriple gr;
        try {
            gr = gamma_derivatives(p.gamma, {U.v, Enclosure(rstar)}, go);
        } catch (const std::exception& e) {
            gamma_msg = e.what();
            continue;
        }
        const Z2Parts z2 = bound_Z2(norms, p, gr, U.u, rstar);
        Certificate c = nk_check(Y, z1.total, z2.total, rstar);
        c.params = p;
        c.N = N;
        c.K = z1.K;
        c.rstar_requested = opt.rstar;
        c.z1 = z1;
        c.z2 = z2;
        c.norms = norms;
        c.gamma_delta = g0.g0.bound();
        c.gamma1_delta = g0.g1.bound();
        c.gamma2_delta_rstar = gr.g2.bound();
        return finish(c);
    }
    fail.status = Status::FailedGamma;
    fail.K = z1.K;
    fail.Y = Y;
    fail.Z1 = z1.total;
    fail.z1 = z1;
    fail.norms = norms;
    fail.message = "gamma enclosure at delta_v = r* failed after halving: " + gamma_msg;
    return finish(fail);
}

namespace {

nlohmann::ordered_json enc_json(const Enclosure& e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", e.hi);
    return {{"lo", to_hex(e.lo)}, {"hi", to_hex(e.hi)}, {"upper", buf}};
}

}  // namespace

std::string certificate_json(const Certificate& c) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "chemoproof-certificate-v1";
    j["status"] = to_string(c.status);
    j["message"] = c.message;
    j["params"] = {{"sigma", c.params.sigma},
                   {"d", c.params.d},
                   {"a", c.params.geom.a},
                   {"b", c.params.geom.b},
                   {"length", enc_json(c.params.geom.length)},
                   {"nu", c.params.geom.nu},
                   {"gamma", describe(c.params.gamma)}};
    j["N"] = c.N;
    j["K"] = c.K;
    j["rstar"] = to_hex(c.rstar);
    j["rstar_requested"] = to_hex(c.rstar_requested);
    j["Y"] = enc_json(c.Y);
    j["Z1"] = enc_json(c.Z1);
    j["Z2"] = enc_json(c.Z2);
    j["r_min"] = enc_json(c.r_min);
    j["r_max"] = enc_json(c.r_max);
    j["diagnostics"] = {{"Z1_finite", enc_json(c.z1.finite)},
                        {"Z1_tail", enc_json(c.z1.tail)},
                        {"Z1_gamma", enc_json(c.z1.gamma)},
                        {"Z2a", enc_json(c.z2.a)},
                        {"Z2b", enc_json(c.z2.b)},
                        {"Z2c", enc_json(c.z2.c)},
                        {"norm_A11_lap", enc_json(c.norms.a11_lap)},
                        {"norm_A21_lap", enc_json(c.norms.a21_lap)},
                        {"norm_A11", enc_json(c.norms.a11)},
                        {"norm_A21", enc_json(c.norms.a21)},
                        {"norm_A11_u", enc_json(c.norms.a11_u)},
                        {"norm_A21_u", enc_json(c.norms.a21_u)},
                        {"norm_W", enc_json(c.norms.W)},
                        {"delta_gamma", to_hex(c.gamma_delta)},
                        {"delta_gamma1", to_hex(c.gamma1_delta)},
                        {"delta_gamma2_rstar", to_hex(c.gamma2_delta_rstar)}};
    j["input_sha256"] = c.input_digest;
    return j.dump(2) + "\n";
}

std::string status_line(const Certificate& c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s Y=%.4e Z1=%.4e Z2=%.4e rmin=%.4e", to_string(c.status).c_str(), c.Y.hi,
                  c.Z1.hi, c.Z2.hi, c.r_min.hi);
    return buf;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace chemoproof
