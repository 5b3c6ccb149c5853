#include "chemoproof/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "midrad.hpp"

namespace chemoproof {

using namespace rounding;

Geometry::Geometry(double a_, double b_, double nu_)
    : Geometry(a_, b_, nu_, Enclosure(b_) - Enclosure(a_)) {}

Geometry::Geometry(double a_, double b_, double nu_, Enclosure length_) : a(a_), b(b_), nu(nu_), length(length_) {
    if (!(b_ > a_)) throw GeometryError("geometry: need b > a");
    if (!(nu_ >= 1.0)) throw GeometryError("geometry: need nu >= 1");
    if (!(length_.lo > 0.0)) throw GeometryError("geometry: length enclosure must be positive");
}

Enclosure Geometry::wavenumber() const { return pi() / length; }

void require_same(const Geometry& g, const Geometry& h, const char* what) {
    if (!(g == h)) throw GeometryError(std::string(what) + ": geometry mismatch");
}

GeoSeq::GeoSeq(Geometry g, std::vector<Enclosure> c) : geom(g), coeffs(std::move(c)) {
    if (coeffs.empty()) coeffs.emplace_back(0.0);
}

GeoSeq GeoSeq::zeros(const Geometry& g, int degree) {
    return {g, std::vector<Enclosure>(static_cast<std::size_t>(std::max(degree, 0) + 1), Enclosure(0.0))};
}

GeoSeq GeoSeq::constant(const Geometry& g, Enclosure c, int degree) {
    GeoSeq s = zeros(g, degree);
    s[0] = c;
    return s;
}

GeoSeq GeoSeq::basis(const Geometry& g, int k, int degree) {
    GeoSeq s = zeros(g, std::max(k, degree));
    s[k] = Enclosure(1.0);
    return s;
}

GeoSeq GeoSeq::from_doubles(const Geometry& g, std::span<const double> c) {
    std::vector<Enclosure> e(c.begin(), c.end());
    return {g, std::move(e)};
}

std::vector<double> GeoSeq::mids() const {
    std::vector<double> m(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) m[i] = coeffs[i].mid();
    return m;
}

GeoSeq GeoSeq::resized(int degree) const {
    GeoSeq s = *this;
    s.coeffs.resize(static_cast<std::size_t>(std::max(degree, 0) + 1), Enclosure(0.0));
    return s;
}

GeoSeq operator+(const GeoSeq& x, const GeoSeq& y) {
    require_same(x.geom, y.geom, "add");
    GeoSeq r = GeoSeq::zeros(x.geom, std::max(x.degree(), y.degree()));
    for (int n = 0; n <= r.degree(); ++n) r[n] = x.at(n) + y.at(n);
    return r;
}

GeoSeq operator-(const GeoSeq& x, const GeoSeq& y) {
    require_same(x.geom, y.geom, "sub");
    GeoSeq r = GeoSeq::zeros(x.geom, std::max(x.degree(), y.degree()));
    for (int n = 0; n <= r.degree(); ++n) r[n] = x.at(n) - y.at(n);
    return r;
}

GeoSeq operator-(const GeoSeq& x) {
    GeoSeq r = x;
    for (auto& c : r.coeffs) c = -c;
    return r;
}

GeoSeq operator*(const Enclosure& c, const GeoSeq& x) {
    GeoSeq r = x;
    for (auto& e : r.coeffs) e = c * e;
    return r;
}

double xi(int n, double nu) { return n == 0 ? 1.0 : 2.0 * std::pow(nu, n); }

XiTable::XiTable(double nu, int n_max) {
    const auto size = static_cast<std::size_t>(std::max(n_max, 0) + 1);
    lo.resize(size);
    hi.resize(size);
    lo[0] = hi[0] = 1.0;
    double plo = 1.0;
    double phi = 1.0;
    for (std::size_t n = 1; n < size; ++n) {
        plo = mul_down(plo, nu);
        phi = mul_up(phi, nu);
        lo[n] = mul_down(2.0, plo);
        hi[n] = mul_up(2.0, phi);
    }
}

Enclosure norm_nu(std::span<const Enclosure> c, double nu, int first) {
    const XiTable xt(nu, first + static_cast<int>(c.size()));
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const std::size_t n = static_cast<std::size_t>(first) + i;
        lo = add_down(lo, mul_down(xt.lo[n], inf_abs(c[i])));
        hi = add_up(hi, mul_up(xt.hi[n], sup_abs(c[i])));
    }
    return {lo, hi};
}

Enclosure norm_nu(const GeoSeq& u) { return norm_nu(u.coeffs, u.geom.nu, 0); }

GeoSeq conv(const GeoSeq& u, const GeoSeq& v, int max_degree) {
    require_same(u.geom, v.geom, "conv");
    const int nu_ = u.degree();
    const int nv = v.degree();
    int out = nu_ + nv;
    if (max_degree >= 0) out = std::min(out, max_degree);
    GeoSeq r = GeoSeq::zeros(u.geom, out);

    const detail::MidRad uf = detail::symmetric_full(u.coeffs);
    const detail::MidRad vf = detail::symmetric_full(v.coeffs);
    const bool fast = uf.finite && vf.finite;
    for (int n = 0; n <= out; ++n) {
        const int klo = std::max(-nu_, n - nv);
        const int khi = std::min(nu_, n + nv);
        if (klo > khi) continue;
        const auto len = static_cast<std::size_t>(khi - klo + 1);
        const auto ou = static_cast<std::size_t>(klo + nu_);
        const auto ov = static_cast<std::size_t>(klo - n + nv);
        if (fast) {
            r[n] = dot(std::span(uf.mid).subspan(ou, len), std::span(uf.rad).subspan(ou, len),
                       std::span(vf.mid).subspan(ov, len), std::span(vf.rad).subspan(ov, len));
        } else {
            Enclosure acc(0.0);
            for (int k = klo; k <= khi; ++k) acc += u[std::abs(k)] * v[std::abs(n - k)];
            r[n] = acc;
        }
    }
    return r;
}

Enclosure laplacian_eigenvalue(const Geometry& g, int n) {
    if (n == 0) return Enclosure(0.0);
    return pow(Enclosure(static_cast<double>(n)) * g.wavenumber(), 2);
}

GeoSeq laplacian(const GeoSeq& v) {
    GeoSeq r = v;
    const Enclosure k = v.geom.wavenumber();
    for (int n = 0; n <= v.degree(); ++n) r[n] = -(pow(Enclosure(static_cast<double>(n)) * k, 2) * v[n]);
    return r;
}

GeoSeq inv_laplacian(const GeoSeq& v) {
    GeoSeq r = v;
    const Enclosure k = v.geom.wavenumber();
    r[0] = Enclosure(0.0);
    for (int n = 1; n <= v.degree(); ++n) r[n] = -(v[n] / pow(Enclosure(static_cast<double>(n)) * k, 2));
    return r;
}

std::pair<GeoSeq, Enclosure> truncate(const GeoSeq& u, int degree) {
    if (degree >= u.degree()) return {u.resized(degree), Enclosure(0.0)};
    const auto keep = static_cast<std::size_t>(degree + 1);
    GeoSeq head(u.geom, std::vector<Enclosure>(u.coeffs.begin(), u.coeffs.begin() + static_cast<std::ptrdiff_t>(keep)));
    const Enclosure tail = norm_nu(std::span(u.coeffs).subspan(keep), u.geom.nu, degree + 1);
    return {std::move(head), tail};
}

namespace {

// Enclosure of cos over an enclosure of the angle. glibc cos is accurate to
// well under 2 ulp of 1 on the whole range, so a 2^-51 pad plus the angle
// radius (cos is 1-Lipschitz) covers both error sources.
Enclosure cos_enclosure(const Enclosure& theta) {
    const double m = theta.mid();
    const double c = std::cos(m);
    const double pad = add_up(theta.rad(), 0x1p-51);
    return {std::max(-1.0, sub_down(c, pad)), std::min(1.0, add_up(c, pad))};
}

}  // namespace

Enclosure eval_at(const GeoSeq& u, double x) {
    const Enclosure k = u.geom.wavenumber();
    const Enclosure dx = Enclosure(x) - Enclosure(u.geom.a);
    Enclosure acc = u[0];
    for (int n = 1; n <= u.degree(); ++n) {
        const Enclosure c = cos_enclosure(Enclosure(static_cast<double>(n)) * k * dx);
        acc += Enclosure(2.0) * u[n] * c;
    }
    return acc;
}

double eval_mid(const GeoSeq& u, double x) {
    const double k = M_PI / (u.geom.b - u.geom.a);
    double acc = u[0].mid();
    for (int n = 1; n <= u.degree(); ++n) acc += 2.0 * u[n].mid() * std::cos(n * k * (x - u.geom.a));
    return acc;
}

double eval_sup(const GeoSeq& u, int samples) {
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = u.geom.a + (u.geom.b - u.geom.a) * i / std::max(samples - 1, 1);
        best = std::max(best, std::fabs(eval_mid(u, x)));
    }
    return best;
}

FiniteOperator::FiniteOperator(Geometry g, int rows, int cols)
    : geom_(g), rows_(rows), cols_(cols),
      data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), Enclosure(0.0)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("FiniteOperator: negative shape");
}

FiniteOperator FiniteOperator::identity(const Geometry& g, int n) {
    FiniteOperator I(g, n, n);
    for (int i = 0; i < n; ++i) I(i, i) = Enclosure(1.0);
    return I;
}

FiniteOperator FiniteOperator::multiplication(const GeoSeq& w, int rows, int cols) {
    FiniteOperator M(w.geom, rows, cols);
    for (int k = 0; k < cols; ++k) {
        for (int n = 0; n < rows; ++n) {
            M(n, k) = k == 0 ? w.at(n) : w.at(std::abs(n - k)) + w.at(n + k);
        }
    }
    return M;
}

GeoSeq FiniteOperator::apply(const GeoSeq& x) const {
    require_same(geom_, x.geom, "apply");
    if (x.degree() >= cols_) {
        for (int c = cols_; c <= x.degree(); ++c) {
            if (!(x[c] == Enclosure(0.0))) throw std::invalid_argument("apply: input exceeds operator columns");
        }
    }
    GeoSeq y = GeoSeq::zeros(geom_, rows_ - 1);
    for (int c = 0; c < std::min(cols_, x.degree() + 1); ++c) {
        if (x[c] == Enclosure(0.0)) continue;
        for (int r = 0; r < rows_; ++r) y[r] += (*this)(r, c) * x[c];
    }
    return y;
}

namespace {

Enclosure weighted_column(std::span<const Enclosure> col, const XiTable& xt) {
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t k = 0; k < col.size(); ++k) {
        lo = add_down(lo, mul_down(xt.lo[k], inf_abs(col[k])));
        hi = add_up(hi, mul_up(xt.hi[k], sup_abs(col[k])));
    }
    return {lo, hi};
}

Enclosure scale_by_inverse_xi(const Enclosure& s, const XiTable& xt, int n) {
    const auto i = static_cast<std::size_t>(n);
    return {div_down(s.lo, xt.hi[i]), div_up(s.hi, xt.lo[i])};
}

}  // namespace

Enclosure opnorm_finite(const FiniteOperator& L) {
    const XiTable xt(L.geom().nu, std::max(L.rows(), L.cols()));
    Enclosure best(0.0);
    for (int n = 0; n < L.cols(); ++n) {
        best = max(best, scale_by_inverse_xi(weighted_column(L.column(n), xt), xt, n));
    }
    return best;
}

Enclosure opnorm_block(const FiniteOperator& L11, const FiniteOperator& L12,
                       const FiniteOperator& L21, const FiniteOperator& L22) {
    if (L11.cols() != L21.cols() || L12.cols() != L22.cols()) {
        throw std::invalid_argument("opnorm_block: column counts of stacked blocks differ");
    }
    require_same(L11.geom(), L22.geom(), "opnorm_block");
    const int rows = std::max({L11.rows(), L12.rows(), L21.rows(), L22.rows()});
    const int cols = std::max(L11.cols(), L12.cols());
    const XiTable xt(L11.geom().nu, std::max(rows, cols));
    Enclosure best(0.0);
    for (int n = 0; n < cols; ++n) {
        Enclosure left(0.0);
        Enclosure right(0.0);
        if (n < L11.cols()) left = weighted_column(L11.column(n), xt) + weighted_column(L21.column(n), xt);
        if (n < L12.cols()) right = weighted_column(L12.column(n), xt) + weighted_column(L22.column(n), xt);
        best = max(best, scale_by_inverse_xi(max(left, right), xt, n));
    }
    return best;
}

void write_geoseq(std::ostream& os, const SeqPair& U) {
    require_same(U.u.geom, U.v.geom, "write_geoseq");
    const int N = std::max(U.u.degree(), U.v.degree());
    const Geometry& g = U.u.geom;
    os << "geoseq-v1 a=" << to_hex(g.a) << " b=" << to_hex(g.b) << " nu=" << to_hex(g.nu) << " N=" << N << '\n';
    for (int n = 0; n <= N; ++n) {
        const Enclosure u = U.u.at(n);
        const Enclosure v = U.v.at(n);
        os << n << ' ' << to_hex(u.lo) << ' ' << to_hex(u.hi) << ' ' << to_hex(v.lo) << ' ' << to_hex(v.hi) << '\n';
    }
}

namespace {

std::string field(const std::string& token, const std::string& key) {
    const std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0) throw std::runtime_error("geoseq-v1: expected " + prefix + "..., got '" + token + "'");
    return token.substr(prefix.size());
}

}  // namespace

SeqPair read_geoseq(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("geoseq-v1: empty input");
    std::istringstream hs(line);
    std::string magic, ta, tb, tnu, tn;
    hs >> magic >> ta >> tb >> tnu >> tn;
    if (magic != "geoseq-v1") throw std::runtime_error("geoseq-v1: bad header '" + line + "'");
    const double a = parse_hex(field(ta, "a"));
    const double b = parse_hex(field(tb, "b"));
    const double nu = parse_hex(field(tnu, "nu"));
    int N = 0;
    try {
        N = std::stoi(field(tn, "N"));
    } catch (const std::logic_error&) {
        throw std::runtime_error("geoseq-v1: bad N in header");
    }
    if (N < 0) throw std::runtime_error("geoseq-v1: negative N");
    const Geometry g(a, b, nu);
    SeqPair U{GeoSeq::zeros(g, N), GeoSeq::zeros(g, N)};
    for (int n = 0; n <= N; ++n) {
        if (!std::getline(is, line)) throw std::runtime_error("geoseq-v1: missing row " + std::to_string(n));
        std::istringstream ls(line);
        int idx = -1;
        std::string s[4];
        ls >> idx >> s[0] >> s[1] >> s[2] >> s[3];
        if (!ls || idx != n) throw std::runtime_error("geoseq-v1: malformed row " + std::to_string(n));
        U.u[n] = Enclosure(parse_hex(s[0]), parse_hex(s[1]));
        U.v[n] = Enclosure(parse_hex(s[2]), parse_hex(s[3]));
    }
    return U;
}

void save_geoseq(const std::string& path, const SeqPair& U) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_geoseq(os, U);
    if (!os) throw std::runtime_error("write failed: " + path);
}

SeqPair load_geoseq(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read_geoseq(is);
}

}  // namespace chemoproof
