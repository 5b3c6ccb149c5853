// Cosine-coefficient sequences in the weighted space l1_nu.
//
// A sequence u represents u(x) = u_0 + 2 sum_{n>=1} u_n cos(n pi (x-a)/(b-a)),
// normed by ||u|| = sum xi_n |u_n| with xi_0 = 1, xi_n = 2 nu^n.
#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chemoproof/enclosure.hpp"

namespace chemoproof {

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Geometry {
    double a = 0.0;
    double b = 1.0;
    double nu = 1.0;
    // Encloses b - a. Usually [b] - [a], but can be narrower than what the two
    // doubles imply when the domain is known symbolically (e.g. 3*pi).
    Enclosure length{1.0};

    Geometry() = default;
    Geometry(double a_, double b_, double nu_);
    Geometry(double a_, double b_, double nu_, Enclosure length_);

    // pi / (b - a)
    [[nodiscard]] Enclosure wavenumber() const;
    bool operator==(const Geometry&) const = default;
};

// Throws GeometryError naming `what` when the two geometries differ.
void require_same(const Geometry& g, const Geometry& h, const char* what);

struct GeoSeq {
    Geometry geom;
    std::vector<Enclosure> coeffs;  // indices 0..N

    GeoSeq() = default;
    GeoSeq(Geometry g, std::vector<Enclosure> c);

    static GeoSeq zeros(const Geometry& g, int degree);
    static GeoSeq constant(const Geometry& g, Enclosure c, int degree = 0);
    // e_k, padded with zeros up to `degree` when that is larger than k.
    static GeoSeq basis(const Geometry& g, int k, int degree = 0);
    static GeoSeq from_doubles(const Geometry& g, std::span<const double> c);

    [[nodiscard]] int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    [[nodiscard]] Enclosure at(int n) const {
        return n >= 0 && n < static_cast<int>(coeffs.size()) ? coeffs[static_cast<std::size_t>(n)] : Enclosure(0.0);
    }
    Enclosure& operator[](int n) { return coeffs[static_cast<std::size_t>(n)]; }
    const Enclosure& operator[](int n) const { return coeffs[static_cast<std::size_t>(n)]; }
    [[nodiscard]] std::vector<double> mids() const;
    // Zero-pads (or cuts, without accounting) to the given degree.
    [[nodiscard]] GeoSeq resized(int degree) const;
};

struct SeqPair {
    GeoSeq u;
    GeoSeq v;
};

GeoSeq operator+(const GeoSeq& x, const GeoSeq& y);
GeoSeq operator-(const GeoSeq& x, const GeoSeq& y);
GeoSeq operator-(const GeoSeq& x);
GeoSeq operator*(const Enclosure& c, const GeoSeq& x);

// 1 for n = 0, 2 nu^n otherwise, in plain floating point.
double xi(int n, double nu);

// Directed enclosures of xi_n for n = 0..n_max.
struct XiTable {
    std::vector<double> lo;
    std::vector<double> hi;
    XiTable(double nu, int n_max);
};

Enclosure norm_nu(const GeoSeq& u);
// Same norm over a raw coefficient range, index 0 of `c` being mode `first`.
Enclosure norm_nu(std::span<const Enclosure> c, double nu, int first = 0);

// Reflected convolution; the result has degree N_u + N_v, or max_degree if
// that is smaller (the discarded coefficients are simply not computed).
GeoSeq conv(const GeoSeq& u, const GeoSeq& v, int max_degree = -1);

// (n pi / (b - a))^2
Enclosure laplacian_eigenvalue(const Geometry& g, int n);
GeoSeq laplacian(const GeoSeq& v);
GeoSeq inv_laplacian(const GeoSeq& v);

// Head of degree `degree` and an enclosure of the norm of what was cut off.
std::pair<GeoSeq, Enclosure> truncate(const GeoSeq& u, int degree);

Enclosure eval_at(const GeoSeq& u, double x);
// Non-rigorous: max |u(x)| over uniform samples, for plotting only.
double eval_sup(const GeoSeq& u, int samples = 2048);
// Non-rigorous value of the series at x from midpoints.
double eval_mid(const GeoSeq& u, double x);

class FiniteOperator {
public:
    FiniteOperator() = default;
    FiniteOperator(Geometry g, int rows, int cols);

    static FiniteOperator identity(const Geometry& g, int n);
    // Matrix of v -> w * v restricted to columns 0..cols-1, rows 0..rows-1.
    static FiniteOperator multiplication(const GeoSeq& w, int rows, int cols);

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] const Geometry& geom() const { return geom_; }
    Enclosure& operator()(int r, int c) { return data_[index(r, c)]; }
    const Enclosure& operator()(int r, int c) const { return data_[index(r, c)]; }
    [[nodiscard]] std::span<const Enclosure> column(int c) const {
        return {data_.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(rows_),
                static_cast<std::size_t>(rows_)};
    }

    [[nodiscard]] GeoSeq apply(const GeoSeq& x) const;

private:
    [[nodiscard]] std::size_t index(int r, int c) const {
        return static_cast<std::size_t>(c) * static_cast<std::size_t>(rows_) + static_cast<std::size_t>(r);
    }
    Geometry geom_;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Enclosure> data_;  // column-major
};

// sup_n (1/xi_n) ||L(., n)||
Enclosure opnorm_finite(const FiniteOperator& L);
// sup_n (1/xi_n) max(||L11(., n)|| + ||L21(., n)||, ||L12(., n)|| + ||L22(., n)||)
Enclosure opnorm_block(const FiniteOperator& L11, const FiniteOperator& L12,
                       const FiniteOperator& L21, const FiniteOperator& L22);

// geoseq-v1 text format. Bit-exact round trip.
void write_geoseq(std::ostream& os, const SeqPair& U);
SeqPair read_geoseq(std::istream& is);
void save_geoseq(const std::string& path, const SeqPair& U);
SeqPair load_geoseq(const std::string& path);

}  // namespace chemoproof
