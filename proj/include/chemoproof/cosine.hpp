// Float-level cosine transforms on the midpoint grid theta_j = pi (j + 1/2) / M.
//
// Non-rigorous; used to build candidates (approximate inverses, Newton
// iterates) whose quality is then checked in interval arithmetic.
#pragma once

#include <span>
#include <vector>

namespace chemoproof {

class CosineGrid {
public:
    explicit CosineGrid(int points);

    [[nodiscard]] int size() const { return m_; }
    [[nodiscard]] double theta(int j) const;
    // cos(n theta_j), looked up exactly from a quarter-wave table.
    [[nodiscard]] double cos_at(int n, int j) const;

    // f(theta_j) for f = c_0 + 2 sum_{n>=1} c_n cos(n theta).
    [[nodiscard]] std::vector<double> synthesize(std::span<const double> c) const;
    // Coefficients 0..degree of the cosine series interpolating the samples.
    // Exact (up to rounding) for series of degree < M.
    [[nodiscard]] std::vector<double> analyze(std::span<const double> f, int degree) const;

private:
    int m_;
    std::vector<double> table_;  // cos(pi k / (2M)), k = 0..4M-1
};

}  // namespace chemoproof
