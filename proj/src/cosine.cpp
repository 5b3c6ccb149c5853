#include "chemoproof/cosine.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chemoproof {

CosineGrid::CosineGrid(int points) : m_(points) {
    if (points < 1) throw std::invalid_argument("CosineGrid: need at least one point");
    const auto period = static_cast<std::size_t>(4 * m_);
    table_.resize(period);
    for (std::size_t k = 0; k < period; ++k) {
        table_[k] = std::cos(std::numbers::pi * static_cast<double>(k) / (2.0 * m_));
    }
}

double CosineGrid::theta(int j) const { return std::numbers::pi * (j + 0.5) / m_; }

double CosineGrid::cos_at(int n, int j) const {
    // n theta_j = pi n (2j+1) / (2M)
    const long long k = static_cast<long long>(n) * (2LL * j + 1) % (4LL * m_);
    return table_[static_cast<std::size_t>(k)];
}

std::vector<double> CosineGrid::synthesize(std::span<const double> c) const {
    std::vector<double> f(static_cast<std::size_t>(m_), 0.0);
    if (c.empty()) return f;
    for (int j = 0; j < m_; ++j) {
        double acc = 0.0;
        for (std::size_t n = c.size() - 1; n >= 1; --n) acc += c[n] * cos_at(static_cast<int>(n), j);
        f[static_cast<std::size_t>(j)] = c[0] + 2.0 * acc;
    }
    return f;
}

std::vector<double> CosineGrid::analyze(std::span<const double> f, int degree) const {
    if (static_cast<int>(f.size()) != m_) throw std::invalid_argument("CosineGrid::analyze: sample count mismatch");
    std::vector<double> c(static_cast<std::size_t>(degree + 1), 0.0);
    for (int n = 0; n <= degree; ++n) {
        double acc = 0.0;
        for (int j = 0; j < m_; ++j) acc += f[static_cast<std::size_t>(j)] * cos_at(n, j);
        c[static_cast<std::size_t>(n)] = acc / m_;
    }
    return c;
}

}  // namespace chemoproof
