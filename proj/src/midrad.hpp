// Internal helpers for midpoint-radius kernels.
#pragma once

#include <span>
#include <vector>

#include "chemoproof/enclosure.hpp"

namespace chemoproof::detail {

struct MidRad {
    std::vector<double> mid;
    std::vector<double> rad;
    bool finite = true;
};

inline MidRad split(std::span<const Enclosure> c) {
    MidRad m;
    m.finite = split_midrad(c, m.mid, m.rad);
    return m;
}

// f[k + N] = c_{|k|} for k = -N..N, so reflected sums become plain slices.
inline MidRad symmetric_full(std::span<const Enclosure> c) {
    const MidRad half = split(c);
    const std::size_t n = c.size();
    MidRad f;
    f.finite = half.finite;
    if (n == 0) return f;
    f.mid.resize(2 * n - 1);
    f.rad.resize(2 * n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        f.mid[n - 1 + k] = f.mid[n - 1 - k] = half.finite ? half.mid[k] : 0.0;
        f.rad[n - 1 + k] = f.rad[n - 1 - k] = half.finite ? half.rad[k] : 0.0;
    }
    return f;
}

}  // namespace chemoproof::detail
