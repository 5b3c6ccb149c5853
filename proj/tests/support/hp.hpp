// High-precision reference arithmetic for oracles.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <random>

#include "chemoproof/enclosure.hpp"

namespace hp {

using Real = boost::multiprecision::cpp_bin_float_50;

inline bool inside(const chemoproof::Enclosure& e, const Real& x) {
    return Real(e.lo) <= x && x <= Real(e.hi);
}

// A random member of [lo, hi]; endpoints are hit with some probability so
// that the extreme cases get exercised too.
inline double member(const chemoproof::Enclosure& e, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 9);
    const int k = pick(rng);
    if (k == 0) return e.lo;
    if (k == 1) return e.hi;
    std::uniform_real_distribution<double> t(0.0, 1.0);
    const double x = e.lo + t(rng) * (e.hi - e.lo);
    return std::min(std::max(x, e.lo), e.hi);
}

}  // namespace hp
