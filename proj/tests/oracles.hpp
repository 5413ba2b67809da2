#pragma once
// Closed-form reference values used across the test binaries.

#include <floquetcm/types.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

using fcm::Mat;
using fcm::Vec;

inline constexpr double pi = std::numbers::pi;

// Fundamental matrix of the Mobius linearization.
inline Mat mobius_V(double sigma, double t) {
    double c = std::cos(t), s = std::sin(t), ch = std::cos(t / 2), sh = std::sin(t / 2);
    double e = std::exp(sigma * t);
    Mat V(3, 3);
    V << c * ch, -s, -e * sh * c,
         s * ch, c, -e * sh * s,
         sh, 0, e * ch;
    return V;
}

// Fundamental matrix of the cylinder linearization.
inline Mat cylinder_V(double t) {
    double c = std::cos(t), s = std::sin(t), e = std::exp(-2 * t);
    Mat V(3, 3);
    V << e * c, -s, 0,
         e * s, c, 0,
         0, 0, 1;
    return V;
}

inline Vec mobius_zeta2(double t) {
    Vec z(3);
    z << std::cos(t) * std::cos(t / 2), std::sin(t) * std::cos(t / 2), std::sin(t / 2);
    return z;
}

// Relative difference allowing for a sign/scale between parallel vectors.
inline double parallel_error(const Vec& a, const Vec& b) {
    Vec an = a.normalized(), bn = b.normalized();
    return std::min((an - bn).norm(), (an + bn).norm());
}

}  // namespace oracle
