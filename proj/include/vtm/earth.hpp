#pragma once

/// Physical constants for the spherical shallow-water test cases.
/// Sources: the standard suite of Williamson, Drake, Hack, Jakob and
/// Swarztrauber (J. Comput. Phys. 102, 1992), test case 2, and the
/// barotropically unstable jet of Galewsky, Scott and Polvani
/// (Tellus A 56, 2004).

#include <cmath>

namespace vtm::earth {

inline constexpr double radius = 6.37122e6;  // m, Williamson et al. Table 1
inline constexpr double omega = 7.292e-5;    // 1/s, planetary rotation rate
inline constexpr double gravity = 9.80616;   // m/s^2
inline constexpr double day = 86400.0;       // s

namespace williamson2 {
// Solid-body rotation with one revolution in 12 days and a geostrophically
// balanced height field, gh = gh0 - (a*Omega*u0 + u0^2/2) sin^2(theta).
inline constexpr double gh0 = 2.94e4;        // m^2/s^2
inline const double u_max = 2.0 * M_PI * radius / (12.0 * day);
} // namespace williamson2

namespace galewsky {
// Zonal jet confined to (theta0, theta1) with peak speed u_max, balanced
// height from the meridionally integrated geostrophic relation, plus a
// localized height perturbation that triggers the instability.
inline constexpr double u_max = 80.0;            // m/s
inline const double theta0 = M_PI / 7.0;
inline const double theta1 = M_PI / 2.0 - theta0;
inline constexpr double mean_depth = 1.0e4;      // m, sets the height origin
inline constexpr double h_hat = 120.0;           // m, perturbation amplitude
inline const double alpha = 1.0 / 3.0;           // perturbation zonal width
inline const double beta = 1.0 / 15.0;           // perturbation meridional width
inline const double phi2 = M_PI / 4.0;           // perturbation centre latitude
} // namespace galewsky

} // namespace vtm::earth
