#pragma once

// Unit conventions used throughout the library.
//
// All rates and (angular) frequencies are stored as angular frequency in
// rad/ns. Spectroscopy-facing I/O uses micro-electronvolts; the conversion
// is fixed by hbar below (1 ueV ~ 1.5193 rad/ns). Times are in ns unless a
// name says otherwise (the charge-sensing module works in us).

namespace qdsim {

inline constexpr double hbar_uev_ns = 0.65821;  // ueV * ns

inline constexpr double uev_to_rad_ns(double uev) { return uev / hbar_uev_ns; }
inline constexpr double rad_ns_to_uev(double w) { return w * hbar_uev_ns; }

inline constexpr double us_to_ns(double us) { return us * 1e3; }
inline constexpr double ns_to_us(double ns) { return ns * 1e-3; }

}  // namespace qdsim
