#pragma once

#include <numbers>

namespace kickdyn::units {

/// Femtoseconds per atomic unit of time. Internals are pure atomic units;
/// this constant is applied only at I/O boundaries.
inline constexpr double kFsPerAu = 0.024188843;

constexpr double fs_to_au(double fs) noexcept { return fs / kFsPerAu; }
constexpr double au_to_fs(double au) noexcept { return au * kFsPerAu; }

/// Electronic period of hydrogen, T_e = 2 pi a.u.
inline constexpr double kElectronicPeriod = 2.0 * std::numbers::pi;

} // namespace kickdyn::units
