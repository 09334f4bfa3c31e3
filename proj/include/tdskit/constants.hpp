// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace tdskit::constants {

/// Boltzmann constant in eV/K, used by every Arrhenius expression.
inline constexpr double k_boltzmann_eV_per_K = 8.617333262e-5;

} // namespace tdskit::constants
