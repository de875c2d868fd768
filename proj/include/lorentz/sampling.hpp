#pragma once

#include "lorentz/dynamics.hpp"
#include "lorentz/rng.hpp"

namespace lorentz {

/// A draw from mu = (1/4 pi) cos(phi) dphi dtheta at the origin cell:
/// theta = 2 pi U1, phi = asin(2 U2 - 1) with U in (0, 1).
PhasePoint sample_mu(RandomStream &rng);

}  // namespace lorentz
