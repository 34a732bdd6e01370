#pragma once

#include "xlmimo/common.hpp"

namespace xlmimo {

// Uniform linear array centred at the origin.
//
// Element i (0-based) sits at index m = i - floor(M/2), so the index range is
// {-M/2, ..., M/2 - 1} for even M and {-(M-1)/2, ..., (M-1)/2} for odd M.
struct ArrayGeometry {
  int num_antennas = 64;
  double wavelength = 0.15;  // meters
  double spacing = 0.075;    // meters

  int element_index(int i) const noexcept { return i - num_antennas / 2; }
  int first_index() const noexcept { return element_index(0); }
  int last_index() const noexcept { return element_index(num_antennas - 1); }
  double wavenumber() const noexcept { return 2.0 * kPi / wavelength; }

  // Throws ConfigError unless M >= 1, wavelength > 0, spacing > 0.
  void validate() const;
};

struct UserGeometry {
  double radius = 0.0;  // meters
  double angle = 0.0;   // radians
};

}  // namespace xlmimo
