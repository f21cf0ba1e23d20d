#pragma once

// phi-functions of exponential time differencing:
//   phi1(z) = (e^z - 1)/z,  phi2(z) = (e^z - 1 - z)/z^2,
// with a series near z = 0 where the closed forms cancel.

#include <cmath>
#include <complex>

namespace cglb::etd {

template <class T>
T phi1(T z) {
  if (std::abs(z) < 0.5) {
    T term(1.0), sum(1.0);
    for (int j = 2; j <= 20; ++j) {
      term *= z / double(j);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

template <class T>
T phi2(T z) {
  if (std::abs(z) < 0.5) {
    T term(0.5), sum(0.5);
    for (int j = 3; j <= 22; ++j) {
      term *= z / double(j);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0 - z) / (z * z);
}

}  // namespace cglb::etd
