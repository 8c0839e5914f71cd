#pragma once

#include <cmath>

namespace spatcorr {

/// Neumaier-compensated accumulator. Keeps long kernel sums accurate enough
/// that naive-transliteration oracles match to 1e-12 relative on 1e5-pair data.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

}  // namespace spatcorr
