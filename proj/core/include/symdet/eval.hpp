#pragma once

#include <vector>

#include "symdet/geometry.hpp"

namespace symdet {

/// Elementwise angle between predicted and ground-truth normals, degrees,
/// sign-insensitive. Lists must have equal length.
std::vector<double> angular_errors(const std::vector<MirrorPlane>& predictions,
                                   const std::vector<MirrorPlane>& ground_truths);

/// Area under the angle-accuracy curve up to theta, normalized to [0, 1]:
/// AA@theta = (1/theta) * integral_0^theta frac(errors < t) dt, evaluated
/// exactly from the sorted step function.
double aa_at(const std::vector<double>& errors_deg, double theta_deg);

struct EvalReport {
  std::vector<double> errors_deg;
  std::vector<std::pair<double, double>> aa;     // (threshold, AA@threshold)
  std::vector<std::pair<double, double>> curve;  // (threshold, frac below)
};

/// AA at each requested threshold plus `curve_samples` accuracy-curve
/// points uniform in (0, max threshold].
EvalReport evaluate(const std::vector<double>& errors_deg, const std::vector<double>& thresholds,
                    int curve_samples = 1000);

}  // namespace symdet
