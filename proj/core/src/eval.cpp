#include "symdet/eval.hpp"

#include <algorithm>
#include <stdexcept>

#include "symdet/hemisphere.hpp"

namespace symdet {

std::vector<double> angular_errors(const std::vector<MirrorPlane>& predictions,
                                   const std::vector<MirrorPlane>& ground_truths) {
  if (predictions.size() != ground_truths.size()) {
    throw std::invalid_argument("prediction and ground-truth lists differ in length");
  }
  std::vector<double> errors;
  errors.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    errors.push_back(angle_between_deg(predictions[i].normal(), ground_truths[i].normal()));
  }
  return errors;
}

double aa_at(const std::vector<double>& errors_deg, double theta_deg) {
  if (errors_deg.empty()) {
    throw std::invalid_argument("AA needs at least one error sample");
  }
  if (!(theta_deg > 0.0)) {
    throw std::invalid_argument("AA threshold must be positive");
  }
  // Each sample below theta contributes (theta - e) to the integral of the
  // step function frac(errors < t) over (0, theta].
  double integral = 0.0;
  for (double e : errors_deg) {
    integral += std::max(0.0, theta_deg - e);
  }
  return integral / (theta_deg * static_cast<double>(errors_deg.size()));
}

EvalReport evaluate(const std::vector<double>& errors_deg, const std::vector<double>& thresholds,
                    int curve_samples) {
  if (thresholds.empty()) {
    throw std::invalid_argument("at least one AA threshold is required");
  }
  EvalReport report;
  report.errors_deg = errors_deg;
  for (double theta : thresholds) {
    report.aa.emplace_back(theta, aa_at(errors_deg, theta));
  }
  const double theta_max = *std::max_element(thresholds.begin(), thresholds.end());
  report.curve.reserve(curve_samples);
  for (int i = 1; i <= curve_samples; ++i) {
    const double t = theta_max * static_cast<double>(i) / curve_samples;
    const double below = static_cast<double>(
        std::count_if(errors_deg.begin(), errors_deg.end(), [&](double e) { return e < t; }));
    report.curve.emplace_back(t, below / static_cast<double>(errors_deg.size()));
  }
  return report;
}

}  // namespace symdet
