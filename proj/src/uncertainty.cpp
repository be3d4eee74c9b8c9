#include "utrack/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "utrack/error.hpp"

namespace utrack {

void UncertaintyMargins::validate() const {
  if (!(m1 > 0.0 && m1 < 1.0)) throw Error(ErrorCode::InvalidConfig, "m1 must lie in (0, 1)");
  if (!(m2 > 0.0 && m2 < 1.0)) throw Error(ErrorCode::InvalidConfig, "m2 must lie in (0, 1)");
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "clamp_eps must lie in (0, 0.5)");
  }
}

double association_risk(double c1, double c2, double clamp_eps) {
  const double a = std::clamp(c1, clamp_eps, 1.0 - clamp_eps);
  const double b = std::clamp(c2, clamp_eps, 1.0 - clamp_eps);
  return -std::log(a) - std::log(1.0 - b);
}

double adaptive_threshold(double c1, const UncertaintyMargins& margins) {
  return -std::log(margins.m1) - std::log(std::max(1.0 + margins.m2 - c1, margins.clamp_eps));
}

AssociationVerdict association_uncertainty(double c1, double c2, const UncertaintyMargins& margins) {
  AssociationVerdict v;
  v.c1 = c1;
  v.c2 = c2;
  v.sigma = association_risk(c1, c2, margins.clamp_eps);
  v.gamma = adaptive_threshold(c1, margins);
  v.delta = v.sigma - v.gamma;
  v.uncertain = v.delta > 0.0;
  return v;
}

double second_best(std::span<const double> row, std::size_t assigned) {
  double best = -INFINITY;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i != assigned) best = std::max(best, row[i]);
  }
  return std::isfinite(best) ? best : 0.0;
}

double tracklet_uncertainty(std::span<const double> deltas) {
  if (deltas.empty()) throw Error(ErrorCode::EmptyHistory, "tracklet has no association history");
  double sum = 0.0;
  for (double d : deltas) sum += std::exp(d);
  return sum / static_cast<double>(deltas.size());
}

}  // namespace utrack
