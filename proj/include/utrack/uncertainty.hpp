#pragma once

#include <cstddef>
#include <span>

namespace utrack {

/// Margins of the association check: an association is suspicious when its
/// similarity is below m1, or when the runner-up is within m2 of it.
struct UncertaintyMargins {
  double m1 = 0.5;
  double m2 = 0.05;
  double clamp_eps = 1e-6;  // similarities are clamped to [eps, 1 - eps] before logs

  void validate() const;
};

struct AssociationVerdict {
  double c1 = 0.0;     // assigned similarity
  double c2 = 0.0;     // strongest competing similarity in the same row
  double sigma = 0.0;  // association risk
  double gamma = 0.0;  // adaptive threshold
  double delta = 0.0;  // sigma - gamma
  bool uncertain = false;
};

/// -ln(c1) - ln(1 - c2) on clamped similarities.
double association_risk(double c1, double c2, double clamp_eps = 1e-6);

/// -ln(m1) - ln(1 + m2 - c1); the second argument is floored at clamp_eps.
double adaptive_threshold(double c1, const UncertaintyMargins& margins);

AssociationVerdict association_uncertainty(double c1, double c2, const UncertaintyMargins& margins);

/// Largest entry of `row` other than `assigned`; 0 for a single-entry row.
double second_best(std::span<const double> row, std::size_t assigned);

/// Mean of exp(delta) over an association history. Throws EmptyHistory.
double tracklet_uncertainty(std::span<const double> deltas);

}  // namespace utrack
