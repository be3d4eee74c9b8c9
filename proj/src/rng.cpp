#include "utrack/rng.hpp"

#include <cmath>
#include <numbers>

#include "utrack/error.hpp"

namespace utrack {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateCorrespondence: return "DegenerateCorrespondence";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateEmbedding: return "DuplicateEmbedding";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::NoHistory: return "NoHistory";
    case ErrorCode::NonPositiveSize: return "NonPositiveSize";
    case ErrorCode::OutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double Rng::normal() {
  if (cached_normal_) {
    double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

}  // namespace utrack
