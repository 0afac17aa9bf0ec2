#include "cascade/subsidy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cascade {

namespace {

void require_positive(Reward R) {
  if (!R.positive()) throw std::invalid_argument("subsidy needs reward R > 0");
}

// (q^k - 1) / (q^k + 1) for q in (0, 1), stable for any integer k.
double odds_contrast(double q, std::int64_t k) {
  if (k >= 0) {
    const double x = std::pow(q, static_cast<double>(k));
    return (x - 1.0) / (x + 1.0);
  }
  const double y = std::pow(q, static_cast<double>(-k));
  return (1.0 - y) / (1.0 + y);
}

constexpr std::int64_t kLogSpaceDepth = 300;

}  // namespace

double gamma(const InformativeCounts& counts, SignalStrength p) {
  const double q = p.odds_against();
  const auto d = counts.d();
  if (d > kLogSpaceDepth || d < -kLogSpaceDepth) {
    return std::exp(static_cast<double>(d) * std::log(q));
  }
  return std::pow(q, static_cast<double>(d));
}

SubsidyBounds subsidy_bounds(double gamma, SignalStrength p, Reward R) {
  require_positive(R);
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  const double q = p.odds_against();
  const double r = R.value();
  if (std::isinf(gamma)) return {r, r};
  const double qg = q * gamma;
  double lower = r * (qg - 1.0) / (1.0 + qg);
  double upper = r * (gamma - q) / (gamma + q);
  // q * gamma may overflow for finite gamma; both endpoints tend to R.
  if (std::isinf(qg)) lower = r;
  if (std::isnan(upper)) upper = r;
  return {lower, upper};
}

SubsidyBounds subsidy_bounds_at(const InformativeCounts& counts,
                                SignalStrength p, Reward R) {
  require_positive(R);
  const double q = p.odds_against();
  const auto d = counts.d();
  // q gamma = q^(d+1) and gamma / q = q^(d-1).
  return {R.value() * odds_contrast(q, d + 1), R.value() * odds_contrast(q, d - 1)};
}

double subsidy_amount(const InformativeCounts& counts, SignalStrength p,
                      Reward R) {
  require_positive(R);
  if (phase(counts) != Phase::IncorrectCascade) return 0.0;
  const double lower = subsidy_bounds_at(counts, p, R).lower;
  // Deep states round the lower bound up to R itself; keep payment < R.
  return std::clamp(lower, 0.0, std::nextafter(R.value(), 0.0));
}

SubsidyQuote quote(const InformativeCounts& counts, SignalStrength p,
                   Reward R) {
  const auto bounds = subsidy_bounds_at(counts, p, R);
  return {gamma(counts, p), bounds.lower, bounds.upper,
          subsidy_amount(counts, p, R)};
}

}  // namespace cascade
