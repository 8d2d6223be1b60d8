#include "tess/reference.hpp"

#include <algorithm>

#include "tess/error.hpp"

namespace tess {

std::string_view to_string(Sidedness s) noexcept {
  switch (s) {
    case Sidedness::upper: return "upper";
    case Sidedness::lower: return "lower";
    case Sidedness::two: return "two";
  }
  return "two";
}

Sidedness parse_sidedness(std::string_view text) {
  if (text == "upper") return Sidedness::upper;
  if (text == "lower") return Sidedness::lower;
  if (text == "two") return Sidedness::two;
  fail(ErrorCode::invalid_argument,
       "unknown sidedness '" + std::string(text) + "' (expected upper, lower or two)");
}

ReferenceDistribution::ReferenceDistribution(std::vector<double> controls)
    : sorted_(std::move(controls)) {
  if (sorted_.empty()) {
    fail(ErrorCode::invalid_argument, "reference distribution needs at least one control");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double ReferenceDistribution::cdf(double y) const noexcept {
  const auto le = std::upper_bound(sorted_.begin(), sorted_.end(), y) - sorted_.begin();
  return static_cast<double>(le) / static_cast<double>(sorted_.size());
}

namespace {

// Numerators over the common denominator n + 1.
struct RankRange {
  std::size_t low = 0;
  std::size_t high = 0;
  std::size_t denom = 1;
};

RankRange upper_ranks(std::span<const double> sorted, double y) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), y);
  const auto hi = std::upper_bound(lo, sorted.end(), y);
  const auto greater = static_cast<std::size_t>(sorted.end() - hi);
  const auto equal = static_cast<std::size_t>(hi - lo);
  return {greater, greater + equal + 1, sorted.size() + 1};
}

RankRange lower_ranks(std::span<const double> sorted, double y) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), y);
  const auto hi = std::upper_bound(lo, sorted.end(), y);
  const auto less = static_cast<std::size_t>(lo - sorted.begin());
  const auto equal = static_cast<std::size_t>(hi - lo);
  return {less, less + equal + 1, sorted.size() + 1};
}

PValueRange to_range(std::size_t low, std::size_t high, std::size_t denom) {
  const double d = static_cast<double>(denom);
  return {static_cast<double>(low) / d, static_cast<double>(high) / d};
}

// Image of Uniform(a, b] under p -> 2 min(p, 1 - p). Exact for ranges on one
// side of 1/2; a range straddling 1/2 maps onto (2 min(a, 1 - b), 1], which is
// exactly uniform when the straddle is symmetric (the untied middle rank).
// Integer numerators keep the two tails bit-identical.
PValueRange fold_two_sided(const RankRange& r) {
  const std::size_t d = r.denom;
  if (2 * r.high <= d) return to_range(2 * r.low, 2 * r.high, d);
  if (2 * r.low >= d) return to_range(2 * (d - r.high), 2 * (d - r.low), d);
  return {to_range(2 * std::min(r.low, d - r.high), d, d).p_min, 1.0};
}

}  // namespace

PValueRange p_value_range(const ReferenceDistribution& ref, double y, Sidedness sidedness) {
  const auto up = upper_ranks(ref.outcomes(), y);
  switch (sidedness) {
    case Sidedness::upper: return to_range(up.low, up.high, up.denom);
    case Sidedness::lower: {
      const auto r = lower_ranks(ref.outcomes(), y);
      return to_range(r.low, r.high, r.denom);
    }
    case Sidedness::two: return fold_two_sided(up);
  }
  return to_range(up.low, up.high, up.denom);
}

double significance_mass(const PValueRange& r, double alpha) noexcept {
  if (alpha <= r.p_min) return 0.0;
  if (alpha >= r.p_max) return 1.0;
  return (alpha - r.p_min) / (r.p_max - r.p_min);
}

std::vector<double> candidate_alphas(std::span<const PValueRange> ranges, double alpha_min,
                                     double alpha_max) {
  if (!(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max < 1.0)) {
    fail(ErrorCode::invalid_argument, "alpha window must satisfy 0 < alpha_min < alpha_max < 1");
  }
  std::vector<double> out{alpha_min, alpha_max};
  const auto keep = [&](double a) {
    if (a >= alpha_min && a <= alpha_max) out.push_back(a);
  };
  for (const auto& r : ranges) {
    keep(r.p_min);
    keep(r.p_max);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace tess
