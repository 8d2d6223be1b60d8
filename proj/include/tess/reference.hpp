#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace tess {

/// Which tail of the control distribution counts as "extreme".
enum class Sidedness { upper, lower, two };

[[nodiscard]] std::string_view to_string(Sidedness s) noexcept;
[[nodiscard]] Sidedness parse_sidedness(std::string_view text);

/// Half-open empirical p-value interval (p_min, p_max]. A point drawn
/// uniformly inside the interval is exactly Uniform(0,1) under exchangeability.
struct PValueRange {
  double p_min = 0.0;
  double p_max = 1.0;

  friend bool operator==(const PValueRange&, const PValueRange&) = default;
};

/// Sorted control outcomes of one covariate profile.
class ReferenceDistribution {
 public:
  /// Takes ownership of the outcomes and sorts them; throws on empty input.
  explicit ReferenceDistribution(std::vector<double> controls);

  [[nodiscard]] std::span<const double> outcomes() const noexcept { return sorted_; }
  [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }

  /// Empirical CDF: fraction of controls <= y.
  [[nodiscard]] double cdf(double y) const noexcept;

 private:
  std::vector<double> sorted_;
};

/// Rank-based p-value range with the (n_c + 1) denominator.
///
/// upper: G = #{controls > y}, E = #{controls == y}
///        -> (G / (n+1), (G + E + 1) / (n+1)]
/// lower: mirror image using #{controls < y}
/// two:   the upper range folded through p -> 2 min(p, 1 - p)
[[nodiscard]] PValueRange p_value_range(const ReferenceDistribution& ref, double y,
                                        Sidedness sidedness);

/// Fraction of the range's probability mass at or below alpha.
[[nodiscard]] double significance_mass(const PValueRange& r, double alpha) noexcept;

/// Sorted distinct range endpoints inside [alpha_min, alpha_max], plus both
/// window ends. Between consecutive entries N_alpha is linear in alpha.
[[nodiscard]] std::vector<double> candidate_alphas(std::span<const PValueRange> ranges,
                                                   double alpha_min, double alpha_max);

}  // namespace tess
