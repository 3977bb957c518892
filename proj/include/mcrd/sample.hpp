#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcrd {

/// Observed data: outcome y, forcing variable x, optional treatment dose d.
/// Column vectors have equal length; x values must be finite.
struct Sample {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> d;  // empty when no dose column

  std::size_t size() const { return x.size(); }
  bool has_dose() const { return !d.empty(); }

  void check() const;  // throws InvalidInput on malformed columns

  /// Parses `y,x[,d]` CSV with a header row and IEEE-754 decimal doubles.
  static Sample from_csv(std::istream& in);
  static Sample from_csv_file(const std::string& path);
};

/// Sample reordered by ascending x. Ties keep their original order, so the
/// layout is reproducible for any input permutation of distinct rows.
struct SortedSample {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> d;
  std::vector<std::uint32_t> orig_index;

  std::size_t size() const { return x.size(); }
  bool has_dose() const { return !d.empty(); }

  /// First index with x >= value (x is ascending).
  std::size_t lower_bound(double value) const;
};

SortedSample sort_sample(const Sample& s);

}  // namespace mcrd
