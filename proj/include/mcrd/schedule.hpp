#pragma once

#include <cstddef>
#include <vector>

#include "mcrd/sample.hpp"

namespace mcrd {

/// One threshold: eligibility switches from dose d_lo to d_hi at x = c.
struct Cutoff {
  double c;
  double d_lo;
  double d_hi;
};

/// Strictly increasing cutoffs inside the open domain (x_min, x_max).
/// Segment s is [c_s, c_{s+1}) with c_0 = x_min and c_{K+1} = x_max.
struct CutoffSchedule {
  std::vector<Cutoff> cutoffs;
  double x_min = 0.0;
  double x_max = 1.0;

  std::size_t size() const { return cutoffs.size(); }

  void check() const;  // UnorderedCutoffs / InvalidInput

  /// Segment index in 0..K containing x (clamped at the domain ends).
  int segment_of(double x) const;

  /// Dose received on segment s (d_lo of cutoff s+1, or d_hi of cutoff K).
  double dose_on_segment(int s) const;

  double segment_lo(int s) const;
  double segment_hi(int s) const;
};

/// Per-cutoff bandwidths plus polynomial orders for both estimation steps.
struct BandwidthPlan {
  std::vector<double> h1;  // length K
  double h2 = 0.0;         // second-step bandwidth; may be +inf
  int rho1 = 1;
  int rho2 = 1;
};

struct WindowReport {
  int cutoff = 0;  // 1-based
  double h1_requested = 0.0;
  double h1_effective = 0.0;
  bool clipped = false;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t distinct_left = 0;
  std::size_t distinct_right = 0;
};

struct ValidationReport {
  std::vector<WindowReport> windows;
  bool any_clipped = false;

  std::vector<double> effective_h1() const;
};

/// Checks window feasibility for one-sided fits of order rho1. Bandwidths
/// that would let a window reach past an adjacent cutoff are clipped to the
/// cutoff gap (when `clip` is set) rather than rejected; each side of every
/// cutoff must still contain at least rho1+2 distinct x values.
ValidationReport validate_schedule(const SortedSample& s, const CutoffSchedule& sched,
                                   const BandwidthPlan& plan, bool clip = true);
ValidationReport validate_schedule(const Sample& s, const CutoffSchedule& sched,
                                   const BandwidthPlan& plan, bool clip = true);

/// Clipping alone (no data counts); used where windows must be normalized
/// before fitting.
std::vector<double> clip_bandwidths(const CutoffSchedule& sched, const std::vector<double>& h1);

}  // namespace mcrd
