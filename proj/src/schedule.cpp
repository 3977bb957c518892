#include "mcrd/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mcrd/error.hpp"

namespace mcrd {

void CutoffSchedule::check() const {
  if (cutoffs.empty()) throw Error(ErrorCode::InvalidInput, "schedule has no cutoffs");
  if (!(x_min < x_max)) throw Error(ErrorCode::InvalidInput, "domain is empty");
  for (std::size_t j = 0; j < cutoffs.size(); ++j) {
    if (!std::isfinite(cutoffs[j].c))
      throw Error(ErrorCode::InvalidInput, "non-finite cutoff value");
    if (j > 0 && !(cutoffs[j - 1].c < cutoffs[j].c))
      throw Error(ErrorCode::UnorderedCutoffs,
                  "cutoffs must be strictly increasing (violated at index " +
                      std::to_string(j + 1) + ")");
  }
  if (!(x_min < cutoffs.front().c) || !(cutoffs.back().c < x_max))
    throw Error(ErrorCode::InvalidInput, "cutoffs must lie strictly inside the domain");
}

int CutoffSchedule::segment_of(double x) const {
  // segment s is [c_s, c_{s+1}); returns the count of cutoffs with c <= x
  auto it = std::upper_bound(cutoffs.begin(), cutoffs.end(), x,
                             [](double v, const Cutoff& cj) { return v < cj.c; });
  return static_cast<int>(it - cutoffs.begin());
}

double CutoffSchedule::dose_on_segment(int s) const {
  const int K = static_cast<int>(cutoffs.size());
  if (s <= 0) return cutoffs.front().d_lo;
  if (s >= K) return cutoffs.back().d_hi;
  return cutoffs[s].d_lo;  // dose below cutoff s+1 equals dose above cutoff s
}

double CutoffSchedule::segment_lo(int s) const {
  return s <= 0 ? x_min : cutoffs[s - 1].c;
}

double CutoffSchedule::segment_hi(int s) const {
  const int K = static_cast<int>(cutoffs.size());
  return s >= K ? x_max : cutoffs[s].c;
}

std::vector<double> ValidationReport::effective_h1() const {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(w.h1_effective);
  return out;
}

std::vector<double> clip_bandwidths(const CutoffSchedule& sched, const std::vector<double>& h1) {
  const std::size_t K = sched.size();
  if (h1.size() != K)
    throw Error(ErrorCode::InvalidInput, "bandwidth count does not match cutoff count");
  std::vector<double> out = h1;
  for (std::size_t j = 0; j + 1 < K; ++j) {
    const double gap = sched.cutoffs[j + 1].c - sched.cutoffs[j].c;
    out[j] = std::min(out[j], gap);
    out[j + 1] = std::min(out[j + 1], gap);
  }
  for (std::size_t j = 0; j < K; ++j) {
    if (!(out[j] > 0.0))
      throw Error(ErrorCode::InvalidInput,
                  "bandwidth must be positive at cutoff " + std::to_string(j + 1));
  }
  return out;
}

namespace {

std::size_t count_distinct(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  std::size_t distinct = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (i == lo || x[i] != x[i - 1]) ++distinct;
  }
  return distinct;
}

}  // namespace

ValidationReport validate_schedule(const SortedSample& s, const CutoffSchedule& sched,
                                   const BandwidthPlan& plan, bool clip) {
  sched.check();
  const std::size_t K = sched.size();
  if (plan.h1.size() != K)
    throw Error(ErrorCode::InvalidInput, "plan.h1 length does not match cutoff count");
  if (plan.rho1 < 0) throw Error(ErrorCode::InvalidInput, "rho1 must be non-negative");

  std::vector<double> eff = clip ? clip_bandwidths(sched, plan.h1) : plan.h1;
  if (!clip) {
    for (std::size_t j = 0; j + 1 < K; ++j) {
      const double gap = sched.cutoffs[j + 1].c - sched.cutoffs[j].c;
      if (eff[j] > gap || eff[j + 1] > gap)
        throw Error(ErrorCode::InvalidInput,
                    "window at cutoff " + std::to_string(j + 1) + " crosses its neighbor");
    }
  }

  ValidationReport report;
  report.windows.resize(K);
  const std::size_t need = static_cast<std::size_t>(plan.rho1) + 2;
  for (std::size_t j = 0; j < K; ++j) {
    WindowReport& w = report.windows[j];
    w.cutoff = static_cast<int>(j + 1);
    w.h1_requested = plan.h1[j];
    w.h1_effective = eff[j];
    w.clipped = eff[j] != plan.h1[j];
    report.any_clipped = report.any_clipped || w.clipped;

    const double c = sched.cutoffs[j].c;
    // left window (c-h, c); right window [c, c+h)
    const std::size_t left_lo = s.lower_bound(std::nextafter(c - eff[j], c));
    const std::size_t left_hi = s.lower_bound(c);
    const std::size_t right_lo = left_hi;
    const std::size_t right_hi = s.lower_bound(c + eff[j]);

    w.n_left = left_hi - left_lo;
    w.n_right = right_hi - right_lo;
    w.distinct_left = count_distinct(s.x, left_lo, left_hi);
    w.distinct_right = count_distinct(s.x, right_lo, right_hi);

    if (w.distinct_left < need)
      throw Error(ErrorCode::EmptyWindow, "cutoff " + std::to_string(j + 1) +
                                              " left window has " +
                                              std::to_string(w.distinct_left) +
                                              " distinct x values, needs " +
                                              std::to_string(need));
    if (w.distinct_right < need)
      throw Error(ErrorCode::EmptyWindow, "cutoff " + std::to_string(j + 1) +
                                              " right window has " +
                                              std::to_string(w.distinct_right) +
                                              " distinct x values, needs " +
                                              std::to_string(need));
  }
  return report;
}

ValidationReport validate_schedule(const Sample& s, const CutoffSchedule& sched,
                                   const BandwidthPlan& plan, bool clip) {
  return validate_schedule(sort_sample(s), sched, plan, clip);
}

}  // namespace mcrd
