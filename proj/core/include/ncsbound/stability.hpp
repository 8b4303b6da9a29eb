#pragma once

// Small-gain test of a loop closed over a time-varying delay bounded by UBD:
// the loop stays stable when |T(jw)| < 1 / (UBD w) for every w, with T the
// complementary sensitivity of the delay-free loop.

#include <iosfwd>
#include <vector>

#include "ncsbound/lti.hpp"
#include "ncsbound/units.hpp"

namespace ncsbound::stability {

struct Grid {
  double omega_min = 1e-3;  // rad per time unit
  double omega_max = 1e3;
  int points_per_decade = 200;

  /// Log-spaced, both ends included. Throws InvalidArgument.
  std::vector<double> points() const;
};

struct Band {
  double low = 0.0;
  double high = 0.0;
  bool low_at_grid_edge = false;  // the band may continue below the grid
  bool high_at_grid_edge = false;
};

struct Verdict {
  bool holds = true;
  std::vector<Band> violating_bands;
  double margin = 0.0;        // min over the grid of 1/(UBD w) - |T(jw)|
  double margin_omega = 0.0;  // where the minimum sits
  double robust_peak = 0.0;   // max over the grid of |w_h(jw) T(jw)|, 0 when UBD = 0
  double ubd = 0.0;
  TimeUnit unit = TimeUnit::Milliseconds;
  Grid grid;
};

/// Throws UnitMismatch when P, C and ubd disagree on the time unit,
/// NominallyUnstable when 1 + PC has a root with non-negative real part,
/// InvalidArgument for ubd < 0.
Verdict check(const lti::TransferFunction& plant, const lti::TransferFunction& controller, TimeValue ubd,
              const Grid& grid = {});

struct SweepPoint {
  double omega = 0.0;
  double magnitude = 0.0;  // |T(jw)|
  double limit = 0.0;      // 1 / (UBD w); infinite when UBD = 0
  double weighted = 0.0;   // |w_h(jw) T(jw)|
};

std::vector<SweepPoint> sweep(const lti::TransferFunction& plant, const lti::TransferFunction& controller,
                              TimeValue ubd, const Grid& grid = {});

struct TolerableDelay {
  double value = 0.0;
  TimeUnit unit = TimeUnit::Milliseconds;
  bool grid_limited = false;  // the binding frequency is a grid end point
};

/// Largest UBD for which check() holds, by bisection to 1e-6 relative.
TolerableDelay max_tolerable_delay(const lti::TransferFunction& plant, const lti::TransferFunction& controller,
                                   const Grid& grid = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

/// Log-log magnitude plot of |T| against the stability limit, violating
/// bands shaded.
std::string bode_svg(const std::vector<SweepPoint>& points, const Verdict& verdict);

}  // namespace ncsbound::stability
