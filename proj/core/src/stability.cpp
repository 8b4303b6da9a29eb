#include "ncsbound/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "ncsbound/error.hpp"
#include "ncsbound/report.hpp"

namespace ncsbound::stability {

namespace {

constexpr double kEdgeTolerance = 1e-4;
constexpr double kDelayTolerance = 1e-6;

// Closed loop with its precondition checked once.
struct Loop {
  lti::TransferFunction t;
  double ubd = 0.0;

  // ubd w |T(jw)| >= 1 is a violation; equality included.
  bool violates(double omega) const { return ubd * omega * std::abs(lti::evaluate(t, omega)) >= 1.0; }
};

lti::TransferFunction closed_loop(const lti::TransferFunction& plant, const lti::TransferFunction& controller) {
  auto t = lti::complementary_sensitivity(plant, controller);
  if (t.den.degree() >= 1 && !lti::is_hurwitz(t.den)) {
    throw NominallyUnstable("closed loop without delay is not stable (denominator " + t.den.to_string() +
                            " is not Hurwitz); the delay criterion does not apply");
  }
  return t;
}

double checked_ubd(const lti::TransferFunction& plant, TimeValue ubd) {
  if (ubd.unit != plant.unit) {
    throw UnitMismatch(fmt::format("UBD given in {} but the loop is in {}", to_string(ubd.unit),
                                   to_string(plant.unit)));
  }
  if (!(ubd.value >= 0.0) || !std::isfinite(ubd.value)) throw InvalidArgument("UBD must be finite and >= 0");
  return ubd.value;
}

// Geometric bisection between an admissible and a violating frequency.
double refine_edge(const Loop& loop, double ok, double bad) {
  while (std::abs(bad - ok) > kEdgeTolerance * std::min(ok, bad)) {
    const double mid = std::sqrt(ok * bad);
    if (loop.violates(mid)) {
      bad = mid;
    } else {
      ok = mid;
    }
  }
  return std::sqrt(ok * bad);
}

Verdict run_check(const Loop& loop, TimeUnit unit, const Grid& grid) {
  const auto omegas = grid.points();
  Verdict v;
  v.ubd = loop.ubd;
  v.unit = unit;
  v.grid = grid;
  v.margin = std::numeric_limits<double>::infinity();
  v.margin_omega = omegas.front();
  if (loop.ubd == 0.0) return v;

  const auto weight = lti::robust_weight(loop.ubd, unit);
  std::vector<bool> bad(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double w = omegas[i];
    const auto t = lti::evaluate(loop.t, w);
    const double margin = 1.0 / (loop.ubd * w) - std::abs(t);
    if (margin < v.margin) {
      v.margin = margin;
      v.margin_omega = w;
    }
    v.robust_peak = std::max(v.robust_peak, std::abs(lti::evaluate(weight, w) * t));
    bad[i] = loop.violates(w);
  }

  for (std::size_t i = 0; i < omegas.size();) {
    if (!bad[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < omegas.size() && bad[j + 1]) ++j;
    Band b;
    b.low_at_grid_edge = i == 0;
    b.high_at_grid_edge = j + 1 == omegas.size();
    b.low = b.low_at_grid_edge ? omegas[i] : refine_edge(loop, omegas[i - 1], omegas[i]);
    b.high = b.high_at_grid_edge ? omegas[j] : refine_edge(loop, omegas[j + 1], omegas[j]);
    v.violating_bands.push_back(b);
    i = j + 1;
  }
  v.holds = v.violating_bands.empty();
  return v;
}

}  // namespace

std::vector<double> Grid::points() const {
  if (!(omega_min > 0.0) || !(omega_max > omega_min) || points_per_decade < 1) {
    throw InvalidArgument("frequency grid needs 0 < omega_min < omega_max and points_per_decade >= 1");
  }
  const double lo = std::log10(omega_min);
  const double hi = std::log10(omega_max);
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::round((hi - lo) * points_per_decade)));
  std::vector<double> out(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    out[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(intervals));
  }
  out.front() = omega_min;
  out.back() = omega_max;
  return out;
}

Verdict check(const lti::TransferFunction& plant, const lti::TransferFunction& controller, TimeValue ubd,
              const Grid& grid) {
  const double d = checked_ubd(plant, ubd);
  return run_check({closed_loop(plant, controller), d}, plant.unit, grid);
}

std::vector<SweepPoint> sweep(const lti::TransferFunction& plant, const lti::TransferFunction& controller,
                              TimeValue ubd, const Grid& grid) {
  const double d = checked_ubd(plant, ubd);
  const auto t = closed_loop(plant, controller);
  std::vector<SweepPoint> out;
  const bool weighted = d > 0.0;
  const auto weight = weighted ? lti::robust_weight(d, plant.unit) : lti::TransferFunction::constant(0.0, plant.unit);
  for (double w : grid.points()) {
    const auto tw = lti::evaluate(t, w);
    const double limit = d > 0.0 ? 1.0 / (d * w) : std::numeric_limits<double>::infinity();
    out.push_back({w, std::abs(tw), limit, std::abs(lti::evaluate(weight, w) * tw)});
  }
  return out;
}

TolerableDelay max_tolerable_delay(const lti::TransferFunction& plant, const lti::TransferFunction& controller,
                                   const Grid& grid) {
  Loop loop{closed_loop(plant, controller), 0.0};
  const auto omegas = grid.points();

  // On the grid the test holds exactly for ubd < min_w 1 / (w |T(jw)|); the
  // binding frequency tells whether the grid truncation decides the answer.
  double binding = std::numeric_limits<double>::infinity();
  std::size_t where = 0;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double m = omegas[i] * std::abs(lti::evaluate(loop.t, omegas[i]));
    const double cap = m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
    if (cap < binding) {
      binding = cap;
      where = i;
    }
  }
  TolerableDelay out;
  out.unit = plant.unit;
  if (!std::isfinite(binding)) {
    out.value = binding;
    out.grid_limited = true;
    return out;
  }
  out.grid_limited = where == 0 || where + 1 == omegas.size();

  auto holds = [&](double d) {
    loop.ubd = d;
    for (double w : omegas) {
      if (loop.violates(w)) return false;
    }
    return true;
  };
  double lo = 0.0;
  double hi = binding * 2.0;
  while (holds(hi)) hi *= 2.0;
  while (hi - lo > kDelayTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.value = lo;
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "omega,abs_T,limit,abs_wh_T\n";
  for (const auto& p : points) {
    out << fmt::format("{:.9g},{:.9g},{:.9g},{:.9g}\n", p.omega, p.magnitude, p.limit, p.weighted);
  }
}

std::string bode_svg(const std::vector<SweepPoint>& points, const Verdict& verdict) {
  report::Chart chart;
  const auto unit = to_string(verdict.unit);
  chart.title = fmt::format("|T(jw)| against 1/(UBD w), UBD = {:g} {}", verdict.ubd, unit);
  chart.x_label = fmt::format("w [rad/{}]", unit);
  chart.y_label = "magnitude";
  chart.log_x = true;
  chart.log_y = true;
  report::Series t{"|T(jw)|", {}, {}, "#1f77b4", false};
  report::Series limit{"1/(UBD w)", {}, {}, "#d62728", true};
  for (const auto& p : points) {
    t.x.push_back(p.omega);
    t.y.push_back(p.magnitude);
    limit.x.push_back(p.omega);
    limit.y.push_back(p.limit);
  }
  chart.series = {std::move(t), std::move(limit)};
  for (const auto& b : verdict.violating_bands) chart.shades.push_back({b.low, b.high, "#f4cccc"});
  return report::render_svg(chart);
}

}  // namespace ncsbound::stability
