#include "wavedecay/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wavedecay/error.hpp"

namespace wavedecay {
namespace {

// Node positions within this many grid spacings of an endpoint count as on
// the endpoint, hence outside the open set.
constexpr double kEndpointSlack = 1e-9;

std::vector<Interval> merged(std::span<const Interval> omega) {
  std::vector<Interval> sorted(omega.begin(), omega.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : sorted) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double indicator_1d(double x, const Interval& iv, double smoothing, double slack) {
  if (smoothing > 0.0) {
    return smooth_ramp(x - iv.lo, smoothing) * smooth_ramp(iv.hi - x, smoothing);
  }
  return (x > iv.lo + slack && x < iv.hi - slack) ? 1.0 : 0.0;
}

double integrate_nodes(const std::vector<double>& values, double cell_volume) {
  return cell_volume * std::accumulate(values.begin(), values.end(), 0.0);
}

}  // namespace

Grid::Grid(int dimension, double length, double length2, int cells, int cells2)
    : dimension_(dimension),
      length_(length),
      length2_(length2),
      cells_(cells),
      cells2_(cells2) {}

Grid Grid::interval(double length, int cells) {
  if (!(length > 0.0)) throw InvalidArgument("grid length must be positive");
  if (cells < kMinCells) {
    throw InvalidArgument("grid needs at least " + std::to_string(kMinCells) +
                          " cells");
  }
  return Grid(1, length, 0.0, cells, 0);
}

Grid Grid::rectangle(double length, double length2, int cells, int cells2) {
  if (!(length > 0.0) || !(length2 > 0.0)) {
    throw InvalidArgument("grid lengths must be positive");
  }
  if (cells < kMinCells || cells2 < kMinCells) {
    throw InvalidArgument("grid needs at least " + std::to_string(kMinCells) +
                          " cells per direction");
  }
  return Grid(2, length, length2, cells, cells2);
}

bool Grid::is_boundary(std::size_t k) const {
  const std::size_t i = k % nx();
  if (i == 0 || i + 1 == nx()) return true;
  if (dimension_ == 1) return false;
  const std::size_t j = k / nx();
  return j == 0 || j + 1 == ny();
}

std::vector<std::size_t> Grid::interior() const {
  std::vector<std::size_t> out;
  out.reserve(node_count());
  for (std::size_t k = 0; k < node_count(); ++k) {
    if (!is_boundary(k)) out.push_back(k);
  }
  return out;
}

double Grid::max_stable_dt(double cfl) const {
  if (dimension_ == 1) return cfl * dx();
  return cfl / std::sqrt(1.0 / (dx() * dx()) + 1.0 / (dy() * dy()));
}

DamperProfile::DamperProfile(std::vector<double> values,
                             std::vector<Interval> intervals,
                             std::vector<Rect> rects, double amplitude,
                             double smoothing, double cell_volume)
    : values_(std::move(values)),
      intervals_(std::move(intervals)),
      rects_(std::move(rects)),
      amplitude_(amplitude),
      smoothing_(smoothing),
      integral_(integrate_nodes(values_, cell_volume)) {}

double DamperProfile::sup() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double smooth_ramp(double z, double width) {
  if (z <= 0.0) return 0.0;
  if (width <= 0.0 || z >= width) return 1.0;
  const double s = z / width;
  return s * s * (3.0 - 2.0 * s);
}

DamperProfile build_damper(const Grid& grid, std::vector<Interval> omega,
                           double amplitude, double smoothing) {
  if (grid.dimension() != 1) {
    throw InvalidArgument("interval dampers need a 1D grid; use rectangles in 2D");
  }
  if (omega.empty()) {
    throw InvalidArgument("damper support is empty: no damping anywhere");
  }
  if (!(amplitude > 0.0)) throw InvalidArgument("damper amplitude must be positive");
  if (smoothing < 0.0) throw InvalidArgument("smoothing width must be nonnegative");
  for (const auto& iv : omega) {
    if (!(iv.lo < iv.hi)) throw InvalidArgument("damper interval must have lo < hi");
    if (iv.lo < 0.0 || iv.hi > grid.length()) {
      throw InvalidArgument("damper interval lies outside the domain");
    }
  }
  const double slack = kEndpointSlack * grid.dx();
  std::vector<double> a(grid.node_count(), 0.0);
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    if (grid.is_boundary(i)) continue;
    double ind = 0.0;
    for (const auto& iv : omega) {
      ind = std::max(ind, indicator_1d(grid.x(i), iv, smoothing, slack));
    }
    a[i] = amplitude * ind;
  }
  DamperProfile profile(std::move(a), std::move(omega), {}, amplitude, smoothing,
                        grid.cell_volume());
  if (profile.vanishes()) {
    throw InvalidArgument("damper support contains no interior grid node");
  }
  return profile;
}

DamperProfile build_damper(const Grid& grid, std::vector<Rect> omega,
                           double amplitude, double smoothing) {
  if (grid.dimension() != 2) {
    throw InvalidArgument("rectangle dampers need a 2D grid");
  }
  if (omega.empty()) {
    throw InvalidArgument("damper support is empty: no damping anywhere");
  }
  if (!(amplitude > 0.0)) throw InvalidArgument("damper amplitude must be positive");
  if (smoothing < 0.0) throw InvalidArgument("smoothing width must be nonnegative");
  for (const auto& r : omega) {
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1)) {
      throw InvalidArgument("damper rectangle must have positive extent");
    }
    if (r.x0 < 0.0 || r.x1 > grid.length() || r.y0 < 0.0 || r.y1 > grid.length2()) {
      throw InvalidArgument("damper rectangle lies outside the domain");
    }
  }
  const double sx = kEndpointSlack * grid.dx();
  const double sy = kEndpointSlack * grid.dy();
  std::vector<double> a(grid.node_count(), 0.0);
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.is_boundary(k)) continue;
      double ind = 0.0;
      for (const auto& r : omega) {
        const double fx = indicator_1d(grid.x(i), {r.x0, r.x1}, smoothing, sx);
        const double fy = indicator_1d(grid.y(j), {r.y0, r.y1}, smoothing, sy);
        ind = std::max(ind, fx * fy);
      }
      a[k] = amplitude * ind;
    }
  }
  DamperProfile profile(std::move(a), {}, std::move(omega), amplitude, smoothing,
                        grid.cell_volume());
  if (profile.vanishes()) {
    throw InvalidArgument("damper support contains no interior grid node");
  }
  return profile;
}

DamperProfile uniform_damper(const Grid& grid, double amplitude) {
  if (amplitude < 0.0) throw InvalidArgument("damper amplitude must be nonnegative");
  std::vector<double> a(grid.node_count(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!grid.is_boundary(k)) a[k] = amplitude;
  }
  std::vector<Interval> iv;
  std::vector<Rect> rc;
  if (grid.dimension() == 1) {
    iv.push_back({0.0, grid.length()});
  } else {
    rc.push_back({0.0, grid.length(), 0.0, grid.length2()});
  }
  return DamperProfile(std::move(a), std::move(iv), std::move(rc), amplitude, 0.0,
                       grid.cell_volume());
}

std::string to_string(ControlTime::Method m) {
  switch (m) {
    case ControlTime::Method::closed_form:
      return "closed-form";
    case ControlTime::Method::ray_traced:
      return "ray-traced";
    case ControlTime::Method::user_supplied:
      return "user-supplied";
  }
  return "unknown";
}

ControlTime control_time_1d(const Grid& grid, std::span<const Interval> omega) {
  if (grid.dimension() != 1) {
    throw InvalidArgument(
        "geometric control time is only computed in 1D; supply T in 2D");
  }
  if (omega.empty()) throw InvalidArgument("damper support is empty");
  const auto parts = merged(omega);
  const double L = grid.length();
  double worst = 2.0 * std::max(parts.front().lo, 0.0);
  worst = std::max(worst, 2.0 * std::max(L - parts.back().hi, 0.0));
  for (std::size_t k = 1; k < parts.size(); ++k) {
    worst = std::max(worst, parts[k].lo - parts[k - 1].hi);
  }
  if (worst <= 0.0) worst = kFullSupportControlTime;
  return {worst, ControlTime::Method::closed_form};
}

double ray_entry_time(double length, std::span<const Interval> omega, double x0,
                      int direction) {
  for (const auto& iv : omega) {
    if (x0 > iv.lo && x0 < iv.hi) return 0.0;
  }
  // Unfold the reflections: position at time s is the image of x0 + dir*s on
  // the circle of circumference 2L. Walk forward event by event.
  double best = std::numeric_limits<double>::infinity();
  const double period = 2.0 * length;
  for (const auto& iv : omega) {
    // Images of the open interval on the unfolded line within one period.
    const double images[2][2] = {{iv.lo, iv.hi}, {period - iv.hi, period - iv.lo}};
    for (const auto& im : images) {
      const double start = direction > 0 ? x0 : period - x0;
      for (int shift = 0; shift < 2; ++shift) {
        const double lo = im[0] + shift * period;
        const double hi = im[1] + shift * period;
        if (hi <= start) continue;
        best = std::min(best, std::max(lo - start, 0.0));
      }
    }
  }
  return best;
}

ControlTime ray_traced_control_time(double length, std::span<const Interval> omega,
                                    std::size_t samples) {
  if (omega.empty()) throw InvalidArgument("damper support is empty");
  if (samples < 2) throw InvalidArgument("need at least two ray samples");
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x0 = length * static_cast<double>(s) / static_cast<double>(samples - 1);
    for (int dir : {-1, 1}) {
      worst = std::max(worst, ray_entry_time(length, omega, x0, dir));
    }
  }
  if (worst <= 0.0) worst = kFullSupportControlTime;
  return {worst, ControlTime::Method::ray_traced};
}

}  // namespace wavedecay
