#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wavedecay {

/// Open interval (lo, hi) of the 1D domain.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Open rectangle (x0, x1) x (y0, y1) of the 2D domain.
struct Rect {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;
};

/// Uniform node-centred grid on [0, L] or [0, L] x [0, L2] with homogeneous
/// Dirichlet boundary. `cells` counts intervals, so there are cells + 1 nodes
/// per direction and the outermost nodes are boundary nodes.
class Grid {
 public:
  static constexpr int kMinCells = 8;

  static Grid interval(double length, int cells);
  static Grid rectangle(double length, double length2, int cells, int cells2);

  int dimension() const { return dimension_; }
  double length() const { return length_; }
  double length2() const { return length2_; }
  int cells() const { return cells_; }
  int cells2() const { return cells2_; }
  double dx() const { return length_ / cells_; }
  double dy() const { return dimension_ == 2 ? length2_ / cells2_ : 1.0; }

  /// Quadrature weight of one node (dx in 1D, dx*dy in 2D).
  double cell_volume() const { return dimension_ == 2 ? dx() * dy() : dx(); }

  std::size_t nx() const { return static_cast<std::size_t>(cells_) + 1; }
  std::size_t ny() const {
    return dimension_ == 2 ? static_cast<std::size_t>(cells2_) + 1 : 1;
  }
  std::size_t node_count() const { return nx() * ny(); }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx() + i; }

  double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
  double y(std::size_t j) const { return static_cast<double>(j) * dy(); }

  bool is_boundary(std::size_t k) const;

  /// Interior node indices in storage order.
  std::vector<std::size_t> interior() const;

  /// Largest stable step of the explicit stiffness update, times `cfl`.
  double max_stable_dt(double cfl = 0.9) const;

 private:
  Grid(int dimension, double length, double length2, int cells, int cells2);

  int dimension_;
  double length_;
  double length2_;
  int cells_;
  int cells2_;
};

/// Nodal damper coefficient a(x) >= 0 together with its declared support.
class DamperProfile {
 public:
  DamperProfile() = default;
  DamperProfile(std::vector<double> values, std::vector<Interval> intervals,
                std::vector<Rect> rects, double amplitude, double smoothing,
                double cell_volume);

  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<Rect>& rects() const { return rects_; }
  double amplitude() const { return amplitude_; }
  double smoothing() const { return smoothing_; }
  double sup() const;

  /// Spatial integral of a over the domain (nodal quadrature).
  double integral() const { return integral_; }

  /// Damper mass m_a((0,T) x M) = T * integral of a.
  double mass(double horizon_T) const { return horizon_T * integral_; }

  bool vanishes() const { return integral_ == 0.0; }

 private:
  std::vector<double> values_;
  std::vector<Interval> intervals_;
  std::vector<Rect> rects_;
  double amplitude_ = 0.0;
  double smoothing_ = 0.0;
  double integral_ = 0.0;
};

/// Cubic ramp 3s^2 - 2s^3 from 0 at z <= 0 to 1 at z >= width.
double smooth_ramp(double z, double width);

DamperProfile build_damper(const Grid& grid, std::vector<Interval> omega,
                           double amplitude, double smoothing);
DamperProfile build_damper(const Grid& grid, std::vector<Rect> omega,
                           double amplitude, double smoothing);

/// Uniform damper a = amplitude at every interior node (no declared support).
DamperProfile uniform_damper(const Grid& grid, double amplitude);

struct ControlTime {
  enum class Method { closed_form, ray_traced, user_supplied };
  double t_min = 0.0;
  Method method = Method::closed_form;
};

std::string to_string(ControlTime::Method m);

/// Working observation time used by the bound pipelines: 25% above T_min.
constexpr double kControlTimeMargin = 1.25;

/// Reported when every ray starts inside omega (full-support damper).
constexpr double kFullSupportControlTime = 1e-12;

/// Closed-form geometric control time on [0, L] with reflecting endpoints:
/// the longest speed-1 excursion avoiding omega, i.e. twice an outer gap or
/// once an inner gap.
ControlTime control_time_1d(const Grid& grid, std::span<const Interval> omega);

/// Brute-force counterpart: traces `samples` starting points in both
/// directions and returns the longest time before entering omega.
ControlTime ray_traced_control_time(double length, std::span<const Interval> omega,
                                    std::size_t samples = 10000);

/// Entry time of a single reflected ray starting at x0 with direction +-1.
double ray_entry_time(double length, std::span<const Interval> omega, double x0,
                      int direction);

}  // namespace wavedecay
