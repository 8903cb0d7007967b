#pragma once

#include <memory>
#include <string>
#include <vector>

namespace wavedecay {

/// Scalar damping nonlinearity g with the constants and the concave
/// function h0 that the nonlinear bound pipeline needs.
///
/// Built-in laws:
///   linear       g(s) = s,                         m = 1, h0 = identity
///   sublinear    g(s) = sign(s)|s|^r0 on |s| <= 1, g(s) = s beyond;
///                h0(s) = s^(2 r0/(1+r0)) on [0, 1], tangent line beyond
///   superlinear  g(s) = sign(s) s^2 exp(-1/s^2) on |s| < 1, g(s) = s/e
///                beyond; h0^{-1}(s) = s^(3/2) exp(-1/s), m = e
///   table        piecewise-linear g through user knots, odd extension when
///                only s >= 0 is given; h0(s) = s^q on [0, 1] (q = 1 by default)
class DampingLaw {
 public:
  enum class Kind { linear, sublinear, superlinear, table };

  static DampingLaw linear();
  static DampingLaw sublinear(double r0);
  static DampingLaw superlinear();
  /// Knots must be sorted by s, nondecreasing in g and pass through (0, 0).
  static DampingLaw from_table(std::vector<double> s, std::vector<double> g,
                               double h0_exponent = 1.0);
  static DampingLaw from_csv(const std::string& path, double h0_exponent = 1.0);

  Kind kind() const { return kind_; }
  std::string name() const;
  double r0() const { return r0_; }
  double h0_exponent() const { return q_; }

  double g(double s) const;
  /// Derivative of g; +inf where g has a vertical tangent (sublinear at 0).
  double dg(double s) const;

  /// Envelope constants: (1/m) s^2 <= g(s) s <= m s^2 for |s| > eta.
  double m() const { return m_; }
  double eta() const { return eta_; }

  double h0(double s) const;
  double h0_inv(double y) const;

  /// Knots of a table law (empty otherwise).
  const std::vector<double>& table_s() const;
  const std::vector<double>& table_g() const;

 private:
  struct Table {
    std::vector<double> s;
    std::vector<double> g;
  };

  DampingLaw(Kind kind, double r0, double q, double m, double eta,
             std::shared_ptr<const Table> table);

  double table_g(double s) const;
  double table_dg(double s) const;

  Kind kind_;
  double r0_;
  double q_;  // h0 exponent on [0, 1]
  double m_;
  double eta_;
  std::shared_ptr<const Table> table_;
};

/// Smallest observed h0(g(s) s) / (s^2 + g(s)^2) over `samples` points of
/// (0, eta]; a positive value certifies the near-origin condition on the grid.
double sampled_epsilon0(const DampingLaw& law, int samples = 2000);

/// h(x) = x + mass * h0(x / mass) for the damper mass of (0, T) x M.
class HFunction {
 public:
  static constexpr int kMaxIterations = 60;

  HFunction(DampingLaw law, double damper_mass);

  double operator()(double x) const;
  double inverse(double y) const;

  double mass() const { return mass_; }
  const DampingLaw& law() const { return law_; }

 private:
  DampingLaw law_;
  double mass_;
};

/// Unique v with v + weight * g(v) = rhs. Newton steps safeguarded by the
/// bracket [min(0, rhs), max(0, rhs)]; |residual| <= 1e-12 (1 + |rhs|).
double implicit_damp_solve(const DampingLaw& law, double weight, double rhs);

}  // namespace wavedecay
