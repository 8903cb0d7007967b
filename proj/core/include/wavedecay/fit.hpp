#pragma once

#include <string>
#include <vector>

namespace wavedecay {

struct EnergyTrace;

enum class DecayModel { exponential, polynomial, inverse_log };

std::string to_string(DecayModel m);
DecayModel decay_model_from_string(const std::string& s);

/// Least-squares fit of one decay model on its linearizing transform:
///   exponential  ln E = a - parameter * t
///   polynomial   ln E = a - parameter * ln(1 + t)
///   inverse_log  1/E  = a + parameter * ln(t + shift), shift >= 0 searched
struct DecayFit {
  DecayModel model = DecayModel::exponential;
  double parameter = 0.0;
  double intercept = 0.0;
  double shift = 0.0;
  /// RMS residual in the transformed coordinates.
  double residual = 0.0;
  /// RMS residual of ln E, comparable across models.
  double log_residual = 0.0;
  std::size_t samples = 0;

  double evaluate(double t) const;
};

inline constexpr std::size_t kMinFitSamples = 20;

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& E,
                   double t0, double t1, DecayModel model);
DecayFit fit_decay(const EnergyTrace& trace, double t0, double t1, DecayModel model);

/// Fits all three models and returns the one with the smallest log residual.
DecayFit fit_best(const std::vector<double>& t, const std::vector<double>& E,
                  double t0, double t1);

}  // namespace wavedecay
