#include "wavedecay/cli.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "wavedecay/csv.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/experiment.hpp"

namespace wavedecay {
namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> dx;
  std::optional<double> dt;
  std::optional<double> horizon;
};

void apply_overrides(Scenario& s, const Flags& f) {
  if (f.dx) {
    if (!(*f.dx > 0.0)) throw InvalidArgument("--dx must be positive");
    s.grid.nodes = static_cast<int>(std::lround(s.grid.length / *f.dx));
    if (s.grid.dimension == 2) s.grid.nodes2 = static_cast<int>(std::lround(s.grid.length2 / *f.dx));
  }
  if (f.dt) s.numerics.dt = *f.dt;
  if (f.horizon) s.numerics.horizon = *f.horizon;
}

void print_dominance(std::ostream& out, const DominanceResult& d) {
  out << "dominance: " << (d.pass ? "pass" : "FAIL")
      << " (max violation " << format_double(d.max_violation) << " at t="
      << format_double(d.location) << ")\n";
}

int execute(const std::string& command, const Flags& flags, std::ostream& out) {
  Scenario scenario = Scenario::from_file(flags.config);
  apply_overrides(scenario, flags);
  Pipeline pipe(scenario, resolve_seed(flags.seed, scenario));

  if (command == "simulate") {
    pipe.write_trace(flags.out);
    const auto& tr = pipe.simulate();
    out << "steps: " << tr.steps << ", samples: " << tr.size()
        << ", max |identity residual|: " << format_double(tr.max_abs_residual()) << "\n";
    return kExitPass;
  }
  if (command == "bound") {
    pipe.write_bound(flags.out);
    pipe.envelope();
    const auto& d = pipe.verify().dominance;
    print_dominance(out, d);
    return d.pass ? kExitPass : kExitViolation;
  }
  if (command == "classify") {
    pipe.write_classification(flags.out);
    pipe.write_verdict(flags.out);
    const auto& v = pipe.verify();
    out << "case: " << to_string(v.tag) << "\n";
    print_dominance(out, v.dominance);
    out << "agreement: " << (v.agreement ? "true" : "false") << "\n";
    return v.dominance.pass ? kExitPass : kExitViolation;
  }
  if (command == "observability") {
    pipe.write_constants(flags.out);
    const auto& c = pipe.calibrate();
    out << "T: " << format_double(c.T) << ", C_T: " << format_double(c.C_T)
        << " (" << c.C_T_source << ")\n";
    return kExitPass;
  }
  if (command == "conjugate") {
    pipe.write_conjugate(flags.out);
    return kExitPass;
  }
  pipe.write_all(flags.out);
  const auto& v = pipe.verify();
  out << "case: " << to_string(v.tag) << "\n";
  print_dominance(out, v.dominance);
  out << "predicted: " << to_string(v.predicted.model) << " "
      << format_double(v.predicted.parameter) << " (" << v.prediction_source << ")\n";
  out << "agreement: " << (v.agreement ? "true" : "false") << "\n";
  return v.dominance.pass ? kExitPass : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy decay experiments for damped, forced wave equations", "wavedecay"};
  app.require_subcommand(1);
  Flags flags;

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Run the wave solver and write trace.csv"},
      {"bound", "Solve the comparison ODE and write ode.csv and envelope.csv"},
      {"classify", "Classify the decay case and write classification.json and verdict.json"},
      {"observability", "Estimate observability constants into constants.json"},
      {"conjugate", "Tabulate psi and psi* into conjugate.csv"},
      {"report", "Run the full pipeline and write every artifact"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", flags.config, "Scenario JSON file")->required();
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Random seed (overrides config and WAVEDECAY_SEED)");
    sub->add_option("--dx", flags.dx, "Mesh width");
    sub->add_option("--dt", flags.dt, "Time step");
    sub->add_option("--horizon", flags.horizon, "Simulation horizon");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  const auto subs = app.get_subcommands();
  try {
    return execute(subs.front()->get_name(), flags, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace wavedecay
