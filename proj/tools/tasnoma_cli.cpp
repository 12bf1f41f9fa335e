// tasnoma_cli: exact/asymptotic outage sweep with optional Monte Carlo check.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tasnoma/runner.hpp"

namespace {

int dump_coefficients(const tasnoma::config::run_spec& spec, const std::string& path) {
  const auto base = spec.scenario(spec.snr_db.start_db);
  const tasnoma::outage::analytic_model model(base, spec.series_terms);
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return tasnoma::cli::exit_invalid_config;
  }
  tasnoma::series::write_coefficients_csv(out, tasnoma::series::detail::eta_terms(model.u1().coefficients()));
  return tasnoma::cli::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outage probability of a two-user TAS-NOMA downlink over alpha-mu fading"};
  std::string config_path, dump_path;
  tasnoma::cli::overrides o;
  std::string output;
  std::size_t terms = 0;
  std::uint64_t trials = 0, seed = 0;
  unsigned workers = 0;

  app.add_option("--config", config_path, "JSON run specification")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--output", output, "CSV output path (stdout when omitted)");
  auto* terms_opt = app.add_option("--terms", terms, "series terms")->check(CLI::PositiveNumber);
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed");
  auto* workers_opt = app.add_option("--workers", workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--no-mc", o.no_mc, "skip Monte Carlo");
  app.add_flag("--strict", o.strict, "exit 2 when any point is flagged");
  app.add_option("--dump-coeffs", dump_path, "also write U1's eta coefficients (index,sign,log10_magnitude)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : tasnoma::cli::exit_invalid_config;
  }

  if (*out_opt) o.output = output;
  if (*terms_opt) o.terms = terms;
  if (*trials_opt) o.trials = trials;
  if (*seed_opt) o.seed = seed;
  if (*workers_opt) o.workers = workers;

  if (!dump_path.empty()) {
    try {
      const int rc = dump_coefficients(tasnoma::cli::apply(tasnoma::config::load(config_path), o), dump_path);
      if (rc != 0) return rc;
    } catch (const tasnoma::invalid_parameter& e) {
      std::cerr << "error: " << e.what() << '\n';
      return tasnoma::cli::exit_invalid_config;
    }
  }
  return tasnoma::cli::run(config_path, o, std::cout, std::cerr);
}
