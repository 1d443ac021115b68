#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "shearmix/experiments.hpp"
#include "shearmix/io.hpp"
#include "shearmix/parallel.hpp"

namespace shearmix {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Command {
  const char* name;
  ExperimentKind kind;
  const char* help;
};

constexpr Command kCommands[] = {
    {"simulate", ExperimentKind::simulate, "Evolve a point-mass surrogate and record norms"},
    {"mixing-sweep", ExperimentKind::mixing_sweep, "Uniform mixing time across kappa with fits"},
    {"ed-verify", ExperimentKind::ed_verify, "Enhanced-dissipation prefactor and its moments"},
    {"drift-cert", ExperimentKind::drift_cert, "Monte Carlo Lyapunov drift certificate"},
    {"ulam-gap", ExperimentKind::ulam_gap, "Ulam chain spectral gap and rho_beta contraction"},
    {"exponent", ExperimentKind::exponent, "Top Lyapunov exponent of the flow"},
    {"correlations", ExperimentKind::correlations, "Correlation decay and D_kappa moments"},
    {"smoothing", ExperimentKind::smoothing_scaling, "L1 to H^alpha smoothing exponent"},
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  bool matrices = false;
};

ExperimentConfig load_config(const Options& opts, ExperimentKind kind) {
  const fs::path path(opts.config);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
  const std::string expected(to_string(kind));
  if (!j.contains("experiment")) {
    j["experiment"] = expected;
  } else if (j["experiment"] != expected) {
    throw ConfigError(path.string() + ": experiment \"" + j["experiment"].dump() +
                      "\" does not match subcommand (expected \"" + expected + "\")");
  }
  if (opts.seed) j["seeds"] = json::array({*opts.seed});
  if (!opts.out.empty()) j["output_dir"] = opts.out;
  try {
    return ExperimentConfig::from_json(j.dump());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string kappa_tag(std::size_t index) { return "kappa" + std::to_string(index); }

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& contents) {
    write_text_file(dir_ / name, contents);
    outputs_.push_back(name);
  }
  void field(const std::string& name, const ScalarField& f, const FieldMeta& meta) {
    write_field_snapshot(dir_ / name, f, meta);
    outputs_.push_back(name);
    outputs_.push_back(name + ".json");
  }
  void matrix(const std::string& name, const UlamChain& chain) {
    write_matrix_binary(dir_ / name, chain.matrix, chain.states(), chain.states(),
                        chain.summary_json());
    outputs_.push_back(name);
    outputs_.push_back(name + ".json");
  }
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  fs::path dir_;
  std::vector<std::string> outputs_;
};

std::vector<std::string> run(const ExperimentConfig& cfg, const Options& opts, Writer& w) {
  std::vector<std::string> warnings;
  switch (cfg.experiment) {
    case ExperimentKind::simulate: {
      const SimulateResult r = run_simulate(cfg);
      for (std::size_t i = 0; i < r.runs.size(); ++i) {
        const double kappa = cfg.kappa_list[i];
        if (r.runs[i].underresolved) warnings.push_back("underresolved grid at kappa " + format_double(kappa));
        w.text("norms_" + kappa_tag(i) + ".csv", norm_series_csv(r.runs[i].series));
        w.field("field_" + kappa_tag(i) + ".bin", r.finals[i],
                {r.finals[i].n(), r.runs[i].series.times.back(), kappa, cfg.seeds.front()});
      }
      break;
    }
    case ExperimentKind::mixing_sweep: {
      const MixingCurve c = run_mixing_sweep(cfg);
      w.text("t_mix.csv", mixing_curve_csv(c));
      w.text("fit.json", mixing_fit_json(c) + "\n");
      warnings = c.warnings;
      break;
    }
    case ExperimentKind::ed_verify: {
      const EdVerifyResult r = run_ed_verify(cfg);
      w.text("d_hat.csv", ed_runs_csv(r));
      w.text("moments.csv", ed_moments_csv(r));
      const json summary = {{"gamma", r.gamma},
                            {"gamma_fitted", r.gamma_fitted},
                            {"alpha", r.alpha},
                            {"kappa_trend", r.kappa_trend}};
      w.text("ed_summary.json", summary.dump(2) + "\n");
      warnings = r.warnings;
      break;
    }
    case ExperimentKind::drift_cert: {
      const auto reports = run_drift_cert(cfg);
      std::string csv = "kappa,beta_hat,beta_ci,K_hat,K_ci,pass\n";
      for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        csv += format_double(r.kappa) + ',' + format_double(r.beta_hat) + ',' +
               format_double(r.beta_ci) + ',' + format_double(r.K_hat) + ',' +
               format_double(r.K_ci) + ',' + (r.pass ? "1" : "0") + '\n';
        w.text("drift_" + kappa_tag(i) + ".json", r.to_json() + "\n");
      }
      w.text("drift_summary.csv", csv);
      break;
    }
    case ExperimentKind::ulam_gap: {
      const auto runs = run_ulam_gap(cfg);
      w.text("ulam_gap.csv", ulam_gap_csv(runs));
      for (std::size_t i = 0; i < runs.size(); ++i) {
        w.text("ulam_" + kappa_tag(i) + ".json", runs[i].chain.summary_json() + "\n");
        if (opts.matrices) w.matrix("ulam_" + kappa_tag(i) + ".bin", runs[i].chain);
        if (!runs[i].contraction.converged) {
          warnings.push_back("power iteration did not converge at kappa " +
                             format_double(runs[i].chain.kappa));
        }
      }
      break;
    }
    case ExperimentKind::exponent: {
      w.text("exponent.csv", exponent_csv(cfg, run_exponent(cfg)));
      break;
    }
    case ExperimentKind::correlations: {
      const MomentTable t = run_correlations(cfg);
      w.text("moments.csv", moments_csv(t));
      std::string csv = "kappa,gamma_hat,decay_flag,floor_limited,zeta,D_kappa_hat\n";
      for (std::size_t i = 0; i < t.reports.size(); ++i) {
        const auto& r = t.reports[i];
        csv += format_double(r.kappa) + ',' + format_double(r.gamma_hat) + ',' +
               (r.decay_flag ? "1" : "0") + ',' + (r.floor_limited ? "1" : "0") + ',' +
               format_double(r.zeta) + ',' + format_double(r.D_kappa_hat) + '\n';
        w.text("correlations_" + kappa_tag(i) + ".json", r.to_json() + "\n");
        if (r.decay_flag) warnings.push_back("no decay resolved at kappa " + format_double(r.kappa));
      }
      w.text("correlation_summary.csv", csv);
      break;
    }
    case ExperimentKind::smoothing_scaling: {
      const SmoothingResult r = run_smoothing_scaling(cfg);
      w.text("smoothing.csv", smoothing_csv(r));
      const json fit = {{"alpha", r.alpha},
                        {"predicted_exponent", r.predicted_exponent},
                        {"fitted_exponent", r.fitted_exponent},
                        {"exponent_ci", r.exponent_ci},
                        {"r2", r.fit.r2},
                        {"residuals", r.fit.residuals},
                        {"width_sensitivity", r.width_sensitivity}};
      w.text("smoothing_fit.json", fit.dump(2) + "\n");
      break;
    }
  }
  return warnings;
}

int execute(const Command& cmd, const Options& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_config(opts, cmd.kind);
  if (opts.threads > 0) set_default_threads(opts.threads);

  const auto start = std::chrono::steady_clock::now();
  Writer writer(cfg.output_dir);
  const std::vector<std::string> warnings = run(cfg, opts, writer);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest = {{"artifact", "shearmix"},
                   {"version", SHEARMIX_VERSION},
                   {"subcommand", cmd.name},
                   {"config", json::parse(cfg.to_json())},
                   {"threads", default_threads()},
                   {"wall_time_seconds", wall},
                   {"outputs", writer.outputs()},
                   {"warnings", warnings}};
  write_text_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
  out << cmd.name << ": wrote " << writer.outputs().size() << " outputs to "
      << cfg.output_dir.string() << '\n';
  for (const auto& warning : warnings) out << "warning: " << warning << '\n';
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomly shifted alternating-shear mixing lab", "shearmix"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SHEARMIX_VERSION);

  Options opts;
  const Command* selected = nullptr;
  for (const Command& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", opts.config, "JSON configuration file")->required();
    sub->add_option("--seed", opts.seed, "Run with this single seed instead of the config seeds");
    sub->add_option("--out", opts.out, "Output directory (overrides output_dir)");
    sub->add_option("--threads", opts.threads, "Worker threads (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);
    if (cmd.kind == ExperimentKind::ulam_gap) {
      sub->add_flag("--matrices", opts.matrices, "Also write dense Ulam matrices");
    }
    sub->callback([&selected, &cmd] { selected = &cmd; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << SHEARMIX_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    return execute(*selected, opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace shearmix
