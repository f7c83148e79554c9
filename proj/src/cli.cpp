#include "mgeof/cli.hpp"

#include "mgeof/entropy.hpp"
#include "mgeof/errors.hpp"
#include "mgeof/geofopt.hpp"
#include "mgeof/state_file.hpp"
#include "mgeof/states.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>

namespace mgeof::cli {

namespace {

std::string join_args(const std::vector<std::string>& args) {
  std::string out = "mgeof";
  for (const auto& a : args) out += " " + a;
  return out;
}

std::string value12(double v) {
  return fmt::format("{:.12g}", v);
}

std::uint64_t parse_seed(std::string_view text, std::string_view origin) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("{}: '{}' is not an unsigned 64-bit seed", origin, text));
  }
  return v;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv); env && *env) return parse_seed(env, kSeedEnv);
  return OptimizationConfig{}.rng_seed;
}

void emit_state(const GaussianState& state, const std::string& path, std::string_view label,
                std::string_view provenance, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << serialize_state(state, label, provenance);
  } else {
    write_state_file(path, state, label, provenance);
  }
}

GaussianState load_state(const std::string& path) {
  return read_state_file(path).to_state();
}

Partition partition_for(const std::string& text, int n_modes) {
  if (text.empty()) return Partition::finest(n_modes);
  Partition p = Partition::parse(text);
  if (p.n_modes() != n_modes) {
    throw std::invalid_argument(fmt::format("partition '{}' covers {} modes, state has {}", text, p.n_modes(), n_modes));
  }
  return p;
}

struct OptimizerFlags {
  std::optional<std::string> seed;
  int restarts = OptimizationConfig{}.restarts;
  int max_evals = OptimizationConfig{}.max_evals;
  int threads = 1;
  std::string mode = "auto";
  bool standardize = false;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "optimizer seed (default: $MGEOF_SEED or built-in)");
    app->add_option("--restarts", restarts, "optimizer restarts")->check(CLI::PositiveNumber);
    app->add_option("--max-evals", max_evals, "objective evaluations per restart")->check(CLI::PositiveNumber);
    app->add_option("--threads", threads, "worker threads for restarts")->check(CLI::PositiveNumber);
    app->add_option("--mode", mode, "general12 | qp6 | auto")->check(CLI::IsMember({"general12", "qp6", "auto"}));
    app->add_flag("--standardize", standardize, "optimize on the mixed standard form (3 modes)");
  }

  OptimizationConfig config() const {
    OptimizationConfig cfg;
    cfg.rng_seed = seed ? parse_seed(*seed, "--seed") : default_seed();
    cfg.restarts = restarts;
    cfg.max_evals = max_evals;
    cfg.threads = threads;
    cfg.mode = parse_opt_mode(mode);
    cfg.standardize = standardize;
    return cfg;
  }
};

double max_asymmetry(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

int cmd_verify(const std::string& path, std::ostream& out) {
  const RawStateFile raw = read_state_file(path);
  const double scale = std::max(1.0, raw.covariance.cwiseAbs().maxCoeff());
  const double asym = max_asymmetry(raw.covariance);
  const bool symmetric = asym <= kSymmetryTol * scale;
  out << fmt::format("modes: {}\n", raw.n_modes);
  out << fmt::format("symmetry: {} (max asymmetry {:.3e})\n", symmetric ? "ok" : "FAILED", asym);
  if (!symmetric) return kParse;

  const CovarianceMatrix cov(raw.covariance);
  const auto diag = validate_physical(cov);
  out << fmt::format("physical: {} (min nu {})\n", diag.physical ? "yes" : "no", value12(diag.worst_nu));
  if (!diag.physical) return kUnphysical;
  const auto nus = symplectic_eigenvalues(cov);
  double dev = 0.0;
  for (double nu : nus) dev = std::max(dev, std::abs(nu - 1.0));
  out << fmt::format("pure: {} (max |nu - 1| {:.3e})\n", is_pure(cov) ? "yes" : "no", dev);
  out << fmt::format("q-p: {} (max q-p coupling {:.3e})\n", is_qp(cov) ? "yes" : "no",
                     cov.qp_block().cwiseAbs().maxCoeff());
  std::string spectrum;
  for (double nu : nus) spectrum += " " + value12(nu);
  out << "symplectic eigenvalues:" << spectrum << "\n";
  return kOk;
}

}  // namespace

int report_error(std::exception_ptr error, std::ostream& err) {
  try {
    std::rethrow_exception(error);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const ValidationError& e) {
    err << "invalid matrix: " << e.what() << "\n";
    return kParse;
  } catch (const UnphysicalStateError& e) {
    err << "unphysical state: " << e.what() << "\n";
    return kUnphysical;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const OptimizationFailure& e) {
    err << fmt::format("optimization failed: {} (best residual {:.3e})\n", e.what(), e.best_residual());
    return kOptimization;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kOptimization;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (...) {
    err << "error: unknown failure\n";
    return kUsage;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multipartite Gaussian entanglement measures", "mgeof"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every command");

  // gen ---------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a state file");
  gen->require_subcommand(1);
  std::string out_path;
  int modes = 1;
  double nbar = 0.0;
  double r = 0.0;
  double r3 = 0.0;
  std::vector<double> nbars;

  auto* g_vac = gen->add_subcommand("vacuum", "vacuum on N modes");
  g_vac->add_option("--modes", modes, "number of modes")->check(CLI::PositiveNumber);
  auto* g_th = gen->add_subcommand("thermal", "single-mode thermal state");
  g_th->add_option("--nbar", nbar, "mean photon number")->required();
  auto* g_tms = gen->add_subcommand("tms", "two-mode squeezer on thermal inputs");
  g_tms->add_option("--r", r, "squeezing")->required();
  g_tms->add_option("--nbar", nbars, "input photon numbers a,b (default 0,0)")->delimiter(',')->expected(2);
  auto* g_s3 = gen->add_subcommand("s3", "three-mode squeezer on thermal inputs");
  g_s3->add_option("--r3", r3, "squeezing")->required();
  g_s3->add_option("--nbar", nbars, "input photon numbers a,b,c (default 0,0,0)")->delimiter(',')->expected(3);
  auto* g_ghzw = gen->add_subcommand("ghzw", "GHZ/W state (three-mode squeezed vacuum)");
  g_ghzw->add_option("--r3", r3, "squeezing")->required();
  for (auto* sub : {g_vac, g_th, g_tms, g_s3, g_ghzw}) sub->add_option("--out", out_path, "output file (default stdout)");

  // measure -----------------------------------------------------------------
  auto* measure = app.add_subcommand("measure", "compute an entropy or entanglement measure");
  std::string kind;
  std::string state_path;
  std::string partition_text;
  bool nats = false;
  OptimizerFlags opt;
  measure->add_option("kind", kind, "entropy | alpha-entropy | eoe | neoe | geof")
      ->required()
      ->check(CLI::IsMember({"entropy", "alpha-entropy", "eoe", "neoe", "geof"}));
  measure->add_option("state", state_path, "state file")->required();
  measure->add_option("--partition", partition_text, "partition such as 1|23 (default: finest)");
  measure->add_flag("--nats", nats, "report natural-log units");
  opt.attach(measure);

  // sweep -------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "GEoF against input noise for the three-mode squeezer");
  std::string scenario = "one_thermal";
  std::vector<double> sweep_nbars;
  sweep->add_option("--scenario", scenario, "one_thermal | all_thermal")
      ->check(CLI::IsMember({"one_thermal", "all_thermal"}));
  sweep->add_option("--r3", r3, "squeezing")->required();
  sweep->add_option("--nbars", sweep_nbars, "comma-separated photon numbers")->required()->delimiter(',');
  sweep->add_option("--partition", partition_text, "partition (default: finest)");
  sweep->add_option("--out", out_path, "CSV file (default stdout)");
  opt.attach(sweep);

  // verify / standard-form ----------------------------------------------------
  auto* verify = app.add_subcommand("verify", "report symmetry, physicality, purity and q-p structure");
  verify->add_option("state", state_path, "state file")->required();

  auto* stdform = app.add_subcommand("standard-form", "reduce a 3-mode state to its standard form");
  stdform->add_option("state", state_path, "state file")->required();
  stdform->add_option("--out", out_path, "output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    // Help requested on a subcommand surfaces as CallForHelp above; anything
    // else is a usage error.
    err << "error: " << e.what() << "\n";
    err << "run 'mgeof --help' for usage\n";
    return kUsage;
  }

  const std::string provenance = join_args(args);
  try {
    if (*gen) {
      GaussianState state = vacuum(1);
      std::string label;
      if (*g_vac) {
        state = vacuum(modes);
        label = fmt::format("vacuum modes={}", modes);
      } else if (*g_th) {
        state = thermal(nbar);
        label = fmt::format("thermal nbar={}", nbar);
      } else if (*g_tms) {
        if (nbars.empty()) nbars = {0.0, 0.0};
        state = apply_symplectic(thermal_product(nbars), two_mode_squeezer(r));
        label = fmt::format("tms r={} nbar={},{}", r, nbars[0], nbars[1]);
      } else if (*g_s3) {
        if (nbars.empty()) nbars = {0.0, 0.0, 0.0};
        state = apply_symplectic(thermal_product(nbars), three_mode_squeezer(r3));
        label = fmt::format("s3 r3={} nbar={},{},{}", r3, nbars[0], nbars[1], nbars[2]);
      } else {
        state = ghzw(r3);
        label = fmt::format("ghzw r3={}", r3);
      }
      emit_state(state, out_path, label, provenance, out);
      return kOk;
    }

    if (*measure) {
      const GaussianState state = load_state(state_path);
      const int n = state.n_modes();
      const auto render = [&](EntropyValue v) { return value12(nats ? v.nats() : v.bits); };
      if (kind == "entropy") {
        out << render(entropy(state.cov)) << "\n";
      } else if (kind == "alpha-entropy") {
        out << render(alpha_entropy(state.cov, partition_for(partition_text, n))) << "\n";
      } else if (kind == "eoe" || kind == "neoe") {
        if (!is_pure(state.cov)) {
          const auto diag = validate_physical(state.cov);
          if (!diag.physical) {
            throw UnphysicalStateError(fmt::format("unphysical covariance matrix (smallest nu = {})", diag.worst_nu),
                                       diag.worst_nu);
          }
          throw DomainError("measure requires a pure state");
        }
        const EntropyValue v = kind == "neoe" ? n_mode_eoe(state.cov)
                                              : alpha_eoe(state.cov, partition_for(partition_text, n));
        out << render(v) << "\n";
      } else {
        const GeofResult res = geof(state, partition_for(partition_text, n), opt.config());
        for (const auto& w : res.warnings) err << "warning: " << w << "\n";
        out << fmt::format("{} residual={:.3e} converged={} evals={} mode={}\n", render(res.value), res.residual,
                           res.converged ? "true" : "false", res.evals, to_string(res.mode_used));
      }
      return kOk;
    }

    if (*sweep) {
      const auto rows =
          sweep_nbar(parse_scenario(scenario), r3, sweep_nbars, partition_for(partition_text, 3), opt.config());
      std::string csv = "nbar,geof_bits,residual,evals,converged\n";
      for (const auto& row : rows) {
        for (const auto& w : row.result.warnings) err << fmt::format("warning (nbar={}): {}\n", row.nbar, w);
        csv += fmt::format("{},{},{:.6e},{},{}\n", value12(row.nbar), value12(row.result.value.bits),
                           row.result.residual, row.result.evals, row.result.converged ? "true" : "false");
      }
      // Every row exists before anything is written.
      if (out_path.empty() || out_path == "-") {
        out << csv;
      } else {
        std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
        if (!f) throw ParseError(fmt::format("cannot write '{}'", out_path));
        f << csv;
      }
      return kOk;
    }

    if (*verify) return cmd_verify(state_path, out);

    if (*stdform) {
      const GaussianState state = load_state(state_path);
      if (state.n_modes() != 3) {
        throw UnsupportedSizeError(fmt::format("standard form needs a 3-mode state, got {}", state.n_modes()));
      }
      const auto [sf, g] = mixed3_standard_form(state.cov);
      const GaussianState reduced = apply_symplectic(state, gluo(g));
      // GLUO report goes to stdout unless stdout carries the state itself.
      std::ostream& report = out_path.empty() || out_path == "-" ? err : out;
      for (int k = 0; k < 3; ++k) {
        report << fmt::format("mode {}: phi_in={} r={} phi_out={}\n", k + 1, value12(g[k].phi_in), value12(g[k].r),
                           value12(g[k].phi_out));
      }
      report << fmt::format("zero-pattern defect: {:.3e}\n", standard_form_defect(sf));
      emit_state(reduced, out_path, "standard form", provenance, out);
      return kOk;
    }
  } catch (...) {
    return report_error(std::current_exception(), err);
  }
  return kUsage;
}

}  // namespace mgeof::cli
