#include "svcache/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "svcache/config.hpp"
#include "svcache/montecarlo.hpp"

namespace svcache {

namespace {

std::size_t env_thread_cap() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SVC_CACHE_THREADS")) {
    const std::string s(env);
    std::size_t cap = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (res.ec == std::errc{} && cap >= 1) return std::min<std::size_t>(cap, hw);
  }
  return hw;
}

Experiment load_experiment(const std::string& config_path, const CliOverrides& ov) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  if (ov.seed) cfg.trials.seed = *ov.seed;
  if (ov.trials) cfg.trials.n_trials = *ov.trials;
  if (ov.mode) {
    delivery_mode_from_name(*ov.mode);  // validate early
    cfg.trials.mode = *ov.mode;
  }
  Experiment exp = materialize(cfg);
  exp.trial.threads = ov.threads.value_or(env_thread_cap());
  return exp;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string csv_header(const char* command, const Experiment& exp) {
  std::ostringstream os;
  os << "# svcache " << command << "\n";
  os << "# config: " << exp.config_echo << "\n";
  os << "# seed: " << exp.trial.seed << "\n";
  os << "# library_fingerprint: " << exp.fingerprint << "\n";
  return os.str();
}

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::uint64_t row_seed(std::uint64_t base, std::size_t index) {
  return splitmix64(base) + 0x9E3779B97F4A7C15ULL * (index + 1);
}

}  // namespace

int cmd_optimize(const std::string& config_path, const std::string& out_dir,
                 const CliOverrides& overrides, std::ostream& out, std::ostream& err) {
  try {
    const Experiment exp = load_experiment(config_path, overrides);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    std::pair<RandomPlacement, OptimizationTrace> result;
    try {
      result = gradient_projection(exp.library, exp.params, exp.caps, exp.optimizer);
    } catch (const OptimizerError& e) {
      err << "optimizer abort: " << e.what() << "\n";
      write_file(dir / "trace.csv", trace_to_csv(e.trace));
      return 2;
    }
    const auto& [placement, trace] = result;

    write_file(dir / "placement.json",
               placement_to_json(placement, exp.fingerprint, exp.config_echo));
    write_file(dir / "trace.csv", csv_header("optimize", exp) + trace_to_csv(trace));

    const double objective = expected_total_delay(placement, exp.library, exp.params).total_delay_s;
    out << "final objective: " << fmt(objective) << " s ("
        << (trace.converged ? "converged" : "iteration limit") << ", "
        << trace.records.size() << " iterations)\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_evaluate(const std::string& config_path, const std::string& placement_path,
                 const std::string& out_dir, const CliOverrides& overrides, std::ostream& out,
                 std::ostream& err) {
  try {
    const Experiment exp = load_experiment(config_path, overrides);

    std::ifstream in(placement_path);
    if (!in) {
      err << "error: cannot open placement file " << placement_path << "\n";
      return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const LoadedPlacement loaded = placement_from_json(buf.str());
    if (loaded.fingerprint != exp.fingerprint) {
      err << "error: placement fingerprint " << loaded.fingerprint
          << " does not match the config library " << exp.fingerprint << "\n";
      return 3;
    }
    validate_probability_grid(loaded.placement.d2d, exp.library);
    validate_probability_grid(loaded.placement.sbs, exp.library);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    const McEnvironment env = exp.env();

    struct Row {
      std::string policy;
      double analytic;
      McPolicy mc;
    };
    std::vector<Row> rows;
    rows.push_back({"placement",
                    expected_total_delay(loaded.placement, exp.library, exp.params).total_delay_s,
                    McPolicy::from_random(loaded.placement)});
    rows.push_back({"mplp_svc",
                    baseline_delay(BaselinePolicy::mplp_svc, exp.library, exp.params, exp.caps),
                    McPolicy::from_random(binary_to_random(
                        mplp_place(exp.library, exp.caps.d2d_bits, Tier::d2d),
                        mplp_place(exp.library, exp.caps.sbs_bits, Tier::sbs)))});
    rows.push_back({"mpcp_no_svc",
                    baseline_delay(BaselinePolicy::mpcp_no_svc, exp.library, exp.params, exp.caps),
                    McPolicy::from_whole_file(mpcp_no_svc_place(exp.library, exp.caps.d2d_bits),
                                              mpcp_no_svc_place(exp.library, exp.caps.sbs_bits))});
    rows.push_back({"no_cache",
                    baseline_delay(BaselinePolicy::no_cache, exp.library, exp.params, exp.caps),
                    McPolicy::from_random(zero_placement(exp.library))});

    std::ostringstream csv;
    csv << csv_header("evaluate", exp);
    csv << "# placement_fingerprint: " << loaded.fingerprint << "\n";
    csv << "policy,mode,analytic_delay_s,mc_delay_s,mc_stderr_s,mc_ci95_halfwidth_s,n_trials,"
           "seed\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      TrialConfig tc = exp.trial;
      tc.seed = row_seed(exp.trial.seed, i);
      const DelayEstimate est = estimate_delay(env, rows[i].mc, tc);
      csv << rows[i].policy << ',' << delivery_mode_name(tc.mode) << ',' << fmt(rows[i].analytic)
          << ',' << fmt(est.mean_s) << ',' << fmt(est.std_error_s) << ','
          << fmt(est.ci95_halfwidth_s) << ',' << est.n_trials << ',' << tc.seed << '\n';
    }
    write_file(dir / "evaluate.csv", csv.str());
    write_file(dir / "breakdown.csv",
               csv_header("evaluate", exp) +
                   breakdown_to_csv(expected_total_delay(loaded.placement, exp.library,
                                                         exp.params)));
    out << "wrote " << (dir / "evaluate.csv").string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& out_dir, const CliOverrides& overrides, std::ostream& out,
              std::ostream& err) {
  try {
    SweepAxis sweep_axis;
    if (axis == "backhaul_rate") {
      sweep_axis = SweepAxis::backhaul_rate;
    } else if (axis == "sbs_cache_size") {
      sweep_axis = SweepAxis::sbs_cache_size;
    } else {
      err << "error: unknown axis '" << axis
          << "' (expected backhaul_rate or sbs_cache_size)\n";
      return 1;
    }
    const Experiment exp = load_experiment(config_path, overrides);
    const auto& grid = sweep_axis == SweepAxis::backhaul_rate ? exp.sweep.backhaul_rate_mbit_s
                                                              : exp.sweep.sbs_cache_size_mbit;
    const auto rows = sweep(exp.env(), exp.caps, exp.optimizer, sweep_axis, grid, exp.trial);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path path =
        std::filesystem::path(out_dir) / ("sweep_" + axis + ".csv");
    write_file(path, csv_header("sweep", exp) + sweep_to_csv(rows));
    out << "wrote " << path.string() << "\n";
    return 0;
  } catch (const OptimizerError& e) {
    err << "optimizer abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace svcache
