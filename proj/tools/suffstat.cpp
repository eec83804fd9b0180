// suffstat: command-line driver for the exponential-family experiments.
//
//   suffstat exact|invert|reduce|sample|estimate|verify|budget [flags]
//
// Exit codes: 0 success, 2 config error, 3 precondition/admissibility failure,
// 4 invariant failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "suffstat/suffstat.hpp"

namespace {

using namespace suffstat;
using harness::Command;
using harness::ExperimentConfig;
using harness::Format;

class Output {
 public:
  explicit Output(const std::optional<std::string>& path) {
    if (path) {
      file_ = std::make_unique<std::ofstream>(*path);
      require(file_->good(), "cannot open output file " + *path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

ParamVector theta_or_zero(const ExperimentConfig& cfg, std::size_t p) {
  if (cfg.theta || cfg.theta_seed) return harness::planted_theta(cfg, p);
  return ParamVector::zeros(p);
}

int cmd_exact(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = harness::load_model(cfg);
  const auto s = exact_summary(model, theta_or_zero(cfg, model.dimension()));
  if (cfg.format == Format::json) {
    out << to_json(s).dump(2) << '\n';
  } else {
    out << "log_Z," << harness::format_double(s.log_Z) << '\n';
    out << "min_eigenvalue," << harness::format_double(s.min_eigenvalue) << '\n';
    for (std::size_t i = 0; i < s.tau.size(); ++i) {
      out << "tau_" << i + 1 << ',' << harness::format_double(s.tau[i]) << '\n';
    }
  }
  return 0;
}

int cmd_invert(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = harness::load_model(cfg);
  require(cfg.tau.has_value(), "invert: --tau is required");
  const ExactEngine engine(model);
  const MomentVector tau(*cfg.tau);
  const auto theta = invert_moment_map(engine, tau, 1e-10);
  const double F = engine.log_partition(theta) - dot(tau.values(), theta.values());
  if (cfg.format == Format::json) {
    out << nlohmann::json{{"tau", tau.values()}, {"theta", theta.values()}, {"free_energy", F}}.dump(2)
        << '\n';
  } else {
    out << "coordinate,tau,theta\n";
    for (std::size_t i = 0; i < tau.size(); ++i) {
      out << i + 1 << ',' << harness::format_double(tau[i]) << ','
          << harness::format_double(theta[i]) << '\n';
    }
    out << "free_energy," << harness::format_double(F) << '\n';
  }
  return 0;
}

int cmd_reduce(const ExperimentConfig& cfg, std::ostream& out) {
  const auto rows = harness::run_reduction_experiment(cfg);
  if (cfg.format == Format::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back(harness::to_json(r));
    out << arr.dump(2) << '\n';
  } else {
    harness::write_reduction_csv(out, rows);
  }
  int code = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      std::cerr << "trial " << r.trial << ": " << r.status << ": " << r.message << '\n';
      code = 3;
    }
  }
  return code;
}

int cmd_sample(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = harness::load_model(cfg);
  const auto theta = theta_or_zero(cfg, model.dimension());
  const auto data = harness::draw_dataset(cfg, model, theta, cfg.n, cfg.seed);
  write_dataset(out, data);
  return 0;
}

int cmd_estimate(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.data_path) {
    // Estimate from a dataset file against the given graph.
    require(cfg.graph_path.has_value(), "estimate: --data needs --graph");
    std::ifstream din(*cfg.data_path);
    require(din.good(), "cannot open dataset file " + *cfg.data_path);
    const Dataset data = read_dataset(din);
    std::ifstream gin(*cfg.graph_path);
    require(gin.good(), "cannot open graph file " + *cfg.graph_path);
    const Graph g = read_graph(gin);
    const auto est = estimate_fields_from_samples(data, g, cfg.beta);
    if (cfg.format == Format::json) {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < est.theta_hat.size(); ++i) {
        rows.push_back({{"vertex", i + 1}, {"N0", est.counts[i].n0}, {"N1", est.counts[i].n1},
                        {"theta_hat", est.valid[i] ? nlohmann::json(est.theta_hat[i]) : nlohmann::json(nullptr)},
                        {"valid", static_cast<bool>(est.valid[i])}});
      }
      out << rows.dump(2) << '\n';
    } else {
      write_estimate_csv(out, est);
    }
    return 0;
  }
  // Planted-theta experiment over seeded trials.
  const auto report = harness::run_sampling_experiment(cfg);
  if (cfg.format == Format::json) {
    out << harness::to_json(report).dump(2) << '\n';
  } else {
    harness::write_sampling_csv(out, report);
  }
  std::cerr << "success_fraction " << report.success_fraction() << '\n';
  if (report.any_flagged()) {
    std::cerr << "flagged: too many invalid coordinates in at least one trial\n";
    return 3;
  }
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = harness::load_model(cfg);
  const auto report = harness::run_verify(model, cfg.seed);
  if (cfg.format == Format::json) {
    out << harness::to_json(report).dump(2) << '\n';
  } else {
    harness::write_verify_csv(out, report);
  }
  return report.passed() ? 0 : 4;
}

int cmd_budget(const ExperimentConfig& cfg, std::ostream& out) {
  require(cfg.random_p.has_value() || cfg.graph_path || cfg.dense_path,
          "budget: give --p (or a model) for the dimension");
  require(cfg.delta && cfg.L && cfg.K && cfg.epsilon, "budget: --delta, --L, --K and --eps are required");
  const std::size_t p = cfg.random_p ? *cfg.random_p : harness::load_model(cfg).dimension();
  const auto b = compute_budget(p, *cfg.delta, *cfg.L, *cfg.K, *cfg.epsilon);
  if (cfg.format == Format::json) {
    out << to_json(b).dump(2) << '\n';
  } else {
    out << "p,delta,L,K,epsilon,t0,m0,xi_max,start_gap_bound\n"
        << b.p << ',' << harness::format_double(b.delta) << ',' << harness::format_double(b.L) << ','
        << harness::format_double(b.K) << ',' << harness::format_double(b.epsilon) << ',' << b.t0
        << ',' << b.m0 << ',' << harness::format_double(b.xi_max) << ','
        << harness::format_double(b.start_gap_bound) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential families on the binary hypercube: exact engine, moment inversion, "
               "log-partition reduction and sample-based field estimation"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string theta_list, tau_list, format = "csv", sampler = "exact";
  std::size_t p_opt = 0, k_opt = 0;

  struct Sub {
    const char* name;
    Command cmd;
    const char* help;
  };
  const std::vector<Sub> commands{
      {"exact", Command::exact, "log Z, moments and covariance at theta by enumeration"},
      {"invert", Command::invert, "solve tau*(theta) = tau by damped Newton"},
      {"reduce", Command::reduce, "estimate log Z(0) from a noisy moment-inversion oracle"},
      {"sample", Command::sample, "write a dataset drawn at theta (exact or Gibbs sampler)"},
      {"estimate", Command::estimate, "estimate fields from --data, or run the planted-theta experiment"},
      {"verify", Command::verify, "check the exact-engine identities on a model"},
      {"budget", Command::budget, "print t0, m0 and xi_max for a parameter tuple"}};
  for (const auto& [name, cmd, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&cfg, c = cmd] { cfg.command = c; });
    sub->add_option("--graph", cfg.graph_path, "graph file (p k header, 1-indexed edges)");
    sub->add_option("--dense", cfg.dense_path, "dense model file (p then 2^p log-weights)");
    sub->add_option("--p", p_opt, "vertex count (random regular graph source, or budget dimension)");
    sub->add_option("--k", k_opt, "degree of the random regular graph");
    sub->add_option("--beta", cfg.beta, "anti-ferromagnetic coupling (>= 0)");
    sub->add_option("--theta", theta_list, "comma-separated theta");
    sub->add_option("--theta-seed", cfg.theta_seed, "draw theta uniformly in [-0.5,0.5]^p");
    sub->add_option("--tau", tau_list, "comma-separated tau (invert)");
    sub->add_option("--delta", cfg.delta, "box margin, in (0, 1/2)");
    sub->add_option("--eps", cfg.epsilon, "target accuracy for log Z");
    sub->add_option("--xi", cfg.xi, "oracle noise radius (reduce) or field precision (sample)");
    sub->add_option("--L", cfg.L, "curvature bound (default 1.5 x measured)");
    sub->add_option("--K", cfg.K, "span bound on log h (default beta k p)");
    sub->add_option("--n", cfg.n, "samples per trial");
    sub->add_option("--burn-in", cfg.burn_in, "Gibbs burn-in sweeps (default 100 p)");
    sub->add_option("--thin", cfg.thin, "Gibbs sweeps between samples (default p)");
    sub->add_option("--sampler", sampler, "exact | gibbs")->check(CLI::IsMember({"exact", "gibbs"}));
    sub->add_option("--data", cfg.data_path, "dataset file (estimate)");
    sub->add_option("--seed", cfg.seed, "base seed");
    sub->add_option("--trials", cfg.trials, "independent trials");
    sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", cfg.out_path, "write the report here instead of stdout");
    sub->add_flag("--deterministic", cfg.deterministic, "single worker, fixed reduction order");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!theta_list.empty()) cfg.theta = harness::parse_list(theta_list);
    if (!tau_list.empty()) cfg.tau = harness::parse_list(tau_list);
    if (k_opt > 0 || (p_opt > 0 && cfg.command != Command::budget)) {
      cfg.random_p = p_opt;
      cfg.random_k = k_opt;
    } else if (p_opt > 0) {
      cfg.random_p = p_opt;
    }
    cfg.format = format == "json" ? Format::json : Format::csv;
    cfg.sampler = sampler == "gibbs" ? harness::Sampler::gibbs : harness::Sampler::exact;
    if (cfg.command != Command::budget) cfg.validate();

    Output output(cfg.out_path);
    std::ostream& out = output.stream();
    switch (cfg.command) {
      case Command::exact: return cmd_exact(cfg, out);
      case Command::invert: return cmd_invert(cfg, out);
      case Command::reduce: return cmd_reduce(cfg, out);
      case Command::sample: return cmd_sample(cfg, out);
      case Command::estimate: return cmd_estimate(cfg, out);
      case Command::verify: return cmd_verify(cfg, out);
      case Command::budget: return cmd_budget(cfg, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
