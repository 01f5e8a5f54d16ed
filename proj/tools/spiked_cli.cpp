// Command-line front end: threshold solves, sweeps and desk-scale simulations.
//
// Exit status: 0 success, 1 invalid input, 2 resource limit, 3 a validation
// check failed.

#include <algorithm>
#include <chrono>
#include <functional>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spiked/spiked.hpp"

namespace {

using nlohmann::json;
using spiked::CsvTable;

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
  std::string config;
  std::uint64_t limit = spiked::kDefaultEnumerationLimit;
};

struct PriorArgs {
  std::vector<std::string> specs{"rademacher"};
  std::string file;

  std::vector<spiked::Prior> resolve(std::size_t k) const {
    std::vector<spiked::Prior> priors;
    if (!file.empty()) priors.push_back(spiked::load_prior_file(file));
    else
      for (const auto& s : specs) priors.push_back(spiked::parse_prior_spec(s));
    if (priors.size() == 1 && k > 1) priors.assign(k, priors.front());
    if (priors.size() != k) throw spiked::DomainError("--prior: give one prior or one per --beta-bar entry");
    return priors;
  }
};

struct ThresholdArgs {
  int p = 3;
  std::string convention = "b2xi";
  int quad_order = 101;
  double v_step = 0.001;
  double b_tol = 1e-4;
  std::string method = "bisection";
  double b_step = 0.001;

  spiked::ThresholdOptions options() const {
    spiked::ThresholdOptions o;
    o.convention = convention == "bxi" ? spiked::TimeConvention::BXiPrime : spiked::TimeConvention::BSquaredXiPrime;
    o.quad_order = quad_order;
    o.v_step_fraction = v_step;
    o.b_tol = b_tol;
    o.method = method == "grid" ? spiked::SearchMethod::Grid : spiked::SearchMethod::Bisection;
    o.b_step = b_step;
    return o;
  }
};

struct Result {
  CsvTable table{{}};
  json summary = json::object();
  int status = 0;
};

void add_prior_options(CLI::App* sub, PriorArgs& args) {
  sub->add_option("--prior", args.specs, "rademacher or sparse:<rho>; repeat once per spike")->capture_default_str();
  sub->add_option("--prior-file", args.file, "JSON prior {\"label\", \"atoms\": [[point, weight], ...]}")
      ->check(CLI::ExistingFile);
}

void add_threshold_options(CLI::App* sub, ThresholdArgs& args) {
  sub->add_option("--convention", args.convention, "time convention")
      ->check(CLI::IsMember({"b2xi", "bxi"}))
      ->capture_default_str();
  sub->add_option("--quad-order", args.quad_order, "quadrature resolution (Gauss-Hermite order)")->check(CLI::Range(21, 500))->capture_default_str();
  sub->add_option("--v-step", args.v_step, "v grid step as a fraction of v_*")
      ->check(CLI::Range(1e-6, 0.1))
      ->capture_default_str();
  sub->add_option("--b-tol", args.b_tol, "bisection tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--method", args.method, "search method")
      ->check(CLI::IsMember({"bisection", "grid"}))
      ->capture_default_str();
  sub->add_option("--b-step", args.b_step, "grid step in b")->check(CLI::PositiveNumber)->capture_default_str();
}

std::string join(const std::vector<double>& xs, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + spiked::format_number(xs[i]);
  return s;
}

/// Appends `--key value` for every config entry whose flag is absent from
/// the command line, so explicit flags win. A "subcommand" entry is used when
/// none is named on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args, const std::vector<std::string>& subcommands) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw spiked::DomainError("--config: cannot open " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw spiked::DomainError("--config: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw spiked::DomainError("--config: top level must be an object");

  auto present = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  bool has_sub = false;
  for (const auto& a : args)
    for (const auto& s : subcommands) has_sub |= a == s;
  if (!has_sub && cfg.contains("subcommand")) args.insert(args.begin(), cfg["subcommand"].get<std::string>());

  auto scalar = [](const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    if (v.is_number()) return spiked::format_number(v.get<double>());
    throw spiked::DomainError("--config: unsupported value " + v.dump());
  };
  for (const auto& [key, value] : cfg.items()) {
    if (key == "subcommand" || key == "config") continue;
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      if (key == "prior") {
        for (const auto& v : value) {
          args.push_back(flag);
          args.push_back(scalar(v));
        }
      } else {
        std::string joined;
        for (std::size_t i = 0; i < value.size(); ++i) joined += (i ? "," : "") + scalar(value[i]);
        args.push_back(flag);
        args.push_back(joined);
      }
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

json resolved_options(const CLI::App& app) {
  json out = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    if (opt->get_lnames().front() == "help" || opt->get_lnames().front() == "version") continue;
    const std::string name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& res = opt->results();
      out[name] = res.size() == 1 ? json(res.front()) : json(res);
    } else {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection thresholds for spiked tensors and desk-scale spin-glass checks", "spiked"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", spiked::kVersion);

  Globals g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker thread cap (0 = hardware)")->capture_default_str();
  app.add_option("--out", g.out, "output file (default stdout); writes <out>.meta.json alongside");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--config", g.config, "JSON file of flag values; explicit flags take precedence");
  app.add_option("--limit", g.limit, "enumeration configuration limit")->check(CLI::PositiveNumber)->capture_default_str();

  PriorArgs prior_args;
  ThresholdArgs th;
  std::vector<double> beta_bar{1.0};
  std::string beta_bar_text = "1";
  int n = 8;
  std::string n_list_text = "6,8,10,12";
  int replicas = 400;
  std::string method = "exact";
  long sweeps = 2000, burn_in = 200;
  std::map<std::string, std::function<Result()>> handlers;

  // threshold
  auto* threshold = app.add_subcommand("threshold", "critical beta for one prior (one row per --prior)");
  add_prior_options(threshold, prior_args);
  threshold->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 64))->capture_default_str();
  add_threshold_options(threshold, th);
  handlers["threshold"] = [&] {
    Result r;
    r.table = CsvTable({"prior", "p", "convention", "beta_c", "bracket_lo", "bracket_hi", "v_grid_step", "b_tol",
                        "sup_gamma_lo", "sup_gamma_hi", "quad_order"});
    const auto priors = prior_args.resolve(prior_args.file.empty() ? prior_args.specs.size() : 1);
    for (const auto& prior : priors) {
      const auto t = spiked::critical_beta(prior, th.p, th.options());
      r.table.add_cells({prior.label(), th.p, spiked::to_string(t.convention), t.beta_c, t.bracket_lo, t.bracket_hi,
                         t.v_grid_step, t.b_tolerance, t.sup_gamma_at_lo, t.sup_gamma_at_hi, t.quad_order});
    }
    return r;
  };

  // sweep
  std::string p_list_text = "3,4,5,10", rho_list_text = "0.1:1:0.1";
  auto* sweep = app.add_subcommand("sweep", "beta_c over p and sparsity for the sparse Rademacher prior");
  sweep->add_option("--p-list", p_list_text, "orders, comma list or start:stop:step")->capture_default_str();
  sweep->add_option("--rho-list", rho_list_text, "sparsities in (0, 1]")->capture_default_str();
  add_threshold_options(sweep, th);
  handlers["sweep"] = [&] {
    Result r;
    r.table = CsvTable({"p", "rho", "beta_c", "bracket_lo", "bracket_hi", "h_bound"});
    const auto table = spiked::sweep(spiked::parse_int_list(p_list_text), spiked::parse_real_list(rho_list_text),
                                     th.options());
    json failures = json::array();
    for (const auto& row : table.rows) {
      r.table.add_row({static_cast<double>(row.p), row.rho, row.beta_c, row.bracket_lo, row.bracket_hi, row.h_bound});
      if (!row.ok()) {
        std::cerr << "cell p=" << row.p << " rho=" << row.rho << ": " << row.error << '\n';
        failures.push_back({{"p", row.p}, {"rho", row.rho}, {"error", row.error}});
      }
    }
    r.summary["failed_cells"] = failures;
    return r;
  };

  // gamma
  double b = 1.0;
  std::string s_grid_text = "0:1:0.05";
  auto* gamma = app.add_subcommand("gamma", "gamma_b(s) on an s grid");
  add_prior_options(gamma, prior_args);
  gamma->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 64))->capture_default_str();
  gamma->add_option("--b", b, "SNR b")->check(CLI::NonNegativeNumber)->capture_default_str();
  gamma->add_option("--s-grid", s_grid_text, "overlap values s, lo:hi:step or a comma list")->capture_default_str();
  add_threshold_options(gamma, th);
  handlers["gamma"] = [&] {
    Result r;
    r.table = CsvTable({"s", "gamma", "gamma_minus_s"});
    const auto prior = prior_args.resolve(1).front();
    const spiked::AuxiliaryFunctions aux(prior, {th.p, th.options().convention, th.quad_order});
    for (double s : spiked::parse_real_list(s_grid_text)) {
      const double v = aux.gamma(b, s);
      r.table.add_row({s, v, v - s});
    }
    return r;
  };

  // simulate-fe
  std::string export_path;
  int points = 17;
  auto* fe = app.add_subcommand("simulate-fe", "free energy samples F_N over independent disorders");
  add_prior_options(fe, prior_args);
  fe->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 16))->capture_default_str();
  fe->add_option("--n", n, "system size N")->check(CLI::Range(2, 4096))->capture_default_str();
  fe->add_option("--beta-bar", beta_bar_text, "SNRs, comma list (one per spike)")->capture_default_str();
  fe->add_option("--replicas", replicas, "disorder samples")->check(CLI::Range(1, 100000000))->capture_default_str();
  fe->add_option("--method", method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}))->capture_default_str();
  fe->add_option("--sweeps", sweeps, "Monte Carlo sweeps per chain")->check(CLI::PositiveNumber)->capture_default_str();
  fe->add_option("--burn-in", burn_in, "discarded sweeps")->check(CLI::NonNegativeNumber)->capture_default_str();
  fe->add_option("--points", points, "thermodynamic integration nodes (odd)")->capture_default_str();
  fe->add_option("--export-tensor", export_path, "write the first replica's disorder tensor here");
  handlers["simulate-fe"] = [&] {
    Result r;
    r.table = CsvTable({"replica", "disorder_seed", "free_energy", "method"});
    beta_bar = spiked::parse_real_list(beta_bar_text);
    const auto priors = prior_args.resolve(beta_bar.size());
    std::vector<json> seeds(replicas);
    std::vector<double> values(replicas);
    spiked::parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
      const std::uint64_t seed = spiked::derive_seed(g.seed, spiked::StreamTag::Replica, i);
      const spiked::Disorder d = spiked::sample_disorder(n, th.p, seed);
      values[i] = method == "exact" ? spiked::free_energy_exact(d, priors, beta_bar, g.limit).value
                                    : spiked::free_energy_mc(d, priors, beta_bar,
                                                             {sweeps, burn_in, g.seed, i}, points).value;
      seeds[i] = std::to_string(seed);
    });
    for (int i = 0; i < replicas; ++i) r.table.add_cells({i, seeds[i], values[i], method});
    if (!export_path.empty()) {
      const spiked::Disorder d = spiked::sample_disorder(n, th.p, spiked::derive_seed(g.seed, spiked::StreamTag::Replica, 0));
      spiked::write_tensor(export_path, d.entries, n, th.p, static_cast<int>(priors.size()), beta_bar, d.seed);
    }
    const auto est = spiked::summarize(values);
    r.summary["mean"] = est.mean;
    r.summary["stderr"] = est.stderr_;
    r.summary["variance"] = est.variance;
    return r;
  };

  // tv
  std::string beta_list_text = "0.5";
  auto* tv = app.add_subcommand("tv", "total variation distance between the null and spiked models");
  add_prior_options(tv, prior_args);
  tv->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 16))->capture_default_str();
  tv->add_option("--n-list", n_list_text, "system sizes")->capture_default_str();
  tv->add_option("--beta-list", beta_list_text, "SNRs (single spike)")->capture_default_str();
  tv->add_option("--beta-bar", beta_bar_text, "SNRs of several spikes (overrides --beta-list)");
  tv->add_option("--replicas", replicas, "disorder samples")->check(CLI::Range(2, 100000000))->capture_default_str();
  handlers["tv"] = [&] {
    Result r;
    r.table = CsvTable({"n", "beta", "tv", "stderr"});
    const bool multi = tv->get_option("--beta-bar")->count() > 0;
    for (int size : spiked::parse_int_list(n_list_text)) {
      if (multi) {
        beta_bar = spiked::parse_real_list(beta_bar_text);
        const auto est = spiked::estimate_tv(size, th.p, prior_args.resolve(beta_bar.size()), beta_bar, replicas, g.seed);
        r.table.add_cells({size, join(beta_bar, ";"), est.tv, est.stderr_});
      } else {
        const auto betas = spiked::parse_real_list(beta_list_text);
        const auto curve = spiked::estimate_tv_curve(size, th.p, prior_args.resolve(1).front(), betas, replicas, g.seed);
        for (std::size_t j = 0; j < betas.size(); ++j) r.table.add_cells({size, betas[j], curve[j].tv, curve[j].stderr_});
      }
    }
    return r;
  };

  // detect
  int trials = 1000;
  auto* detect = app.add_subcommand("detect", "likelihood-ratio test error rates");
  add_prior_options(detect, prior_args);
  detect->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 16))->capture_default_str();
  detect->add_option("--n-list", n_list_text, "system sizes")->capture_default_str();
  detect->add_option("--beta-bar", beta_bar_text, "SNRs, comma list")->capture_default_str();
  detect->add_option("--trials", trials, "null/spiked pairs per size")->check(CLI::Range(1, 100000000))->capture_default_str();
  handlers["detect"] = [&] {
    Result r;
    r.table = CsvTable({"n", "type1", "type2", "total_error", "stderr"});
    beta_bar = spiked::parse_real_list(beta_bar_text);
    const auto priors = prior_args.resolve(beta_bar.size());
    for (int size : spiked::parse_int_list(n_list_text)) {
      const auto d = spiked::detection_experiment(size, th.p, priors, beta_bar, trials, g.seed);
      r.table.add_cells({size, d.type1, d.type2, d.total_error, d.total_error_stderr});
    }
    return r;
  };

  // scaling
  double beta = 0.5;
  int m = 1;
  std::string scaling_n = "6,8,10,12,14";
  auto* scaling = app.add_subcommand("scaling", "overlap moment and free-energy variance against N");
  add_prior_options(scaling, prior_args);
  scaling->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 16))->capture_default_str();
  scaling->add_option("--n-list", scaling_n, "system sizes")->capture_default_str();
  scaling->add_option("--beta", beta, "SNR")->check(CLI::NonNegativeNumber)->capture_default_str();
  scaling->add_option("--m", m, "overlap moment order 2m")->check(CLI::PositiveNumber)->capture_default_str();
  scaling->add_option("--replicas", replicas, "disorder samples")->check(CLI::Range(2, 100000000))->capture_default_str();
  scaling->add_option("--method", method, "inner Gibbs average: exact or mc")
      ->check(CLI::IsMember({"exact", "mc"}))
      ->capture_default_str();
  scaling->add_option("--sweeps", sweeps, "Monte Carlo sweeps per chain")->check(CLI::PositiveNumber)->capture_default_str();
  scaling->add_option("--burn-in", burn_in, "discarded sweeps")->check(CLI::NonNegativeNumber)->capture_default_str();
  handlers["scaling"] = [&] {
    Result r;
    r.table = CsvTable({"n", "overlap_moment", "overlap_stderr", "fe_mean", "fe_variance"});
    const auto prior = prior_args.resolve(1).front();
    const auto sizes = spiked::parse_int_list(scaling_n);
    const auto fluct = spiked::fluctuation_scan(sizes, th.p, prior, beta, replicas, g.seed);
    std::vector<double> xs, ov, var;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      spiked::OverlapMomentOptions o;
      o.m = m;
      o.replicas = replicas;
      o.seed = g.seed;
      o.method = method == "mc" ? spiked::OverlapMethod::MonteCarlo : spiked::OverlapMethod::Exact;
      o.sweeps = sweeps;
      o.burn_in = burn_in;
      const auto om = spiked::overlap_moment(sizes[i], th.p, {prior}, {beta}, o);
      r.table.add_row({static_cast<double>(sizes[i]), om.estimate[0], om.stderr_[0], fluct[i].mean, fluct[i].variance});
      xs.push_back(sizes[i]);
      ov.push_back(om.estimate[0]);
      var.push_back(fluct[i].variance);
    }
    if (xs.size() >= 2 && beta > 0.0) {
      r.summary["overlap_loglog_slope"] = spiked::loglog_slope(xs, ov);
      r.summary["variance_loglog_slope"] = spiked::loglog_slope(xs, var);
      std::cerr << "log-log slopes: overlap " << r.summary["overlap_loglog_slope"] << ", variance "
                << r.summary["variance_loglog_slope"] << '\n';
    }
    return r;
  };

  // mmse
  std::string t_list_text = "1";
  auto* mmse = app.add_subcommand("mmse", "exact-posterior MMSE against the DMSE baseline");
  add_prior_options(mmse, prior_args);
  mmse->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 16))->capture_default_str();
  mmse->add_option("--n", n, "system size N")->check(CLI::Range(2, 64))->capture_default_str();
  mmse->add_option("--beta-bar", beta_bar_text, "SNRs, comma list")->capture_default_str();
  mmse->add_option("--t-list", t_list_text, "interpolation times in [0, 1]")->capture_default_str();
  mmse->add_option("--replicas", replicas, "(spike, disorder) samples")->check(CLI::Range(2, 100000000))->capture_default_str();
  handlers["mmse"] = [&] {
    Result r;
    r.table = CsvTable({"t", "mmse", "stderr", "dmse"});
    beta_bar = spiked::parse_real_list(beta_bar_text);
    const auto priors = prior_args.resolve(beta_bar.size());
    for (double t : spiked::parse_real_list(t_list_text)) {
      const auto e = spiked::mmse_exact(n, th.p, priors, beta_bar, t, replicas, g.seed);
      r.table.add_row({t, e.mmse, e.stderr_, e.dmse});
    }
    return r;
  };

  // nishimori
  std::vector<std::size_t> components{0, 0};
  auto* nish = app.add_subcommand("nishimori", "planted versus two-replica overlap identity");
  add_prior_options(nish, prior_args);
  nish->add_option("--p", th.p, "tensor order")->check(CLI::Range(2, 16))->capture_default_str();
  nish->add_option("--n", n, "system size N")->check(CLI::Range(2, 64))->capture_default_str();
  nish->add_option("--beta-bar", beta_bar_text, "SNRs, comma list")->capture_default_str();
  nish->add_option("--t-list", t_list_text, "interpolation times in [0, 1]")->capture_default_str();
  nish->add_option("--replicas", replicas, "(spike, disorder) samples")->check(CLI::Range(2, 100000000))->capture_default_str();
  nish->add_option("--components", components, "spike components r r'")->expected(2)->delimiter(',')->capture_default_str();
  handlers["nishimori"] = [&] {
    Result r;
    r.table = CsvTable({"t", "lhs", "rhs", "z"});
    beta_bar = spiked::parse_real_list(beta_bar_text);
    const auto priors = prior_args.resolve(beta_bar.size());
    for (double t : spiked::parse_real_list(t_list_text)) {
      const auto e = spiked::nishimori_residual(n, th.p, priors, beta_bar, t, replicas, g.seed, components[0], components[1]);
      r.table.add_row({t, e.lhs, e.rhs, e.z});
    }
    return r;
  };

  // validate
  std::string level = "fast";
  auto* validate = app.add_subcommand("validate", "run the built-in invariant checks");
  validate->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}))->capture_default_str();
  handlers["validate"] = [&] {
    Result r;
    r.table = CsvTable({"check", "passed", "detail"});
    for (const auto& c : spiked::validate_suite(level == "full" ? spiked::SuiteLevel::Full : spiked::SuiteLevel::Fast)) {
      r.table.add_cells({c.name, c.passed ? "pass" : "FAIL", c.detail});
      if (!c.passed) {
        std::cerr << "failed: " << c.name << " (" << c.detail << ")\n";
        r.status = 3;
      }
    }
    return r;
  };

  std::vector<std::string> subcommand_names;
  for (const auto& [name, _] : handlers) subcommand_names.push_back(name);

  try {
    std::vector<std::string> args = merge_config(std::vector<std::string>(argv + 1, argv + argc), subcommand_names);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const spiked::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  if (g.threads > 0) spiked::set_max_threads(g.threads);
  const CLI::App* chosen = app.get_subcommands().front();
  const auto started = std::chrono::steady_clock::now();
  Result result;
  try {
    result = handlers.at(chosen->get_name())();
  } catch (const spiked::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 2;
  } catch (const spiked::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string body = g.format == "json" ? result.table.to_json(g.seed).dump(2) + "\n" : result.table.to_csv(g.seed);
  if (g.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream(g.out) << body;
    json meta{{"tool", "spiked"},
              {"version", spiked::kVersion},
              {"subcommand", chosen->get_name()},
              {"seed", g.seed},
              {"config", {{"global", resolved_options(app)}, {chosen->get_name(), resolved_options(*chosen)}}},
              {"summary", result.summary},
              {"wall_time_seconds", wall}};
    std::ofstream(g.out + ".meta.json") << meta.dump(2) << '\n';
  }
  return result.status;
}
