// Command-line front end: network generation, spectra, simulation, coupled
// comparisons, calibration tables, and the acceptance suite.  One JSON config
// per run; flags override config fields; every stochastic command requires an
// explicit seed.  Exit codes: 0 success, 2 config error, 3 criterion failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prodnet/prodnet.hpp"

namespace fs = std::filesystem;
using namespace prodnet;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

json load_config(const Global& g, bool required) {
  if (g.config_path.empty()) {
    if (required) throw ConfigError("missing --config PATH");
    return json::object();
  }
  try {
    return read_json_file(g.config_path);
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("cannot read config: ") + ex.what());
  }
}

const json& block(const json& cfg, const char* key) {
  if (!cfg.contains(key))
    throw ConfigError(std::string("config is missing the '") + key + "' block");
  return cfg.at(key);
}

template <typename T>
T field(const json& blk, const char* key, const char* blkname) {
  if (!blk.contains(key))
    throw ConfigError(std::string(blkname) + " block is missing '" + key + "'");
  try {
    return blk.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError(std::string("bad value for ") + blkname + "." + key);
  }
}

std::uint64_t need_seed(const json& blk, const Global& g, const char* blkname) {
  if (g.seed_set) return g.seed;
  if (blk.contains("seed")) return blk.at("seed").get<std::uint64_t>();
  throw ConfigError(std::string("stochastic command needs a seed: pass --seed or set ") +
                    blkname + ".seed");
}

std::string out_path(const Global& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

// Resolved config (after flag overrides) is hashed and embedded, so a
// manifest alone is enough to regenerate every CSV byte for byte.
void finish_manifest(const Global& g, const json& resolved, RunManifest m,
                     std::chrono::steady_clock::time_point t0) {
  m.config_hash = hex64(fnv1a64(resolved.dump()));
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json j;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["seeds"] = m.seeds;
  j["outputs"] = m.outputs;
  j["config"] = resolved;
  write_text_file(out_path(g, "manifest.json"), j.dump(2) + "\n");
}

ProductionNetwork resolve_network(const json& cfg, const Global& g, RunManifest* manifest) {
  const json& nb = block(cfg, "network");
  if (nb.contains("file")) {
    const std::string file = nb.at("file").get<std::string>();
    try {
      return load_network(file);
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("network.file: ") + ex.what());
    }
  }
  const int n = field<int>(nb, "n", "network");
  const double alpha = field<double>(nb, "alpha", "network");
  const double beta = field<double>(nb, "beta", "network");
  if (!(alpha > 1.0)) throw ConfigError("network.alpha must exceed 1 for finite mean degree");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("network.beta must lie in (0,1)");
  if (n < 2) throw ConfigError("network.n must be at least 2");
  const std::uint64_t seed = need_seed(nb, g, "network");
  if (manifest) manifest->seeds.push_back(seed);
  WeightMode wm = WeightMode::kUniform, gm = WeightMode::kUniform;
  try {
    if (nb.contains("weights")) wm = weight_mode_from_string(nb.at("weights").get<std::string>());
    if (nb.contains("gamma_mode"))
      gm = weight_mode_from_string(nb.at("gamma_mode").get<std::string>());
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }
  DegreeSequence deg = sample_degrees(n, alpha, seed);
  return build_share_matrix(deg, beta, wm, seed, gm);
}

json resolved_with_seed(json cfg, const Global& g, const char* blkname) {
  if (g.seed_set && cfg.contains(blkname)) cfg[blkname]["seed"] = g.seed;
  return cfg;
}

// ---------- subcommands ----------

int cmd_generate(const Global& g) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg = resolved_with_seed(load_config(g, true), g, "network");
  RunManifest m;
  const ProductionNetwork net = resolve_network(cfg, g, &m);
  const std::string csv = out_path(g, "network.csv");
  write_network(net, csv);
  m.outputs = {csv, csv + ".json"};

  const DegreeMoments dm = degree_moments(net.alpha, net.n);
  double emp_mean = 0.0, emp_sec = 0.0;
  for (int d : net.degrees) {
    emp_mean += d;
    emp_sec += static_cast<double>(d) * d;
  }
  emp_mean /= net.n;
  emp_sec /= net.n;
  std::printf("network: n=%d beta=%.6g alpha=%.6g seed=%llu\n", net.n, net.beta, net.alpha,
              static_cast<unsigned long long>(net.seed));
  std::printf("degree mean: sampled %.6g, closed form %.6g\n", emp_mean, dm.mean);
  std::printf("degree variance: sampled %.6g, closed form %.6g\n",
              emp_sec - emp_mean * emp_mean, dm.variance);
  std::printf("column sums fixed at %.17g; wrote %s\n", 1.0 - net.beta, csv.c_str());
  finish_manifest(g, cfg, std::move(m), t0);
  return 0;
}

int cmd_spectrum(const Global& g) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg = resolved_with_seed(load_config(g, true), g, "network");
  RunManifest m;
  const ProductionNetwork net = resolve_network(cfg, g, &m);
  double tol = 1e-12, gap_tol = 0.0;
  if (cfg.contains("spectrum")) {
    tol = cfg["spectrum"].value("tol", 1e-12);
    gap_tol = cfg["spectrum"].value("gap_tol", 0.0);
  }
  const SpectralSummary sum = build_spectral_summary(net, tol, gap_tol);
  const std::string out = out_path(g, "spectral_summary.json");
  write_text_file(out, to_json(sum).dump(2) + "\n");
  m.outputs = {out};
  std::printf("lambda1 = %.12g (uniform-left residual %.3g)\n", sum.lambda1,
              sum.perron_residual);
  std::printf("lambda2 = %.12g, |lambda2| = %.12g%s%s\n", sum.lambda2, sum.lambda2_mod,
              sum.lambda2_complex ? " (complex pair)" : "",
              sum.lambda2_tied ? " (tied moduli)" : "");
  std::printf("gap = %.12g, loading b = %.12g\n", sum.gap, sum.b);
  finish_manifest(g, cfg, std::move(m), t0);
  return 0;
}

int cmd_simulate(const Global& g) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg = resolved_with_seed(load_config(g, true), g, "simulate");
  const json& sb = block(cfg, "simulate");
  const std::string kind = field<std::string>(sb, "kind", "simulate");
  const int T = field<int>(sb, "T", "simulate");
  const double sigma = field<double>(sb, "sigma", "simulate");
  const std::uint64_t seed = need_seed(sb, g, "simulate");
  if (T < 2) throw ConfigError("simulate.T must be at least 2");
  if (sigma < 0.0) throw ConfigError("simulate.sigma must be nonnegative");

  RunManifest m;
  m.seeds.push_back(seed);
  Vec y;
  std::uint64_t net_hash = 0;
  json params;
  params["T"] = T;
  params["sigma"] = sigma;
  if (kind == "micro" || kind == "rounds") {
    const ProductionNetwork net = resolve_network(cfg, g, &m);
    net_hash = network_hash(net);
    const ShockPanel panel = draw_shocks(net.n, T, sigma, seed);
    if (kind == "micro") {
      const MicroResult mr = simulate_micro(net, panel);
      y = mr.y;
      params["recursion_residual"] = mr.recursion_residual;
      std::printf("micro panel: recursion residual %.3g, labor residual %.3g\n",
                  mr.recursion_residual, mr.labor_residual);
    } else {
      const int L = field<int>(sb, "L", "simulate");
      if (L < 1) throw ConfigError("simulate.L must be at least 1");
      params["L"] = L;
      y = simulate_L_economy(net, panel, L);
    }
  } else if (kind == "reduced" || kind == "static") {
    const double lambda2 = field<double>(sb, "lambda2", "simulate");
    const double b = field<double>(sb, "b", "simulate");
    if (!(lambda2 >= 0.0 && lambda2 < 1.0))
      throw ConfigError("simulate.lambda2 must lie in [0,1)");
    params["lambda2"] = lambda2;
    params["b"] = b;
    CounterRng rng(seed, kStreamScalar);
    Vec eta(T);
    for (int t = 0; t < T; ++t) eta[t] = sigma * rng.gaussian(static_cast<std::uint64_t>(t));
    y = kind == "reduced" ? simulate_reduced(lambda2, b, eta) : static_reduced(lambda2, b, eta);
  } else {
    throw ConfigError("simulate.kind must be micro, rounds, reduced, or static");
  }

  const std::string csv = out_path(g, "path.csv");
  write_series_csv(csv, y);
  write_series_sidecar(csv, kind, params, seed, net_hash);
  write_gnuplot_series(out_path(g, "path.gp"), "path.csv", kind + " aggregate path", "y");
  m.outputs = {csv, csv + ".json", out_path(g, "path.gp")};
  std::printf("wrote %zu dates to %s\n", y.size(), csv.c_str());
  finish_manifest(g, cfg, std::move(m), t0);
  return 0;
}

int cmd_compare(const Global& g) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg = resolved_with_seed(load_config(g, true), g, "compare");
  const json& cb = block(cfg, "compare");
  const std::string mode = cb.value("mode", "reduced");
  const int T = field<int>(cb, "T", "compare");
  const int reps = cb.value("reps", 8);
  const double sigma = field<double>(cb, "sigma", "compare");
  const double c = cb.value("c", 1.0);
  const std::uint64_t seed = need_seed(cb, g, "compare");
  if (reps < 1) throw ConfigError("compare.reps must be positive");
  if (T < 3) throw ConfigError("compare.T must be at least 3");

  RunManifest m;
  m.seeds.push_back(seed);
  std::ostringstream rows;
  rows << risk_report_csv_header();

  if (mode == "reduced") {
    double lambda2 = 0.0, b = 0.0;
    if (cb.value("from_network", false)) {
      const ProductionNetwork net = resolve_network(cfg, g, &m);
      const SpectralSummary sum = build_spectral_summary(net);
      if (sum.lambda2_complex)
        throw ConfigError(
            "dominant transient eigenvalue is a complex pair; the scalar two-mode path does "
            "not apply. Re-run with compare.mode = \"network\"");
      if (sum.lambda2_tied)
        throw ConfigError(
            "transient eigenvalue moduli are tied; re-run with compare.mode = \"network\"");
      lambda2 = std::fabs(sum.lambda2);
      b = sum.b;
    } else {
      lambda2 = field<double>(cb, "lambda2", "compare");
      b = field<double>(cb, "b", "compare");
    }
    if (!(lambda2 >= 0.0 && lambda2 < 1.0)) throw ConfigError("compare.lambda2 outside [0,1)");
    if (!(c > 0.0)) throw ConfigError("compare.c must be positive");
    RiskReport mean_rep;
    for (int r = 0; r < reps; ++r) {
      const RiskReport rep =
          make_risk_report(lambda2, b, sigma, T, c, seed + static_cast<std::uint64_t>(r));
      rows << risk_report_csv_row(std::to_string(r), rep);
      mean_rep.phi += rep.phi / reps;
      mean_rep.phi_star += rep.phi_star / reps;
      mean_rep.phi_hat += rep.phi_hat / reps;
      mean_rep.phi_hat_star += rep.phi_hat_star / reps;
      mean_rep.omega_c += rep.omega_c / reps;
      mean_rep.omega_c_star += rep.omega_c_star / reps;
      mean_rep.omega_hat_c += rep.omega_hat_c / reps;
      mean_rep.omega_hat_c_star += rep.omega_hat_c_star / reps;
      mean_rep.R = rep.R;
      mean_rep.kappa = rep.kappa;
      mean_rep.c = rep.c;
      mean_rep.meta = rep.meta;
    }
    rows << risk_report_csv_row("mean", mean_rep);
    const double ratio =
        mean_rep.phi_hat_star > 0.0 ? mean_rep.phi_hat / mean_rep.phi_hat_star : 0.0;
    std::printf("mean window ratio %.6g vs closed form %.6g (lambda2 %.4g, %d reps)\n", ratio,
                attenuation_ratio(lambda2), lambda2, reps);
  } else if (mode == "network") {
    const ProductionNetwork net = resolve_network(cfg, g, &m);
    const int L_small = cb.value("L_small", 1);
    const int L_large = cb.value("L_large", 100);
    if (L_small < 1 || L_large < L_small) throw ConfigError("compare: need 1 <= L_small <= L_large");
    const double phi_small = population_L_variance(net, sigma, L_small);
    const double phi_large = population_L_variance(net, sigma, L_large);
    const double phi_star = population_static_variance(net, sigma);
    int ordered = 0;
    rows.str("");
    rows << "rep,phi_hat_L_small,phi_hat_L_large,phi_hat_star\n";
    for (int r = 0; r < reps; ++r) {
      const ShockPanel panel =
          draw_shocks(net.n, T, sigma, seed + static_cast<std::uint64_t>(r));
      const double hs = realized_volatility(simulate_L_economy(net, panel, L_small));
      const double hl = realized_volatility(simulate_L_economy(net, panel, L_large));
      const double hstar = realized_volatility(static_series(net, panel));
      if (hl >= hs) ++ordered;
      rows << r << ',' << fmt17(hs) << ',' << fmt17(hl) << ',' << fmt17(hstar) << '\n';
    }
    rows << "population," << fmt17(phi_small) << ',' << fmt17(phi_large) << ','
         << fmt17(phi_star) << '\n';
    std::printf("deeper processing raised window volatility in %d/%d reps\n", ordered, reps);
  } else {
    throw ConfigError("compare.mode must be reduced or network");
  }

  const std::string csv = out_path(g, "risk_report.csv");
  write_text_file(csv, rows.str());
  m.outputs = {csv};
  std::printf("wrote %s\n", csv.c_str());
  finish_manifest(g, cfg, std::move(m), t0);
  return 0;
}

int cmd_calibrate(const Global& g) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg = load_config(g, true);
  const json& kb = block(cfg, "calibrate");
  Vec grid = default_lambda2_grid();
  Vec shares = default_static_shares();
  if (kb.contains("lambda2_grid")) grid = kb.at("lambda2_grid").get<Vec>();
  if (kb.contains("static_shares")) shares = kb.at("static_shares").get<Vec>();

  RunManifest m;
  const CalibrationTable table = shares.empty() ? attenuation_table(grid)
                                                : share_table(grid, shares);
  const std::string csv = out_path(g, "calibration.csv");
  write_text_file(csv, calibration_csv(table));
  write_gnuplot_table(out_path(g, "calibration.gp"), "calibration.csv",
                      "attenuation across persistence");
  m.outputs = {csv, out_path(g, "calibration.gp")};
  for (const CalibrationRow& r : table.rows)
    if (table.has_shares && !share_label(r.dynamic_share).empty())
      std::printf("lambda2 %.2f: static share %.3g -> dynamic share %.3g (%s)\n", r.lambda2,
                  r.static_share, r.dynamic_share, share_label(r.dynamic_share).c_str());

  if (kb.contains("sensitivity")) {
    const json& sb = kb.at("sensitivity");
    const double alpha = field<double>(sb, "alpha", "calibrate.sensitivity");
    const int T = field<int>(sb, "T", "calibrate.sensitivity");
    const double sigma = sb.value("sigma", 1.0);
    const double b_scale = sb.value("b_scale", 1.0);
    const double h = sb.value("h", 1e-3);
    Lambda2Map map;
    try {
      map = lambda2_map_from_json(sb.at("map"));
    } catch (const std::exception& ex) {
      throw ConfigError(std::string("calibrate.sensitivity.map: ") + ex.what());
    }
    std::vector<int> degrees;
    if (sb.contains("degrees")) {
      degrees = sb.at("degrees").get<std::vector<int>>();
    } else {
      const ProductionNetwork net = resolve_network(cfg, g, &m);
      degrees = net.degrees;
    }
    const Vec gamma(degrees.size(), 1.0 / static_cast<double>(degrees.size()));
    const SensitivityReport rep = sensitivity_decomposition(
        alpha, [&](double a) { return map(a); }, degrees, gamma, sigma, b_scale, T, h);
    const std::string sj = out_path(g, "sensitivity.json");
    write_text_file(sj, to_json(rep).dump(2) + "\n");
    m.outputs.push_back(sj);
    std::printf("alpha %.4g: exposure %.6g + overlap %.6g = %.6g (direct %.6g)\n", rep.alpha,
                rep.exposure_channel, rep.overlap_channel, rep.total, rep.direct_difference);
    if (!rep.sign_ok)
      std::printf("warning: lambda2 mapping does not fall with alpha; fatter tails are "
                  "expected to raise persistence\n");
  }
  finish_manifest(g, cfg, std::move(m), t0);
  return 0;
}

int cmd_verify(const Global& g, const std::string& level_flag) {
  json cfg = load_config(g, false);
  VerifyOptions opt;
  std::string level = level_flag;
  if (level.empty() && cfg.contains("verify")) level = cfg["verify"].value("level", "fast");
  if (level.empty()) level = "fast";
  if (level != "fast" && level != "full")
    throw ConfigError("verify level must be fast or full");
  opt.full = level == "full";
  if (cfg.contains("verify")) opt.lambda2_bias = cfg["verify"].value("mutate_lambda2", 0.0);
  if (const char* env = std::getenv("PRODNET_MUTATE_LAMBDA2")) opt.lambda2_bias = std::atof(env);

  const VerifySummary sum = run_acceptance(opt);
  print_pass_fail(sum, std::cout);
  write_text_file(out_path(g, "verify_ledger.csv"), ledger_csv(sum));
  std::printf("ledger: %s\n", out_path(g, "verify_ledger.csv").c_str());
  return sum.all_pass ? 0 : 3;
}

int cmd_report(const Global& g) {
  const std::string path = out_path(g, "manifest.json");
  if (!fs::exists(path)) throw ConfigError("no manifest.json in " + g.out_dir);
  const RunManifest m = read_manifest(path);
  std::printf("manifest %s\n", path.c_str());
  std::printf("  version      %s\n", m.version.c_str());
  std::printf("  config hash  %s\n", m.config_hash.c_str());
  std::printf("  wall clock   %.3f s\n", m.wall_clock_seconds);
  std::printf("  seeds       ");
  for (std::uint64_t sd : m.seeds) std::printf(" %llu", static_cast<unsigned long long>(sd));
  std::printf("\n");
  for (const std::string& f : m.outputs) {
    std::uintmax_t sz = fs::exists(f) ? fs::file_size(f) : 0;
    long rows_n = -1;
    if (f.size() > 4 && f.substr(f.size() - 4) == ".csv" && fs::exists(f)) {
      const std::string body = read_text_file(f);
      rows_n = static_cast<long>(std::count(body.begin(), body.end(), '\n')) - 1;
    }
    if (rows_n >= 0)
      std::printf("  output %s (%ju bytes, %ld rows)\n", f.c_str(), sz, rows_n);
    else
      std::printf("  output %s (%ju bytes)\n", f.c_str(), sz);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"production network timing toolkit"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--config", g.config_path, "JSON config path")->envname("PRODNET_CONFIG");
  app.add_option("--out", g.out_dir, "output directory (default .)");
  auto* seed_opt = app.add_option("--seed", g.seed, "seed override for stochastic commands");
  app.add_option("--threads", g.threads, "worker count (scheduling is deterministic)")
      ->check(CLI::PositiveNumber);

  std::string level;
  CLI::App* c_gen = app.add_subcommand("generate", "sample a network and write the edge list");
  CLI::App* c_spec = app.add_subcommand("spectrum", "extract the leading spectral pair");
  CLI::App* c_sim = app.add_subcommand("simulate", "simulate an aggregate output path");
  CLI::App* c_cmp = app.add_subcommand("compare", "coupled dynamic vs static risk statistics");
  CLI::App* c_cal = app.add_subcommand("calibrate", "attenuation tables and alpha sensitivity");
  CLI::App* c_ver = app.add_subcommand("verify", "run the acceptance suite");
  CLI::App* c_rep = app.add_subcommand("report", "summarize a run directory");
  c_ver->add_option("--level", level, "fast or full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (c_gen->parsed()) return cmd_generate(g);
    if (c_spec->parsed()) return cmd_spectrum(g);
    if (c_sim->parsed()) return cmd_simulate(g);
    if (c_cmp->parsed()) return cmd_compare(g);
    if (c_cal->parsed()) return cmd_calibrate(g);
    if (c_ver->parsed()) return cmd_verify(g, level);
    if (c_rep->parsed()) return cmd_report(g);
  } catch (const ConfigError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 2;
}
