#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "prodnet/io.hpp"

using namespace prodnet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p =
      fs::temp_directory_path() / ("prodnet_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliResult {
  int status = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const char* bin = std::getenv("PRODNET_BIN");
  REQUIRE(bin != nullptr);
  static int counter = 0;
  const fs::path dir = fresh_dir("streams_" + std::to_string(counter++));
  const std::string so = (dir / "out.txt").string();
  const std::string se = (dir / "err.txt").string();
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string(bin) + " " + args + " >" + so + " 2>" + se;
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_text_file(so);
  r.err = read_text_file(se);
  return r;
}

bool cli_available() { return std::getenv("PRODNET_BIN") != nullptr; }

ProductionNetwork sample_net() {
  DegreeSequence ds = sample_degrees(25, 2.0, 1212);
  return build_share_matrix(ds, 0.4, WeightMode::kUniform, 1212);
}

}  // namespace

TEST_CASE("seventeen-digit formatting round trips bitwise") {
  for (double x : {1.0 / 3.0, 1e-300, 0.0, -2.5, 0.1, -1.0 / 7.0, 6.02e23}) {
    const double back = std::stod(fmt17(x));
    CHECK(back == x);
  }
}

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("network round trip preserves every entry and the hash") {
  const fs::path dir = fresh_dir("net_rt");
  const ProductionNetwork net = sample_net();
  const std::string csv = (dir / "network.csv").string();
  write_network(net, csv);
  const ProductionNetwork back = load_network(csv);

  CHECK(back.n == net.n);
  CHECK(back.beta == net.beta);
  CHECK(back.alpha == net.alpha);
  CHECK(back.seed == net.seed);
  REQUIRE(back.A.col_ptr == net.A.col_ptr);
  REQUIRE(back.A.row_idx == net.A.row_idx);
  for (std::size_t k = 0; k < net.A.val.size(); ++k) CHECK(back.A.val[k] == net.A.val[k]);
  CHECK(network_hash(back) == network_hash(net));
}

TEST_CASE("series round trip preserves values") {
  const fs::path dir = fresh_dir("series_rt");
  const Vec y{0.25, -1.0 / 3.0, 5e-17, 2.0};
  const std::string csv = (dir / "path.csv").string();
  write_series_csv(csv, y);
  const Vec back = read_series_csv(csv);
  REQUIRE(back.size() == y.size());
  for (std::size_t t = 0; t < y.size(); ++t) CHECK(back[t] == y[t]);
}

TEST_CASE("manifest round trip") {
  const fs::path dir = fresh_dir("manifest_rt");
  RunManifest m;
  m.config_hash = "deadbeefdeadbeef";
  m.wall_clock_seconds = 1.25;
  m.seeds = {1, 99};
  m.outputs = {"a.csv", "b.json"};
  const std::string path = (dir / "manifest.json").string();
  write_manifest(path, m);
  const RunManifest back = read_manifest(path);
  CHECK(back.config_hash == m.config_hash);
  CHECK(back.version == std::string(kToolkitVersion));
  CHECK(back.wall_clock_seconds == m.wall_clock_seconds);
  CHECK(back.seeds == m.seeds);
  CHECK(back.outputs == m.outputs);
}

TEST_CASE("lambda2 map config parsing") {
  const Lambda2Map lin = lambda2_map_from_json(
      json{{"type", "linear"}, {"intercept", 0.9}, {"slope", -0.2}});
  CHECK(lin(2.0) == Catch::Approx(0.5).epsilon(1e-14));

  const Lambda2Map tab = lambda2_map_from_json(
      json{{"type", "table"}, {"points", {{1.2, 0.8}, {3.0, 0.2}}}});
  CHECK(tab(1.2) == Catch::Approx(0.8).epsilon(1e-14));

  CHECK_THROWS(lambda2_map_from_json(json{{"type", "cubic"}}));
  CHECK_THROWS(lambda2_map_from_json(json{{"type", "table"}, {"points", {{1.2, 0.8}}}}));
  CHECK_THROWS(lambda2_map_from_json(
      json{{"type", "table"}, {"points", {{2.0, 0.8}, {1.0, 0.2}}}}));
}

TEST_CASE("calibration csv shapes") {
  const std::string plain = calibration_csv(attenuation_table(Vec{0.5}));
  CHECK(plain.rfind("lambda2,R\n", 0) == 0);
  const std::string shared = calibration_csv(share_table(Vec{0.5}, Vec{1.0}));
  CHECK(shared.rfind("lambda2,R,static_share,dynamic_share,label\n", 0) == 0);
  CHECK(shared.find("approximately one-sixth") != std::string::npos);
}

TEST_CASE("cli generate is deterministic and reports moments") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_gen");
  const std::string cfgp = (dir / "cfg.json").string();
  write_text_file(cfgp,
                  R"({"network": {"n": 40, "alpha": 2.0, "beta": 0.4, "seed": 4242}})");

  const fs::path a = fresh_dir("cli_gen_a"), b = fresh_dir("cli_gen_b");
  const CliResult ra = run_cli("--config " + cfgp + " --out " + a.string() + " generate");
  INFO(ra.err);
  CHECK(ra.status == 0);
  CHECK(ra.out.find("degree mean") != std::string::npos);
  CHECK(fs::exists(a / "network.csv"));
  CHECK(fs::exists(a / "network.csv.json"));
  CHECK(fs::exists(a / "manifest.json"));

  const CliResult rb = run_cli("--config " + cfgp + " --out " + b.string() + " generate");
  CHECK(rb.status == 0);
  CHECK(read_text_file((a / "network.csv").string()) ==
        read_text_file((b / "network.csv").string()));

  const CliResult rep = run_cli("--out " + a.string() + " report");
  CHECK(rep.status == 0);
  CHECK(rep.out.find("config hash") != std::string::npos);
  CHECK(rep.out.find("network.csv") != std::string::npos);
}

TEST_CASE("cli rejects an exponent without a finite mean") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_badalpha");
  const std::string cfgp = (dir / "cfg.json").string();
  write_text_file(cfgp,
                  R"({"network": {"n": 40, "alpha": 0.9, "beta": 0.4, "seed": 1}})");
  const CliResult r = run_cli("--config " + cfgp + " --out " + dir.string() + " generate");
  CHECK(r.status == 2);
  CHECK(r.err.find("alpha") != std::string::npos);
}

TEST_CASE("cli simulate needs a seed and writes the path") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_sim");
  const std::string cfgp = (dir / "cfg.json").string();
  write_text_file(
      cfgp,
      R"({"simulate": {"kind": "reduced", "T": 20, "sigma": 0.5, "lambda2": 0.5, "b": 1.0}})");

  const CliResult noseed = run_cli("--config " + cfgp + " --out " + dir.string() + " simulate");
  CHECK(noseed.status == 2);
  CHECK(noseed.err.find("seed") != std::string::npos);

  const CliResult ok =
      run_cli("--config " + cfgp + " --out " + dir.string() + " --seed 7 simulate");
  INFO(ok.err);
  CHECK(ok.status == 0);
  const Vec y = read_series_csv((dir / "path.csv").string());
  CHECK(y.size() == 20u);
  const json side = read_json_file((dir / "path.csv.json").string());
  CHECK(side.at("kind").get<std::string>() == "reduced");
  CHECK(fs::exists(dir / "path.gp"));
}

TEST_CASE("cli compare writes one row per replication plus the mean") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_cmp");
  const std::string cfgp = (dir / "cfg.json").string();
  write_text_file(cfgp, R"({"compare": {"mode": "reduced", "lambda2": 0.5, "b": 1.0,
    "T": 50, "sigma": 1.0, "reps": 3, "c": 1.0, "seed": 99}})");
  const CliResult r = run_cli("--config " + cfgp + " --out " + dir.string() + " compare");
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(r.out.find("mean window ratio") != std::string::npos);
  const std::string body = read_text_file((dir / "risk_report.csv").string());
  CHECK(std::count(body.begin(), body.end(), '\n') == 5);
  CHECK(body.find("mean,") != std::string::npos);
}

TEST_CASE("cli spectrum writes the summary json") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_spec");
  const std::string cfgp = (dir / "cfg.json").string();
  write_text_file(cfgp,
                  R"({"network": {"n": 40, "alpha": 2.0, "beta": 0.4, "seed": 4242}})");
  const CliResult r = run_cli("--config " + cfgp + " --out " + dir.string() + " spectrum");
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(r.out.find("lambda1") != std::string::npos);
  const json j = read_json_file((dir / "spectral_summary.json").string());
  CHECK(j.at("lambda1").get<double>() == Catch::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("cli calibrate labels the benchmark shares") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_cal");
  const std::string cfgp = (dir / "cfg.json").string();
  write_text_file(cfgp,
                  R"({"calibrate": {"lambda2_grid": [0.5], "static_shares": [0.1, 1.0]}})");
  const CliResult r = run_cli("--config " + cfgp + " --out " + dir.string() + " calibrate");
  INFO(r.err);
  CHECK(r.status == 0);
  CHECK(r.out.find("approximately one-sixth") != std::string::npos);
  const std::string body = read_text_file((dir / "calibration.csv").string());
  CHECK(body.rfind("lambda2,R,static_share,dynamic_share,label\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 3);
}

TEST_CASE("cli verify trips the fourth criterion under a seeded bias") {
  if (!cli_available()) {
    WARN("PRODNET_BIN not set; CLI test skipped");
    return;
  }
  const fs::path dir = fresh_dir("cli_verify_mut");
  const CliResult r = run_cli("--out " + dir.string() + " verify --level fast",
                              "PRODNET_MUTATE_LAMBDA2=0.05");
  INFO(r.out);
  CHECK(r.status == 3);
  CHECK(r.out.find("[FAIL] criterion 4") != std::string::npos);
  CHECK(fs::exists(dir / "verify_ledger.csv"));
}
