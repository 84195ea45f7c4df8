#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "prodnet/calibrate.hpp"
#include "prodnet/linalg.hpp"
#include "prodnet/network.hpp"
#include "prodnet/riskstats.hpp"
#include "prodnet/spectral.hpp"

namespace prodnet {

using json = nlohmann::json;

inline constexpr const char* kToolkitVersion = "1.0.0";

// ---------- formatting and hashing ----------

// Shortest round-trippable decimal form used for every CSV number, so that
// regenerated files are byte-identical.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, true, true);
  return j;
}

// ---------- network persistence ----------

inline std::string network_csv_body(const ProductionNetwork& net) {
  std::ostringstream out;
  out << "supplier,buyer,weight\n";
  for (int c = 0; c < net.n; ++c)
    for (int k = net.A.col_ptr[c]; k < net.A.col_ptr[c + 1]; ++k)
      out << net.A.row_idx[k] << ',' << c << ',' << fmt17(net.A.val[k]) << '\n';
  return out.str();
}

inline std::uint64_t network_hash(const ProductionNetwork& net) {
  return fnv1a64(network_csv_body(net));
}

inline void write_network(const ProductionNetwork& net, const std::string& csv_path) {
  write_text_file(csv_path, network_csv_body(net));
  json side;
  side["n"] = net.n;
  side["beta"] = net.beta;
  side["gamma_mode"] = net.gamma_mode;
  side["alpha"] = net.alpha;
  side["seed"] = net.seed;
  side["hash"] = hex64(network_hash(net));
  write_text_file(csv_path + ".json", side.dump(2) + "\n");
}

inline ProductionNetwork load_network(const std::string& csv_path) {
  double beta = -1.0;
  json side = read_json_file(csv_path + ".json");
  if (!side.contains("beta")) throw std::runtime_error("network sidecar missing beta");
  beta = side["beta"].get<double>();
  ProductionNetwork net = ingest_network(csv_path, beta, false);
  if (side.contains("gamma_mode")) net.gamma_mode = side["gamma_mode"].get<std::string>();
  if (side.contains("alpha")) net.alpha = side["alpha"].get<double>();
  if (side.contains("seed")) net.seed = side["seed"].get<std::uint64_t>();
  return net;
}

// ---------- series persistence ----------

inline void write_series_csv(const std::string& path, const Vec& y) {
  std::ostringstream out;
  out << "t,y\n";
  for (std::size_t t = 0; t < y.size(); ++t) out << t << ',' << fmt17(y[t]) << '\n';
  write_text_file(path, out.str());
}

inline Vec read_series_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty series file: " + path);
  Vec y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed series row: " + line);
    y.push_back(std::stod(line.substr(comma + 1)));
  }
  return y;
}

inline void write_series_sidecar(const std::string& csv_path, const std::string& kind,
                                 const json& params, std::uint64_t seed,
                                 std::uint64_t net_hash) {
  json side;
  side["kind"] = kind;
  side["params"] = params;
  side["seed"] = seed;
  side["network_hash"] = hex64(net_hash);
  write_text_file(csv_path + ".json", side.dump(2) + "\n");
}

// ---------- report serialization ----------

inline json to_json(const SpectralSummary& s) {
  json j;
  j["lambda1"] = s.lambda1;
  j["lambda2"] = s.lambda2;
  j["lambda2_mod"] = s.lambda2_mod;
  j["gap"] = s.gap;
  j["lambda2_complex"] = s.lambda2_complex;
  j["lambda2_tied"] = s.lambda2_tied;
  j["b"] = s.b;
  j["perron_iterations"] = s.perron_iterations;
  j["transient_iterations"] = s.transient_iterations;
  j["perron_residual"] = s.perron_residual;
  j["transient_residual"] = s.transient_residual;
  j["u1"] = s.u1;
  j["v1"] = s.v1;
  j["u2"] = s.u2;
  j["v2"] = s.v2;
  j["u2_norm"] = s.u2_norm;
  j["v2_norm"] = s.v2_norm;
  return j;
}

inline json to_json(const RiskReport& r) {
  json j;
  j["phi"] = r.phi;
  j["phi_star"] = r.phi_star;
  j["phi_hat"] = r.phi_hat;
  j["phi_hat_star"] = r.phi_hat_star;
  j["omega_c"] = r.omega_c;
  j["omega_c_star"] = r.omega_c_star;
  j["omega_hat_c"] = r.omega_hat_c;
  j["omega_hat_c_star"] = r.omega_hat_c_star;
  j["R"] = r.R;
  j["kappa"] = r.kappa;
  j["c"] = r.c;
  j["meta"] = {{"n", r.meta.n},         {"T", r.meta.T},     {"lambda2", r.meta.lambda2},
               {"sigma", r.meta.sigma}, {"b", r.meta.b},     {"seed", r.meta.seed}};
  return j;
}

inline json to_json(const FiniteTSpectrum& s) {
  json j;
  j["T"] = s.T;
  j["lambda2"] = s.lambda2;
  j["nu_star"] = s.nu_star;
  j["nu"] = s.nu;
  j["nu_max"] = s.nu_max;
  return j;
}

inline json to_json(const SensitivityReport& r) {
  json j;
  j["alpha"] = r.alpha;
  j["lambda2"] = r.lambda2;
  j["lambda2_prime"] = r.lambda2_prime;
  j["b"] = r.b;
  j["b_prime"] = r.b_prime;
  j["exposure_channel"] = r.exposure_channel;
  j["overlap_channel"] = r.overlap_channel;
  j["total"] = r.total;
  j["direct_difference"] = r.direct_difference;
  j["h_used"] = r.h_used;
  j["sign_ok"] = r.sign_ok;
  j["nu_prime"] = r.nu_prime;
  return j;
}

inline std::string risk_report_csv_header() {
  return "rep,phi,phi_star,phi_hat,phi_hat_star,omega_c,omega_c_star,omega_hat_c,"
         "omega_hat_c_star,R,kappa,c,lambda2,sigma,b,T,seed\n";
}

inline std::string risk_report_csv_row(const std::string& label, const RiskReport& r) {
  std::ostringstream out;
  out << label << ',' << fmt17(r.phi) << ',' << fmt17(r.phi_star) << ',' << fmt17(r.phi_hat)
      << ',' << fmt17(r.phi_hat_star) << ',' << fmt17(r.omega_c) << ',' << fmt17(r.omega_c_star)
      << ',' << fmt17(r.omega_hat_c) << ',' << fmt17(r.omega_hat_c_star) << ',' << fmt17(r.R)
      << ',' << fmt17(r.kappa) << ',' << fmt17(r.c) << ',' << fmt17(r.meta.lambda2) << ','
      << fmt17(r.meta.sigma) << ',' << fmt17(r.meta.b) << ',' << r.meta.T << ',' << r.meta.seed
      << '\n';
  return out.str();
}

inline std::string calibration_csv(const CalibrationTable& t) {
  std::ostringstream out;
  if (t.has_shares) {
    out << "lambda2,R,static_share,dynamic_share,label\n";
    for (const CalibrationRow& r : t.rows)
      out << fmt17(r.lambda2) << ',' << fmt17(r.R) << ',' << fmt17(r.static_share) << ','
          << fmt17(r.dynamic_share) << ',' << share_label(r.dynamic_share) << '\n';
  } else {
    out << "lambda2,R\n";
    for (const CalibrationRow& r : t.rows) out << fmt17(r.lambda2) << ',' << fmt17(r.R) << '\n';
  }
  return out.str();
}

// ---------- lambda2(alpha) mapping config ----------

inline Lambda2Map lambda2_map_from_json(const json& j) {
  Lambda2Map m;
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear") {
    m.type = Lambda2Map::Type::kLinear;
    m.intercept = j.at("intercept").get<double>();
    m.slope = j.at("slope").get<double>();
  } else if (type == "table") {
    m.type = Lambda2Map::Type::kTable;
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2)
        throw std::runtime_error("lambda2 map table: each point must be [alpha, lambda2]");
      m.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (m.points.size() < 2) throw std::runtime_error("lambda2 map table: need two points");
    for (std::size_t k = 1; k < m.points.size(); ++k)
      if (m.points[k].first <= m.points[k - 1].first)
        throw std::runtime_error("lambda2 map table: alphas must be strictly increasing");
  } else {
    throw std::runtime_error("lambda2 map: unknown type " + type);
  }
  return m;
}

// ---------- run manifest ----------

struct RunManifest {
  std::string config_hash;
  std::string version = kToolkitVersion;
  double wall_clock_seconds = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
  json j;
  j["config_hash"] = m.config_hash;
  j["version"] = m.version;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["seeds"] = m.seeds;
  j["outputs"] = m.outputs;
  write_text_file(path, j.dump(2) + "\n");
}

inline RunManifest read_manifest(const std::string& path) {
  json j = read_json_file(path);
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

// ---------- gnuplot companions ----------

inline void write_gnuplot_series(const std::string& gp_path, const std::string& csv_name,
                                 const std::string& title, const std::string& ylabel) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 't'\n"
      << "set ylabel '" << ylabel << "'\n"
      << "set title '" << title << "'\n"
      << "plot '" << csv_name << "' using 1:2 with lines\n";
  write_text_file(gp_path, out.str());
}

inline void write_gnuplot_table(const std::string& gp_path, const std::string& csv_name,
                                const std::string& title) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 'lambda2'\n"
      << "set ylabel 'R'\n"
      << "set title '" << title << "'\n"
      << "plot '" << csv_name << "' using 1:2 with linespoints\n";
  write_text_file(gp_path, out.str());
}

}  // namespace prodnet
