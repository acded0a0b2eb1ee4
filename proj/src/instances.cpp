#include "edm/instances.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace edm {

namespace {

constexpr double kTwoPow53 = 1.0 / 9007199254740992.0;

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) parse_error(line, "bad number '" + tok + "'");
  return v;
}

template <class T>
T parse_int(const std::string& tok, int line) {
  T v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) parse_error(line, "bad integer '" + tok + "'");
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double pair_noise(std::uint64_t seed, int i, int j) {
  if (i > j) std::swap(i, j);
  const std::uint64_t key = (seed * 0x9E3779B97F4A7C15ULL) ^
                            ((static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j));
  const std::uint64_t z1 = splitmix64(key);
  const std::uint64_t z2 = splitmix64(z1);
  const double u1 = static_cast<double>((z1 >> 11) + 1) * kTwoPow53;
  const double u2 = static_cast<double>(z2 >> 11) * kTwoPow53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Points sample_points(int n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Points p(n, r);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < r; ++k) p(i, k) = static_cast<double>(rng() >> 11) * kTwoPow53 - 0.5;
  return p;
}

PartialEdm generate_instance(const NoiseModelParams& params) {
  if (params.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (params.r < 1) throw Error(ErrorCode::InvalidArgument, "r must be at least 1");
  if (!(params.nf >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise factor must be nonnegative");
  if (!(params.R > 0.0)) throw Error(ErrorCode::InvalidArgument, "radio range must be positive");
  const Points p = sample_points(params.n, params.r, params.seed);
  PartialEdm g;
  g.n = params.n;
  g.r = params.r;
  g.radio_range = params.R;
  for (int i = 0; i < params.n; ++i)
    for (int j = i + 1; j < params.n; ++j) {
      const double dist2 = (p.row(i) - p.row(j)).squaredNorm();
      if (std::sqrt(dist2) > params.R) continue;
      double v = dist2;
      if (params.nf != 0.0) {
        const double m = 1.0 + params.nf * pair_noise(params.seed, i, j);
        v = m * m * dist2;
      }
      g.d.edges.push_back({i, j});
      g.d.values.push_back(v);
    }
  g.ground_truth = center_rows(p);
  return g;
}

Evaluation evaluate(const Points& p_est, const PartialEdm& g) {
  if (!g.ground_truth) throw Error(ErrorCode::NoGroundTruth, "instance has no ground truth");
  if (p_est.rows() != g.n || p_est.cols() != g.ground_truth->cols())
    throw Error(ErrorCode::DimensionMismatch, "estimate must be n x r");
  Evaluation ev;
  ev.rmsd = procrustes_rmsd(center_rows(p_est), center_rows(*g.ground_truth)).rmsd;
  ev.rmsd_pct_r = g.radio_range ? 100.0 * ev.rmsd / *g.radio_range
                                : std::numeric_limits<double>::quiet_NaN();
  ev.residual = g.residual(p_est);
  return ev;
}

void attach_evaluation(SolveReport& report, const Points& p_est, const PartialEdm& g) {
  if (!g.ground_truth) return;
  const Evaluation ev = evaluate(p_est, g);
  report.rmsd = ev.rmsd;
  if (g.radio_range) report.rmsd_pct_r = ev.rmsd_pct_r;
}

void write_instance(std::ostream& out, const InstanceFile& inst) {
  const PartialEdm& g = inst.graph;
  out << "# format edm-instance 1\n";
  out << "# n " << g.n << "\n";
  out << "# r " << g.r << "\n";
  if (g.radio_range) out << "# radio_range " << format_double(*g.radio_range) << "\n";
  if (inst.noise_factor) out << "# noise_factor " << format_double(*inst.noise_factor) << "\n";
  if (inst.seed) out << "# seed " << *inst.seed << "\n";
  out << "# edges " << g.d.size() << "\n";
  for (std::size_t k = 0; k < g.d.size(); ++k)
    out << g.d.edges[k].i + 1 << ' ' << g.d.edges[k].j + 1 << ' ' << format_double(g.d.values[k])
        << "\n";
  if (g.ground_truth) {
    const Points& p = *g.ground_truth;
    for (Index i = 0; i < p.rows(); ++i) {
      out << "p " << i + 1;
      for (Index k = 0; k < p.cols(); ++k) out << ' ' << format_double(p(i, k));
      out << "\n";
    }
  }
}

InstanceFile read_instance(std::istream& in) {
  InstanceFile inst;
  PartialEdm& g = inst.graph;
  std::optional<int> n;
  std::optional<std::size_t> expected_edges;
  std::vector<std::pair<Edge, double>> records;
  std::vector<std::pair<int, std::vector<double>>> truth;
  std::string line;
  int lineno = 0;
  bool format_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "#") {
      if (tok.size() < 2) continue;
      const std::string& key = tok[1];
      if (key == "format") {
        if (tok.size() != 4 || tok[2] != "edm-instance") parse_error(lineno, "not an edm-instance file");
        if (tok[3] != "1") parse_error(lineno, "unsupported format version " + tok[3]);
        format_seen = true;
        continue;
      }
      if (tok.size() != 3) continue;  // free-form comment
      if (key == "n") n = parse_int<int>(tok[2], lineno);
      else if (key == "r") g.r = parse_int<int>(tok[2], lineno);
      else if (key == "radio_range") g.radio_range = parse_double(tok[2], lineno);
      else if (key == "noise_factor") inst.noise_factor = parse_double(tok[2], lineno);
      else if (key == "seed") inst.seed = parse_int<std::uint64_t>(tok[2], lineno);
      else if (key == "edges") expected_edges = parse_int<std::size_t>(tok[2], lineno);
      continue;
    }
    if (tok[0] == "p") {
      if (tok.size() < 3) parse_error(lineno, "coordinate record needs an index and coordinates");
      std::vector<double> xs;
      for (std::size_t t = 2; t < tok.size(); ++t) xs.push_back(parse_double(tok[t], lineno));
      truth.emplace_back(parse_int<int>(tok[1], lineno), std::move(xs));
      continue;
    }
    if (tok.size() != 3) parse_error(lineno, "expected 'i j d_ij', got " + std::to_string(tok.size()) + " fields");
    int i = parse_int<int>(tok[0], lineno);
    int j = parse_int<int>(tok[1], lineno);
    const double v = parse_double(tok[2], lineno);
    if (i < 1 || j < 1) parse_error(lineno, "indices are 1-based");
    if (i == j) parse_error(lineno, "self loop");
    if (i > j) std::swap(i, j);
    records.push_back({{i - 1, j - 1}, v});
  }
  if (!format_seen && lineno == 0) parse_error(1, "empty file");
  if (!n) parse_error(lineno, "missing '# n' header");
  if (expected_edges && *expected_edges != records.size())
    parse_error(lineno, "truncated: expected " + std::to_string(*expected_edges) + " edge records, found " +
                            std::to_string(records.size()));
  g.n = *n;
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [e, v] : records) {
    if (e.j >= g.n)
      throw Error(ErrorCode::ValidationError,
                  "edge index " + std::to_string(e.j + 1) + " exceeds n=" + std::to_string(g.n));
    g.d.edges.push_back(e);
    g.d.values.push_back(v);
  }
  if (!truth.empty()) {
    if (static_cast<int>(truth.size()) != g.n)
      throw Error(ErrorCode::ValidationError, "ground truth must list every vertex");
    Points p(g.n, g.r);
    std::vector<bool> seen(g.n, false);
    for (const auto& [i, xs] : truth) {
      if (i < 1 || i > g.n || seen[i - 1])
        throw Error(ErrorCode::ValidationError, "bad ground-truth index " + std::to_string(i));
      if (static_cast<int>(xs.size()) != g.r)
        throw Error(ErrorCode::ValidationError, "ground-truth row has wrong dimension");
      seen[i - 1] = true;
      for (int k = 0; k < g.r; ++k) p(i - 1, k) = xs[k];
    }
    g.ground_truth = std::move(p);
  }
  g.validate();
  return inst;
}

void write_instance(const std::string& path, const InstanceFile& inst) {
  auto out = open_out(path);
  write_instance(out, inst);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

InstanceFile read_instance(const std::string& path) {
  auto in = open_in(path);
  return read_instance(in);
}

ReportEntries report_entries(const SolveReport& rep) {
  ReportEntries e;
  auto num = [&](const std::string& k, double v) {
    if (!std::isnan(v)) e.emplace_back(k, format_double(v));
  };
  e.emplace_back("algorithm", rep.algorithm.empty() ? "none" : rep.algorithm);
  num("residual", rep.residual);
  num("witness_residual", rep.witness_residual);
  num("trace", rep.trace);
  num("solve_seconds", rep.solve_seconds);
  num("refine_seconds", rep.refine_seconds);
  for (const auto& t : rep.timings) num("time_" + t.stage, t.seconds);
  if (rep.algorithm == "fr") {
    e.emplace_back("num_cliques", std::to_string(rep.num_cliques));
    e.emplace_back("union_fallbacks", std::to_string(rep.union_fallbacks));
    e.emplace_back("rank_deficient_system", rep.rank_deficient_system ? "true" : "false");
    e.emplace_back("projected_fallback", rep.projected_fallback ? "true" : "false");
  } else if (!rep.algorithm.empty()) {
    num("sigma", rep.sigma);
    num("beta", rep.beta);
    num("tau", rep.tau);
    num("final_slope", rep.final_slope);
    num("newton_bound", rep.newton_bound);
    e.emplace_back("newton_iterations", std::to_string(rep.newton_iterations));
    e.emplace_back("oracle_calls", std::to_string(rep.oracle_calls));
    e.emplace_back("fw_iterations", std::to_string(rep.fw_iterations));
    e.emplace_back("certified", rep.certified ? "true" : "false");
  }
  if (rep.rmsd) num("rmsd", *rep.rmsd);
  if (rep.rmsd_pct_r) num("rmsd_pct_r", *rep.rmsd_pct_r);
  for (const auto& d : rep.diagnostics) e.emplace_back("diagnostic", d);
  return e;
}

void write_solution(std::ostream& out, const SolutionFile& sol) {
  const Points& p = sol.points;
  out << "# format edm-solution 1\n";
  out << "# n " << p.rows() << "\n";
  out << "# r " << p.cols() << "\n";
  for (Index i = 0; i < p.rows(); ++i) {
    out << i + 1;
    for (Index k = 0; k < p.cols(); ++k) out << ' ' << format_double(p(i, k));
    out << "\n";
  }
  for (const auto& [k, v] : sol.report) {
    std::string flat = v;
    for (char& c : flat)
      if (c == '\n' || c == '\r') c = ' ';
    out << "# report " << k << ' ' << flat << "\n";
  }
}

SolutionFile read_solution(std::istream& in) {
  SolutionFile sol;
  std::optional<int> n, r;
  std::vector<std::pair<int, std::vector<double>>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "#") {
      if (tok.size() >= 3 && tok[1] == "report") {
        const auto pos = line.find(tok[2], line.find("report") + 6);
        std::string value = line.substr(pos + tok[2].size());
        const auto first = value.find_first_not_of(' ');
        value = first == std::string::npos ? "" : value.substr(first);
        sol.report.emplace_back(tok[2], value);
      } else if (tok.size() == 4 && tok[1] == "format") {
        if (tok[2] != "edm-solution") parse_error(lineno, "not an edm-solution file");
        if (tok[3] != "1") parse_error(lineno, "unsupported format version " + tok[3]);
      } else if (tok.size() == 3 && tok[1] == "n") {
        n = parse_int<int>(tok[2], lineno);
      } else if (tok.size() == 3 && tok[1] == "r") {
        r = parse_int<int>(tok[2], lineno);
      }
      continue;
    }
    if (tok.size() < 2) parse_error(lineno, "expected 'i x y ...'");
    std::vector<double> xs;
    for (std::size_t t = 1; t < tok.size(); ++t) xs.push_back(parse_double(tok[t], lineno));
    if (r && static_cast<int>(xs.size()) != *r)
      parse_error(lineno, "expected " + std::to_string(*r) + " coordinates");
    rows.emplace_back(parse_int<int>(tok[0], lineno), std::move(xs));
  }
  if (rows.empty()) parse_error(lineno, "no coordinate records");
  const int nn = n.value_or(static_cast<int>(rows.size()));
  const int rr = r.value_or(static_cast<int>(rows.front().second.size()));
  if (static_cast<int>(rows.size()) != nn)
    parse_error(lineno, "truncated: expected " + std::to_string(nn) + " coordinate records, found " +
                            std::to_string(rows.size()));
  sol.points.resize(nn, rr);
  std::vector<bool> seen(nn, false);
  for (const auto& [i, xs] : rows) {
    if (i < 1 || i > nn || seen[i - 1])
      throw Error(ErrorCode::ValidationError, "bad solution index " + std::to_string(i));
    if (static_cast<int>(xs.size()) != rr)
      throw Error(ErrorCode::ValidationError, "solution row has wrong dimension");
    seen[i - 1] = true;
    for (int k = 0; k < rr; ++k) sol.points(i - 1, k) = xs[k];
  }
  return sol;
}

void write_solution(const std::string& path, const SolutionFile& sol) {
  auto out = open_out(path);
  write_solution(out, sol);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

SolutionFile read_solution(const std::string& path) {
  auto in = open_in(path);
  return read_solution(in);
}

}  // namespace edm
