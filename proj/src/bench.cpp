#include "edm/bench.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "edm/instances.hpp"
#include "edm/parallel.hpp"

namespace edm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(int line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "bench config line " + std::to_string(line) + ": " + what);
}

template <class T>
T number(const std::string& tok, int line) {
  T v{};
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) config_error(line, "bad number '" + tok + "'");
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& tok, int line) {
  std::vector<std::uint64_t> seeds;
  if (const auto colon = tok.find(':'); colon != std::string::npos) {
    const auto a = number<std::uint64_t>(tok.substr(0, colon), line);
    const auto b = number<std::uint64_t>(tok.substr(colon + 1), line);
    if (b < a) config_error(line, "empty seed range");
    for (auto s = a; s <= b; ++s) seeds.push_back(s);
  } else if (tok.find(',') != std::string::npos) {
    std::istringstream in(tok);
    std::string part;
    while (std::getline(in, part, ',')) seeds.push_back(number<std::uint64_t>(part, line));
  } else {
    const auto k = number<std::uint64_t>(tok, line);
    for (std::uint64_t s = 1; s <= k; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) config_error(line, "no seeds");
  return seeds;
}

std::string fmt(double v, int digits) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_number(double v) { return std::isnan(v) ? "NaN" : format_double(v); }

}  // namespace

std::vector<BenchConfigRow> parse_bench_config(std::istream& in) {
  std::vector<BenchConfigRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5) config_error(lineno, "expected 'n nf R seeds algo'");
    BenchConfigRow row;
    row.n = number<int>(tok[0], lineno);
    row.nf = number<double>(tok[1], lineno);
    row.R = number<double>(tok[2], lineno);
    row.seeds = parse_seeds(tok[3], lineno);
    try {
      row.algorithm = parse_algorithm(tok[4]);
    } catch (const Error& e) {
      config_error(lineno, e.what());
    }
    if (row.n < 2 || row.nf < 0.0 || !(row.R > 0.0)) config_error(lineno, "need n >= 2, nf >= 0, R > 0");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BenchConfigRow> parse_bench_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return parse_bench_config(in);
}

std::string full_profile_config() {
  return "# n nf R seeds algo\n"
         "1000 0.0 0.25 10 fr\n"
         "1000 0.1 0.25 10 fr\n"
         "1000 0.2 0.25 10 fr\n"
         "1000 0.3 0.25 10 fr\n"
         "2000 0.1 0.18 10 fr\n"
         "1000 0.0 0.10 10 pareto-max\n"
         "1000 0.1 0.10 10 pareto-max\n"
         "1000 0.2 0.10 10 pareto-max\n";
}

std::vector<BenchRow> run_bench(const std::vector<BenchConfigRow>& config, unsigned jobs) {
  struct Cell {
    std::size_t row;
    std::uint64_t seed;
  };
  struct CellResult {
    bool ok = false;
    double density = kNaN, solve = kNaN, refine = kNaN, initial = kNaN, refined = kNaN;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < config.size(); ++r)
    for (auto s : config[r].seeds) cells.push_back({r, s});
  std::vector<CellResult> results(cells.size());

  parallel_for(
      cells.size(),
      [&](std::size_t c) {
        const BenchConfigRow& row = config[cells[c].row];
        CellResult& res = results[c];
        try {
          const PartialEdm g = generate_instance({row.n, row.nf, row.R, cells[c].seed});
          res.density = g.density();
          SolveOptions so;
          so.algorithm = row.algorithm;
          so.noise_factor = row.nf;
          so.refine = true;
          const SolveOutcome out = solve(g, so);
          res.solve = out.report.solve_seconds;
          res.refine = out.report.refine_seconds;
          res.initial = out.initial_rmsd_pct_r.value_or(kNaN);
          res.refined = out.report.rmsd_pct_r.value_or(kNaN);
          res.ok = true;
        } catch (const Error&) {
          res.ok = false;
        }
      },
      std::max(1u, jobs));

  std::vector<BenchRow> rows;
  for (std::size_t r = 0; r < config.size(); ++r) {
    BenchRow b;
    b.algorithm = to_string(config[r].algorithm);
    b.n = config[r].n;
    b.nf = config[r].nf;
    b.R = config[r].R;
    b.seeds = static_cast<int>(config[r].seeds.size());
    bool ok = true;
    double dens = 0, solve = 0, refine = 0, init = 0, refined = 0;
    int count = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].row != r) continue;
      const CellResult& res = results[c];
      ok = ok && res.ok;
      dens += res.density;
      solve += res.solve;
      refine += res.refine;
      init += res.initial;
      refined += res.refined;
      ++count;
    }
    b.density = dens / count;
    if (ok) {
      b.solve_seconds = solve / count;
      b.refine_seconds = refine / count;
      b.rmsd_initial_pct_r = init / count;
      b.rmsd_refined_pct_r = refined / count;
    } else {
      b.solve_seconds = b.refine_seconds = b.rmsd_initial_pct_r = b.rmsd_refined_pct_r = kNaN;
    }
    rows.push_back(b);
  }
  return rows;
}

const std::vector<std::string>& bench_csv_header() {
  static const std::vector<std::string> header{
      "algo", "n", "nf", "R", "density", "solve_time_s", "refine_time_s",
      "rmsd_initial_pctR", "rmsd_refined_pctR", "seeds"};
  return header;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  const auto& h = bench_csv_header();
  for (std::size_t k = 0; k < h.size(); ++k) out << (k ? "," : "") << csv_field(h[k]);
  out << "\r\n";
  for (const BenchRow& b : rows) {
    out << csv_field(b.algorithm) << ',' << b.n << ',' << csv_number(b.nf) << ',' << csv_number(b.R)
        << ',' << csv_number(b.density) << ',' << csv_number(b.solve_seconds) << ','
        << csv_number(b.refine_seconds) << ',' << csv_number(b.rmsd_initial_pct_r) << ','
        << csv_number(b.rmsd_refined_pct_r) << ',' << b.seeds << "\r\n";
  }
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-11s %6s %5s %6s %8s %9s %9s %10s %10s %5s\n", "algo", "n", "nf",
                "R", "density", "solve(s)", "refine(s)", "init(%R)", "refd(%R)", "seeds");
  out << buf;
  for (const BenchRow& b : rows) {
    std::snprintf(buf, sizeof buf, "%-11s %6d %5s %6s %7s%% %9s %9s %10s %10s %5d\n",
                  b.algorithm.c_str(), b.n, fmt(b.nf, 2).c_str(), fmt(b.R, 3).c_str(),
                  fmt(100.0 * b.density, 1).c_str(), fmt(b.solve_seconds, 3).c_str(),
                  fmt(b.refine_seconds, 3).c_str(), fmt(b.rmsd_initial_pct_r, 2).c_str(),
                  fmt(b.rmsd_refined_pct_r, 2).c_str(), b.seeds);
    out << buf;
  }
}

std::string plot_svg(const Points& estimate, const Points& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw Error(ErrorCode::DimensionMismatch, "estimate and truth differ in shape");
  if (truth.cols() < 2) throw Error(ErrorCode::DimensionMismatch, "plot needs at least two coordinates");
  const Points t = center_rows(truth);
  const Points e = center_rows(estimate) * procrustes_rmsd(center_rows(estimate), t).rotation;

  double lo_x = t.col(0).minCoeff(), hi_x = t.col(0).maxCoeff();
  double lo_y = t.col(1).minCoeff(), hi_y = t.col(1).maxCoeff();
  lo_x = std::min(lo_x, e.col(0).minCoeff());
  hi_x = std::max(hi_x, e.col(0).maxCoeff());
  lo_y = std::min(lo_y, e.col(1).minCoeff());
  hi_y = std::max(hi_y, e.col(1).maxCoeff());
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double size = 600.0, margin = 20.0;
  const double scale = (size - 2 * margin) / span;
  auto px = [&](double x) { return fmt(margin + (x - lo_x) * scale, 2); };
  auto py = [&](double y) { return fmt(size - margin - (y - lo_y) * scale, 2); };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"600\" "
         "viewBox=\"0 0 600 600\">\n"
      << "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n"
      << "<g stroke=\"#888888\" stroke-width=\"1\">\n";
  for (Index i = 0; i < t.rows(); ++i)
    out << "<line x1=\"" << px(t(i, 0)) << "\" y1=\"" << py(t(i, 1)) << "\" x2=\"" << px(e(i, 0))
        << "\" y2=\"" << py(e(i, 1)) << "\"/>\n";
  out << "</g>\n<g fill=\"#1f4e9c\">\n";
  for (Index i = 0; i < t.rows(); ++i)
    out << "<circle cx=\"" << px(t(i, 0)) << "\" cy=\"" << py(t(i, 1)) << "\" r=\"3\"/>\n";
  out << "</g>\n<g fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\">\n";
  for (Index i = 0; i < e.rows(); ++i)
    out << "<circle cx=\"" << px(e(i, 0)) << "\" cy=\"" << py(e(i, 1)) << "\" r=\"4\"/>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string plot_svg(const Points& estimate, const PartialEdm& g) {
  if (!g.ground_truth) throw Error(ErrorCode::NoGroundTruth, "plot needs ground truth");
  return plot_svg(estimate, *g.ground_truth);
}

}  // namespace edm
