#pragma once

// Benchmark harness: config lines "n nf R seeds algo", one averaged row per
// line, CSV and plain-text table output. Also the SVG discrepancy plot.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edm/linalg.hpp"
#include "edm/problem.hpp"
#include "edm/solver.hpp"

namespace edm {

struct BenchConfigRow {
  int n = 0;
  double nf = 0.0;
  double R = 0.0;
  std::vector<std::uint64_t> seeds;
  Algorithm algorithm = Algorithm::Fr;
};

/// Seeds field: "k" means 1..k, "a:b" an inclusive range, "a,b,c" a list.
/// Blank lines and '#' comments are skipped.
std::vector<BenchConfigRow> parse_bench_config(std::istream& in);
std::vector<BenchConfigRow> parse_bench_config_file(const std::string& path);

/// Larger rows (n up to 2000) sweeping the noise factor; slow.
std::string full_profile_config();

struct BenchRow {
  std::string algorithm;
  int n = 0;
  double nf = 0.0;
  double R = 0.0;
  double density = 0.0;
  double solve_seconds = 0.0;
  double refine_seconds = 0.0;
  double rmsd_initial_pct_r = 0.0;
  double rmsd_refined_pct_r = 0.0;
  int seeds = 0;
};

/// Runs every (row, seed) cell, up to `jobs` at a time. A failing cell turns
/// its row's measured fields into NaN.
std::vector<BenchRow> run_bench(const std::vector<BenchConfigRow>& config, unsigned jobs = 1);

const std::vector<std::string>& bench_csv_header();
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

/// SVG 1.1: true points, Procrustes-aligned estimates and the segments
/// between them. Throws DimensionMismatch on shape mismatch.
std::string plot_svg(const Points& estimate, const Points& truth);
/// Throws NoGroundTruth when g has none.
std::string plot_svg(const Points& estimate, const PartialEdm& g);

}  // namespace edm
