#pragma once

// Random sensor-network instances under multiplicative noise, ground-truth
// evaluation and the text formats for instances and solutions.
//
// Generator: points are drawn from std::mt19937_64(seed), coordinate by
// coordinate in row order, each as ((x >> 11) * 2^-53) - 0.5. The noise
// eps_ij for a pair i < j (0-based) is a counter-based draw: z1 =
// splitmix64(seed * 0x9E3779B97F4A7C15 ^ (i << 32 | j)), z2 = splitmix64(z1),
// u1 = ((z1 >> 11) + 1) 2^-53, u2 = (z2 >> 11) 2^-53 and
// eps = sqrt(-2 ln u1) cos(2 pi u2).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edm/linalg.hpp"
#include "edm/problem.hpp"

namespace edm {

struct NoiseModelParams {
  int n = 0;
  double nf = 0.0;  // noise factor
  double R = 0.0;   // radio range
  std::uint64_t seed = 0;
  int r = 2;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Standard normal draw for the unordered pair {i, j}.
double pair_noise(std::uint64_t seed, int i, int j);

/// Uniform points on [-0.5, 0.5]^r, uncentered.
Points sample_points(int n, int r, std::uint64_t seed);

/// d_ij = (1 + nf eps_ij)^2 ||p_i - p_j||^2 on edges ||p_i - p_j|| <= R.
/// Ground truth is stored centered.
PartialEdm generate_instance(const NoiseModelParams& params);

struct Evaluation {
  double rmsd = 0.0;
  double rmsd_pct_r = 0.0;
  double residual = 0.0;
};

/// Throws NoGroundTruth without ground truth. %R needs a radio range and is
/// NaN otherwise.
Evaluation evaluate(const Points& p_est, const PartialEdm& g);

/// Stores rmsd fields in the report when ground truth is available.
void attach_evaluation(SolveReport& report, const Points& p_est, const PartialEdm& g);

struct InstanceFile {
  PartialEdm graph;
  std::optional<double> noise_factor;
  std::optional<std::uint64_t> seed;
};

void write_instance(std::ostream& out, const InstanceFile& inst);
InstanceFile read_instance(std::istream& in);
void write_instance(const std::string& path, const InstanceFile& inst);
InstanceFile read_instance(const std::string& path);

using ReportEntries = std::vector<std::pair<std::string, std::string>>;

ReportEntries report_entries(const SolveReport& report);

struct SolutionFile {
  Points points;
  ReportEntries report;
};

void write_solution(std::ostream& out, const SolutionFile& sol);
SolutionFile read_solution(std::istream& in);
void write_solution(const std::string& path, const SolutionFile& sol);
SolutionFile read_solution(const std::string& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace edm
