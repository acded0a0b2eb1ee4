#include <gtest/gtest.h>

#include <random>

#include "edm/facial_reduction.hpp"
#include "edm/instances.hpp"
#include "edm/refine.hpp"
#include "test_util.hpp"

using namespace edm;
using namespace edm::testing;

TEST(RefineGradient, CentralDifferences) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PartialEdm g = generate_instance({25, 0.1, 0.5, seed, 2});
    const Points p = random_matrix(rng, 25, 2) * 0.3;
    const Points grad = refine_gradient(p, g);
    Points fd(25, 2);
    const double h = 1e-6;
    for (Index i = 0; i < 25; ++i)
      for (Index c = 0; c < 2; ++c) {
        Points a = p, b = p;
        a(i, c) += h;
        b(i, c) -= h;
        fd(i, c) = (refine_objective(a, g) - refine_objective(b, g)) / (2 * h);
      }
    ASSERT_LE((grad - fd).norm(), 1e-5 * grad.norm()) << "seed " << seed;
  }
}

TEST(SteepestDescent, ExactRealizationIsFixed) {
  const PartialEdm g = generate_instance({40, 0.0, 0.5, 2, 2});
  const RefineResult res = steepest_descent(*g.ground_truth, g);
  EXPECT_LE(refine_gradient(*g.ground_truth, g).norm(), 1e-12);
  EXPECT_LE((res.points - *g.ground_truth).norm(), 1e-10);
  EXPECT_LE(res.iterations, 1);
}

TEST(SteepestDescent, MonotoneObjective) {
  std::mt19937_64 rng(3);
  const PartialEdm g = generate_instance({60, 0.1, 0.4, 3, 2});
  const RefineResult res = steepest_descent(random_matrix(rng, 60, 2) * 0.3, g);
  for (std::size_t k = 1; k < res.objective.size(); ++k) ASSERT_LE(res.objective[k], res.objective[k - 1]);
  EXPECT_LT((res.points.colwise().sum()).norm(), 1e-10);
}

TEST(SteepestDescent, RandomStartStaysFarSeededStartIsClose) {
  const PartialEdm g = generate_instance({150, 0.1, 0.35, 4, 2});
  std::mt19937_64 rng(4);
  const RefineResult from_random = steepest_descent(random_matrix(rng, 150, 2), g);
  const double random_pct = evaluate(from_random.points, g).rmsd_pct_r;
  const FacialReductionResult fr = facial_reduction_solve(g);
  const RefineResult from_fr = steepest_descent(fr.points, g);
  const double seeded_pct = evaluate(from_fr.points, g).rmsd_pct_r;
  EXPECT_GT(random_pct, 20.0);
  EXPECT_LE(seeded_pct, 5.0);
}

TEST(SteepestDescent, WrongRowCount) {
  const PartialEdm g = generate_instance({10, 0.0, 0.5, 1, 2});
  EXPECT_THROW(steepest_descent(Points::Zero(9, 2), g), Error);
}
