#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "helpers/oracles.hpp"
#include "specvote/kmeans.hpp"
#include "specvote/rng.hpp"

using namespace specvote;

namespace {

Eigen::MatrixXd random_points(Rng& rng, int n, int dim) {
  Eigen::MatrixXd points(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j)
      points(i, j) = 2.0 * uniform_real01(rng) - 1.0;
  return points;
}

double recompute_inertia(const Eigen::MatrixXd& points,
                         const Clustering& clustering) {
  double total = 0.0;
  for (int i = 0; i < points.rows(); ++i)
    total += (points.row(i) -
              clustering.centers.row(clustering.assignments[i]))
                 .squaredNorm();
  return total;
}

}  // namespace

TEST_CASE("k=1 returns the mean as the single center", "[kmeans]") {
  Rng rng(1);
  const Eigen::MatrixXd points = random_points(rng, 9, 3);
  const Clustering result = kmeans(points, 1, 0);
  for (int label : result.assignments) CHECK(label == 0);
  const Eigen::RowVectorXd mean = points.colwise().mean();
  CHECK((result.centers.row(0) - mean).norm() <= 1e-12);
  CHECK(result.inertia ==
        Catch::Approx(recompute_inertia(points, result)).margin(1e-12));
}

TEST_CASE("k=n distinct points gives a perfect clustering", "[kmeans]") {
  Rng rng(2);
  const Eigen::MatrixXd points = random_points(rng, 6, 2);
  const Clustering result = kmeans(points, 6, 99);
  CHECK(result.inertia == 0.0);
  std::set<int> used(result.assignments.begin(), result.assignments.end());
  CHECK(used.size() == 6);
}

TEST_CASE("well-separated groups are split correctly for every seed",
          "[kmeans]") {
  Rng rng(3);
  Eigen::MatrixXd points(10, 2);
  for (int i = 0; i < 5; ++i)
    points.row(i) << uniform_real01(rng) - 0.5, uniform_real01(rng) - 0.5;
  for (int i = 5; i < 10; ++i)
    points.row(i) << 100.0 + uniform_real01(rng) - 0.5,
        uniform_real01(rng) - 0.5;

  // Brute force confirms the separating partition is the optimum.
  const double optimum = oracles::best_partition_inertia(points, 2);
  double separating = 0.0;
  for (int half = 0; half < 2; ++half) {
    const Eigen::RowVectorXd mean =
        points.middleRows(half * 5, 5).colwise().mean();
    for (int i = 0; i < 5; ++i)
      separating += (points.row(half * 5 + i) - mean).squaredNorm();
  }
  REQUIRE(separating == Catch::Approx(optimum).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Clustering result = kmeans(points, 2, seed);
    const int group_a = result.assignments[0];
    for (int i = 0; i < 5; ++i) CHECK(result.assignments[i] == group_a);
    for (int i = 5; i < 10; ++i) CHECK(result.assignments[i] != group_a);
    CHECK(result.inertia == Catch::Approx(optimum).epsilon(1e-9));
  }
}

TEST_CASE("same seed gives bit-identical output", "[kmeans]") {
  Rng rng(4);
  const Eigen::MatrixXd points = random_points(rng, 20, 3);
  const Clustering a = kmeans(points, 4, 1234);
  const Clustering b = kmeans(points, 4, 1234);
  CHECK(a.assignments == b.assignments);
  CHECK(a.inertia == b.inertia);
  CHECK(a.centers == b.centers);
}

TEST_CASE("inertia trace is non-increasing and the final inertia is "
          "consistent",
          "[kmeans]") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd points = random_points(rng, 30, 2);
    std::vector<double> trace;
    const Clustering result = kmeans(points, 3, 1000 + trial, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i)
      CHECK(trace[i] <= trace[i - 1] + 1e-9 * (1.0 + trace[i - 1]));
    CHECK(std::abs(result.inertia - recompute_inertia(points, result)) <=
          1e-9 * (1.0 + result.inertia));

    std::vector<int> counts(3, 0);
    for (int label : result.assignments) {
      REQUIRE(label >= 0);
      REQUIRE(label < 3);
      ++counts[label];
    }
    for (int c : counts) CHECK(c > 0);
  }
}

TEST_CASE("identical points still produce k non-empty clusters", "[kmeans]") {
  Eigen::MatrixXd points = Eigen::MatrixXd::Ones(8, 2);
  const Clustering result = kmeans(points, 3, 7);
  std::vector<int> counts(3, 0);
  for (int label : result.assignments) ++counts[label];
  for (int c : counts) CHECK(c > 0);
  CHECK(result.inertia == 0.0);
}

TEST_CASE("invalid arguments are rejected", "[kmeans]") {
  Rng rng(6);
  const Eigen::MatrixXd points = random_points(rng, 4, 2);
  CHECK_THROWS_AS(kmeans(points, 0, 0), parameter_error);
  CHECK_THROWS_AS(kmeans(points, 5, 0), parameter_error);
  Eigen::MatrixXd bad = points;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kmeans(bad, 2, 0), data_error);
}

TEST_CASE("best of 10 seeds comes close to the exhaustive optimum",
          "[kmeans]") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + static_cast<int>(uniform_index(rng, 7));
    const int k = 2 + static_cast<int>(uniform_index(rng, 2));
    const Eigen::MatrixXd points = random_points(rng, n, 2);
    const double optimum = oracles::best_partition_inertia(points, k);

    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      best = std::min(best, kmeans(points, k, seed).inertia);
    CHECK(best <= 1.05 * optimum + 1e-12);
  }
}
