#include <doctest.h>

#include <cmath>
#include <random>

#include "metamodel/error.hpp"
#include "metamodel/polynomial.hpp"
#include "support.hpp"

using namespace metamodel;

namespace {

double column(unsigned e, double x) { return std::pow(x, static_cast<double>(e)); }

// Normal equations by Gaussian elimination in long double.
std::vector<double> normal_equations(const std::vector<unsigned>& exps, const Dataset& d) {
  const std::size_t k = exps.size();
  std::vector<std::vector<long double>> a(k, std::vector<long double>(k + 1, 0.0L));
  for (std::size_t j = 0; j < d.size(); ++j) {
    for (std::size_t r = 0; r < k; ++r) {
      const long double xr = column(exps[r], d.xs[j]);
      for (std::size_t c = 0; c < k; ++c) a[r][c] += xr * column(exps[c], d.xs[j]);
      a[r][k] += xr * d.ys[j];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t cc = c; cc <= k; ++cc) a[r][cc] -= f * a[c][cc];
    }
  }
  std::vector<double> b(k);
  for (std::size_t r = 0; r < k; ++r) b[r] = static_cast<double>(a[r][k] / a[r][r]);
  return b;
}

// Gradient of sum_j (p(x_j) - y_j)^2 with respect to each coefficient.
std::map<unsigned, double> gradient(const FittedPolynomial& fit, const Dataset& d) {
  std::map<unsigned, double> g;
  for (unsigned e : fit.structure.exponents()) g[e] = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double r = fit.evaluate(d.xs[j]) - d.ys[j];
    for (unsigned e : fit.structure.exponents()) g[e] += 2.0 * r * column(e, d.xs[j]);
  }
  return g;
}

FormalPolynomial random_structure(std::mt19937_64& rng, unsigned max_exp) {
  std::vector<unsigned> exps;
  std::bernoulli_distribution keep(0.6);
  for (unsigned e = 0; e <= max_exp; ++e) {
    if (keep(rng)) exps.push_back(e);
  }
  if (exps.empty()) exps.push_back(max_exp / 2);
  return FormalPolynomial(exps);
}

}  // namespace

TEST_CASE("exact interpolation") {
  const std::vector<double> xs{-1, 0.5, 2, 3};
  const std::vector<double> ys{-1, 0.5, 2, 3};
  auto fit = fit_least_squares(FormalPolynomial({1}), xs, ys);
  CHECK(fit.coefficients.at(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.train_loss <= 1e-9);
}

TEST_CASE("recovers 3x^2 + 1 from five points") {
  const std::vector<double> xs{-2, -1, 0, 1, 2};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3 * x * x + 1);
  auto fit = fit_least_squares(FormalPolynomial({0, 2}), xs, ys);
  CHECK(std::fabs(fit.coefficients.at(0) - 1) < 1e-8);
  CHECK(std::fabs(fit.coefficients.at(2) - 3) < 1e-8);
  CHECK(fit.coefficients.size() == 2);
}

TEST_CASE("rank deficiency") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(fit_least_squares(FormalPolynomial({0, 1}), one, one), RankDeficient);
  const std::vector<double> same{2, 2, 2};
  CHECK_THROWS_AS(fit_least_squares(FormalPolynomial({0, 1}), same, same), RankDeficient);
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(fit_least_squares(FormalPolynomial({0}), two, one), InvalidArgument);
}

TEST_CASE("least squares matches normal equations and is orthogonal") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = random_structure(rng, 3);
    auto d = testing::sample_dataset(rng, 30, -1.0, 1.0, 0.5, [](double x) { return 1 - x + 2 * x * x * x; });
    auto fit = fit_least_squares(p, d.xs, d.ys);
    auto oracle = normal_equations(p.exponents(), d);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(fit.coefficients.at(p.exponents()[i]) == doctest::Approx(oracle[i]).epsilon(1e-9));
    }
    for (const auto& [e, g] : gradient(fit, d)) CHECK(std::fabs(g / 2) < 1e-8);
    double rss = 0;
    for (std::size_t j = 0; j < d.size(); ++j) rss += std::pow(fit.evaluate(d.xs[j]) - d.ys[j], 2);
    CHECK(fit.train_loss == doctest::Approx(std::sqrt(rss)).epsilon(1e-12));
  }
}

TEST_CASE("lasso at zero penalty is least squares") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_structure(rng, 3);
    auto d = testing::sample_dataset(rng, 30, -1.0, 1.0, 0.3, [](double x) { return 2 + x * x; });
    auto ls = fit_least_squares(p, d.xs, d.ys);
    auto lasso = fit_lasso(p, d.xs, d.ys, 0.0);
    CHECK(lasso.converged);
    for (unsigned e : p.exponents()) CHECK(std::fabs(lasso.model.coefficients.at(e) - ls.coefficients.at(e)) < 1e-6);
  }
}

TEST_CASE("lasso satisfies KKT conditions") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> frac(0.01, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_structure(rng, 4);
    auto d = testing::sample_dataset(rng, 30, -1.5, 1.5, 0.5, [](double x) { return 1 - 2 * x + 0.5 * x * x; });
    const double lambda = frac(rng) * lasso_lambda_grid(p, d.xs, d.ys).front();
    auto fit = fit_lasso(p, d.xs, d.ys, lambda);
    REQUIRE(fit.converged);
    for (const auto& [e, g] : gradient(fit.model, d)) {
      const double b = fit.model.coefficients.at(e);
      if (b != 0.0) {
        CHECK(std::fabs(g + lambda * (b > 0 ? 1.0 : -1.0)) < 1e-5);
      } else {
        CHECK(std::fabs(g) <= lambda + 1e-5);
      }
    }
  }
}

TEST_CASE("large penalty zeroes everything") {
  std::mt19937_64 rng(31);
  auto d = testing::sample_dataset(rng, 20, -1.0, 1.0, 0.1, [](double x) { return 3 * x * x + 1; });
  auto fit = fit_lasso(FormalPolynomial({0, 1, 2, 3, 4, 5}), d.xs, d.ys, 1e6);
  for (const auto& [e, b] : fit.model.coefficients) CHECK(b == 0.0);
  const auto grid = lasso_lambda_grid(FormalPolynomial({0, 2}), d.xs, d.ys);
  auto at_max = fit_lasso(FormalPolynomial({0, 2}), d.xs, d.ys, grid.front());
  for (const auto& [e, b] : at_max.model.coefficients) CHECK(b == 0.0);
}

TEST_CASE("lambda grid") {
  const std::vector<double> xs{1, 2, 3};
  const std::vector<double> ys{2, 4, 7};
  auto grid = lasso_lambda_grid(FormalPolynomial({0, 1}), xs, ys);
  REQUIRE(grid.size() == 10);
  // max |2 X_i^T y| over raw columns: 2 * (2 + 8 + 21) = 62.
  CHECK(grid.front() == doctest::Approx(62.0));
  CHECK(grid.back() == doctest::Approx(62e-4));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] / grid[i - 1] == doctest::Approx(std::pow(1e-4, 1.0 / 9)));
}

TEST_CASE("cross validation recomputes by hand") {
  std::mt19937_64 rng(37);
  auto d = testing::sample_dataset(rng, 25, -1.0, 1.0, 0.1, [](double x) { return 3 * x * x + 1; });
  const FormalPolynomial p({0, 1, 2, 3});
  auto grid = lasso_lambda_grid(p, d.xs, d.ys);
  auto cv = cross_validate_lasso(p, d, grid);
  REQUIRE(cv.mean_mse.size() == grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) {
    double total = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      Dataset train, test;
      for (std::size_t j = 0; j < d.size(); ++j) {
        Dataset& dst = j % 5 == k ? test : train;
        dst.xs.push_back(d.xs[j]);
        dst.ys.push_back(d.ys[j]);
      }
      total += mean_squared_error(fit_lasso(p, train.xs, train.ys, grid[l]).model, test);
    }
    CHECK(cv.mean_mse[l] == doctest::Approx(total / 5).epsilon(1e-12));
  }
  const auto best = std::min_element(cv.mean_mse.begin(), cv.mean_mse.end()) - cv.mean_mse.begin();
  CHECK(cv.best_lambda == grid[static_cast<std::size_t>(best)]);
}

TEST_CASE("cross-validated lasso finds the sparse structure") {
  std::mt19937_64 rng(41);
  auto d = testing::sample_dataset(rng, 40, -1.0, 1.0, 0.1, [](double x) { return 3 * x * x + 1; });
  const FormalPolynomial p({0, 1, 2, 3, 4, 5});
  auto cv = cross_validate_lasso(p, d, lasso_lambda_grid(p, d.xs, d.ys));
  auto fit = fit_lasso(p, d.xs, d.ys, cv.best_lambda);
  CHECK(fit.model.coefficients.at(0) != 0.0);
  CHECK(fit.model.coefficients.at(2) != 0.0);
  for (unsigned e : {1u, 3u, 4u, 5u}) CHECK(std::fabs(fit.model.coefficients.at(e)) < 0.1);
}

TEST_CASE("noiseless x^2 + 1 selects {0,2} and matches exhaustive fitting") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 3);
  std::mt19937_64 rng(43);
  auto train = testing::sample_dataset(rng, 40, -2.0, 2.0, 0.0, [](double x) { return x * x + 1; });
  auto val = testing::sample_dataset(rng, 40, -2.0, 2.0, 0.0, [](double x) { return x * x + 1; });
  auto sel = select_model(orbit, train, val);
  CHECK(sel.best.structure == FormalPolynomial({0, 2}));
  CHECK(sel.word_length == 3);
  // Exhaustive oracle: no other state fits better.
  for (const auto& s : orbit.states) {
    auto fit = fit_least_squares(s, train.xs, train.ys);
    CHECK(mean_squared_error(fit, val) >= *sel.best.validation_loss);
  }
  auto same = select_model(orbit, train, train);
  CHECK(*same.best.validation_loss <= 1e-9);
}

TEST_CASE("depth 1 orbit picks the best available structure") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 1);
  REQUIRE(orbit.states.size() == 2);
  Dataset d;
  for (double x : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    d.xs.push_back(x);
    d.ys.push_back(x * x);
  }
  auto sel = select_model(orbit, d, d);
  CHECK(sel.best.structure == FormalPolynomial({1}));
  CHECK(*sel.best.validation_loss > 0);
  const double constant = mean_squared_error(fit_least_squares(FormalPolynomial({0}), d.xs, d.ys), d);
  CHECK(constant == doctest::Approx(74.8));
  CHECK(*sel.best.validation_loss < constant);
}

TEST_CASE("rank deficient states are skipped with a warning") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 3);
  Dataset d{{1.0}, {2.0}};
  auto sel = select_model(orbit, d, d);
  CHECK(sel.best.structure.size() == 1);
  CHECK_FALSE(sel.warnings.empty());
  CHECK_THROWS_AS(select_model(orbit, Dataset{}, d), InvalidArgument);
}

TEST_CASE("parallel selection equals the serial reference") {
  auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 6);
  std::mt19937_64 rng(47);
  auto train = testing::sample_dataset(rng, 40, -2.0, 2.0, 0.1, [](double x) { return x * x + 1; });
  auto val = testing::sample_dataset(rng, 40, -2.0, 2.0, 0.1, [](double x) { return x * x + 1; });
  auto ref = reference::select_model(orbit, train, val);
  for (int threads : {1, 2, 4, 7}) {
    auto sel = select_model(orbit, train, val, threads);
    CHECK(sel.state == ref.state);
    CHECK(sel.best.coefficients == ref.best.coefficients);
    CHECK(sel.warnings == ref.warnings);
    REQUIRE(sel.candidates.size() == ref.candidates.size());
    for (std::size_t i = 0; i < sel.candidates.size(); ++i) {
      CHECK(sel.candidates[i].fit.has_value() == ref.candidates[i].fit.has_value());
    }
  }
}
