#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metamodel/orbit.hpp"
#include "metamodel/rewriting.hpp"

namespace metamodel {

/// Structure of a univariate polynomial model: which powers of x carry a
/// coefficient. {0, 2} is b0 + b2 x^2. Exponents are kept sorted and unique,
/// so equal structures compare equal (adding an existing term is a no-op).
class FormalPolynomial {
 public:
  FormalPolynomial() = default;
  explicit FormalPolynomial(std::vector<unsigned> exponents);

  static FormalPolynomial one() { return FormalPolynomial({0}); }

  const std::vector<unsigned>& exponents() const noexcept { return exponents_; }
  std::size_t size() const noexcept { return exponents_.size(); }
  bool empty() const noexcept { return exponents_.empty(); }
  bool contains(unsigned exponent) const;

  /// Highest power first: "x^2 + x + 1"; the empty structure prints "0".
  std::string to_string() const;

  friend auto operator<=>(const FormalPolynomial&, const FormalPolynomial&) = default;

 private:
  std::vector<unsigned> exponents_;
};

/// x * p: every exponent shifted up by one.
FormalPolynomial multiply_by_x(const FormalPolynomial& p);

/// p + 1 with 1 + 1 = 1: inserts exponent 0 when missing.
FormalPolynomial add_constant_term(const FormalPolynomial& p);

/// The two generators acting on polynomials, in polynomial_monoid() order.
std::vector<Action<FormalPolynomial>> polynomial_actions();

/// Applies the word's generators to `base` left to right.
FormalPolynomial act(const Word& w, FormalPolynomial base);

struct Dataset {
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const noexcept { return xs.size(); }
};

struct FittedPolynomial {
  FormalPolynomial structure;
  std::map<unsigned, double> coefficients;
  double train_loss = 0.0;  // residual two-norm on the training data
  std::optional<double> validation_loss;  // mean squared error

  double evaluate(double x) const;
};

double mean_squared_error(const FittedPolynomial& model, const Dataset& data);

/// Minimizes ||y - p(x)||_2 over the coefficients of `structure` with a
/// column-pivoted Householder QR of the design matrix. Throws
/// RankDeficient when there are fewer points than terms or the numerical
/// rank (relative threshold 1e-10) is short.
FittedPolynomial fit_least_squares(const FormalPolynomial& structure, std::span<const double> xs,
                                   std::span<const double> ys);

struct LassoOptions {
  double tolerance = 1e-8;
  std::size_t max_sweeps = 10000;
};

struct LassoFit {
  FittedPolynomial model;
  double lambda = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
};

/// Cyclic coordinate descent for
///   sum_j (sum_i b_i x_j^i - y_j)^2 + lambda * sum_i |b_i|
/// on unit-norm columns. Every coefficient is penalized, including the
/// constant. Stops when no standardized coefficient moves more than
/// `tolerance` in a sweep; otherwise returns the last iterate with
/// converged = false.
LassoFit fit_lasso(const FormalPolynomial& structure, std::span<const double> xs,
                   std::span<const double> ys, double lambda, const LassoOptions& options = {});

/// `count` log-spaced penalties from the smallest lambda that zeroes every
/// coefficient down to `ratio` times it.
std::vector<double> lasso_lambda_grid(const FormalPolynomial& structure, std::span<const double> xs,
                                      std::span<const double> ys, std::size_t count = 10,
                                      double ratio = 1e-4);

struct CrossValidation {
  std::vector<double> lambdas;
  std::vector<double> mean_mse;
  double best_lambda = 0.0;
};

/// k-fold cross-validation (sample j is in fold j mod k). Ties go to the
/// larger penalty.
CrossValidation cross_validate_lasso(const FormalPolynomial& structure, const Dataset& data,
                                     std::span<const double> lambdas, std::size_t folds = 5,
                                     const LassoOptions& options = {});

struct CandidateScore {
  std::size_t state = 0;
  std::optional<FittedPolynomial> fit;  // empty when the fit was skipped
  std::string skip_reason;
};

struct ModelSelection {
  FittedPolynomial best;
  std::size_t state = 0;
  std::size_t word_length = 0;
  std::vector<CandidateScore> candidates;  // in orbit state order
  std::vector<std::string> warnings;
};

/// Fits every orbit state by least squares on `train` (in parallel) and
/// keeps the lowest validation MSE; exact ties go to fewer terms, then
/// smaller depth, then canonical order. Rank-deficient states are skipped
/// with a warning; throws RankDeficient if all are skipped.
ModelSelection select_model(const OrbitGraph<FormalPolynomial>& orbit, const Dataset& train,
                            const Dataset& validation, std::optional<int> threads = std::nullopt);

namespace reference {

/// Single-threaded select_model with a running minimum.
ModelSelection select_model(const OrbitGraph<FormalPolynomial>& orbit, const Dataset& train,
                            const Dataset& validation);

}  // namespace reference

}  // namespace metamodel
