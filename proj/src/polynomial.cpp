#include "metamodel/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <Eigen/Dense>

#include "metamodel/error.hpp"
#include "metamodel/parallel.hpp"

namespace metamodel {

FormalPolynomial::FormalPolynomial(std::vector<unsigned> exponents)
    : exponents_(std::move(exponents)) {
  std::sort(exponents_.begin(), exponents_.end());
  exponents_.erase(std::unique(exponents_.begin(), exponents_.end()), exponents_.end());
}

bool FormalPolynomial::contains(unsigned exponent) const {
  return std::binary_search(exponents_.begin(), exponents_.end(), exponent);
}

std::string FormalPolynomial::to_string() const {
  if (exponents_.empty()) return "0";
  std::string out;
  for (auto it = exponents_.rbegin(); it != exponents_.rend(); ++it) {
    if (!out.empty()) out += " + ";
    if (*it == 0) {
      out += "1";
    } else if (*it == 1) {
      out += "x";
    } else {
      out += "x^" + std::to_string(*it);
    }
  }
  return out;
}

FormalPolynomial multiply_by_x(const FormalPolynomial& p) {
  std::vector<unsigned> shifted = p.exponents();
  for (auto& e : shifted) ++e;
  return FormalPolynomial(std::move(shifted));
}

FormalPolynomial add_constant_term(const FormalPolynomial& p) {
  std::vector<unsigned> out = p.exponents();
  out.push_back(0);
  return FormalPolynomial(std::move(out));
}

std::vector<Action<FormalPolynomial>> polynomial_actions() {
  return {{"T_x", multiply_by_x}, {"T_1", add_constant_term}};
}

FormalPolynomial act(const Word& w, FormalPolynomial base) {
  static const auto actions = polynomial_actions();
  for (std::size_t letter : w.letters) base = actions.at(letter).apply(base);
  return base;
}

// ---------------------------------------------------------------------------

namespace {

double power(double x, unsigned e) {
  double out = 1.0;
  for (unsigned i = 0; i < e; ++i) out *= x;
  return out;
}

Eigen::MatrixXd design_matrix(const FormalPolynomial& structure, std::span<const double> xs) {
  const auto& exps = structure.exponents();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(exps.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    for (std::size_t i = 0; i < exps.size(); ++i) {
      x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = power(xs[j], exps[i]);
    }
  }
  return x;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void require_same_size(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("xs and ys differ in length (" + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
  }
}

double residual_norm(const FittedPolynomial& model, std::span<const double> xs,
                     std::span<const double> ys) {
  double ss = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double r = ys[j] - model.evaluate(xs[j]);
    ss += r * r;
  }
  return std::sqrt(ss);
}

}  // namespace

double FittedPolynomial::evaluate(double x) const {
  double out = 0.0;
  for (const auto& [e, b] : coefficients) out += b * power(x, e);
  return out;
}

double mean_squared_error(const FittedPolynomial& model, const Dataset& data) {
  if (data.size() == 0) throw InvalidArgument("mean squared error of an empty dataset");
  double ss = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double r = data.ys[j] - model.evaluate(data.xs[j]);
    ss += r * r;
  }
  return ss / static_cast<double>(data.size());
}

FittedPolynomial fit_least_squares(const FormalPolynomial& structure, std::span<const double> xs,
                                   std::span<const double> ys) {
  require_same_size(xs, ys);
  const auto& exps = structure.exponents();
  if (xs.size() < exps.size()) {
    throw RankDeficient(std::to_string(xs.size()) + " data points for " +
                        std::to_string(exps.size()) + " terms of " + structure.to_string());
  }
  FittedPolynomial fit;
  fit.structure = structure;
  if (!exps.empty()) {
    const Eigen::MatrixXd x = design_matrix(structure, xs);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) {
      throw RankDeficient("design matrix of " + structure.to_string() + " has rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(x.cols()));
    }
    const Eigen::VectorXd beta = qr.solve(as_vector(ys));
    for (std::size_t i = 0; i < exps.size(); ++i) {
      fit.coefficients.emplace(exps[i], beta(static_cast<Eigen::Index>(i)));
    }
  }
  fit.train_loss = residual_norm(fit, xs, ys);
  return fit;
}

LassoFit fit_lasso(const FormalPolynomial& structure, std::span<const double> xs,
                   std::span<const double> ys, double lambda, const LassoOptions& options) {
  require_same_size(xs, ys);
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  const auto& exps = structure.exponents();
  const Eigen::MatrixXd x = design_matrix(structure, xs);
  const auto k = x.cols();

  Eigen::VectorXd scale = x.colwise().norm().transpose();
  Eigen::MatrixXd z = x;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (scale(i) > 0.0) z.col(i) /= scale(i);
  }

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd residual = as_vector(ys);
  LassoFit out;
  out.lambda = lambda;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (scale(i) == 0.0) continue;
      const double rho = z.col(i).dot(residual) + gamma(i);
      const double threshold = lambda / (2.0 * scale(i)) * (1.0 + 16 * std::numeric_limits<double>::epsilon());
      double next = 0.0;
      if (rho > threshold) {
        next = rho - threshold;
      } else if (rho < -threshold) {
        next = rho + threshold;
      }
      const double delta = next - gamma(i);
      if (delta != 0.0) {
        residual -= delta * z.col(i);
        gamma(i) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    out.sweeps = sweep;
    if (max_change < options.tolerance) {
      out.converged = true;
      break;
    }
  }

  out.model.structure = structure;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double b = scale(i) > 0.0 ? gamma(i) / scale(i) : 0.0;
    out.model.coefficients.emplace(exps[static_cast<std::size_t>(i)], b);
  }
  out.model.train_loss = residual_norm(out.model, xs, ys);
  return out;
}

std::vector<double> lasso_lambda_grid(const FormalPolynomial& structure, std::span<const double> xs,
                                      std::span<const double> ys, std::size_t count, double ratio) {
  require_same_size(xs, ys);
  if (count == 0) return {};
  const Eigen::MatrixXd x = design_matrix(structure, xs);
  const double lambda_max =
      x.cols() == 0 ? 0.0 : (2.0 * (x.transpose() * as_vector(ys))).cwiseAbs().maxCoeff();
  std::vector<double> grid;
  for (std::size_t t = 0; t < count; ++t) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(count - 1);
    grid.push_back(lambda_max * std::pow(ratio, frac));
  }
  return grid;
}

CrossValidation cross_validate_lasso(const FormalPolynomial& structure, const Dataset& data,
                                     std::span<const double> lambdas, std::size_t folds,
                                     const LassoOptions& options) {
  if (folds < 2 || folds > data.size()) {
    throw InvalidArgument("need 2 <= folds <= " + std::to_string(data.size()));
  }
  if (lambdas.empty()) throw InvalidArgument("empty lambda grid");
  CrossValidation cv;
  cv.lambdas.assign(lambdas.begin(), lambdas.end());
  for (double lambda : lambdas) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      Dataset train;
      Dataset held;
      for (std::size_t j = 0; j < data.size(); ++j) {
        Dataset& target = (j % folds == f) ? held : train;
        target.xs.push_back(data.xs[j]);
        target.ys.push_back(data.ys[j]);
      }
      const LassoFit fit = fit_lasso(structure, train.xs, train.ys, lambda, options);
      total += mean_squared_error(fit.model, held);
    }
    cv.mean_mse.push_back(total / static_cast<double>(folds));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cv.lambdas.size(); ++i) {
    if (std::tie(cv.mean_mse[i], cv.lambdas[best]) < std::tie(cv.mean_mse[best], cv.lambdas[i])) {
      best = i;
    }
  }
  cv.best_lambda = cv.lambdas[best];
  return cv;
}

// ---------------------------------------------------------------------------

namespace {

void require_data(const Dataset& train, const Dataset& validation) {
  if (train.size() == 0 || validation.size() == 0) {
    throw InvalidArgument("model selection needs nonempty training and validation data");
  }
  if (train.xs.size() != train.ys.size() || validation.xs.size() != validation.ys.size()) {
    throw InvalidArgument("dataset columns differ in length");
  }
}

CandidateScore score_state(const OrbitGraph<FormalPolynomial>& orbit, std::size_t s,
                           const Dataset& train, const Dataset& validation) {
  CandidateScore score;
  score.state = s;
  try {
    FittedPolynomial fit = fit_least_squares(orbit.states[s], train.xs, train.ys);
    fit.validation_loss = mean_squared_error(fit, validation);
    score.fit = std::move(fit);
  } catch (const RankDeficient& e) {
    score.skip_reason = e.what();
  }
  return score;
}

// Lexicographic selection key; smaller is better.
auto selection_key(const OrbitGraph<FormalPolynomial>& orbit, const CandidateScore& c) {
  return std::make_tuple(*c.fit->validation_loss, c.fit->structure.size(), orbit.depth_of[c.state],
                         c.fit->structure);
}

ModelSelection finish(const OrbitGraph<FormalPolynomial>& orbit, std::vector<CandidateScore> scores) {
  ModelSelection out;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].fit) {
      out.warnings.push_back("skipped " + orbit.states[scores[i].state].to_string() + ": " +
                             scores[i].skip_reason);
      continue;
    }
    if (!best || selection_key(orbit, scores[i]) < selection_key(orbit, scores[*best])) best = i;
  }
  if (!best) throw RankDeficient("every orbit state was rank deficient on the training data");
  out.best = *scores[*best].fit;
  out.state = scores[*best].state;
  out.word_length = orbit.depth_of[out.state];
  out.candidates = std::move(scores);
  return out;
}

}  // namespace

ModelSelection select_model(const OrbitGraph<FormalPolynomial>& orbit, const Dataset& train,
                            const Dataset& validation, std::optional<int> threads) {
  require_data(train, validation);
  const int nthreads = resolve_threads(threads);
  const auto n = static_cast<long long>(orbit.states.size());
  std::vector<CandidateScore> scores(orbit.states.size());
#pragma omp parallel for num_threads(nthreads) schedule(dynamic)
  for (long long s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    scores[i] = score_state(orbit, i, train, validation);
  }
  return finish(orbit, std::move(scores));
}

namespace reference {

ModelSelection select_model(const OrbitGraph<FormalPolynomial>& orbit, const Dataset& train,
                            const Dataset& validation) {
  require_data(train, validation);
  ModelSelection out;
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < orbit.states.size(); ++s) {
    CandidateScore score = score_state(orbit, s, train, validation);
    if (!score.fit) {
      out.warnings.push_back("skipped " + orbit.states[s].to_string() + ": " + score.skip_reason);
    } else if (!best) {
      best = s;
    } else {
      const FittedPolynomial& cur = *out.candidates[*best].fit;
      const FittedPolynomial& cand = *score.fit;
      bool better = false;
      if (*cand.validation_loss != *cur.validation_loss) {
        better = *cand.validation_loss < *cur.validation_loss;
      } else if (cand.structure.size() != cur.structure.size()) {
        better = cand.structure.size() < cur.structure.size();
      } else if (orbit.depth_of[s] != orbit.depth_of[*best]) {
        better = orbit.depth_of[s] < orbit.depth_of[*best];
      } else {
        better = cand.structure < cur.structure;
      }
      if (better) best = s;
    }
    out.candidates.push_back(std::move(score));
  }
  if (!best) throw RankDeficient("every orbit state was rank deficient on the training data");
  out.best = *out.candidates[*best].fit;
  out.state = *best;
  out.word_length = orbit.depth_of[*best];
  return out;
}

}  // namespace reference

}  // namespace metamodel
