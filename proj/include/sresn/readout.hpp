#pragma once

// Linear readout training: min ||X w - y||^2 (+ lambda ||w||^2) by three
// routes, and the synthetic rank-deficient study that compares them.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sresn::readout {

enum class Method { SvdMinNorm, Qr, RidgeAnalytic };

std::string_view method_name(Method m) noexcept;
// Accepts "svd", "qr", "ridge". Throws ConfigError.
Method parse_method(std::string_view name);

// Relative singular-value / pivot cutoff.
inline constexpr double kRankTolerance = 1e-12;

struct TrainedReadout {
  Eigen::VectorXd w_out;
  Method method = Method::SvdMinNorm;
  double lambda = 0.0;
  double train_residual = 0.0;
};

// ||X w - y|| / ||y||. Throws NumericalError when ||y|| = 0.
double relative_error(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, const Eigen::VectorXd& y);

// w = V diag(s / (s^2 + lambda)) U^T y. With lambda = 0 singular values
// below kRankTolerance * s_max are dropped (pseudoinverse).
TrainedReadout solve_svd_min_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double lambda = 0.0);

// Column-pivoted Householder QR on [X; sqrt(lambda) I] with rank detection.
TrainedReadout solve_qr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda = 0.0);

// (X^T X + lambda I)^{-1} X^T y through Cholesky. Throws IllConditionedError
// on a non-positive pivot.
TrainedReadout solve_ridge_analytic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    double lambda);

TrainedReadout solve(Method method, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     double lambda);

// Lower Cholesky factor of a symmetric matrix; throws IllConditionedError
// with the failing pivot index.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

// X = U S V^T with rank k; rows [0, t) train, [t, m) test.
struct SynthProblem {
  std::size_t m = 0, n = 0, k = 0, t = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd x_full;
  Eigen::VectorXd w_true;
  Eigen::VectorXd singular_values;  // the k nonzero diagonal entries of S

  Eigen::MatrixXd x_train() const { return x_full.topRows(static_cast<Eigen::Index>(t)); }
  Eigen::MatrixXd x_test() const { return x_full.bottomRows(static_cast<Eigen::Index>(m - t)); }
  Eigen::VectorXd y_train() const { return x_train() * w_true; }
  Eigen::VectorXd y_test() const { return x_test() * w_true; }
};

// Requires k < n < m and k < t < m. Throws ConfigError.
SynthProblem make_synth_problem(std::size_t m, std::size_t n, std::size_t k, std::size_t t,
                                std::uint64_t seed);

struct StudyRow {
  Method method;
  double lambda;
  double train_err;  // NaN when status != "ok"
  double test_err;
  std::string status;  // "ok", "ill_conditioned", "numerical_failure"
};

// log-spaced grid from 10^lo to 10^hi with `per_decade` points per decade.
std::vector<double> log_grid(int lo_exponent, int hi_exponent, int per_decade = 1);

// All three solvers over the grid. Evaluations run on `jobs` threads; the
// row order is fixed (method major, lambda ascending).
std::vector<StudyRow> regularization_study(const SynthProblem& problem,
                                           std::span<const double> lambda_grid,
                                           std::size_t jobs = 1);

// Header `method,lambda,train_err,test_err,status`.
void write_study_csv(std::ostream& out, std::span<const StudyRow> rows);

}  // namespace sresn::readout
