#include "sresn/readout.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "sresn/csv.hpp"
#include "sresn/error.hpp"
#include "sresn/rng.hpp"

namespace sresn::readout {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::SvdMinNorm:
      return "svd";
    case Method::Qr:
      return "qr";
    case Method::RidgeAnalytic:
      return "ridge";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "svd") return Method::SvdMinNorm;
  if (name == "qr") return Method::Qr;
  if (name == "ridge") return Method::RidgeAnalytic;
  throw ConfigError("unknown solver '" + std::string(name) + "' (expected svd|qr|ridge)");
}

namespace {

void check_shapes(const MatrixXd& x, const VectorXd& y, double lambda) {
  if (x.rows() != y.size()) throw ConfigError("readout: rows(X) must equal length(y)");
  if (x.cols() == 0 || x.rows() == 0) throw ConfigError("readout: empty system");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("readout: lambda must be >= 0");
}

TrainedReadout finish(VectorXd w, Method method, double lambda, const MatrixXd& x,
                      const VectorXd& y) {
  if (!w.allFinite()) {
    throw NumericalError(std::string("readout: ") + std::string(method_name(method)) +
                         " produced non-finite weights");
  }
  TrainedReadout out;
  out.w_out = std::move(w);
  out.method = method;
  out.lambda = lambda;
  const double ynorm = y.norm();
  out.train_residual = ynorm > 0.0 ? (x * out.w_out - y).norm() / ynorm : (x * out.w_out).norm();
  return out;
}

VectorXd svd_apply(const Eigen::BDCSVD<MatrixXd>& svd, const VectorXd& y, double lambda) {
  const VectorXd& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? kRankTolerance * s(0) : 0.0;
  VectorXd uty = svd.matrixU().transpose() * y;
  for (Index i = 0; i < s.size(); ++i) {
    const double si = s(i);
    if (lambda == 0.0) {
      uty(i) = si > cutoff ? uty(i) / si : 0.0;
    } else {
      uty(i) *= si / (si * si + lambda);
    }
  }
  return svd.matrixV() * uty;
}

Eigen::BDCSVD<MatrixXd> thin_svd(const MatrixXd& x) {
  Eigen::BDCSVD<MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("readout: SVD did not converge");
  return svd;
}

VectorXd ridge_from_gram(const MatrixXd& gram, const VectorXd& xty, double lambda) {
  MatrixXd a = gram;
  a.diagonal().array() += lambda;
  const MatrixXd l = cholesky_lower(a);
  VectorXd z = l.triangularView<Eigen::Lower>().solve(xty);
  return l.transpose().triangularView<Eigen::Upper>().solve(z);
}

MatrixXd gram_matrix(const MatrixXd& x) {
  MatrixXd gram = MatrixXd::Zero(x.cols(), x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  return gram.selfadjointView<Eigen::Lower>();
}

}  // namespace

double relative_error(const MatrixXd& x, const VectorXd& w, const VectorXd& y) {
  if (x.rows() != y.size() || x.cols() != w.size()) {
    throw ConfigError("relative_error: shapes do not conform");
  }
  const double ynorm = y.norm();
  if (!(ynorm > 0.0)) throw NumericalError("relative_error: ||y|| is zero, error undefined");
  return (x * w - y).norm() / ynorm;
}

TrainedReadout solve_svd_min_norm(const MatrixXd& x, const VectorXd& y, double lambda) {
  check_shapes(x, y, lambda);
  return finish(svd_apply(thin_svd(x), y, lambda), Method::SvdMinNorm, lambda, x, y);
}

TrainedReadout solve_qr(const MatrixXd& x, const VectorXd& y, double lambda) {
  check_shapes(x, y, lambda);
  Eigen::ColPivHouseholderQR<MatrixXd> qr;
  qr.setThreshold(kRankTolerance);
  VectorXd w;
  if (lambda == 0.0) {
    qr.compute(x);
    w = qr.solve(y);
  } else {
    const Index m = x.rows(), n = x.cols();
    MatrixXd a(m + n, n);
    a.topRows(m) = x;
    a.bottomRows(n) = MatrixXd::Identity(n, n) * std::sqrt(lambda);
    VectorXd b = VectorXd::Zero(m + n);
    b.head(m) = y;
    qr.compute(a);
    w = qr.solve(b);
  }
  if (qr.info() != Eigen::Success) throw NumericalError("readout: QR factorization failed");
  return finish(std::move(w), Method::Qr, lambda, x, y);
}

MatrixXd cholesky_lower(const MatrixXd& a) {
  const Index n = a.rows();
  if (a.cols() != n) throw ConfigError("cholesky: matrix is not square");
  MatrixXd l = MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw IllConditionedError("cholesky: non-positive pivot at index " + std::to_string(j),
                                static_cast<std::size_t>(j));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (a.col(j).tail(rest) - l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return l;
}

TrainedReadout solve_ridge_analytic(const MatrixXd& x, const VectorXd& y, double lambda) {
  check_shapes(x, y, lambda);
  VectorXd w = ridge_from_gram(gram_matrix(x), x.transpose() * y, lambda);
  return finish(std::move(w), Method::RidgeAnalytic, lambda, x, y);
}

TrainedReadout solve(Method method, const MatrixXd& x, const VectorXd& y, double lambda) {
  switch (method) {
    case Method::SvdMinNorm:
      return solve_svd_min_norm(x, y, lambda);
    case Method::Qr:
      return solve_qr(x, y, lambda);
    case Method::RidgeAnalytic:
      return solve_ridge_analytic(x, y, lambda);
  }
  throw ConfigError("readout: unknown method");
}

SynthProblem make_synth_problem(std::size_t m, std::size_t n, std::size_t k, std::size_t t,
                                std::uint64_t seed) {
  if (!(k < n && n < m)) throw ConfigError("make_synth_problem: requires k < n < m");
  if (!(k < t && t < m)) throw ConfigError("make_synth_problem: requires k < t < m");
  const auto im = static_cast<Index>(m), in = static_cast<Index>(n), ik = static_cast<Index>(k);

  // Gaussian draws filled column by column. Orthonormalizing the first k
  // columns of a square Gaussian gives the same k columns as orthonormalizing
  // the whole square draw, and only those columns meet the nonzero part of S.
  auto gaussian_columns = [](Index rows, Index cols, RandomStream stream) {
    MatrixXd g(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) g(r, c) = stream.normal();
    return g;
  };
  auto orthonormal_columns = [](const MatrixXd& g) {
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(g.rows(), g.cols());
    return q;
  };

  SynthProblem p;
  p.m = m;
  p.n = n;
  p.k = k;
  p.t = t;
  p.seed = seed;
  const MatrixXd u = orthonormal_columns(gaussian_columns(im, ik, RandomStream(seed, "synth.u")));
  const MatrixXd v = orthonormal_columns(gaussian_columns(in, ik, RandomStream(seed, "synth.v")));
  RandomStream s_stream(seed, "synth.s");
  p.singular_values.resize(ik);
  for (Index i = 0; i < ik; ++i) p.singular_values(i) = s_stream.normal();
  p.x_full = u * p.singular_values.asDiagonal() * v.transpose();
  RandomStream w_stream(seed, "synth.w");
  p.w_true.resize(in);
  for (Index i = 0; i < in; ++i) p.w_true(i) = w_stream.normal();
  return p;
}

std::vector<double> log_grid(int lo_exponent, int hi_exponent, int per_decade) {
  if (hi_exponent < lo_exponent || per_decade < 1) throw ConfigError("log_grid: bad range");
  std::vector<double> grid;
  const int steps = (hi_exponent - lo_exponent) * per_decade;
  for (int i = 0; i <= steps; ++i) {
    const double e = lo_exponent + static_cast<double>(i) / per_decade;
    grid.push_back(std::pow(10.0, e));
  }
  return grid;
}

std::vector<StudyRow> regularization_study(const SynthProblem& problem,
                                           std::span<const double> lambda_grid, std::size_t jobs) {
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0) || (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))) {
      throw ConfigError("regularization_study: lambda grid must be positive and ascending");
    }
  }
  const MatrixXd x_train = problem.x_train();
  const MatrixXd x_test = problem.x_test();
  const VectorXd y_train = problem.y_train();
  const VectorXd y_test = problem.y_test();

  // Factorizations shared across the grid.
  const Eigen::BDCSVD<MatrixXd> svd = thin_svd(x_train);
  const MatrixXd gram = gram_matrix(x_train);
  const VectorXd xty = x_train.transpose() * y_train;

  constexpr Method kMethods[] = {Method::SvdMinNorm, Method::Qr, Method::RidgeAnalytic};
  const std::size_t n_lambda = lambda_grid.size();
  std::vector<StudyRow> rows(3 * n_lambda);

  auto evaluate = [&](std::size_t idx) {
    const Method method = kMethods[idx / n_lambda];
    const double lambda = lambda_grid[idx % n_lambda];
    StudyRow row{method, lambda, std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN(), "ok"};
    try {
      VectorXd w;
      switch (method) {
        case Method::SvdMinNorm:
          w = svd_apply(svd, y_train, lambda);
          break;
        case Method::Qr:
          w = solve_qr(x_train, y_train, lambda).w_out;
          break;
        case Method::RidgeAnalytic:
          w = ridge_from_gram(gram, xty, lambda);
          break;
      }
      if (!w.allFinite()) throw NumericalError("non-finite weights");
      row.train_err = relative_error(x_train, w, y_train);
      row.test_err = relative_error(x_test, w, y_test);
    } catch (const IllConditionedError&) {
      row.status = "ill_conditioned";
    } catch (const NumericalError&) {
      row.status = "numerical_failure";
    }
    rows[idx] = row;
  };

  const std::size_t width = std::max<std::size_t>(1, std::min(jobs, rows.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) evaluate(i);
  };
  std::vector<std::jthread> pool;
  for (std::size_t i = 1; i < width; ++i) pool.emplace_back(worker);
  worker();
  return rows;
}

void write_study_csv(std::ostream& out, std::span<const StudyRow> rows) {
  out << "method,lambda,train_err,test_err,status\n";
  for (const StudyRow& r : rows) {
    out << method_name(r.method) << ',' << format_double(r.lambda) << ','
        << format_double(r.train_err) << ',' << format_double(r.test_err) << ',' << r.status
        << '\n';
  }
}

}  // namespace sresn::readout
