#include "pbrl/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pbrl/preference.hpp"

namespace pbrl {

DuelDataset::DuelDataset(int dim, double z_bound) : dim_(dim), z_bound_(z_bound) {
  if (dim < 1) throw std::invalid_argument("duel dataset: dimension must be positive");
}

void DuelDataset::append(Eigen::VectorXd z, int outcome) {
  if (z.size() != dim_) throw std::invalid_argument("duel dataset: dimension mismatch");
  if (outcome != 0 && outcome != 1) throw std::invalid_argument("duel dataset: outcome must be 0/1");
  if (z.norm() > z_bound_ + 1e-9) {
    throw std::invalid_argument("duel dataset: difference vector exceeds the feature bound");
  }
  records_.push_back({std::move(z), outcome});
}

DataMatrix::DataMatrix(int dim, double base) : base_(base) {
  if (dim < 1) throw std::invalid_argument("data matrix: dimension must be positive");
  if (!(base > 0.0)) throw std::invalid_argument("data matrix: base must be positive");
  matrix_ = base * Eigen::MatrixXd::Identity(dim, dim);
  llt_.compute(matrix_);
}

void DataMatrix::add_outer(const Eigen::VectorXd& z) {
  if (z.size() != matrix_.rows()) throw std::invalid_argument("data matrix: dimension mismatch");
  matrix_.noalias() += z * z.transpose();
  llt_.compute(matrix_);
}

double DataMatrix::quad(const Eigen::VectorXd& x) const { return x.dot(matrix_ * x); }

double DataMatrix::quad_inv(const Eigen::VectorXd& x) const {
  const double q = x.dot(llt_.solve(x));
  return q > 0.0 ? q : 0.0;
}

Eigen::VectorXd DataMatrix::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

void DataMatrix::validate() const {
  const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw std::runtime_error("data matrix: symmetry violated");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < base_ - 1e-9) {
    std::ostringstream msg;
    msg << "data matrix: smallest eigenvalue " << es.eigenvalues().minCoeff() << " below base "
        << base_;
    throw std::runtime_error(msg.str());
  }
}

namespace {

// log(sigmoid(x)) without ever taking log of a rounded-to-zero probability.
double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

// Records packed into a matrix so the solvers run on matrix-vector products.
struct PackedData {
  Eigen::MatrixXd z;  // one record per row
  Eigen::VectorXd outcomes;
};

PackedData pack(const DuelDataset& data) {
  PackedData p;
  p.z.resize(data.size(), data.dim());
  p.outcomes.resize(data.size());
  for (int i = 0; i < data.size(); ++i) {
    p.z.row(i) = data.records()[i].z.transpose();
    p.outcomes[i] = data.records()[i].outcome;
  }
  return p;
}

Eigen::VectorXd sigmoid_of(const Eigen::VectorXd& margins) {
  return margins.unaryExpr([](double x) { return sigmoid(x); });
}

Eigen::VectorXd sigmoid_derivative_of(const Eigen::VectorXd& margins) {
  return margins.unaryExpr([](double x) { return sigmoid_derivative(x); });
}

double packed_log_likelihood(const Eigen::VectorXd& margins, const Eigen::VectorXd& outcomes,
                             const Eigen::VectorXd& w, double lambda) {
  double ll = 0.0;
  for (int i = 0; i < margins.size(); ++i) {
    ll += outcomes[i] == 1.0 ? log_sigmoid(margins[i]) : log_sigmoid(-margins[i]);
  }
  return ll - 0.5 * lambda * w.squaredNorm();
}

}  // namespace

double log_likelihood(const Eigen::VectorXd& w, const DuelDataset& data, double lambda) {
  double ll = 0.0;
  for (const auto& rec : data.records()) {
    const double m = rec.z.dot(w);
    ll += rec.outcome == 1 ? log_sigmoid(m) : log_sigmoid(-m);
  }
  return ll - 0.5 * lambda * w.squaredNorm();
}

Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& w, const DuelDataset& data,
                                        double lambda) {
  Eigen::VectorXd g = -lambda * w;
  for (const auto& rec : data.records()) {
    g += (rec.outcome - sigmoid(rec.z.dot(w))) * rec.z;
  }
  return g;
}

Eigen::VectorXd mle_fit(const DuelDataset& data, double lambda, double tol, int max_iter,
                        const Eigen::VectorXd* warm_start) {
  if (!(lambda > 0.0)) throw std::invalid_argument("mle: lambda must be positive");
  const int d = data.dim();
  Eigen::VectorXd w = warm_start != nullptr ? *warm_start : Eigen::VectorXd::Zero(d);
  const PackedData p = pack(data);
  Eigen::VectorXd margins = p.z * w;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd g = p.z.transpose() * (p.outcomes - sigmoid_of(margins)) - lambda * w;
    if (g.norm() <= tol) return w;
    Eigen::MatrixXd hess = lambda * Eigen::MatrixXd::Identity(d, d);
    hess.noalias() += p.z.transpose() * sigmoid_derivative_of(margins).asDiagonal() * p.z;
    const Eigen::VectorXd step = hess.ldlt().solve(g);
    const Eigen::VectorXd margin_step = p.z * step;
    // Step halving keeps the ascent monotone up to float resolution;
    // concavity makes full Newton steps acceptable almost always.
    const double base_ll = packed_log_likelihood(margins, p.outcomes, w, lambda);
    const double slack = 1e-12 * (1.0 + std::abs(base_ll));
    double scale = 1.0;
    while (scale > 1e-12 &&
           packed_log_likelihood(margins + scale * margin_step, p.outcomes, w + scale * step,
                                 lambda) < base_ll - slack) {
      scale *= 0.5;
    }
    w += scale * step;
    margins += scale * margin_step;
  }
  const Eigen::VectorXd g = p.z.transpose() * (p.outcomes - sigmoid_of(margins)) - lambda * w;
  if (g.norm() <= tol) return w;
  std::ostringstream msg;
  msg << "mle: no convergence after " << max_iter << " iterations, gradient norm " << g.norm();
  throw std::runtime_error(msg.str());
}

Eigen::VectorXd link_transform(const Eigen::VectorXd& w, const DuelDataset& data, double lambda) {
  Eigen::VectorXd g = lambda * w;
  for (const auto& rec : data.records()) {
    g += sigmoid(rec.z.dot(w)) * rec.z;
  }
  return g;
}

Eigen::MatrixXd link_jacobian(const Eigen::VectorXd& w, const DuelDataset& data, double lambda) {
  const int d = data.dim();
  Eigen::MatrixXd j = lambda * Eigen::MatrixXd::Identity(d, d);
  for (const auto& rec : data.records()) {
    j.noalias() += sigmoid_derivative(rec.z.dot(w)) * (rec.z * rec.z.transpose());
  }
  return j;
}

double projection_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& w_mle,
                            const DuelDataset& data, const DataMatrix& v, double lambda) {
  const Eigen::VectorXd gap = link_transform(w, data, lambda) - link_transform(w_mle, data, lambda);
  return std::sqrt(v.quad_inv(gap));
}

namespace {

Eigen::VectorXd clamp_to_ball(const Eigen::VectorXd& w, double radius) {
  const double n = w.norm();
  if (n <= radius || n == 0.0) return w;
  return (radius / n) * w;
}

// Projected gradient descent on the squared objective from one start.
Eigen::VectorXd pgd_from(const Eigen::VectorXd& start, const Eigen::VectorXd& g_hat,
                         const DuelDataset& data, const DataMatrix& v, double lambda,
                         double radius, int max_iter) {
  Eigen::VectorXd w = clamp_to_ball(start, radius);
  auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd gap = link_transform(x, data, lambda) - g_hat;
    return v.quad_inv(gap);
  };
  double f = objective(w);
  double step = 1.0 / (lambda + 1.0);
  int stalls = 0;
  for (int iter = 0; iter < max_iter && stalls < 30; ++iter) {
    const Eigen::VectorXd gap = link_transform(w, data, lambda) - g_hat;
    const Eigen::VectorXd grad = 2.0 * (link_jacobian(w, data, lambda) * v.solve(gap));
    if (grad.norm() <= 1e-14) break;
    bool moved = false;
    double trial_step = step * 2.0;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd cand = clamp_to_ball(w - trial_step * grad, radius);
      const double fc = objective(cand);
      if (fc < f - 1e-18) {
        w = cand;
        f = fc;
        step = trial_step;
        moved = true;
        break;
      }
      trial_step *= 0.5;
    }
    stalls = moved ? 0 : stalls + 1;
  }
  return w;
}

}  // namespace

Eigen::VectorXd project_estimate(const Eigen::VectorXd& w_mle, const DuelDataset& data,
                                 const DataMatrix& v, double lambda, double param_bound) {
  if (!(param_bound > 0.0)) throw std::invalid_argument("projection: param_bound must be positive");
  if (w_mle.norm() <= param_bound) return w_mle;

  const Eigen::VectorXd g_hat = link_transform(w_mle, data, lambda);
  const Eigen::VectorXd boundary = (param_bound / w_mle.norm()) * w_mle;

  // Deterministic nudge off the ray, along the axis least aligned with it.
  int axis = 0;
  for (int i = 1; i < w_mle.size(); ++i) {
    if (std::abs(boundary[i]) < std::abs(boundary[axis])) axis = i;
  }
  Eigen::VectorXd nudge = Eigen::VectorXd::Zero(w_mle.size());
  nudge[axis] = 0.25 * param_bound;

  const Eigen::VectorXd starts[4] = {boundary, Eigen::VectorXd::Zero(w_mle.size()),
                                     clamp_to_ball(boundary + nudge, param_bound),
                                     clamp_to_ball(boundary - nudge, param_bound)};

  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    const Eigen::VectorXd w = pgd_from(start, g_hat, data, v, lambda, param_bound, 400);
    const Eigen::VectorXd gap = link_transform(w, data, lambda) - g_hat;
    const double obj = v.quad_inv(gap);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

Estimate fit_estimate(const DuelDataset& data, const DataMatrix& v, double lambda,
                      double param_bound, const Eigen::VectorXd* warm_start) {
  Estimate est;
  est.lambda = lambda;
  est.param_bound = param_bound;
  est.w_mle = mle_fit(data, lambda, 1e-10, 100, warm_start);
  est.w_proj = project_estimate(est.w_mle, data, v, lambda, param_bound);
  if (est.w_proj.norm() > param_bound + 1e-9) {
    throw std::runtime_error("projection: infeasible result");
  }
  return est;
}

double confidence_radius(int t, double delta, double lambda, double param_bound,
                         double feature_bound, int dim, double kappa_value) {
  if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("confidence radius: delta in (0,1]");
  if (t < 0) throw std::invalid_argument("confidence radius: t must be nonnegative");
  return std::sqrt(lambda) * param_bound +
         std::sqrt(std::log(1.0 / delta) +
                   2.0 * dim * std::log1p(t * feature_bound / (kappa_value * lambda * dim)));
}

double weighted_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                         const DataMatrix& m) {
  return std::sqrt(m.quad(w1 - w2));
}

bool in_confidence_set(const Eigen::VectorXd& w, const Estimate& estimate, const DataMatrix& v,
                       double radius) {
  return weighted_distance(w, estimate.w_proj, v) <= radius;
}

}  // namespace pbrl
