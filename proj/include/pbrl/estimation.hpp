#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <limits>
#include <vector>

namespace pbrl {

struct DuelRecord {
  Eigen::VectorXd z;  // feature difference of the dueled trajectories
  int outcome = 0;    // 1 iff the first trajectory won
};

// Append-only list of observed duels in difference form. An optional bound
// rejects difference vectors longer than twice the feature bound.
class DuelDataset {
 public:
  explicit DuelDataset(int dim, double z_bound = std::numeric_limits<double>::infinity());

  void append(Eigen::VectorXd z, int outcome);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(records_.size()); }
  const std::vector<DuelRecord>& records() const { return records_; }

 private:
  int dim_;
  double z_bound_;
  std::vector<DuelRecord> records_;
};

// Symmetric positive-definite accumulator base*I + sum of rank-one updates.
// A Cholesky factor is cached and refreshed after every update; the contract
// is the numeric result, not the factorization.
class DataMatrix {
 public:
  DataMatrix(int dim, double base);

  void add_outer(const Eigen::VectorXd& z);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  double base() const { return base_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  double quad(const Eigen::VectorXd& x) const;      // x' M x
  double quad_inv(const Eigen::VectorXd& x) const;  // x' M^-1 x
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  // Symmetry and the base*I floor on the spectrum; throws on violation.
  void validate() const;

 private:
  double base_;
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Regularized log-likelihood of the logistic preference model and its
// gradient.
double log_likelihood(const Eigen::VectorXd& w, const DuelDataset& data, double lambda);
Eigen::VectorXd log_likelihood_gradient(const Eigen::VectorXd& w, const DuelDataset& data,
                                        double lambda);

// Damped Newton ascent on the strictly concave likelihood. Returns the point
// with gradient norm <= tol; throws std::runtime_error with the final
// gradient norm if max_iter is exhausted.
Eigen::VectorXd mle_fit(const DuelDataset& data, double lambda, double tol = 1e-10,
                        int max_iter = 100, const Eigen::VectorXd* warm_start = nullptr);

// Data-weighted link transform sum_l sigmoid(z_l'w) z_l + lambda w and its
// Jacobian; the projection below measures distances between transforms.
Eigen::VectorXd link_transform(const Eigen::VectorXd& w, const DuelDataset& data, double lambda);
Eigen::MatrixXd link_jacobian(const Eigen::VectorXd& w, const DuelDataset& data, double lambda);

// V^-1-weighted norm of the transform gap to w_mle, the quantity the
// projection minimizes over the feasible ball.
double projection_objective(const Eigen::VectorXd& w, const Eigen::VectorXd& w_mle,
                            const DuelDataset& data, const DataMatrix& v, double lambda);

// Feasible parameter minimizing projection_objective over the ball of radius
// param_bound. Returns w_mle unchanged when it is already feasible; otherwise
// runs projected gradient descent from four deterministic restarts and keeps
// the best.
Eigen::VectorXd project_estimate(const Eigen::VectorXd& w_mle, const DuelDataset& data,
                                 const DataMatrix& v, double lambda, double param_bound);

struct Estimate {
  Eigen::VectorXd w_mle;
  Eigen::VectorXd w_proj;
  double lambda = 0.0;
  double param_bound = 0.0;
};

// mle_fit followed by project_estimate, with the feasibility invariant
// checked.
Estimate fit_estimate(const DuelDataset& data, const DataMatrix& v, double lambda,
                      double param_bound, const Eigen::VectorXd* warm_start = nullptr);

// Anytime confidence radius sqrt(lambda)*S + sqrt(log(1/delta)
// + 2d log(1 + t*B/(kappa*lambda*d))).
double confidence_radius(int t, double delta, double lambda, double param_bound,
                         double feature_bound, int dim, double kappa_value);

double weighted_distance(const Eigen::VectorXd& w1, const Eigen::VectorXd& w2,
                         const DataMatrix& m);

// Membership in the ellipsoid around the projected estimate.
bool in_confidence_set(const Eigen::VectorXd& w, const Estimate& estimate, const DataMatrix& v,
                       double radius);

}  // namespace pbrl
