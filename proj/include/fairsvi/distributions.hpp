#pragma once

#include <Eigen/Dense>

#include "fairsvi/rng.hpp"
#include "fairsvi/tape.hpp"
#include "fairsvi/tensor.hpp"

namespace fairsvi {

// ---------------------------------------------------------------- samplers

/// i.i.d. Gumbel(0,1) draws, -log(-log(U)), with U clamped to
/// [1e-12, 1 - 1e-12] so every output is finite.
Tensor sample_gumbel(Index rows, Index cols, RngStream& rng);

struct GumbelSoftmaxSample {
    Value z;           ///< relaxed one-hot rows, each on the simplex
    double tau = 1.0;  ///< temperature used for the draw
    Value logits;      ///< source unnormalized log probabilities
};

/// Temperature-controlled relaxation of a categorical draw per row of
/// `logits`; differentiable w.r.t. the logits.
GumbelSoftmaxSample gumbel_softmax(Value logits, double tau, RngStream& rng);

/// softmax(mu + sigma .* eps) with eps standard normal; rows land on the
/// simplex. Differentiable w.r.t. mu and sigma.
Value logistic_normal_sample(Value mu, Value sigma, RngStream& rng);

// --------------------------------------------- log-densities (plain doubles)

double gaussian_logpdf(double x, double mu, double sigma);

/// log N(x; mu, C C^T + I); the covariance is handled through its Cholesky
/// factor (log-determinant and quadratic form), never an explicit inverse.
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& cfac);

/// Gamma in shape-rate form: kappa = shape, eta = rate.
double gamma_logpdf(double s, double kappa, double eta);

double inverse_wishart_logpdf(const Eigen::MatrixXd& sigma, double nu,
                              const Eigen::MatrixXd& psi);

double uniform_categorical_logpmf(int k);

/// Dirichlet-multinomial posterior predictive: (N_zs + alpha) / (N_s + K alpha).
double smoothed_group_prob(double n_zs, double n_s, double alpha, int k);

double log_multivariate_gamma(int dim, double a);

// ------------------------------------------------ log-densities (on a tape)

/// Elementwise Gaussian log-density with broadcasting; all three arguments
/// may carry gradient.
Value gaussian_logpdf_t(Value x, Value mu, Value sigma);

/// Elementwise Gamma(shape kappa, rate eta) log-density of s > 0.
Value gamma_logpdf_t(Value s, double kappa, double eta);

}  // namespace fairsvi
