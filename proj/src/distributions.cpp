#include "fairsvi/distributions.hpp"

#include <cmath>

namespace fairsvi {

namespace {
constexpr double kUClamp = 1e-12;
constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)
}  // namespace

Tensor sample_gumbel(Index rows, Index cols, RngStream& rng) {
    Tensor g = Tensor::zeros(rows, cols);
    for (Index k = 0; k < g.size(); ++k) {
        double u = rng.uniform();
        if (u < kUClamp) u = kUClamp;
        if (u > 1.0 - kUClamp) u = 1.0 - kUClamp;
        g[k] = -std::log(-std::log(u));
    }
    return g;
}

GumbelSoftmaxSample gumbel_softmax(Value logits, double tau, RngStream& rng) {
    if (!(tau > 0.0)) throw DomainError("gumbel_softmax: temperature must be positive");
    const Tensor& lp = logits.val();
    if (!lp.all_finite()) throw DomainError("gumbel_softmax: non-finite logits");
    Tape& t = *logits.tape;
    Value g = t.leaf(sample_gumbel(lp.rows(), lp.cols(), rng));
    Value z = softmax(mul_const(add(g, logits), 1.0 / tau));
    return {z, tau, logits};
}

Value logistic_normal_sample(Value mu, Value sigma, RngStream& rng) {
    const Tensor& s = sigma.val();
    for (Index k = 0; k < s.size(); ++k)
        if (!(s[k] > 0.0)) throw DomainError("logistic_normal_sample: sigma must be positive");
    Tape& t = *mu.tape;
    Value eps = t.leaf(rng.normal_tensor(mu.rows(), mu.cols()));
    return softmax(add(mu, mul(sigma, eps)));
}

double gaussian_logpdf(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian_logpdf: sigma must be positive");
    const double z = (x - mu) / sigma;
    return -0.5 * kLogTwoPi - std::log(sigma) - 0.5 * z * z;
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& cfac) {
    const Eigen::Index d = x.size();
    if (mu.size() != d || cfac.rows() != d)
        throw DimensionError("mvn_logpdf: dimension mismatch");
    Eigen::MatrixXd sigma = cfac * cfac.transpose();
    sigma.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw DomainError("mvn_logpdf: covariance not SPD");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::VectorXd dev = x - mu;
    const double quad = dev.dot(llt.solve(dev));
    return -0.5 * (static_cast<double>(d) * kLogTwoPi + logdet + quad);
}

double gamma_logpdf(double s, double kappa, double eta) {
    if (!(s > 0.0)) throw DomainError("gamma_logpdf: s must be positive");
    if (!(kappa > 0.0 && eta > 0.0)) throw DomainError("gamma_logpdf: kappa, eta must be positive");
    return kappa * std::log(eta) - std::lgamma(kappa) + (kappa - 1.0) * std::log(s) - eta * s;
}

double log_multivariate_gamma(int dim, double a) {
    double out = 0.25 * dim * (dim - 1) * std::log(M_PI);
    for (int j = 1; j <= dim; ++j) out += std::lgamma(a + 0.5 * (1.0 - j));
    return out;
}

double inverse_wishart_logpdf(const Eigen::MatrixXd& sigma, double nu,
                              const Eigen::MatrixXd& psi) {
    const int d = static_cast<int>(sigma.rows());
    if (sigma.cols() != d || psi.rows() != d || psi.cols() != d)
        throw DimensionError("inverse_wishart_logpdf: dimension mismatch");
    if (!(nu > d - 1)) throw DomainError("inverse_wishart_logpdf: nu must exceed dim - 1");
    if (!sigma.isApprox(sigma.transpose(), 1e-9))
        throw DomainError("inverse_wishart_logpdf: sigma not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt_s(sigma);
    if (llt_s.info() != Eigen::Success)
        throw DomainError("inverse_wishart_logpdf: sigma not positive definite");
    Eigen::LLT<Eigen::MatrixXd> llt_p(psi);
    if (llt_p.info() != Eigen::Success)
        throw DomainError("inverse_wishart_logpdf: psi not positive definite");

    const double logdet_s = 2.0 * llt_s.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double logdet_p = 2.0 * llt_p.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double tr = llt_s.solve(psi).trace();
    return 0.5 * nu * logdet_p - 0.5 * nu * d * std::log(2.0) - log_multivariate_gamma(d, 0.5 * nu) -
           0.5 * (nu + d + 1.0) * logdet_s - 0.5 * tr;
}

double uniform_categorical_logpmf(int k) {
    if (k < 2) throw DomainError("uniform_categorical_logpmf: K must be >= 2");
    return -std::log(static_cast<double>(k));
}

double smoothed_group_prob(double n_zs, double n_s, double alpha, int k) {
    if (!(alpha > 0.0)) throw DomainError("smoothed_group_prob: alpha must be positive");
    return (n_zs + alpha) / (n_s + k * alpha);
}

Value gaussian_logpdf_t(Value x, Value mu, Value sigma) {
    const Tensor& s = sigma.val();
    for (Index k = 0; k < s.size(); ++k)
        if (!(s[k] > 0.0)) throw DomainError("gaussian_logpdf_t: sigma must be positive");
    Value z = div(sub(x, mu), sigma);
    return sub(mul_const(square(z), -0.5) - 0.5 * kLogTwoPi, vlog(sigma));
}

Value gamma_logpdf_t(Value s, double kappa, double eta) {
    if (!(kappa > 0.0 && eta > 0.0))
        throw DomainError("gamma_logpdf_t: kappa, eta must be positive");
    const double norm = kappa * std::log(eta) - std::lgamma(kappa);
    return add_const(sub(mul_const(vlog(s), kappa - 1.0), mul_const(s, eta)), norm);
}

}  // namespace fairsvi
