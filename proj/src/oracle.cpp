#include "perdiff/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace perdiff::oracle {

std::vector<double> residual(const Problem& p, std::span<const double> y) {
  const std::size_t n = y.size();
  if (n != static_cast<std::size_t>(p.n)) {
    throw std::invalid_argument("residual: sequence length does not match the period");
  }
  std::vector<double> r(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double gt = p.g.eval(static_cast<double>(t), y[t]);
    r[t] = y[(t + 2) % n] + p.b * y[(t + 1) % n] + p.c * y[t] - gt;
  }
  return r;
}

double residual_sup(const Problem& p, std::span<const double> y) {
  double m = 0.0;
  for (double v : residual(p, y)) m = std::fmax(m, std::fabs(v));
  return m;
}

namespace {

using Vec = Eigen::VectorXd;

Vec to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

double sup(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd jacobian(const Problem& p, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd jac(n, n);
  std::vector<double> probe = y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = 1e-7 * (1.0 + std::fabs(y[i]));
    probe[i] = y[i] + step;
    const Vec plus = to_eigen(residual(p, probe));
    probe[i] = y[i] - step;
    const Vec minus = to_eigen(residual(p, probe));
    probe[i] = y[i];
    jac.col(i) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

}  // namespace

NewtonResult newton_solve(const Problem& p, std::span<const double> y0, double tol,
                          int max_iter) {
  NewtonResult out;
  out.y.assign(y0.begin(), y0.end());
  Vec r;
  try {
    r = to_eigen(residual(p, out.y));
  } catch (const ExprError& e) {
    out.status = NewtonResult::Status::DomainError;
    out.message = e.what();
    return out;
  }
  out.residual_sup = sup(r);

  for (out.iterations = 0; out.iterations <= max_iter; ++out.iterations) {
    if (out.residual_sup <= tol) {
      out.status = NewtonResult::Status::Converged;
      return out;
    }
    if (out.iterations == max_iter) break;

    Eigen::MatrixXd jac;
    try {
      jac = jacobian(p, out.y);
    } catch (const ExprError& e) {
      out.status = NewtonResult::Status::DomainError;
      out.message = e.what();
      return out;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      out.status = NewtonResult::Status::SingularJacobian;
      out.message = "singular Jacobian";
      return out;
    }
    const Vec step = lu.solve(-r);

    const double phi0 = 0.5 * r.squaredNorm();
    double lambda = 1.0;
    bool accepted = false;
    const Vec y = to_eigen(out.y);
    while (lambda >= 1e-10) {
      const std::vector<double> trial = to_std(y + lambda * step);
      try {
        const Vec rt = to_eigen(residual(p, trial));
        if (0.5 * rt.squaredNorm() <= (1.0 - 2e-4 * lambda) * phi0) {
          out.y = trial;
          r = rt;
          accepted = true;
          break;
        }
      } catch (const ExprError&) {
        // outside the domain of g: shorten the step
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      out.status = NewtonResult::Status::LineSearchFailed;
      out.message = "line search failed";
      return out;
    }
    out.residual_sup = sup(r);
  }
  out.status = NewtonResult::Status::MaxIterations;
  out.message = "maximum iterations exceeded";
  return out;
}

std::vector<ScalarPeriodic> multistart_search(const Problem& p, int n_starts, double box,
                                              std::uint64_t seed) {
  if (n_starts < 1) throw std::invalid_argument("multistart_search: n_starts must be >= 1");
  if (!(box > 0.0)) throw std::invalid_argument("multistart_search: box must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-box, box);
  std::vector<ScalarPeriodic> found;
  std::vector<double> start(static_cast<std::size_t>(p.n));
  for (int s = 0; s < n_starts; ++s) {
    for (double& v : start) v = uni(rng);
    const NewtonResult res = newton_solve(p, start);
    if (!res.converged()) continue;
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const ScalarPeriodic& f) {
      double d = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) d = std::fmax(d, std::fabs(f[i] - res.y[i]));
      return d <= 1e-6;
    });
    if (!duplicate) found.push_back(res.y);
  }
  std::sort(found.begin(), found.end());
  return found;
}

CrossCheck cross_check(const Problem& p, std::span<const double> y, double tol) {
  CrossCheck cc;
  try {
    cc.residual_sup = residual_sup(p, y);
  } catch (const ExprError&) {
    return cc;
  }
  const NewtonResult res = newton_solve(p, y, 1e-11, 50);
  if (!res.converged()) return cc;
  cc.refined = res.y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    cc.distance = std::fmax(cc.distance, std::fabs(res.y[i] - y[i]));
  }
  cc.verified = cc.residual_sup <= tol && cc.distance <= 1e-8;
  return cc;
}

}  // namespace perdiff::oracle
