#include "perdiff/linear_theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace perdiff {

Problem make_problem(double b, double c, int n, Expr g) {
  if (!std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument("coefficients b and c must be finite");
  }
  if (c == 0.0) {
    throw std::invalid_argument("c must be nonzero");
  }
  if (n < 2) {
    throw std::invalid_argument("period N must be at least 2, got " + std::to_string(n));
  }
  if (g.empty()) {
    throw std::invalid_argument("nonlinearity g is missing");
  }
  return Problem{b, c, n, std::move(g)};
}

PeriodicSequence PeriodicSequence::from_scalar(std::span<const double> y) {
  const std::size_t n = y.size();
  PeriodicSequence x(n);
  for (std::size_t t = 0; t < n; ++t) {
    x.values_[t] = {y[t], y[(t + 1) % n]};
  }
  return x;
}

double PeriodicSequence::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::fmax(m, norm(v));
  return m;
}

std::vector<double> PeriodicSequence::first_components() const {
  std::vector<double> y(values_.size());
  std::transform(values_.begin(), values_.end(), y.begin(), [](const Vec2& v) { return v.u; });
  return y;
}

bool PeriodicSequence::finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const Vec2& v) { return std::isfinite(v.u) && std::isfinite(v.v); });
}

PeriodicSequence& PeriodicSequence::operator+=(const PeriodicSequence& o) {
  if (o.period() != period()) throw std::invalid_argument("period mismatch");
  for (std::size_t t = 0; t < values_.size(); ++t) values_[t] += o.values_[t];
  return *this;
}

PeriodicSequence& PeriodicSequence::operator-=(const PeriodicSequence& o) {
  if (o.period() != period()) throw std::invalid_argument("period mismatch");
  for (std::size_t t = 0; t < values_.size(); ++t) values_[t] -= o.values_[t];
  return *this;
}

PeriodicSequence& PeriodicSequence::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

double sup_distance(const PeriodicSequence& a, const PeriodicSequence& b) {
  return (a - b).sup_norm();
}

double inner(const PeriodicSequence& a, const PeriodicSequence& b) {
  if (a.period() != b.period()) throw std::invalid_argument("period mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < a.period(); ++t) s += dot(a.values()[t], b.values()[t]);
  return s;
}

Mat2 companion(double b, double c) {
  if (c == 0.0) throw std::invalid_argument("companion: c must be nonzero");
  return {0.0, 1.0, -c, -b};
}

namespace {

// Relative test for the 1 + b + c = 0 special case.
bool unit_root_at_one(double b, double c) {
  return std::fabs(1.0 + b + c) <= 1e-9 * (1.0 + std::fabs(b) + std::fabs(c));
}

bool trigonometric_case(double b, double c) {
  return std::fabs(c - 1.0) <= 1e-12 && std::fabs(b) < 2.0;
}

ResonanceClass classify_from(const std::vector<Mat2>& a_pows,
                             const std::vector<Mat2>& gamma, double b, double c, int n) {
  ResonanceClass rc;
  const Mat2 resolvent = Mat2::identity() - a_pows[n];
  rc.dim = 2 - rank2(resolvent);

  if (rc.dim == 1) {
    if (unit_root_at_one(b, c)) {
      rc.kernel_coords = Mat2::from_columns({1.0, 1.0}, {});
      rc.adjoint_coords = Mat2::from_columns({-c, 1.0}, {});
    } else {
      const Svd2 sv = svd2(resolvent);
      rc.kernel_coords = Mat2::from_columns(sv.v_min, {});
      rc.adjoint_coords = Mat2::from_columns(sv.u_min, {});
    }
  } else if (rc.dim == 2) {
    if (trigonometric_case(b, c)) {
      const double th = std::acos(-b / 2.0);
      rc.theta = th;
      rc.r_int = static_cast<int>(std::lround(n * th / (2.0 * std::numbers::pi)));
      rc.kernel_coords = {1.0, 0.0, std::cos(th), std::sin(th)};
      rc.adjoint_coords = {-1.0, 0.0, std::cos(th), -std::sin(th)};
    } else {
      rc.kernel_coords = Mat2::identity();
      rc.adjoint_coords = Mat2::identity();
    }
  }

  for (int j = 0; j < rc.dim; ++j) {
    PeriodicSequence k(static_cast<std::size_t>(n));
    PeriodicSequence z(static_cast<std::size_t>(n));
    const Vec2 kc = rc.kernel_coords.col(j);
    const Vec2 zc = rc.adjoint_coords.col(j);
    for (int t = 0; t < n; ++t) {
      k[t] = a_pows[t] * kc;
      z[t] = gamma[t] * zc;
    }
    rc.kernel_basis.push_back(std::move(k));
    rc.adjoint_basis.push_back(std::move(z));
  }
  return rc;
}

}  // namespace

LinearData build_linear_data(const Problem& p) {
  LinearData ld;
  ld.n = p.n;
  ld.b = p.b;
  ld.c = p.c;
  ld.a = companion(p.b, p.c);

  const Mat2 a_inv_t = inverse2(ld.a).transposed();
  ld.a_pows.reserve(p.n + 1);
  ld.gamma.reserve(p.n + 1);
  ld.a_pows.push_back(Mat2::identity());
  ld.gamma.push_back(Mat2::identity());
  for (int t = 0; t < p.n; ++t) {
    ld.a_pows.push_back(ld.a_pows.back() * ld.a);
    ld.gamma.push_back(a_inv_t * ld.gamma.back());
  }
  ld.monodromy = ld.a_pows[p.n];

  const Mat2 resolvent = Mat2::identity() - ld.monodromy;
  ld.v = kernel_projector(resolvent);
  ld.v_adjoint = kernel_projector(resolvent.transposed());
  ld.resolvent_pinv = pinv2(resolvent);

  Mat2 gram;
  ld.w_table.reserve(p.n);
  for (int t = 0; t < p.n; ++t) {
    ld.w_table.push_back(ld.gamma[t + 1] * ld.v_adjoint);
    gram += ld.w_table.back().transposed() * ld.w_table.back();
  }
  ld.gram_inv = pinv2(gram);
  ld.cls = classify_from(ld.a_pows, ld.gamma, p.b, p.c, p.n);
  return ld;
}

ResonanceClass classify(const Problem& p) { return build_linear_data(p).cls; }

PeriodicSequence apply_L(const LinearData& ld, const PeriodicSequence& x) {
  const auto n = static_cast<std::int64_t>(x.period());
  PeriodicSequence out(x.period());
  for (std::int64_t t = 0; t < n; ++t) {
    out[t] = x[t + 1] - ld.a * x[t];
  }
  return out;
}

std::vector<double> image_test(const LinearData& ld, const PeriodicSequence& h) {
  std::vector<double> out;
  const auto n = static_cast<std::int64_t>(h.period());
  for (const auto& z : ld.cls.adjoint_basis) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += dot(z[i + 1], h[i]);
    out.push_back(s);
  }
  return out;
}

bool in_image(const LinearData& ld, const PeriodicSequence& h) {
  const double tol = image_tolerance(h);
  const auto vals = image_test(ld, h);
  return std::all_of(vals.begin(), vals.end(), [tol](double v) { return std::fabs(v) <= tol; });
}

PeriodicSequence proj_P(const LinearData& ld, const PeriodicSequence& x) {
  PeriodicSequence out(x.period());
  const Vec2 base = ld.v * x[0];
  for (std::size_t t = 0; t < x.period(); ++t) {
    out[static_cast<std::int64_t>(t)] = ld.a_pows[t] * base;
  }
  return out;
}

PeriodicSequence proj_Q(const LinearData& ld, const PeriodicSequence& h) {
  const auto n = static_cast<std::int64_t>(h.period());
  Vec2 pairing;
  for (std::int64_t i = 0; i < n; ++i) pairing += ld.w_table[i].transposed() * h[i];
  const Vec2 coeff = ld.gram_inv * pairing;
  PeriodicSequence out(h.period());
  for (std::int64_t t = 0; t < n; ++t) out[t] = ld.w_table[t] * coeff;
  return out;
}

namespace {

PeriodicSequence roll_forward(const LinearData& ld, const PeriodicSequence& h) {
  const auto n = static_cast<std::int64_t>(h.period());
  // A^n sum_i A^{-(i+1)} h(i) = sum_i A^{n-1-i} h(i), accumulated without inverses.
  Vec2 s;
  for (std::int64_t i = 0; i < n; ++i) s = ld.a * s + h[i];
  PeriodicSequence x(h.period());
  x[0] = ld.resolvent_pinv * s;
  for (std::int64_t t = 0; t + 1 < n; ++t) x[t + 1] = ld.a * x[t] + h[t];
  return x;
}

}  // namespace

PeriodicSequence mp_solve(const LinearData& ld, const PeriodicSequence& h) {
  if (!in_image(ld, h)) {
    throw std::domain_error("mp_solve: right-hand side is not in the image of L");
  }
  return roll_forward(ld, h);
}

PeriodicSequence mp_iq(const LinearData& ld, const PeriodicSequence& h) {
  return roll_forward(ld, h - proj_Q(ld, h));
}

std::vector<Mat2> mp_iq_blocks(const LinearData& ld) {
  const int n = ld.n;
  std::vector<Mat2> blocks(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    PeriodicSequence col0(static_cast<std::size_t>(n));
    PeriodicSequence col1(static_cast<std::size_t>(n));
    col0[i] = {1.0, 0.0};
    col1[i] = {0.0, 1.0};
    const PeriodicSequence out0 = mp_iq(ld, col0);
    const PeriodicSequence out1 = mp_iq(ld, col1);
    for (int t = 0; t < n; ++t) {
      blocks[static_cast<std::size_t>(t) * n + i] = Mat2::from_columns(out0[t], out1[t]);
    }
  }
  return blocks;
}

NormBound norm_bound_mp_iq(const LinearData& ld, int mc_samples, std::uint64_t seed) {
  if (mc_samples < 1) throw std::invalid_argument("norm_bound_mp_iq: mc_samples must be >= 1");
  const int n = ld.n;
  const auto blocks = mp_iq_blocks(ld);
  auto block = [&](int t, int i) -> const Mat2& {
    return blocks[static_cast<std::size_t>(t) * n + i];
  };

  NormBound nb;
  for (int t = 0; t < n; ++t) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) row += svals2(block(t, i)).max;
    nb.upper = std::fmax(nb.upper, row);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<Vec2> h(static_cast<std::size_t>(n));
  for (int s = 0; s < mc_samples; ++s) {
    // Odd samples align every h(i) with one randomly chosen output row.
    const bool aligned = (s % 2) == 1;
    const int t_star = pick(rng);
    const double phi = angle(rng);
    const Vec2 dir{std::cos(phi), std::sin(phi)};
    for (int i = 0; i < n; ++i) {
      Vec2 hi;
      if (aligned) {
        hi = block(t_star, i).transposed() * dir;
      }
      const double len = norm(hi);
      if (len > 0.0) {
        hi *= 1.0 / len;
      } else {
        const double a = angle(rng);
        hi = {std::cos(a), std::sin(a)};
      }
      h[i] = hi;
    }
    for (int t = 0; t < n; ++t) {
      Vec2 out;
      for (int i = 0; i < n; ++i) out += block(t, i) * h[i];
      nb.lower = std::fmax(nb.lower, norm(out));
    }
  }
  return nb;
}

}  // namespace perdiff
