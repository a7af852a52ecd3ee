#include "perdiff/ls_reduction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "perdiff/oracle.hpp"

namespace perdiff {

const char* to_string(SolverError::Kind kind) {
  switch (kind) {
    case SolverError::Kind::NonConvergence:
      return "non_convergence";
    case SolverError::Kind::NoSignChange:
      return "no_sign_change";
    case SolverError::Kind::NoRoot:
      return "no_root";
    case SolverError::Kind::DomainError:
      return "domain_error";
    case SolverError::Kind::WrongRegime:
      return "wrong_regime";
    case SolverError::Kind::DegenerateBoundary:
      return "degenerate_boundary";
  }
  return "unknown";
}

PeriodicSequence apply_F(const Problem& p, const PeriodicSequence& x) {
  PeriodicSequence out(x.period());
  const auto n = static_cast<std::int64_t>(x.period());
  for (std::int64_t t = 0; t < n; ++t) {
    try {
      out[t] = {0.0, p.g.eval(static_cast<double>(t), x[t].u)};
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " at t=" + std::to_string(t));
    }
  }
  return out;
}

namespace {

constexpr double kLambdaFloor = 1.0 / 1024.0;

bool fp_converged(double residual, const PeriodicSequence& x, double tol) {
  return residual <= tol * std::fmax(1.0, x.sup_norm());
}

Eigen::VectorXd flatten(const PeriodicSequence& x) {
  Eigen::VectorXd v(2 * static_cast<Eigen::Index>(x.period()));
  for (std::size_t t = 0; t < x.period(); ++t) {
    v(2 * t) = x.values()[t].u;
    v(2 * t + 1) = x.values()[t].v;
  }
  return v;
}

PeriodicSequence unflatten(const Eigen::VectorXd& v) {
  PeriodicSequence x(static_cast<std::size_t>(v.size() / 2));
  for (Eigen::Index t = 0; t < v.size() / 2; ++t) x[t] = {v(2 * t), v(2 * t + 1)};
  return x;
}

}  // namespace

FixedPointResult solve_fixed_point(
    const std::function<PeriodicSequence(const PeriodicSequence&)>& map, PeriodicSequence x0,
    const InnerOptions& opts) {
  FixedPointResult res;
  res.x = std::move(x0);
  PeriodicSequence tx = map(res.x);
  res.residual = sup_distance(res.x, tx);
  if (opts.observer) opts.observer(res.x);

  const int picard_budget = std::max(1, opts.max_iter / 2);
  double lambda = 1.0;
  double window_start = res.residual;
  while (!fp_converged(res.residual, res.x, opts.tol) && res.picard_iterations < picard_budget) {
    PeriodicSequence cand = (1.0 - lambda) * res.x + lambda * tx;
    bool improved = false;
    try {
      PeriodicSequence tc = map(cand);
      const double rc = sup_distance(cand, tc);
      if (rc < res.residual) {
        res.x = std::move(cand);
        tx = std::move(tc);
        res.residual = rc;
        improved = true;
      }
    } catch (const DomainError&) {
      // treated like a residual increase
    }
    if (!improved) {
      lambda *= 0.5;
      if (lambda < kLambdaFloor) break;
      continue;
    }
    ++res.picard_iterations;
    if (opts.observer) opts.observer(res.x);
    // Slow linear convergence counts as a stall.
    if (res.picard_iterations % 25 == 0) {
      if (res.residual > 0.5 * window_start) break;
      window_start = res.residual;
    }
  }
  if (fp_converged(res.residual, res.x, opts.tol)) return res;

  // Finite-difference Newton on R(x) = x - T(x) over R^{2N}.
  auto residual_vec = [&](const Eigen::VectorXd& z) {
    const PeriodicSequence xs = unflatten(z);
    return Eigen::VectorXd(z - flatten(map(xs)));
  };
  Eigen::VectorXd z = flatten(res.x);
  Eigen::VectorXd rz = z - flatten(tx);
  const int newton_budget = std::clamp(opts.max_iter - res.picard_iterations, 20, 100);
  for (int it = 0; it < newton_budget; ++it) {
    const Eigen::Index m = z.size();
    Eigen::MatrixXd jac(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double h = 1e-7 * (1.0 + std::fabs(z(i)));
      Eigen::VectorXd zp = z;
      Eigen::VectorXd zm = z;
      zp(i) += h;
      zm(i) -= h;
      jac.col(i) = (residual_vec(zp) - residual_vec(zm)) / (2.0 * h);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const Eigen::VectorXd step = lu.solve(-rz);
    if (!step.allFinite()) break;

    double t = 1.0;
    bool accepted = false;
    const double r0 = rz.cwiseAbs().maxCoeff();
    while (t >= 1e-8) {
      try {
        const Eigen::VectorXd zt = z + t * step;
        const Eigen::VectorXd rt = residual_vec(zt);
        if (rt.cwiseAbs().maxCoeff() < r0) {
          z = zt;
          rz = rt;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      t *= 0.5;
    }
    if (!accepted) break;
    ++res.newton_iterations;
    res.x = unflatten(z);
    res.residual = rz.cwiseAbs().maxCoeff();
    if (opts.observer) opts.observer(res.x);
    if (fp_converged(res.residual, res.x, opts.tol)) return res;
  }
  throw SolverError(SolverError::Kind::NonConvergence,
                    "fixed-point iteration did not converge (residual " +
                        std::to_string(res.residual) + ")",
                    res.residual);
}

BifurcationMap::BifurcationMap(const Problem& p, const LinearData& ld, InnerOptions opts)
    : p_(&p), ld_(&ld), opts_(std::move(opts)) {
  if (ld.cls.dim < 1) {
    throw SolverError(SolverError::Kind::WrongRegime,
                      "bifurcation map needs a nontrivial kernel");
  }
  if (!(opts_.tol > 0.0)) throw std::invalid_argument("inner tolerance must be positive");
}

PeriodicSequence BifurcationMap::kernel_element(const KernelCoords& alpha) const {
  const auto& basis = ld_->cls.kernel_basis;
  PeriodicSequence k = alpha.u * basis[0];
  if (basis.size() > 1) k += alpha.v * basis[1];
  return k;
}

FixedPointResult BifurcationMap::aux_solve(const KernelCoords& alpha) const {
  const PeriodicSequence k = kernel_element(alpha);
  auto map = [&](const PeriodicSequence& x) { return mp_iq(*ld_, apply_F(*p_, k + x)); };
  try {
    return solve_fixed_point(map, PeriodicSequence(k.period()), opts_);
  } catch (const DomainError& e) {
    throw SolverError(SolverError::Kind::DomainError, e.what());
  }
}

PeriodicSequence BifurcationMap::assemble(const KernelCoords& alpha,
                                          const PeriodicSequence& aux) const {
  return kernel_element(alpha) + aux;
}

KernelCoords BifurcationMap::value_at(const KernelCoords& alpha,
                                      const PeriodicSequence& aux) const {
  const PeriodicSequence fx = apply_F(*p_, assemble(alpha, aux));
  const auto& adj = ld_->cls.adjoint_basis;
  const auto n = static_cast<std::int64_t>(fx.period());
  double out[2] = {0.0, 0.0};
  for (std::size_t j = 0; j < adj.size(); ++j) {
    for (std::int64_t i = 0; i < n; ++i) out[j] += dot(adj[j][i + 1], fx[i]);
  }
  return {out[0], out[1]};
}

KernelCoords BifurcationMap::value(const KernelCoords& alpha) const {
  const FixedPointResult aux = aux_solve(alpha);
  try {
    return value_at(alpha, aux.x);
  } catch (const DomainError& e) {
    throw SolverError(SolverError::Kind::DomainError, e.what());
  }
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.u * b.v - a.v * b.u; }

struct WindingWalker {
  const PlanarMap& f;
  double radius;
  double floor;
  int evaluations = 0;
  double min_magnitude = 0.0;

  Vec2 eval(double phi) {
    const Vec2 val = f({radius * std::cos(phi), radius * std::sin(phi)});
    ++evaluations;
    const double mag = norm(val);
    min_magnitude = std::fmin(min_magnitude, mag);
    if (!(mag >= floor)) {
      throw SolverError(SolverError::Kind::DegenerateBoundary,
                        "planar map vanishes on the circle; degree undefined at this radius");
    }
    return val;
  }

  double arc(double pa, const Vec2& fa, double pb, const Vec2& fb, int depth) {
    const double swept = std::atan2(cross(fa, fb), dot(fa, fb));
    if (std::fabs(swept) < 0.5 * std::numbers::pi) return swept;
    if (depth > 30) {
      throw SolverError(SolverError::Kind::DegenerateBoundary,
                        "winding refinement did not resolve an arc");
    }
    const double pm = 0.5 * (pa + pb);
    const Vec2 fm = eval(pm);
    return arc(pa, fa, pm, fm, depth + 1) + arc(pm, fm, pb, fb, depth + 1);
  }
};

}  // namespace

WindingResult winding_number(const PlanarMap& f, double radius, int samples) {
  if (!(radius > 0.0)) throw std::invalid_argument("winding_number: radius must be positive");
  if (samples < 8) throw std::invalid_argument("winding_number: at least 8 samples required");

  std::vector<double> phis(static_cast<std::size_t>(samples));
  std::vector<Vec2> vals(phis.size());
  double scale = 0.0;
  for (int k = 0; k < samples; ++k) {
    phis[k] = 2.0 * std::numbers::pi * k / samples;
    vals[k] = f({radius * std::cos(phis[k]), radius * std::sin(phis[k])});
    scale = std::fmax(scale, norm(vals[k]));
  }
  WindingWalker walker{f, radius, 1e-8 * scale, samples, scale};
  for (const auto& v : vals) {
    walker.min_magnitude = std::fmin(walker.min_magnitude, norm(v));
    if (!(norm(v) >= walker.floor) || scale == 0.0) {
      throw SolverError(SolverError::Kind::DegenerateBoundary,
                        "planar map vanishes on the circle; degree undefined at this radius");
    }
  }
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const int next = (k + 1) % samples;
    const double pb = next == 0 ? 2.0 * std::numbers::pi : phis[next];
    total += walker.arc(phis[k], vals[k], pb, vals[next], 0);
  }
  WindingResult out;
  out.winding = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
  out.evaluations = walker.evaluations;
  out.min_magnitude = walker.min_magnitude;
  return out;
}

int winding_number(const BifurcationMap& bm, double radius, int samples) {
  if (bm.dim() != 2) {
    throw SolverError(SolverError::Kind::WrongRegime, "winding number needs a 2D kernel");
  }
  return winding_number([&](const Vec2& a) { return bm.value(a); }, radius, samples).winding;
}

namespace {

bool zero_is_equilibrium(const Problem& p) {
  for (int t = 0; t < p.n; ++t) {
    try {
      if (p.g.eval(t, 0.0) != 0.0) return false;
    } catch (const ExprError&) {
      return false;
    }
  }
  return true;
}

double sup_abs(const std::vector<double>& y) {
  double m = 0.0;
  for (double v : y) m = std::fmax(m, std::fabs(v));
  return m;
}

// Polish with the oracle's Newton, recompute the residual from scratch, and let the
// oracle decide the verified flag.
void finalize(SolveReport& rep, const Problem& p, const PeriodicSequence& x, double tol) {
  std::vector<double> y = x.first_components();
  rep.pre_polish_residual = oracle::residual_sup(p, y);
  const oracle::NewtonResult pol = oracle::newton_solve(p, y, 1e-13, 20);
  if (!pol.y.empty() && pol.residual_sup < rep.pre_polish_residual) {
    double dist = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dist = std::fmax(dist, std::fabs(pol.y[i] - y[i]));
    if (dist <= 1e-6) y = pol.y;
  }
  rep.y = y;
  rep.solution = PeriodicSequence::from_scalar(y);
  rep.residual_sup = oracle::residual_sup(p, y);
  rep.oracle_verified = oracle::cross_check(p, y, 1e-9).verified;
  if (!(rep.residual_sup <= tol)) {
    throw SolverError(SolverError::Kind::NonConvergence,
                      "assembled solution misses the tolerance (residual " +
                          std::to_string(rep.residual_sup) + ")",
                      rep.residual_sup);
  }
}

}  // namespace

SolveReport solve_nonresonant(const Problem& p, double tol, int max_iter) {
  const LinearData ld = build_linear_data(p);
  if (ld.cls.dim != 0) {
    throw SolverError(SolverError::Kind::WrongRegime, "solve_nonresonant needs a trivial kernel");
  }
  InnerOptions opts;
  opts.max_iter = max_iter;
  auto map = [&](const PeriodicSequence& x) { return mp_iq(ld, apply_F(p, x)); };
  FixedPointResult fp;
  try {
    fp = solve_fixed_point(map, PeriodicSequence(static_cast<std::size_t>(p.n)), opts);
  } catch (const DomainError& e) {
    throw SolverError(SolverError::Kind::DomainError, e.what());
  }
  SolveReport rep;
  rep.regime = 0;
  rep.iterations.outer = 1;
  rep.iterations.inner_picard = fp.picard_iterations;
  rep.iterations.inner_newton = fp.newton_iterations;
  finalize(rep, p, fp.x, tol);
  return rep;
}

SolveReport solve_1d(const Problem& p, double r, double tol) {
  if (!(r > 0.0)) throw std::invalid_argument("solve_1d: r must be positive");
  const LinearData ld = build_linear_data(p);
  if (ld.cls.dim != 1) {
    throw SolverError(SolverError::Kind::WrongRegime, "solve_1d needs a one-dimensional kernel");
  }
  const BifurcationMap bm(p, ld);
  SolveReport rep;
  rep.regime = 1;
  rep.radius = r;

  auto f = [&](double a) {
    ++rep.iterations.map_evaluations;
    const FixedPointResult aux = bm.aux_solve({a, 0.0});
    rep.iterations.inner_picard += aux.picard_iterations;
    rep.iterations.inner_newton += aux.newton_iterations;
    return bm.value_at({a, 0.0}, aux.x).u;
  };
  auto bisect = [&](double lo, double hi, double flo) {
    const double width = 1e-12 * r;
    while (hi - lo > width) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      ++rep.iterations.outer;
      if (fm == 0.0) return mid;
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  const double f_plus = f(r);
  const double f_minus = f(-r);
  if (f_plus != 0.0 && f_minus != 0.0 && (f_plus > 0.0) == (f_minus > 0.0)) {
    throw SolverError(SolverError::Kind::NoSignChange,
                      "bifurcation values at +r and -r have the same sign; the existence "
                      "hypotheses are likely violated");
  }
  rep.degree_evidence = true;
  const double alpha = f_plus == 0.0 ? r : (f_minus == 0.0 ? -r : bisect(-r, r, f_minus));
  rep.alpha = {alpha, 0.0};
  const FixedPointResult aux = bm.aux_solve(rep.alpha);
  finalize(rep, p, bm.assemble(rep.alpha, aux.x), tol);

  if (zero_is_equilibrium(p)) {
    rep.nontrivial_found = false;
    if (sup_abs(rep.y) <= 1e-9) {
      // Scan for sign changes that do not bracket alpha = 0.
      constexpr int kScan = 40;
      double prev_a = -r;
      double prev_f = f_minus;
      for (int k = 1; k <= kScan && !*rep.nontrivial_found; ++k) {
        const double a = -r + 2.0 * r * k / kScan;
        const double fa = k == kScan ? f_plus : f(a);
        const bool brackets_zero = prev_a < 0.0 && a > 0.0;
        if (!brackets_zero && prev_f != 0.0 && fa != 0.0 && (prev_f > 0.0) != (fa > 0.0)) {
          const double root = bisect(prev_a, a, prev_f);
          const FixedPointResult other = bm.aux_solve({root, 0.0});
          const std::vector<double> y = bm.assemble({root, 0.0}, other.x).first_components();
          if (sup_abs(y) > 1e-6) {
            rep.nontrivial_found = true;
            rep.nontrivial_y = y;
          }
        }
        prev_a = a;
        prev_f = fa;
      }
    } else {
      rep.nontrivial_found = true;
      rep.nontrivial_y = rep.y;
    }
  }
  return rep;
}

double default_radius_2d(const Problem& p, const LinearData& ld) {
  double z_est = 0.0;
  double k_est = 0.0;
  for (int t = 0; t < p.n; ++t) {
    for (int k = -400; k <= 400; ++k) {
      const double x = 0.25 * k;
      double gx = 0.0;
      try {
        gx = p.g.eval(t, x);
      } catch (const ExprError&) {
        continue;
      }
      k_est = std::fmax(k_est, std::fabs(gx));
      if (x * gx <= 0.0) z_est = std::fmax(z_est, std::fabs(x));
    }
  }
  const double upper = norm_bound_mp_iq(ld, 1).upper;
  return 10.0 * (z_est + upper * k_est);
}

namespace {

Vec2 counted_value(const BifurcationMap& bm, const Vec2& alpha, SolveReport::Counters& ctr) {
  const FixedPointResult aux = bm.aux_solve(alpha);
  ++ctr.map_evaluations;
  ctr.inner_picard += aux.picard_iterations;
  ctr.inner_newton += aux.newton_iterations;
  return bm.value_at(alpha, aux.x);
}

std::optional<Vec2> newton_2d(const BifurcationMap& bm, Vec2 alpha, double tol,
                              SolveReport::Counters& ctr) {
  auto f = [&](const Vec2& a) { return counted_value(bm, a, ctr); };
  try {
    Vec2 fv = f(alpha);
    for (int it = 0; it < 60; ++it) {
      if (norm(fv) <= tol) return alpha;
      const double h = 1e-6 * (1.0 + norm(alpha));
      const Vec2 c0 = (1.0 / (2.0 * h)) * (f(alpha + Vec2{h, 0.0}) - f(alpha - Vec2{h, 0.0}));
      const Vec2 c1 = (1.0 / (2.0 * h)) * (f(alpha + Vec2{0.0, h}) - f(alpha - Vec2{0.0, h}));
      const Mat2 jac = Mat2::from_columns(c0, c1);
      if (jac.det() == 0.0 || !std::isfinite(jac.det())) return std::nullopt;
      const Vec2 step = -(inverse2(jac) * fv);
      double t = 1.0;
      bool accepted = false;
      while (t >= 1e-8) {
        const Vec2 trial = alpha + t * step;
        const Vec2 ft = f(trial);
        if (norm(ft) < norm(fv)) {
          alpha = trial;
          fv = ft;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) return norm(fv) <= tol ? std::optional<Vec2>(alpha) : std::nullopt;
    }
    return norm(fv) <= tol ? std::optional<Vec2>(alpha) : std::nullopt;
  } catch (const SolverError&) {
    return std::nullopt;
  }
}

}  // namespace

SolveReport solve_2d(const Problem& p, double radius, int grid, double tol) {
  if (grid < 1) throw std::invalid_argument("solve_2d: grid must be >= 1");
  const LinearData ld = build_linear_data(p);
  if (ld.cls.dim != 2) {
    throw SolverError(SolverError::Kind::WrongRegime, "solve_2d needs a two-dimensional kernel");
  }
  const BifurcationMap bm(p, ld);
  SolveReport rep;
  rep.regime = 2;
  if (!(radius > 0.0)) {
    radius = default_radius_2d(p, ld);
    rep.notes.push_back("radius chosen by the default heuristic");
  }
  rep.radius = radius;

  try {
    const WindingResult w = winding_number(
        [&](const Vec2& a) { return counted_value(bm, a, rep.iterations); }, radius, 64);
    rep.winding = w.winding;
    rep.degree_evidence = w.winding != 0;
    if (w.winding == 0) rep.notes.push_back("winding number 0: no degree evidence at this radius");
  } catch (const SolverError& e) {
    rep.notes.push_back(std::string("winding number unavailable: ") + e.what());
  }

  std::vector<Vec2> seeds;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double sx = grid == 1 ? 0.0 : -radius + 2.0 * radius * i / (grid - 1);
      const double sy = grid == 1 ? 0.0 : -radius + 2.0 * radius * j / (grid - 1);
      if (std::hypot(sx, sy) <= radius * (1.0 + 1e-12)) seeds.push_back({sx, sy});
    }
  }
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Vec2& a, const Vec2& b) { return norm(a) < norm(b); });

  const bool trivial_possible = zero_is_equilibrium(p);
  std::optional<SolveReport> accepted;
  for (const Vec2& seed : seeds) {
    ++rep.iterations.outer;
    const auto root = newton_2d(bm, seed, tol, rep.iterations);
    if (!root) continue;
    SolveReport cand = rep;
    cand.alpha = *root;
    try {
      const FixedPointResult aux = bm.aux_solve(*root);
      finalize(cand, p, bm.assemble(*root, aux.x), tol);
    } catch (const SolverError&) {
      continue;
    }
    if (!accepted) {
      accepted = cand;
      if (!trivial_possible) break;
      accepted->nontrivial_found = sup_abs(cand.y) > 1e-9;
      if (*accepted->nontrivial_found) {
        accepted->nontrivial_y = cand.y;
        break;
      }
    } else if (sup_abs(cand.y) > 1e-6) {
      accepted->nontrivial_found = true;
      accepted->nontrivial_y = cand.y;
      break;
    }
  }
  if (!accepted) {
    throw SolverError(SolverError::Kind::NoRoot, "no seed converged to a root of the bifurcation map");
  }
  accepted->iterations = rep.iterations;
  return *accepted;
}

SolveReport solve(const Problem& p, const SolveOptions& opts) {
  switch (classify(p).dim) {
    case 0:
      return solve_nonresonant(p, opts.tol);
    case 1:
      return solve_1d(p, opts.r, opts.tol);
    default:
      return solve_2d(p, opts.radius, opts.grid, opts.tol);
  }
}

ReducedResiduals reduced_residuals(const Problem& p, const LinearData& ld,
                                   const PeriodicSequence& x) {
  const PeriodicSequence fx = apply_F(p, x);
  ReducedResiduals rr;
  rr.auxiliary = (x - proj_P(ld, x) - mp_iq(ld, fx)).sup_norm();
  rr.bifurcation = proj_Q(ld, fx).sup_norm();
  return rr;
}

}  // namespace perdiff
