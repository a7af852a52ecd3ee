#include "perdiff/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace perdiff {

bool CheckReport::overall() const {
  return !conditions.empty() &&
         std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionVerdict& c) { return c.pass; });
}

namespace {

constexpr double kInflate = 1.05;
constexpr double kDeflate = 0.95;
constexpr int kProbePoints = 41;

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(lo + (hi - lo) * k / (count - 1));
  return out;
}

bool agree(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::fmax(1.0, std::fabs(a)); }

void require_odd_period(const Problem& p) {
  if (p.n <= 1 || p.n % 2 == 0) {
    throw HypothesisError("the existence theorems need an odd period N > 1, got N = " +
                          std::to_string(p.n));
  }
}

ConditionVerdict periodicity_verdict(const Problem& p, double range) {
  ConditionVerdict v{"periodic_in_t", false, true, ""};
  try {
    v.pass = periodic_in_t(p, range);
    if (!v.pass) v.note = "g(t, x) differs from g(t + N, x) on the probe grid";
  } catch (const ExprError& e) {
    v.note = e.what();
  }
  return v;
}

}  // namespace

double rational_tolerance(long long denominator) {
  const double j = static_cast<double>(denominator);
  return std::fmin(1e-12, std::fmax(1e-15, 1e-3 / (j * j)));
}

bool periodic_in_t(const Problem& p, double probe_range) {
  for (double x : linspace(-probe_range, probe_range, kProbePoints)) {
    for (int t = 0; t < p.n; ++t) {
      if (!agree(p.g.eval(t, x), p.g.eval(t + p.n, x))) return false;
    }
  }
  return true;
}

bool independent_of_t(const Problem& p, double probe_range) {
  for (double x : linspace(-probe_range, probe_range, kProbePoints)) {
    const double g0 = p.g.eval(0.0, x);
    for (int t = 1; t < p.n; ++t) {
      if (!agree(g0, p.g.eval(t, x))) return false;
    }
  }
  return true;
}

CheckReport check_thm1(const Problem& p, double r, double zhat, int grid) {
  require_odd_period(p);
  if (!(r > 0.0) || !(zhat > 0.0)) throw HypothesisError("r and zhat must be positive");
  if (grid < 2) throw HypothesisError("grid must be at least 2");

  CheckReport rep;
  rep.theorem = "thm1";
  rep.quantities["r"] = r;
  rep.quantities["zhat"] = zhat;
  rep.sampling["grid"] = grid;
  rep.sampling["c1_x_lo"] = -2.0 * r;
  rep.sampling["c1_x_hi"] = 2.0 * r;
  rep.sampling["c2_x_lo"] = zhat;
  rep.sampling["c2_x_hi"] = 4.0 * r;
  rep.conditions.push_back(periodicity_verdict(p, 2.0 * r));

  ConditionVerdict c1{"C1", false, true, ""};
  double g_max = 0.0;
  try {
    for (double x : linspace(-2.0 * r, 2.0 * r, grid)) {
      for (int t = 0; t < p.n; ++t) g_max = std::fmax(g_max, std::fabs(p.g.eval(t, x)));
    }
    c1.pass = true;
  } catch (const ExprError& e) {
    c1.note = e.what();
  }
  const double delta = kInflate * g_max;
  rep.quantities["delta"] = delta;
  rep.conditions.push_back(c1);

  ConditionVerdict c2{"C2", true, true, ""};
  if (zhat < 4.0 * r) {
    try {
      for (int k = 1; k <= grid && c2.pass; ++k) {
        const double x = zhat + (4.0 * r - zhat) * k / grid;
        for (int t = 0; t < p.n; ++t) {
          if (!(x * p.g.eval(t, x) > 0.0) || !(-x * p.g.eval(t, -x) > 0.0)) {
            c2.pass = false;
            c2.note = "x g(t, x) <= 0 at |x| = " + std::to_string(x) + ", t = " + std::to_string(t);
            break;
          }
        }
      }
    } catch (const ExprError& e) {
      c2.pass = false;
      c2.note = e.what();
    }
  } else {
    c2.note = "sampling range (zhat, 4r] is empty";
  }
  rep.conditions.push_back(c2);

  const LinearData ld = build_linear_data(p);
  const NormBound nb = norm_bound_mp_iq(ld, 2000, 0);
  rep.quantities["norm_mp_iq_upper"] = nb.upper;
  rep.quantities["norm_mp_iq_lower"] = nb.lower;
  const double lhs = zhat + nb.upper * delta;
  rep.quantities["c3_lhs"] = lhs;
  ConditionVerdict c3{"C3", c1.pass && lhs < r, false, ""};
  if (!c3.pass) c3.note = "zhat + |M_p(I-Q)| delta >= r";
  rep.conditions.push_back(c3);

  ConditionVerdict c4{"C4", true, false, ""};
  if (std::fabs(p.b) <= 2.0) {
    const double th = std::acos(-p.b / 2.0);
    const double turns = p.n * th / (2.0 * std::numbers::pi);
    const bool multiple = std::fabs(turns - std::round(turns)) <= 1e-9;
    rep.quantities["theta"] = th;
    if (multiple) {
      c4.pass = std::fabs(p.c - 1.0) > 1e-12 || std::fabs(p.b) >= 2.0;
      if (!c4.pass) c4.note = "N arccos(-b/2) is a multiple of 2 pi with c = 1 and |b| < 2";
    }
  }
  rep.conditions.push_back(c4);
  return rep;
}

UMembership membership_U(double b, long long max_denominator) {
  if (!(std::fabs(b) < 2.0)) throw std::domain_error("membership_U: needs |b| < 2");
  if (max_denominator < 2) throw std::invalid_argument("membership_U: max_denominator must be >= 2");

  UMembership out;
  out.theta = std::acos(-b / 2.0);
  const double target = out.theta / (2.0 * std::numbers::pi);

  // Convergents h/k of the continued fraction of target.
  long long h_prev = 0, h = 1;
  long long k_prev = 1, k = 0;
  double rem = target;
  for (int step = 0; step < 64; ++step) {
    const double a = std::floor(rem);
    const auto ai = static_cast<long long>(a);
    const long long h_next = ai * h + h_prev;
    const long long k_next = ai * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
    if (k > max_denominator) break;
    if (std::fabs(target - static_cast<double>(h) / static_cast<double>(k)) <= rational_tolerance(k)) {
      if (0 <= 2 * h && 2 * h < k) {
        out.in_u = true;
        out.witness = std::make_pair(h, k);
      }
      return out;
    }
    const double frac = rem - a;
    if (frac <= 0.0) break;
    rem = 1.0 / frac;
  }
  return out;
}

CheckReport check_corollary(const Problem& p, double R, const std::vector<double>& r_schedule,
                            int grid) {
  if (!(R > 0.0)) throw HypothesisError("R must be positive");
  if (r_schedule.size() < 2) throw HypothesisError("r_schedule needs at least two radii");
  if (grid < 2) throw HypothesisError("grid must be at least 2");
  const double r_max = *std::max_element(r_schedule.begin(), r_schedule.end());
  if (!independent_of_t(p, std::fmax(2.0 * R, 10.0))) {
    throw HypothesisError("the corollary needs g independent of t");
  }
  auto h = [&](double x) { return p.g.eval(0.0, x); };

  CheckReport rep;
  rep.theorem = "cor";
  rep.quantities["R"] = R;
  rep.sampling["grid"] = grid;
  rep.series["r_schedule"] = r_schedule;

  ConditionVerdict c1{"C1*", false, true, "asymptotic condition checked on a finite schedule"};
  std::vector<double> ratios;
  try {
    for (double r : r_schedule) {
      double sup = 0.0;
      for (double x : linspace(-2.0 * r, 2.0 * r, grid)) sup = std::fmax(sup, std::fabs(h(x)));
      ratios.push_back(sup / r);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) decreasing = decreasing && ratios[i] < ratios[i - 1];
    c1.pass = decreasing && ratios.back() <= 0.5 * ratios.front();
  } catch (const ExprError& e) {
    c1.note = e.what();
  }
  rep.series["c1_ratio"] = ratios;
  rep.conditions.push_back(c1);

  ConditionVerdict c2{"C2*", true, true, ""};
  const double x_hi = std::fmax(4.0 * R, 2.0 * r_max);
  rep.sampling["c2_x_lo"] = R;
  rep.sampling["c2_x_hi"] = x_hi;
  try {
    // Geometric spacing reaches far out without an enormous grid.
    const double ratio = std::pow(x_hi / R, 1.0 / grid);
    double x = R;
    for (int k = 1; k <= grid; ++k) {
      x = k == grid ? x_hi : x * ratio;
      if (!(x * h(x) > 0.0) || !(-x * h(-x) > 0.0)) {
        c2.pass = false;
        c2.note = "x h(x) <= 0 at |x| = " + std::to_string(x);
        break;
      }
    }
  } catch (const ExprError& e) {
    c2.pass = false;
    c2.note = e.what();
  }
  rep.conditions.push_back(c2);

  ConditionVerdict c3{"C3*", true, false, ""};
  if (std::fabs(p.c - 1.0) > 1e-12) {
    c3.note = "c != 1";
  } else if (std::fabs(p.b) >= 2.0) {
    c3.note = "|b| >= 2, outside U";
  } else {
    const UMembership u = membership_U(p.b);
    c3.pass = !u.in_u;
    rep.quantities["theta"] = u.theta;
    if (u.witness) {
      rep.quantities["u_witness_k"] = static_cast<double>(u.witness->first);
      rep.quantities["u_witness_j"] = static_cast<double>(u.witness->second);
      c3.note = "b is in U";
    } else {
      c3.note = "b not in U up to denominator 1e6";
    }
  }
  rep.conditions.push_back(c3);
  return rep;
}

CheckReport check_thm2(const Problem& p, double zhat, int grid) {
  require_odd_period(p);
  if (!(zhat > 0.0)) throw HypothesisError("zhat must be positive");
  if (grid < 2) throw HypothesisError("grid must be at least 2");
  const LinearData ld = build_linear_data(p);
  if (ld.cls.dim != 2 || !ld.cls.r_int) {
    throw HypothesisError("the two-dimensional theorem needs c = 1, |b| < 2 and a 2D kernel");
  }

  const double x_hi = std::fmax(100.0, 100.0 * zhat);
  CheckReport rep;
  rep.theorem = "thm2";
  rep.quantities["zhat"] = zhat;
  rep.sampling["grid"] = grid;
  rep.sampling["x_hi"] = x_hi;
  rep.conditions.push_back(periodicity_verdict(p, x_hi));

  std::vector<double> xs = linspace(-x_hi, x_hi, grid);
  for (double far : {1e3, 1e6}) {
    xs.push_back(far);
    xs.push_back(-far);
  }

  ConditionVerdict c1{"C1", false, true, ""};
  double k_raw = 0.0;
  try {
    for (double x : xs) {
      for (int t = 0; t < p.n; ++t) k_raw = std::fmax(k_raw, std::fabs(p.g.eval(t, x)));
    }
    c1.pass = rep.conditions.front().pass;
  } catch (const ExprError& e) {
    c1.note = e.what();
  }
  const double big_k = kInflate * k_raw;
  rep.quantities["K_sampled"] = k_raw;
  rep.quantities["K"] = big_k;
  rep.conditions.push_back(c1);

  ConditionVerdict c2{"C2", false, true, ""};
  double j_raw = std::numeric_limits<double>::infinity();
  try {
    std::vector<double> pos = linspace(zhat, x_hi, grid);
    pos.push_back(1e3);
    pos.push_back(1e6);
    for (double x : pos) {
      for (int t = 0; t < p.n; ++t) {
        j_raw = std::fmin(j_raw, std::fmin(p.g.eval(t, x), -p.g.eval(t, -x)));
      }
    }
    c2.pass = j_raw > 0.0;
    if (!c2.pass) c2.note = "g(t, x) or -g(t, -x) is not bounded away from 0 for x >= zhat";
  } catch (const ExprError& e) {
    c2.note = e.what();
  }
  const double big_j = kDeflate * j_raw;
  rep.quantities["J_sampled"] = j_raw;
  rep.quantities["J"] = big_j;
  rep.conditions.push_back(c2);

  const int r_int = *ld.cls.r_int;
  const int g = std::gcd(r_int, p.n);
  const double n_over_gcd = static_cast<double>(p.n) / g;
  const double threshold = big_j > 0.0 ? std::fmax(3.0, big_k / big_j + 1.0)
                                        : std::numeric_limits<double>::infinity();
  rep.quantities["theta"] = *ld.cls.theta;
  rep.quantities["r_int"] = r_int;
  rep.quantities["gcd"] = g;
  rep.quantities["n_over_gcd"] = n_over_gcd;
  rep.quantities["threshold"] = threshold;
  ConditionVerdict c3{"C3", c1.pass && c2.pass && n_over_gcd >= threshold, false, ""};
  if (!c3.pass) c3.note = "N / gcd(r, N) < max{3, K/J + 1}";
  rep.conditions.push_back(c3);
  return rep;
}

}  // namespace perdiff
