#pragma once
// Independent reference values for the limit statements: exact torus
// quadrature of f(phi), push-forward measures, averaged-symbol predictions,
// Dirichlet-series oracles for zeta moments, and finite-horizon time averages
// along the Bohr flow.
//
// Exact results (polynomial f, trig-polynomial phi) are computed two ways --
// constant Fourier coefficient via convolution, and DFT quadrature on an
// exact-degree grid -- which must agree; everything else carries an explicit
// heuristic error estimate and a rigor flag.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <szegolab/arith.hpp>
#include <szegolab/index_set.hpp>
#include <szegolab/symbol.hpp>

namespace szegolab {

enum class RefMethod {
  exact_quadrature,
  monte_carlo,
  dirichlet_series,
  time_average,
};

struct ReferenceLimit {
  double value = 0.0;
  double value_imag = 0.0;
  RefMethod method = RefMethod::exact_quadrature;
  double error_bound = 0.0;
  bool rigorous = false;
};

struct QuadratureSettings {
  bool monte_carlo = false;
  int grid_points = 64;            // per active variable
  std::size_t samples = 1000000;   // Monte Carlo
  std::uint64_t seed = 20240801;
  std::size_t point_cap = std::size_t{1} << 22;
};

namespace detail {

inline double poly_degree(const std::vector<double>& coeffs) {
  for (std::size_t i = coeffs.size(); i-- > 0;)
    if (coeffs[i] != 0.0) return static_cast<double>(i);
  return 0.0;
}

inline Complex eval_poly_complex(const std::vector<double>& coeffs, Complex x) {
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    acc = acc * x + *it;
  return acc;
}

/// Highest torus slot a point must supply: the top active variable, and for
/// additive symbols at least the symbol dimension.
inline int top_slot(const Symbol& s, const std::vector<int>& vars) {
  int m = vars.empty() ? 0 : vars.back();
  if (s.kind() == GroupKind::additive) m = std::max(m, s.dim() - 1);
  return m;
}

/// Mean of g(eval(s, z)) over the tensor grid with `sizes[i]` points in
/// variable vars[i]; exact for trig polynomials of per-variable degree
/// < sizes[i].
template <typename G>
Complex grid_mean(const Symbol& s, const std::vector<int>& vars,
                  const std::vector<std::size_t>& sizes, G&& g) {
  Complex acc = 0.0;
  std::size_t count = 0;
  for_each_grid_point(vars, sizes, top_slot(s, vars), [&](const TorusPoint& z) {
    acc += g(eval(s, z));
    ++count;
  });
  return acc / static_cast<double>(count);
}

template <typename G>
Complex mc_mean(const Symbol& s, const std::vector<int>& vars,
                const QuadratureSettings& q, G&& g, double* stderr_out) {
  const std::size_t shards = 16;
  const std::size_t per_shard = q.samples / shards + 1;
  Complex total = 0.0;
  double total_sq = 0.0;
  std::size_t n = 0;
  const double two_pi = 2.0 * std::acos(-1.0);
  TorusPoint z(static_cast<std::size_t>(top_slot(s, vars)) + 1,
               Complex(1.0, 0.0));
  for (std::size_t shard = 0; shard < shards; ++shard) {
    std::mt19937_64 rng(q.seed * 0x9e3779b97f4a7c15ull + shard);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    for (std::size_t i = 0; i < per_shard; ++i) {
      for (int v : vars) z[static_cast<std::size_t>(v)] = std::polar(1.0, angle(rng));
      Complex value = g(eval(s, z));
      total += value;
      total_sq += std::norm(value);
      ++n;
    }
  }
  Complex mean = total / static_cast<double>(n);
  if (stderr_out) {
    double var = total_sq / static_cast<double>(n) - std::norm(mean);
    *stderr_out = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  return mean;
}

}  // namespace detail

/// Exact value of the torus integral of f(phi) for polynomial f: the constant
/// Fourier coefficient of f(phi), by repeated convolution.  Cross-checked
/// against DFT quadrature on a grid of m*deg+1 points per variable whenever
/// the tensor grid fits (<= 8 active variables); the two must agree to 1e-10.
inline ReferenceLimit torus_integral(const Symbol& s,
                                     const std::vector<double>& f,
                                     std::size_t support_cap = std::size_t{1} << 17,
                                     std::size_t point_cap = std::size_t{1} << 22) {
  Complex exact = f.empty() ? 0.0 : f[0];
  Symbol power = s.kind() == GroupKind::multiplicative
                     ? Symbol::multiplicative()
                     : Symbol::additive(s.dim());
  bool have_power = false;
  for (std::size_t m = 1; m < f.size(); ++m) {
    power = have_power ? convolve(power, s) : s;
    have_power = true;
    if (power.support_size() > support_cap)
      throw resource_error("torus_integral: convolution support blow-up");
    if (f[m] != 0.0) exact += f[m] * power.mean_coeff();
  }

  auto vars = s.active_variables();
  const double deg_f = detail::poly_degree(f);
  if (!vars.empty() && vars.size() <= 8 && deg_f >= 1.0) {
    std::vector<std::size_t> sizes;
    std::size_t total = 1;
    bool fits = true;
    for (int v : vars) {
      std::size_t pts = static_cast<std::size_t>(deg_f) *
                            static_cast<std::size_t>(s.degree_of(v)) + 1;
      sizes.push_back(pts);
      if (total > point_cap / pts) { fits = false; break; }
      total *= pts;
    }
    if (fits) {
      Complex via_grid = detail::grid_mean(
          s, vars, sizes,
          [&](Complex w) { return detail::eval_poly_complex(f, w); });
      if (std::abs(via_grid - exact) > 1e-10 * (1.0 + std::abs(exact)))
        throw std::runtime_error(
            "torus_integral: convolution and quadrature paths disagree");
    }
  }

  ReferenceLimit out;
  out.value = exact.real();
  out.value_imag = exact.imag();
  out.method = RefMethod::exact_quadrature;
  out.error_bound = 1e-10;
  out.rigorous = true;
  return out;
}

/// Grid or Monte Carlo average of f(phi(z)) for continuous real f; the error
/// bound is the refinement delta (grid) or the standard error (MC), both
/// heuristic.
template <typename F>
  requires std::invocable<F&, double>
ReferenceLimit torus_integral_continuous(const Symbol& s, F&& f,
                                         QuadratureSettings q = {}) {
  auto vars = s.active_variables();
  ReferenceLimit out;
  if (vars.empty()) {
    out.value = f(eval_real(s, {}));
    out.method = RefMethod::exact_quadrature;
    out.rigorous = true;
    return out;
  }
  auto g = [&](Complex w) { return Complex(f(w.real()), 0.0); };
  // real-valued evaluation requires a hermitian symbol; check once
  (void)eval_real(s, TorusPoint(static_cast<std::size_t>(detail::top_slot(s, vars)) + 1,
                                Complex(1.0, 0.0)));
  std::size_t coarse_total = 1;
  bool grid_ok = !q.monte_carlo && vars.size() <= 8;
  if (grid_ok)
    for (int v : vars) {
      std::size_t pts = static_cast<std::size_t>(q.grid_points);
      (void)v;
      if (coarse_total > q.point_cap / pts) { grid_ok = false; break; }
      coarse_total *= pts;
    }
  if (grid_ok) {
    std::vector<std::size_t> coarse(vars.size(),
                                    static_cast<std::size_t>(q.grid_points));
    std::vector<std::size_t> half(vars.size(),
                                  std::max<std::size_t>(
                                      1, static_cast<std::size_t>(q.grid_points) / 2));
    Complex fine = detail::grid_mean(s, vars, coarse, g);
    Complex prev = detail::grid_mean(s, vars, half, g);
    out.value = fine.real();
    out.method = RefMethod::exact_quadrature;
    out.error_bound = std::abs(fine - prev) + 1e-15;
    out.rigorous = false;
    return out;
  }
  double se = 0.0;
  Complex mean = detail::mc_mean(s, vars, q, g, &se);
  out.value = mean.real();
  out.method = RefMethod::monte_carlo;
  out.error_bound = se;
  out.rigorous = false;
  return out;
}

struct PushforwardMeasure {
  ReferenceLimit limit;      // m({z : phi(z) in (lo, hi)})
  double endpoint_mass = 0;  // fraction of samples within 1e-6 of an endpoint
};

/// Push-forward of Haar measure under phi: the mass of (lo, hi), with a
/// diagnostic for mass sitting on the endpoints (the limit statements need
/// the endpoint level sets to be null).
inline PushforwardMeasure pushforward_measure(const Symbol& s, double lo,
                                              double hi,
                                              QuadratureSettings q = {}) {
  if (!(lo < hi)) throw std::domain_error("pushforward_measure: need lo < hi");
  if (!s.is_hermitian())
    throw std::domain_error("pushforward_measure: symbol must be hermitian");
  auto vars = s.active_variables();
  PushforwardMeasure out;
  double inside = 0.0, near = 0.0, count = 0.0;
  auto tally = [&](double x) {
    if (x > lo && x < hi) inside += 1.0;
    if (std::abs(x - lo) <= 1e-6 || std::abs(x - hi) <= 1e-6) near += 1.0;
    count += 1.0;
  };
  if (vars.empty()) {
    tally(eval_real(s, {}));
    out.limit.value = inside;
    out.limit.method = RefMethod::exact_quadrature;
    out.limit.rigorous = true;
    out.endpoint_mass = near;
    return out;
  }
  std::size_t total = 1;
  bool grid_ok = !q.monte_carlo && vars.size() <= 8;
  if (grid_ok)
    for (std::size_t i = 0; i < vars.size(); ++i) {
      std::size_t pts = static_cast<std::size_t>(q.grid_points);
      if (total > q.point_cap / pts) { grid_ok = false; break; }
      total *= pts;
    }
  if (grid_ok) {
    std::vector<std::size_t> sizes(vars.size(),
                                   static_cast<std::size_t>(q.grid_points));
    detail::grid_mean(s, vars, sizes, [&](Complex w) {
      tally(w.real());
      return Complex(0.0, 0.0);
    });
    out.limit.method = RefMethod::exact_quadrature;
  } else {
    detail::mc_mean(
        s, vars, q,
        [&](Complex w) {
          tally(w.real());
          return Complex(0.0, 0.0);
        },
        nullptr);
    out.limit.method = RefMethod::monte_carlo;
  }
  out.limit.value = inside / count;
  out.limit.error_bound =
      out.limit.method == RefMethod::monte_carlo
          ? std::sqrt(out.limit.value * (1.0 - out.limit.value) / count)
          : 1.0 / static_cast<double>(q.grid_points);
  out.limit.rigorous = false;
  out.endpoint_mass = near / count;
  return out;
}

/// The limit each family's truncations are proved (or predicted) to reach:
/// Folner families give the plain torus integral; progressions and lattice
/// boxes first average / project the symbol; geometric sets collapse to the
/// mean coefficient.  Families with no established limit are refused.
inline ReferenceLimit predicted_limit(const Symbol& s, const SetFamily& family,
                                      const std::vector<double>& f) {
  switch (family.kind) {
    case SetFamily::Kind::additive_segment:
      return torus_integral(s, f);
    case SetFamily::Kind::even_segment:
      return torus_integral(
          ell_average(s, static_cast<std::int64_t>(family.ell)), f);
    case SetFamily::Kind::exponent_box:
    case SetFamily::Kind::embedded_box:
      return torus_integral(tail_project(s, family.axes), f);
    case SetFamily::Kind::sublattice_box:
      return torus_integral(sublattice_project(s, family.ells), f);
    case SetFamily::Kind::sparse_powers: {
      Complex at_mean =
          detail::eval_poly_complex(f, s.mean_coeff());
      ReferenceLimit out;
      out.value = at_mean.real();
      out.value_imag = at_mean.imag();
      out.method = RefMethod::exact_quadrature;
      out.error_bound = 0.0;
      out.rigorous = true;
      return out;
    }
    case SetFamily::Kind::natural_segment:
      throw std::domain_error(
          "predicted_limit: no predicted limit for the natural truncation "
          "{1..N} (open problem)");
    case SetFamily::Kind::alternating:
      throw std::domain_error(
          "predicted_limit: alternating families have no limit");
    case SetFamily::Kind::explicit_sets:
      throw std::domain_error(
          "predicted_limit: explicit sets carry no predicted limit");
  }
  throw std::domain_error("predicted_limit: unknown family");
}

/// lim_T (1/2T) int |zeta(gamma+it)|^{2m} dt = sum_n d_m(n)^2 n^{-2 gamma},
/// by partial sums with an integral tail bound.  The m=1 tail is rigorous;
/// for m >= 2 the divisor growth constant is an observed-table heuristic.
inline ReferenceLimit zeta_moment(double gamma, int m, std::size_t n_max) {
  if (!(gamma > 1.0))
    throw std::domain_error(
        "zeta_moment: gamma must exceed 1 (existence below the line is open)");
  if (m < 1) throw std::domain_error("zeta_moment: m must be >= 1");
  if (n_max < 2) throw std::domain_error("zeta_moment: n_max too small");
  auto d = divisor_table(m, n_max);
  double partial = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    double dn = static_cast<double>(d[n]);
    partial += dn * dn * std::pow(static_cast<double>(n), -2.0 * gamma);
  }
  double tail;
  bool rigorous;
  const double nmax = static_cast<double>(n_max);
  if (m == 1) {
    // sum_{n > N} n^{-2 gamma} <= integral_N^inf x^{-2 gamma} dx
    tail = std::pow(nmax, 1.0 - 2.0 * gamma) / (2.0 * gamma - 1.0);
    rigorous = true;
  } else {
    // d_m(n) <= C n^eps with C read off the computed table
    const double eps = 0.25;
    double c = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n)
      c = std::max(c, static_cast<double>(d[n]) /
                          std::pow(static_cast<double>(n), eps));
    double expo = 2.0 * gamma - 2.0 * eps - 1.0;
    if (expo <= 0.0)
      throw std::domain_error("zeta_moment: tail bound needs gamma > eps + 1/2");
    tail = c * c * std::pow(nmax, -expo) / expo;
    rigorous = false;
  }
  ReferenceLimit out;
  out.value = partial;
  out.method = RefMethod::dirichlet_series;
  out.error_bound = tail;
  out.rigorous = rigorous;
  return out;
}

/// (1/2T) int_{-T}^{T} f(phi(p^{it})) dt by midpoint quadrature along the Bohr
/// flow; the reported error is the change from halving the horizon.
template <typename F>
  requires std::invocable<F&, Complex>
ReferenceLimit bohr_time_average(const Symbol& s, F&& f, double t_horizon,
                                 double dt) {
  if (s.kind() != GroupKind::multiplicative)
    throw std::domain_error("bohr_time_average: multiplicative symbols only");
  if (!(t_horizon > 0.0) || !(dt > 0.0) || dt > t_horizon)
    throw std::domain_error("bohr_time_average: bad horizon or step");
  auto average_to = [&](double horizon) {
    const auto steps = static_cast<std::size_t>(std::ceil(2.0 * horizon / dt));
    Complex acc = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      double t = -horizon + (static_cast<double>(i) + 0.5) *
                                (2.0 * horizon / static_cast<double>(steps));
      acc += f(bohr_eval(s, t));
    }
    return acc / static_cast<double>(steps);
  };
  Complex full = average_to(t_horizon);
  Complex half = average_to(0.5 * t_horizon);
  ReferenceLimit out;
  out.value = full.real();
  out.value_imag = full.imag();
  out.method = RefMethod::time_average;
  out.error_bound = std::abs(full - half) + 1e-15;
  out.rigorous = false;
  return out;
}

inline std::string method_name(RefMethod m) {
  switch (m) {
    case RefMethod::exact_quadrature: return "exact-quadrature";
    case RefMethod::monte_carlo: return "monte-carlo";
    case RefMethod::dirichlet_series: return "dirichlet-series";
    case RefMethod::time_average: return "time-average";
  }
  return "?";
}

}  // namespace szegolab
