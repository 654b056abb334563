#pragma once
// Spectral functionals on truncated operators: eigenvalues, singular values,
// normalized traces of f, eigenvalue counting, normalized determinants, and
// the Schatten-norm inequality checks for compressed powers.
//
// The dense solver is Eigen's; this header fixes the contract around it:
// sorted spectra, an explicit hermiticity gate, and a residual spot-check on
// returned eigenpairs.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <szegolab/index_set.hpp>
#include <szegolab/operators.hpp>
#include <szegolab/symbol.hpp>

namespace szegolab {

struct SpectralSummary {
  std::vector<double> values;  // eigenvalues ascending, or singular values descending
  bool hermitian = false;
  std::size_t size = 0;
};

namespace detail {

inline double hermiticity_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_real(const Eigen::MatrixXcd& m) {
  return m.imag().cwiseAbs().maxCoeff() == 0.0;
}

// ||T v - lambda v|| <= 1e-8 ||T|| on a deterministic sample of eigenpairs.
template <typename MatrixT, typename VectorsT>
void spot_check_residuals(const MatrixT& m, const Eigen::VectorXd& lambda,
                          const VectorsT& vecs) {
  const auto n = lambda.size();
  if (n == 0) return;
  const double scale =
      std::max({1.0, std::abs(lambda(0)), std::abs(lambda(n - 1))});
  std::mt19937_64 rng(0x5eedu + static_cast<std::uint64_t>(n));
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Index k = pick(rng);
    double resid = (m * vecs.col(k) - lambda(k) * vecs.col(k)).norm();
    if (resid > 1e-8 * scale)
      throw std::runtime_error("eigensolver residual check failed: " +
                               std::to_string(resid));
  }
}

}  // namespace detail

/// Full spectrum of a hermitian truncation, ascending.  Real matrices take
/// the real symmetric path (measurably faster at N ~ 2000).
inline SpectralSummary eigenvalues(const TruncatedOperator& T) {
  const auto& m = T.entries;
  const double scale = 1.0 + (m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  if (detail::hermiticity_defect(m) > 1e-12 * scale)
    throw std::domain_error(
        "eigenvalues: matrix is not hermitian (use singular_values)");
  Eigen::VectorXd lambda;
  if (detail::is_real(m)) {
    Eigen::MatrixXd re = m.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(re);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigenvalues: solver did not converge");
    lambda = es.eigenvalues();
    detail::spot_check_residuals(re, lambda, es.eigenvectors());
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigenvalues: solver did not converge");
    lambda = es.eigenvalues();
    detail::spot_check_residuals(m, lambda, es.eigenvectors());
  }
  SpectralSummary out;
  out.values.assign(lambda.data(), lambda.data() + lambda.size());
  out.hermitian = true;
  out.size = static_cast<std::size_t>(m.rows());
  return out;
}

/// Singular values, descending.  Small matrices go through a dedicated SVD;
/// large ones through the hermitian eigensolve of T*T (the use case is
/// moment sums, which do not need relative accuracy of tiny singular values).
inline SpectralSummary singular_values(const TruncatedOperator& T,
                                       Eigen::Index svd_cap = 768) {
  const auto& m = T.entries;
  Eigen::VectorXd s;
  if (m.rows() <= svd_cap) {
    // Jacobi, not BDC: the divide-and-conquer kernel drifts by ~1e-2 on
    // complex input just past its internal fallback threshold.
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    s = svd.singularValues();
  } else {
    Eigen::MatrixXcd gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                       Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("singular_values: solver did not converge");
    Eigen::VectorXd asc = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    s = asc.reverse();
  }
  SpectralSummary out;
  out.values.assign(s.data(), s.data() + s.size());
  out.hermitian = false;
  out.size = static_cast<std::size_t>(m.rows());
  return out;
}

inline double eval_poly(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
    acc = acc * x + *it;
  return acc;
}

inline Eigen::MatrixXcd matrix_power(const Eigen::MatrixXcd& m, int n) {
  if (n < 1) throw std::domain_error("matrix_power: n must be >= 1");
  Eigen::MatrixXcd p = m;
  for (int i = 1; i < n; ++i) p = (p * m).eval();
  return p;
}

/// sum_m c_m Tr(T^m) by honest matrix multiplication (Tr T^0 = #sigma).
inline double trace_poly_via_powers(const TruncatedOperator& T,
                                    const std::vector<double>& coeffs) {
  const auto n = T.entries.rows();
  double acc = coeffs.empty() ? 0.0 : coeffs[0] * static_cast<double>(n);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t m = 1; m < coeffs.size(); ++m) {
    p = (p * T.entries).eval();
    acc += coeffs[m] * p.trace().real();
  }
  return acc;
}

/// (1/#sigma) Tr f(T) for a continuous f supplied as a callable on the
/// (real) spectrum.
template <typename F>
  requires std::invocable<F&, double>
double trace_of_f(const SpectralSummary& spec, F&& f) {
  if (!spec.hermitian)
    throw std::domain_error("trace_of_f: needs a hermitian spectrum");
  double acc = 0.0;
  for (double lambda : spec.values) acc += f(lambda);
  return acc / static_cast<double>(spec.size);
}

template <typename F>
  requires std::invocable<F&, double>
double trace_of_f(const TruncatedOperator& T, F&& f) {
  return trace_of_f(eigenvalues(T), std::forward<F>(f));
}

/// Polynomial overload: the eigenvalue path, cross-checked against the
/// power-trace path on matrices small enough for that to be cheap.
inline double trace_of_f(const TruncatedOperator& T,
                         const std::vector<double>& coeffs) {
  auto spec = eigenvalues(T);
  double via_eigs =
      trace_of_f(spec, [&](double x) { return eval_poly(coeffs, x); });
  if (T.entries.rows() <= 256 && coeffs.size() > 1) {
    double via_powers = trace_poly_via_powers(T, coeffs) /
                        static_cast<double>(T.entries.rows());
    double norm_bound = std::max(
        {1.0, std::abs(spec.values.front()), std::abs(spec.values.back())});
    double tol = 1e-8 * std::pow(norm_bound,
                                 static_cast<double>(coeffs.size() - 1));
    if (std::abs(via_eigs - via_powers) > tol * (1.0 + std::abs(via_eigs)))
      throw std::runtime_error("trace_of_f: eigenvalue and power traces disagree");
  }
  return via_eigs;
}

struct IntervalCount {
  double fraction = 0.0;     // eigenvalues strictly inside (lo, hi) / size
  std::size_t boundary = 0;  // eigenvalues within 1e-10 of an endpoint
};

/// Fraction of the spectrum in the open interval (lo, hi); eigenvalues within
/// 1e-10 of an endpoint are tallied separately (the limit statements need the
/// endpoint level sets to carry no mass).
inline IntervalCount count_in_interval(const SpectralSummary& spec, double lo,
                                       double hi) {
  if (!(lo < hi)) throw std::domain_error("count_in_interval: need lo < hi");
  IntervalCount out;
  std::size_t inside = 0;
  for (double x : spec.values) {
    if (x > lo && x < hi) ++inside;
    if (std::abs(x - lo) <= 1e-10 || std::abs(x - hi) <= 1e-10) ++out.boundary;
  }
  out.fraction = static_cast<double>(inside) / static_cast<double>(spec.size);
  return out;
}

/// (1/#sigma) Tr (T*T)^m = (1/#sigma) sum s_k^{2m}.
inline double singular_moment(const SpectralSummary& sv, int m) {
  if (m < 1) throw std::domain_error("singular_moment: m must be >= 1");
  double acc = 0.0;
  for (double s : sv.values) acc += std::pow(s, 2 * m);
  return acc / static_cast<double>(sv.size);
}

inline double singular_moments(const TruncatedOperator& T, int m) {
  return singular_moment(singular_values(T), m);
}

/// (det T)^(1/#sigma) = exp((1/#sigma) sum log lambda_k) for positive
/// definite hermitian truncations.
inline double normalized_det(const TruncatedOperator& T) {
  auto spec = eigenvalues(T);
  double acc = 0.0;
  for (double lambda : spec.values) {
    if (lambda <= 1e-12)
      throw std::domain_error(
          "normalized_det: not positive definite at working precision");
    acc += std::log(lambda);
  }
  return std::exp(acc / static_cast<double>(spec.size));
}

struct B3Report {
  double lhs = 0.0;            // || T(phi^n) - T(phi)^n ||_{S1}
  double rhs = 0.0;            // (n(n-1)/2) ||phi||_grid^{n-2} ||pi L (1-pi)||_{S2}^2
  double rhs_certified = 0.0;  // same with the certified bound sum|shat| >= ||L||
  double margin = 0.0;         // rhs - lhs
  bool holds = false;          // lhs <= rhs or rhs_certified, with 1e-8 slack
};

/// Checks || pi L^n pi - (pi L pi)^n ||_{S1}
///          <= (n(n-1)/2) ||L||^{n-2} ||pi L (1-pi)||_{S2}^2.
/// ||L|| is the sup of |phi|, estimated on a refined grid.  The grid value
/// can undershoot the true sup, so an exceedance of the grid-level rhs falls
/// back to the certified coefficient bound sum|shat| >= ||L|| before the
/// inequality is declared violated; only lhs > rhs_certified flags a bug.
inline B3Report prop_b3_check(const Symbol& s, const IndexSet& sigma, int n,
                              std::size_t dense_cap = 4096) {
  if (n < 2) throw std::domain_error("prop_b3_check: n must be >= 2");
  if (!s.is_hermitian())
    throw std::domain_error("prop_b3_check: symbol must be hermitian");
  Eigen::MatrixXcd defect =
      compressed_power(s, sigma, n, dense_cap).entries -
      matrix_power(truncate(s, sigma, dense_cap).entries, n);
  TruncatedOperator defect_op{sigma, std::move(defect), "power defect"};
  auto sv = singular_values(defect_op);
  B3Report rep;
  for (double v : sv.values) rep.lhs += v;
  const double hs_total =
      hs_offdiagonal_norm_sq(s, sigma) * static_cast<double>(sigma.size());
  const double factor = 0.5 * n * (n - 1);
  const double grid_norm = grid_sup(s);
  rep.rhs = factor * std::pow(grid_norm, n - 2) * hs_total;
  rep.rhs_certified = factor * std::pow(s.one_norm(), n - 2) * hs_total;
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-8) ||
              rep.lhs <= rep.rhs_certified * (1.0 + 1e-8);
  return rep;
}

/// | (1/#sigma) Tr T_sigma^m - (1/#sigma') Tr T_{sigma u F}^m | for
/// m = 1..m_max: finite augmentations must not move normalized moments.
inline std::vector<double> finite_augmentation_drift(const Symbol& s,
                                                     const IndexSet& sigma,
                                                     const IndexSet& extra,
                                                     int m_max,
                                                     std::size_t dense_cap = 4096) {
  if (m_max < 1) throw std::domain_error("finite_augmentation_drift: m_max >= 1");
  auto joined = sigma.union_with(extra);
  auto base_spec = eigenvalues(truncate(s, sigma, dense_cap));
  auto aug_spec = eigenvalues(truncate(s, joined, dense_cap));
  std::vector<double> drift;
  drift.reserve(static_cast<std::size_t>(m_max));
  for (int m = 1; m <= m_max; ++m) {
    auto mono = [m](double x) { return std::pow(x, m); };
    drift.push_back(
        std::abs(trace_of_f(base_spec, mono) - trace_of_f(aug_spec, mono)));
  }
  return drift;
}

}  // namespace szegolab
