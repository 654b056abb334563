#pragma once
// Dense truncated Toeplitz matrices from symbols and index sets.
//
// T_sigma(phi) = {phihat(j/k)}_{j,k in sigma} in the multiplicative case and
// {phihat(j-k)} in the additive case.  Entries are looked up in the symbol's
// coefficient map (misses are exact zeros), never recomputed by quadrature.
// Compressed powers go through symbol convolution: pi L(phi)^n pi = T(phi^n).

#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include <szegolab/arith.hpp>
#include <szegolab/index_set.hpp>
#include <szegolab/symbol.hpp>

namespace szegolab {

struct TruncatedOperator {
  IndexSet labels;
  Eigen::MatrixXcd entries;
  std::string symbol_ref;
};

namespace detail {

inline std::string symbol_ref_of(const Symbol& s) {
  if (s.kind() == GroupKind::multiplicative)
    return "multiplicative symbol, support " + std::to_string(s.support_size());
  return "additive symbol, dim " + std::to_string(s.dim()) + ", support " +
         std::to_string(s.support_size());
}

}  // namespace detail

/// Dense truncation of the symbol to the index set.  Every coefficient
/// (q, c) contributes c at positions (k*q, k) for k in sigma, so that
/// entries(j, k) = shat(j/k) (resp. shat(j-k)); everything else is zero.
inline TruncatedOperator truncate(const Symbol& s, const IndexSet& sigma,
                                  std::size_t dense_cap = 4096) {
  if (s.kind() != sigma.kind())
    throw std::domain_error("truncate: symbol and set kinds differ");
  const std::size_t n = sigma.size();
  if (n > dense_cap)
    throw resource_error("truncate: set larger than dense cap (" +
                         std::to_string(n) + " > " + std::to_string(dense_cap) +
                         ")");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  if (s.kind() == GroupKind::multiplicative) {
    std::unordered_map<FactoredNatural, std::size_t> idx;
    idx.reserve(n * 2);
    for (std::size_t i = 0; i < n; ++i) idx.emplace(sigma.naturals()[i], i);
    FactoredNatural shifted;
    for (const auto& [f, c] : s.coeffs()) {
      const auto& q = f.rational();
      for (std::size_t k = 0; k < n; ++k) {
        if (!try_multiply(sigma.naturals()[k], q, shifted)) continue;
        auto it = idx.find(shifted);
        if (it == idx.end()) continue;
        m(static_cast<Eigen::Index>(it->second),
          static_cast<Eigen::Index>(k)) = c;
      }
    }
  } else {
    std::map<LatticePoint, std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) idx.emplace(sigma.lattice()[i], i);
    const std::size_t d = static_cast<std::size_t>(sigma.dim());
    LatticePoint shifted(d);
    for (const auto& [f, c] : s.coeffs()) {
      const auto& alpha = f.alpha();
      if (alpha.size() > d)
        for (std::size_t i = d; i < alpha.size(); ++i)
          if (alpha[i] != 0)
            throw std::domain_error(
                "truncate: symbol frequency exceeds set dimension");
      for (std::size_t k = 0; k < n; ++k) {
        const auto& base = sigma.lattice()[k];
        bool nonneg = true;
        for (std::size_t i = 0; i < d; ++i) {
          shifted[i] = base[i] + (i < alpha.size() ? alpha[i] : 0);
          if (shifted[i] < 0) nonneg = false;
        }
        if (!nonneg) continue;
        auto it = idx.find(shifted);
        if (it == idx.end()) continue;
        m(static_cast<Eigen::Index>(it->second),
          static_cast<Eigen::Index>(k)) = c;
      }
    }
  }
  return TruncatedOperator{sigma, std::move(m), detail::symbol_ref_of(s)};
}

/// pi_sigma L(phi)^n pi_sigma = T_sigma(phi^n): the compressed n-th power,
/// computed exactly through symbol convolution.
inline TruncatedOperator compressed_power(const Symbol& s, const IndexSet& sigma,
                                          int n, std::size_t dense_cap = 4096,
                                          std::size_t support_cap = 1 << 17) {
  if (n < 1) throw std::domain_error("compressed_power: n must be >= 1");
  return truncate(convolve_power(s, n, support_cap), sigma, dense_cap);
}

/// (1/#sigma) ||pi L(phi) (I - pi)||_{S2}^2
///   = sum_r |shat(r)|^2 (1 - #{n in sigma : n/r in sigma}/#sigma),
/// an exact finite sum over the symbol support.
inline double hs_offdiagonal_norm_sq(const Symbol& s, const IndexSet& sigma) {
  if (s.kind() != sigma.kind())
    throw std::domain_error("hs_offdiagonal_norm_sq: kinds differ");
  const double size = static_cast<double>(sigma.size());
  double total = 0.0;
  for (const auto& [f, c] : s.coeffs()) {
    const std::size_t kept = folner_count(sigma, f.inverse());
    total += std::norm(c) * (1.0 - static_cast<double>(kept) / size);
  }
  return total;
}

/// Gram matrix of the dilated family {f_j : j in sigma}, f_j(x) = F(jx),
/// where F has expansion coefficients a_1, ..., a_M against an orthonormal
/// dilation-compatible basis: entry(j,k) = <f_j, f_k>
///   = sum_{m,n >= 1, j*n = k*m} a_m conj(a_n),
/// which equals the (j,k) entry of T_sigma(phi) for phi = |Bf|^2.
inline TruncatedOperator gram_matrix(const std::vector<Complex>& a,
                                     const IndexSet& sigma,
                                     std::size_t dense_cap = 4096) {
  if (sigma.kind() != GroupKind::multiplicative)
    throw std::domain_error("gram_matrix: set must be multiplicative");
  if (a.empty()) throw std::domain_error("gram_matrix: no coefficients");
  const std::size_t sz = sigma.size();
  if (sz > dense_cap)
    throw resource_error("gram_matrix: set larger than dense cap");
  std::vector<BigInt> v;
  v.reserve(sz);
  for (const auto& e : sigma.naturals()) v.push_back(e.value());
  const std::size_t M = a.size();
  Eigen::MatrixXcd g(static_cast<Eigen::Index>(sz),
                     static_cast<Eigen::Index>(sz));
  for (std::size_t j = 0; j < sz; ++j) {
    for (std::size_t k = 0; k < sz; ++k) {
      Complex acc = 0.0;
      for (std::size_t m = 1; m <= M; ++m)
        for (std::size_t n = 1; n <= M; ++n)
          if (v[j] * n == v[k] * m) acc += a[m - 1] * std::conj(a[n - 1]);
      g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = acc;
    }
  }
  return TruncatedOperator{sigma, std::move(g),
                           "gram matrix, " + std::to_string(M) + " dilation coefficients"};
}

/// Row-major CSV with each entry as a "re,im" pair.
inline std::string matrix_csv(const Eigen::MatrixXcd& m) {
  std::string out;
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", m(r, c).real(),
                    m(r, c).imag());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace szegolab
