#pragma once
// Independent brute-force references used by the test suite only.
//
// The compressed-power oracle avoids symbol convolution entirely.  The
// identity f(L(phi)) = L(f o phi) lives on the full group operator (on
// l^2 of the positive rationals resp. Z^d), so the oracle embeds sigma in a
// finite label set closed under (n-1) rounds of multiplication by the symbol
// support -- labels may be rationals or negative lattice points -- forms the
// dense group-operator block there, takes an honest matrix power, and
// restricts back to sigma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include <szegolab/index_set.hpp>
#include <szegolab/operators.hpp>
#include <szegolab/symbol.hpp>

namespace oracles {

using namespace szegolab;

/// Positions of sigma's elements inside superset (both sorted the same way).
inline std::vector<Eigen::Index> embedding(const IndexSet& sigma,
                                           const IndexSet& superset) {
  std::vector<Eigen::Index> pos;
  pos.reserve(sigma.size());
  if (sigma.kind() == GroupKind::multiplicative) {
    std::size_t cursor = 0;
    for (const auto& e : sigma.naturals()) {
      while (cursor < superset.size() && !(superset.naturals()[cursor] == e))
        ++cursor;
      if (cursor == superset.size())
        throw std::domain_error("embedding: not a subset");
      pos.push_back(static_cast<Eigen::Index>(cursor));
    }
  } else {
    std::size_t cursor = 0;
    for (const auto& e : sigma.lattice()) {
      while (cursor < superset.size() && superset.lattice()[cursor] != e)
        ++cursor;
      if (cursor == superset.size())
        throw std::domain_error("embedding: not a subset");
      pos.push_back(static_cast<Eigen::Index>(cursor));
    }
  }
  return pos;
}

namespace detail {

template <typename Label, typename Step>
std::vector<Label> close_under_support(std::vector<Label> start, int steps,
                                       const Symbol& s, Step step,
                                       std::size_t cap) {
  std::vector<Label> all = start;
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<Label> frontier = all;
  for (int round = 0; round < steps; ++round) {
    std::vector<Label> next;
    for (const auto& e : frontier)
      for (const auto& [f, c] : s.coeffs()) next.push_back(step(e, f));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::vector<Label> fresh;
    for (auto& e : next)
      if (!std::binary_search(all.begin(), all.end(), e))
        fresh.push_back(std::move(e));
    all.insert(all.end(), fresh.begin(), fresh.end());
    std::sort(all.begin(), all.end());
    if (all.size() > cap)
      throw resource_error("close_under_support: cap exceeded");
    frontier = std::move(fresh);
  }
  return all;
}

template <typename Label, typename Shift>
Eigen::MatrixXcd group_block(const std::vector<Label>& labels, const Symbol& s,
                             Shift shift) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [f, c] : s.coeffs()) {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      Label j = shift(labels[k], f);
      auto it = std::lower_bound(labels.begin(), labels.end(), j);
      if (it == labels.end() || !(*it == j)) continue;
      m(static_cast<Eigen::Index>(it - labels.begin()),
        static_cast<Eigen::Index>(k)) = c;
    }
  }
  return m;
}

}  // namespace detail

/// pi_sigma L(phi)^n pi_sigma by dense multiplication over a closed label set.
inline Eigen::MatrixXcd compressed_power_dense(const Symbol& s,
                                               const IndexSet& sigma, int n,
                                               std::size_t cap = 100000) {
  if (sigma.kind() != s.kind())
    throw std::domain_error("compressed_power_dense: kind mismatch");
  Eigen::MatrixXcd power;
  std::vector<Eigen::Index> pos;
  if (sigma.kind() == GroupKind::multiplicative) {
    std::vector<FactoredRational> start;
    for (const auto& e : sigma.naturals()) start.push_back(e.as_rational());
    auto mul = [](const FactoredRational& e, const Frequency& f) {
      return e * f.rational();
    };
    auto labels = detail::close_under_support(start, n - 1, s, mul, cap);
    auto block = detail::group_block(labels, s, mul);
    power = block;
    for (int i = 1; i < n; ++i) power = (power * block).eval();
    for (const auto& e : sigma.naturals()) {
      auto q = e.as_rational();
      auto it = std::lower_bound(labels.begin(), labels.end(), q);
      pos.push_back(static_cast<Eigen::Index>(it - labels.begin()));
    }
  } else {
    const std::size_t d = static_cast<std::size_t>(sigma.dim());
    std::vector<LatticePoint> start(sigma.lattice());
    auto add = [d](const LatticePoint& e, const Frequency& f) {
      const auto& alpha = f.alpha();
      LatticePoint out(d);
      for (std::size_t i = 0; i < d; ++i)
        out[i] = e[i] + (i < alpha.size() ? alpha[i] : 0);
      return out;
    };
    auto labels = detail::close_under_support(start, n - 1, s, add, cap);
    auto block = detail::group_block(labels, s, add);
    power = block;
    for (int i = 1; i < n; ++i) power = (power * block).eval();
    for (const auto& e : sigma.lattice()) {
      auto it = std::lower_bound(labels.begin(), labels.end(), e);
      pos.push_back(static_cast<Eigen::Index>(it - labels.begin()));
    }
  }
  const auto sz = static_cast<Eigen::Index>(sigma.size());
  Eigen::MatrixXcd out(sz, sz);
  for (Eigen::Index r = 0; r < sz; ++r)
    for (Eigen::Index c = 0; c < sz; ++c)
      out(r, c) = power(pos[static_cast<std::size_t>(r)],
                        pos[static_cast<std::size_t>(c)]);
  return out;
}

}  // namespace oracles
