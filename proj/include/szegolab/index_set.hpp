#pragma once
// Finite truncation sets and their Folner diagnostics.
//
// Multiplicative sets are finite subsets of the naturals kept in factored
// form and ordered by value; additive sets are finite subsets of Z_+^d with
// big-integer coordinates (sparse sets such as {3^k : k < 500} overflow
// machine integers).  The Folner ratio of a set under a shift is an exact
// count divided by the set size; everything here is integer arithmetic.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <szegolab/arith.hpp>
#include <szegolab/symbol.hpp>

namespace szegolab {

using LatticePoint = std::vector<BigInt>;

class IndexSet {
 public:
  static constexpr std::size_t kMaxElements = 1000000;

  static IndexSet from_naturals(std::vector<FactoredNatural> elems) {
    if (elems.empty()) throw std::domain_error("index set: empty");
    if (elems.size() > kMaxElements)
      throw resource_error("index set: too many elements");
    std::vector<std::pair<BigInt, FactoredNatural>> dec;
    dec.reserve(elems.size());
    for (auto& e : elems) dec.emplace_back(e.value(), std::move(e));
    std::sort(dec.begin(), dec.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    dec.erase(std::unique(dec.begin(), dec.end(),
                          [](const auto& a, const auto& b) {
                            return a.first == b.first;
                          }),
              dec.end());
    IndexSet s(GroupKind::multiplicative, 0);
    s.naturals_.reserve(dec.size());
    for (auto& [v, e] : dec) {
      s.members_.insert(e);
      s.naturals_.push_back(std::move(e));
    }
    return s;
  }

  static IndexSet from_lattice(std::vector<LatticePoint> elems) {
    if (elems.empty()) throw std::domain_error("index set: empty");
    if (elems.size() > kMaxElements)
      throw resource_error("index set: too many elements");
    const std::size_t d = elems.front().size();
    if (d == 0) throw std::domain_error("index set: zero-dimensional point");
    for (const auto& p : elems) {
      if (p.size() != d)
        throw std::domain_error("index set: mixed dimensions");
      for (const auto& c : p)
        if (c < 0)
          throw std::domain_error("index set: negative coordinate");
    }
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    IndexSet s(GroupKind::additive, static_cast<int>(d));
    s.lattice_ = std::move(elems);
    return s;
  }

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::size_t size() const {
    return kind_ == GroupKind::multiplicative ? naturals_.size()
                                              : lattice_.size();
  }

  const std::vector<FactoredNatural>& naturals() const {
    require(GroupKind::multiplicative);
    return naturals_;
  }
  const std::vector<LatticePoint>& lattice() const {
    require(GroupKind::additive);
    return lattice_;
  }

  bool contains(const FactoredNatural& n) const {
    require(GroupKind::multiplicative);
    return members_.count(n) > 0;
  }

  bool contains(const LatticePoint& p) const {
    require(GroupKind::additive);
    return std::binary_search(lattice_.begin(), lattice_.end(), p);
  }

  std::string label(std::size_t i) const {
    if (kind_ == GroupKind::multiplicative) return naturals_.at(i).str();
    const auto& p = lattice_.at(i);
    if (p.size() == 1) return p[0].str();
    std::string out = "(";
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out += ",";
      out += p[j].str();
    }
    return out + ")";
  }

  IndexSet union_with(const IndexSet& other) const {
    if (other.kind_ != kind_ || other.dim_ != dim_)
      throw std::domain_error("index set union: kind mismatch");
    if (kind_ == GroupKind::multiplicative) {
      auto elems = naturals_;
      elems.insert(elems.end(), other.naturals_.begin(), other.naturals_.end());
      return from_naturals(std::move(elems));
    }
    auto elems = lattice_;
    elems.insert(elems.end(), other.lattice_.begin(), other.lattice_.end());
    return from_lattice(std::move(elems));
  }

 private:
  IndexSet(GroupKind kind, int dim) : kind_(kind), dim_(dim) {}

  void require(GroupKind k) const {
    if (kind_ != k) throw std::domain_error("index set: group kind mismatch");
  }

  GroupKind kind_;
  int dim_;
  std::vector<FactoredNatural> naturals_;           // sorted by value
  std::unordered_set<FactoredNatural> members_;
  std::vector<LatticePoint> lattice_;               // sorted lexicographically
};

// ---------------------------------------------------------------------------
// Folner counts: exact integers.

/// #{k in sigma : q*k in sigma} for a rational shift q.
inline std::size_t folner_count(const IndexSet& sigma, const FactoredRational& q) {
  std::size_t count = 0;
  FactoredNatural shifted;
  for (const auto& k : sigma.naturals())
    if (try_multiply(k, q, shifted) && sigma.contains(shifted)) ++count;
  return count;
}

/// #{k in sigma : k + n in sigma} for an integer-vector shift n.
inline std::size_t folner_count(const IndexSet& sigma,
                                const std::vector<std::int64_t>& n) {
  if (n.size() != static_cast<std::size_t>(sigma.dim()))
    throw std::domain_error("folner_count: shift dimension mismatch");
  std::size_t count = 0;
  LatticePoint shifted(n.size());
  for (const auto& k : sigma.lattice()) {
    bool nonneg = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
      shifted[i] = k[i] + n[i];
      if (shifted[i] < 0) nonneg = false;
    }
    if (nonneg && sigma.contains(shifted)) ++count;
  }
  return count;
}

/// Shift taken from a symbol frequency (rational or integer vector).
inline std::size_t folner_count(const IndexSet& sigma, const Frequency& f) {
  if (f.kind() == GroupKind::multiplicative)
    return folner_count(sigma, f.rational());
  return folner_count(sigma, f.alpha());
}

template <typename ShiftT>
double folner_ratio(const IndexSet& sigma, const ShiftT& shift) {
  return static_cast<double>(folner_count(sigma, shift)) /
         static_cast<double>(sigma.size());
}

template <typename ShiftT>
double folner_defect(const IndexSet& sigma, const ShiftT& shift) {
  return 1.0 - folner_ratio(sigma, shift);
}

// ---------------------------------------------------------------------------
// Generators.

/// {1, 2, ..., n}: the natural truncation (not multiplicatively Folner).
inline IndexSet natural_segment(std::uint64_t n) {
  if (n == 0) throw std::domain_error("natural_segment: empty");
  std::vector<FactoredNatural> elems;
  elems.reserve(n);
  for (std::uint64_t k = 1; k <= n; ++k) elems.push_back(factor(k));
  return IndexSet::from_naturals(std::move(elems));
}

/// {0, 1, ..., n-1} in Z_+ (additively Folner).
inline IndexSet additive_segment(std::uint64_t n) {
  if (n == 0) throw std::domain_error("additive_segment: empty");
  std::vector<LatticePoint> elems;
  elems.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) elems.push_back({BigInt(k)});
  return IndexSet::from_lattice(std::move(elems));
}

/// {0, ell, 2*ell, ..., n*ell}: an arithmetic progression (size n+1).
inline IndexSet even_segment(std::uint64_t n, std::uint64_t ell = 2) {
  if (ell == 0) throw std::domain_error("even_segment: ell must be >= 1");
  std::vector<LatticePoint> elems;
  elems.reserve(n + 1);
  for (std::uint64_t k = 0; k <= n; ++k) elems.push_back({BigInt(k * ell)});
  return IndexSet::from_lattice(std::move(elems));
}

/// {1, base, base^2, ..., base^{n-1}}: geometric (sparse, non-Folner).
inline IndexSet sparse_powers(std::uint64_t n, std::uint64_t base = 3,
                              GroupKind kind = GroupKind::additive) {
  if (n == 0) throw std::domain_error("sparse_powers: empty");
  if (base < 2) throw std::domain_error("sparse_powers: base must be >= 2");
  if (kind == GroupKind::additive) {
    std::vector<LatticePoint> elems;
    elems.reserve(n);
    BigInt v = 1;
    for (std::uint64_t j = 0; j < n; ++j, v *= base) elems.push_back({v});
    return IndexSet::from_lattice(std::move(elems));
  }
  std::vector<FactoredNatural> elems;
  elems.reserve(n);
  auto b = factor(base).as_rational();
  for (std::uint64_t j = 0; j < n; ++j)
    elems.push_back(FactoredNatural(b.pow(static_cast<std::int32_t>(j))));
  return IndexSet::from_naturals(std::move(elems));
}

/// {prod p_i^{a_i} : 0 <= a_i <= bounds[i]}: a multiplicative Folner box on
/// the first bounds.size() primes.
inline IndexSet exponent_box(const std::vector<std::uint32_t>& bounds) {
  if (bounds.empty()) throw std::domain_error("exponent_box: no axes");
  std::size_t total = 1;
  for (auto b : bounds) {
    total *= static_cast<std::size_t>(b) + 1;
    if (total > IndexSet::kMaxElements)
      throw resource_error("exponent_box: more than 1e6 elements");
  }
  std::vector<FactoredNatural> elems;
  elems.reserve(total);
  std::vector<std::uint32_t> a(bounds.size(), 0);
  while (true) {
    std::vector<PrimePower> pp;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i]) pp.push_back({static_cast<std::uint32_t>(i),
                              static_cast<std::int32_t>(a[i])});
    elems.push_back(FactoredNatural(FactoredRational(std::move(pp))));
    std::size_t i = 0;
    for (; i < a.size(); ++i) {
      if (++a[i] <= bounds[i]) break;
      a[i] = 0;
    }
    if (i == a.size()) break;
  }
  return IndexSet::from_naturals(std::move(elems));
}

/// The image of the lattice box {0..bounds[i]}^d under j -> prod p_i^{j_i}.
inline IndexSet embedded_lattice_box(int d, const std::vector<std::uint32_t>& bounds) {
  if (d < 1 || bounds.size() != static_cast<std::size_t>(d))
    throw std::domain_error("embedded_lattice_box: dimension mismatch");
  return exponent_box(bounds);
}

/// {(ell_1 a_1, ..., ell_d a_d) : 0 <= a_i <= n}: a diagonal sublattice box.
inline IndexSet sublattice_box(const std::vector<std::int64_t>& ells,
                               std::uint64_t n) {
  if (ells.empty()) throw std::domain_error("sublattice_box: no axes");
  for (auto l : ells)
    if (l < 1) throw std::domain_error("sublattice_box: ell must be >= 1");
  std::size_t total = 1;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    total *= static_cast<std::size_t>(n) + 1;
    if (total > IndexSet::kMaxElements)
      throw resource_error("sublattice_box: more than 1e6 elements");
  }
  std::vector<LatticePoint> elems;
  elems.reserve(total);
  std::vector<std::uint64_t> a(ells.size(), 0);
  while (true) {
    LatticePoint p(ells.size());
    for (std::size_t i = 0; i < ells.size(); ++i)
      p[i] = BigInt(a[i]) * ells[i];
    elems.push_back(std::move(p));
    std::size_t i = 0;
    for (; i < a.size(); ++i) {
      if (++a[i] <= n) break;
      a[i] = 0;
    }
    if (i == a.size()) break;
  }
  return IndexSet::from_lattice(std::move(elems));
}

// ---------------------------------------------------------------------------
// Set families: schedule parameter -> set, used by sweeps and by the
// predicted-limit dispatch.

struct SetFamily {
  enum class Kind {
    natural_segment,
    additive_segment,
    even_segment,
    sparse_powers,
    exponent_box,
    embedded_box,
    sublattice_box,
    alternating,
    explicit_sets,
  };

  Kind kind = Kind::additive_segment;
  std::uint64_t ell = 2;                  // even_segment
  std::uint64_t base = 3;                 // sparse_powers
  GroupKind sparse_kind = GroupKind::additive;
  int axes = 1;                           // exponent/embedded box
  bool log_weights = false;               // box bounds n / log2(p_i)
  std::vector<std::int64_t> ells;         // sublattice_box
  std::vector<IndexSet> sets;             // explicit_sets
  std::shared_ptr<IndexSet> augment;      // optional finite union
  std::shared_ptr<SetFamily> first, second;  // alternating

  /// Box bounds for schedule value n (per-axis n, or n scaled by 1/log2 p).
  std::vector<std::uint32_t> box_bounds(std::uint64_t n) const {
    std::vector<std::uint32_t> bounds(static_cast<std::size_t>(axes));
    for (int i = 0; i < axes; ++i) {
      double w = log_weights
                     ? static_cast<double>(n) /
                           std::log2(static_cast<double>(prime(
                               static_cast<std::size_t>(i))))
                     : static_cast<double>(n);
      bounds[static_cast<std::size_t>(i)] =
          static_cast<std::uint32_t>(std::max(0.0, std::floor(w)));
    }
    return bounds;
  }

  /// The set at schedule position `index` with schedule value `n`.
  IndexSet make(std::size_t index, std::uint64_t n) const {
    IndexSet s = make_base(index, n);
    if (augment) s = s.union_with(*augment);
    return s;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::natural_segment: return "natural segment {1..n}";
      case Kind::additive_segment: return "additive segment {0..n-1}";
      case Kind::even_segment:
        return "arithmetic progression {0, " + std::to_string(ell) + ", ..., " +
               std::to_string(ell) + "n}";
      case Kind::sparse_powers:
        return "geometric set {" + std::to_string(base) + "^j : j < n}";
      case Kind::exponent_box:
        return "exponent box on " + std::to_string(axes) + " prime(s)";
      case Kind::embedded_box:
        return "embedded lattice box, dimension " + std::to_string(axes);
      case Kind::sublattice_box: return "diagonal sublattice box";
      case Kind::alternating: return "alternating pair of families";
      case Kind::explicit_sets: return "explicit sets";
    }
    return "?";
  }

 private:
  IndexSet make_base(std::size_t index, std::uint64_t n) const {
    switch (kind) {
      case Kind::natural_segment: return natural_segment(n);
      case Kind::additive_segment: return additive_segment(n);
      case Kind::even_segment: return even_segment(n, ell);
      case Kind::sparse_powers: return sparse_powers(n, base, sparse_kind);
      case Kind::exponent_box: return exponent_box(box_bounds(n));
      case Kind::embedded_box: return embedded_lattice_box(axes, box_bounds(n));
      case Kind::sublattice_box: return sublattice_box(ells, n);
      case Kind::alternating: {
        if (!first || !second)
          throw std::domain_error("alternating family: missing members");
        return (index % 2 == 0 ? *first : *second).make(index, n);
      }
      case Kind::explicit_sets: {
        if (index >= sets.size())
          throw std::domain_error("explicit family: schedule out of range");
        return sets[index];
      }
    }
    throw std::domain_error("set family: unknown kind");
  }
};

/// Explicit multiplicative sets: whitespace-separated naturals, one set per
/// line; blank lines and '#' comments skipped.
inline std::vector<IndexSet> parse_set_file(const std::string& text) {
  std::vector<IndexSet> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    std::vector<FactoredNatural> elems;
    bool comment = false;
    while (ls >> tok) {
      if (tok[0] == '#') {
        comment = true;
        break;
      }
      try {
        std::uint64_t v = std::stoull(tok);
        if (v == 0) throw std::invalid_argument("zero");
        elems.push_back(factor(v));
      } catch (const std::exception&) {
        throw parse_error("set file line " + std::to_string(line_no) +
                          ": bad natural '" + tok + "'");
      }
    }
    if (comment && elems.empty()) continue;
    if (elems.empty()) continue;
    out.push_back(IndexSet::from_naturals(std::move(elems)));
  }
  if (out.empty()) throw parse_error("set file: no sets found");
  return out;
}

}  // namespace szegolab
