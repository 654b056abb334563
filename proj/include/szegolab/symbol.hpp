#pragma once
// Finitely supported symbols on the d-torus and on the multiplicative
// "infinite torus" (one coordinate per prime).
//
// A symbol is a finite map frequency -> complex coefficient.  Additive
// frequencies are integer d-vectors (Fourier modes of T^d); multiplicative
// frequencies are positive rationals in factored form, where q = prod p^e
// names the monomial prod z_p^e in the prime coordinates.  Products of
// symbols are convolutions of coefficients; everything here is an exact
// finite sum apart from the complex arithmetic itself.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <szegolab/arith.hpp>

namespace szegolab {

using Complex = std::complex<double>;

/// Malformed text input (symbol literals, set files, configs).
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class GroupKind { additive, multiplicative };

/// A Fourier frequency: integer vector (additive) or factored positive
/// rational (multiplicative).
class Frequency {
 public:
  static Frequency additive(std::vector<std::int64_t> alpha) {
    return Frequency(std::move(alpha));
  }
  static Frequency multiplicative(FactoredRational q) {
    return Frequency(std::move(q));
  }

  GroupKind kind() const {
    return std::holds_alternative<FactoredRational>(value_)
               ? GroupKind::multiplicative
               : GroupKind::additive;
  }

  const std::vector<std::int64_t>& alpha() const {
    if (kind() != GroupKind::additive)
      throw std::domain_error("frequency: not additive");
    return std::get<std::vector<std::int64_t>>(value_);
  }

  const FactoredRational& rational() const {
    if (kind() != GroupKind::multiplicative)
      throw std::domain_error("frequency: not multiplicative");
    return std::get<FactoredRational>(value_);
  }

  /// Group inverse: negated vector / reciprocal rational.
  Frequency inverse() const {
    if (kind() == GroupKind::additive) {
      auto a = alpha();
      for (auto& x : a) x = -x;
      return additive(std::move(a));
    }
    return multiplicative(rational().inverse());
  }

  /// Group operation: coordinatewise sum / rational product.
  Frequency compose(const Frequency& other) const {
    if (kind() != other.kind())
      throw std::domain_error("frequency: group kind mismatch");
    if (kind() == GroupKind::additive) {
      const auto& a = alpha();
      const auto& b = other.alpha();
      if (a.size() != b.size())
        throw std::domain_error("frequency: dimension mismatch");
      std::vector<std::int64_t> out(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
      return additive(std::move(out));
    }
    return multiplicative(rational() * other.rational());
  }

  bool is_identity() const {
    if (kind() == GroupKind::additive) {
      const auto& a = alpha();
      return std::all_of(a.begin(), a.end(), [](auto x) { return x == 0; });
    }
    return rational().is_one();
  }

  std::string str() const {
    if (kind() == GroupKind::multiplicative) return rational().str();
    std::string s = "(";
    const auto& a = alpha();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(a[i]);
    }
    return s + ")";
  }

  friend bool operator==(const Frequency&, const Frequency&) = default;
  friend bool operator<(const Frequency& a, const Frequency& b) {
    return a.value_ < b.value_;
  }

  std::size_t hash() const {
    if (kind() == GroupKind::multiplicative) return rational().hash() ^ 0x9e37;
    std::size_t h = 0x84222325u;
    for (auto x : alpha())
      h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ull;
    return h;
  }

 private:
  explicit Frequency(std::vector<std::int64_t> a) : value_(std::move(a)) {}
  explicit Frequency(FactoredRational q) : value_(std::move(q)) {}

  std::variant<std::vector<std::int64_t>, FactoredRational> value_;
};

/// Point on the torus: one unit-modulus value per variable slot (coordinate
/// index for additive symbols, prime index for multiplicative ones).
using TorusPoint = std::vector<Complex>;

/// z^e for unit-modulus z; negative exponents via conjugation.
inline Complex unit_power(Complex z, std::int64_t e) {
  if (e < 0) return std::conj(unit_power(z, -e));
  Complex r = 1.0, b = z;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

class Symbol {
 public:
  static constexpr double kCoeffEps = 1e-15;  // pruning threshold

  static Symbol additive(int dim) {
    if (dim < 1) throw std::domain_error("symbol: dimension must be >= 1");
    return Symbol(GroupKind::additive, dim);
  }
  static Symbol multiplicative() { return Symbol(GroupKind::multiplicative, 0); }

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }

  /// Coefficients in canonical frequency order.
  const std::map<Frequency, Complex>& coeffs() const { return coeffs_; }
  std::size_t support_size() const { return coeffs_.size(); }

  void set(const Frequency& f, Complex c) {
    check_frequency(f);
    if (std::abs(c) < kCoeffEps)
      coeffs_.erase(f);
    else
      coeffs_[f] = c;
  }

  Complex coeff(const Frequency& f) const {
    auto it = coeffs_.find(f);
    return it == coeffs_.end() ? Complex(0.0) : it->second;
  }

  /// Coefficient at the identity frequency (the symbol's mean).
  Complex mean_coeff() const {
    return coeff(kind_ == GroupKind::additive
                     ? Frequency::additive(std::vector<std::int64_t>(dim_, 0))
                     : Frequency::multiplicative(FactoredRational::one()));
  }

  double one_norm() const {
    double s = 0;
    for (const auto& [f, c] : coeffs_) s += std::abs(c);
    return s;
  }

  double l2_norm_sq() const {
    double s = 0;
    for (const auto& [f, c] : coeffs_) s += std::norm(c);
    return s;
  }

  double max_abs_coeff() const {
    double s = 0;
    for (const auto& [f, c] : coeffs_) s = std::max(s, std::abs(c));
    return s;
  }

  /// coeff(f^{-1}) == conj(coeff(f)) for every stored frequency, within
  /// 1e-12 of the coefficient scale.
  bool is_hermitian() const {
    const double tol = 1e-12 * (1.0 + max_abs_coeff());
    for (const auto& [f, c] : coeffs_)
      if (std::abs(coeff(f.inverse()) - std::conj(c)) > tol) return false;
    return true;
  }

  /// Variable slots that occur with a nonzero exponent, sorted.
  std::vector<int> active_variables() const {
    std::vector<int> vars;
    for (const auto& [f, c] : coeffs_) {
      if (kind_ == GroupKind::additive) {
        const auto& a = f.alpha();
        for (std::size_t i = 0; i < a.size(); ++i)
          if (a[i] != 0) vars.push_back(static_cast<int>(i));
      } else {
        for (const auto& pp : f.rational().powers())
          vars.push_back(static_cast<int>(pp.prime_index));
      }
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
  }

  /// Largest |exponent| of the given variable slot over the support.
  int degree_of(int var) const {
    std::int64_t deg = 0;
    for (const auto& [f, c] : coeffs_) {
      if (kind_ == GroupKind::additive) {
        const auto& a = f.alpha();
        if (var < static_cast<int>(a.size()))
          deg = std::max<std::int64_t>(deg, std::abs(a[var]));
      } else {
        deg = std::max<std::int64_t>(
            deg, std::abs(static_cast<std::int64_t>(
                     f.rational().exponent_of(static_cast<std::uint32_t>(var)))));
      }
    }
    return static_cast<int>(deg);
  }

  /// Checks a torus point against the support: every active slot present,
  /// every supplied value unit-modulus within 1e-9.
  void check_point(const TorusPoint& z) const {
    for (const auto& zi : z)
      if (std::abs(std::abs(zi) - 1.0) > 1e-9)
        throw std::domain_error("torus point: coordinate off the unit circle");
    auto vars = active_variables();
    if (!vars.empty() && static_cast<std::size_t>(vars.back()) >= z.size())
      throw std::domain_error("torus point: missing coordinate " +
                              std::to_string(vars.back()));
    if (kind_ == GroupKind::additive && z.size() < static_cast<std::size_t>(dim_))
      throw std::domain_error("torus point: expected " + std::to_string(dim_) +
                              " coordinates");
  }

  friend bool operator==(const Symbol&, const Symbol&) = default;

 private:
  Symbol(GroupKind kind, int dim) : kind_(kind), dim_(dim) {}

  void check_frequency(const Frequency& f) const {
    if (f.kind() != kind_)
      throw std::domain_error("symbol: frequency kind mismatch");
    if (kind_ == GroupKind::additive &&
        f.alpha().size() != static_cast<std::size_t>(dim_))
      throw std::domain_error("symbol: frequency dimension mismatch");
  }

  GroupKind kind_;
  int dim_;  // additive only
  std::map<Frequency, Complex> coeffs_;
};

/// Pointwise evaluation: sum of c * z^alpha over the support.
inline Complex eval(const Symbol& s, const TorusPoint& z) {
  s.check_point(z);
  Complex acc = 0.0;
  for (const auto& [f, c] : s.coeffs()) {
    Complex term = c;
    if (s.kind() == GroupKind::additive) {
      const auto& a = f.alpha();
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) term *= unit_power(z[i], a[i]);
    } else {
      for (const auto& pp : f.rational().powers())
        term *= unit_power(z[pp.prime_index], pp.exponent);
    }
    acc += term;
  }
  return acc;
}

/// Evaluation of a hermitian symbol, forced real.
inline double eval_real(const Symbol& s, const TorusPoint& z) {
  if (!s.is_hermitian())
    throw std::domain_error("eval_real: symbol is not hermitian");
  Complex v = eval(s, z);
  return v.real();
}

/// Value of the Bohr lift at the vertical point (2^{it}, 3^{it}, ...):
/// sum of c(q) * q^{it}.
inline Complex bohr_eval(const Symbol& s, double t) {
  if (s.kind() != GroupKind::multiplicative)
    throw std::domain_error("bohr_eval: multiplicative symbols only");
  Complex acc = 0.0;
  for (const auto& [f, c] : s.coeffs()) {
    double logq = f.rational().log_value();
    acc += c * std::polar(1.0, t * logq);
  }
  return acc;
}

/// Coefficient convolution: the symbol of the pointwise product.
inline Symbol convolve(const Symbol& a, const Symbol& b) {
  if (a.kind() != b.kind() || a.dim() != b.dim())
    throw std::domain_error("convolve: symbol kind mismatch");
  Symbol out = a.kind() == GroupKind::additive ? Symbol::additive(a.dim())
                                               : Symbol::multiplicative();
  std::map<Frequency, Complex> acc;
  for (const auto& [fa, ca] : a.coeffs())
    for (const auto& [fb, cb] : b.coeffs()) acc[fa.compose(fb)] += ca * cb;
  for (const auto& [f, c] : acc) out.set(f, c);
  return out;
}

/// n-fold pointwise power of the symbol (n >= 0; the 0th power is the
/// constant 1).  Support growth beyond the cap raises resource_error.
inline Symbol convolve_power(const Symbol& s, int n,
                             std::size_t support_cap = std::size_t{1} << 17) {
  if (n < 0) throw std::domain_error("convolve_power: negative power");
  Symbol acc = s.kind() == GroupKind::additive ? Symbol::additive(s.dim())
                                               : Symbol::multiplicative();
  acc.set(s.kind() == GroupKind::additive
              ? Frequency::additive(std::vector<std::int64_t>(s.dim(), 0))
              : Frequency::multiplicative(FactoredRational::one()),
          1.0);
  for (int i = 0; i < n; ++i) {
    acc = convolve(acc, s);
    if (acc.support_size() > support_cap)
      throw resource_error("convolve_power: support exceeds cap");
  }
  return acc;
}

/// Symbol of the complex conjugate: c(q) -> conj(c(1/q)).
inline Symbol adjoint(const Symbol& s) {
  Symbol out = s.kind() == GroupKind::additive ? Symbol::additive(s.dim())
                                               : Symbol::multiplicative();
  for (const auto& [f, c] : s.coeffs()) out.set(f.inverse(), std::conj(c));
  return out;
}

/// Keeps the frequencies with every coordinate divisible by ell: the symbol
/// phi_ell obtained by averaging phi over the ell-th roots of unity.
inline Symbol ell_average(const Symbol& s, std::int64_t ell) {
  if (s.kind() != GroupKind::additive)
    throw std::domain_error("ell_average: additive symbols only");
  if (ell < 1) throw std::domain_error("ell_average: ell must be >= 1");
  Symbol out = Symbol::additive(s.dim());
  for (const auto& [f, c] : s.coeffs()) {
    const auto& a = f.alpha();
    if (std::all_of(a.begin(), a.end(), [&](auto x) { return x % ell == 0; }))
      out.set(f, c);
  }
  return out;
}

/// Diagonal sublattice projection: keeps frequencies with ell_i | alpha_i
/// for every coordinate.
inline Symbol sublattice_project(const Symbol& s,
                                 const std::vector<std::int64_t>& ell) {
  if (s.kind() != GroupKind::additive)
    throw std::domain_error("sublattice_project: additive symbols only");
  if (ell.size() != static_cast<std::size_t>(s.dim()))
    throw std::domain_error("sublattice_project: dimension mismatch");
  for (auto l : ell)
    if (l < 1) throw std::domain_error("sublattice_project: ell must be >= 1");
  Symbol out = Symbol::additive(s.dim());
  for (const auto& [f, c] : s.coeffs()) {
    const auto& a = f.alpha();
    bool keep = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] % ell[i] != 0) keep = false;
    if (keep) out.set(f, c);
  }
  return out;
}

/// Keeps the frequencies supported on the first d primes.
inline Symbol tail_project(const Symbol& s, int d) {
  if (s.kind() != GroupKind::multiplicative)
    throw std::domain_error("tail_project: multiplicative symbols only");
  if (d < 0) throw std::domain_error("tail_project: d must be >= 0");
  Symbol out = Symbol::multiplicative();
  for (const auto& [f, c] : s.coeffs()) {
    const auto& pp = f.rational().powers();
    if (std::all_of(pp.begin(), pp.end(), [&](const PrimePower& p) {
          return p.prime_index < static_cast<std::uint32_t>(d);
        }))
      out.set(f, c);
  }
  return out;
}

/// Truncated zeta symbol: c(n) = n^{-gamma} for n = 1..cutoff.
/// Square-summable only for gamma > 1/2; the Dirichlet-series reference
/// limits additionally need gamma > 1, which is enforced here.
inline Symbol zeta_symbol(double gamma, std::uint64_t cutoff) {
  if (!(gamma > 1.0))
    throw std::domain_error("zeta_symbol: gamma must exceed 1");
  if (cutoff < 1) throw std::domain_error("zeta_symbol: empty cutoff");
  Symbol out = Symbol::multiplicative();
  for (std::uint64_t n = 1; n <= cutoff; ++n)
    out.set(Frequency::multiplicative(factor(n).as_rational()),
            std::pow(static_cast<double>(n), -gamma));
  return out;
}

/// |Bf|^2 for the lift Bf = sum a_n z^{alpha(n)} of f = sum a_n e_n; the
/// hermitian symbol whose truncations are Gram matrices of dilated
/// functions.  a is indexed from n = 1.
inline Symbol dilation_symbol(const std::vector<Complex>& a) {
  if (a.empty()) throw std::domain_error("dilation_symbol: empty coefficients");
  Symbol lift = Symbol::multiplicative();
  for (std::size_t n = 1; n <= a.size(); ++n)
    lift.set(Frequency::multiplicative(factor(n).as_rational()), a[n - 1]);
  return convolve(lift, adjoint(lift));
}

namespace detail {

/// Iterates a tensor grid: sizes[i] equally spaced angles for active
/// variable vars[i]; fn receives a torus point covering all slots.
template <typename Fn>
void for_each_grid_point(const std::vector<int>& vars,
                         const std::vector<std::size_t>& sizes, int max_slot,
                         Fn&& fn) {
  TorusPoint z(static_cast<std::size_t>(max_slot) + 1, Complex(1.0, 0.0));
  std::vector<std::size_t> idx(vars.size(), 0);
  const double two_pi = 2.0 * std::acos(-1.0);
  while (true) {
    for (std::size_t i = 0; i < vars.size(); ++i)
      z[vars[i]] = std::polar(1.0, two_pi * static_cast<double>(idx[i]) /
                                       static_cast<double>(sizes[i]));
    fn(static_cast<const TorusPoint&>(z));
    std::size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (++idx[i] < sizes[i]) break;
      idx[i] = 0;
    }
    if (i == idx.size()) break;
  }
}

}  // namespace detail

/// Max of |phi| over a tensor grid with refine*degree+1 points per active
/// variable.  A lower bound for the sup norm; refine trades cost for
/// tightness.
inline double grid_sup(const Symbol& s, int refine = 16,
                       std::size_t point_cap = std::size_t{1} << 22) {
  auto vars = s.active_variables();
  if (vars.empty()) return std::abs(s.mean_coeff());
  std::vector<std::size_t> sizes;
  std::size_t total = 1;
  for (int v : vars) {
    std::size_t n = static_cast<std::size_t>(refine) *
                        static_cast<std::size_t>(s.degree_of(v)) +
                    1;
    sizes.push_back(n);
    total *= n;
    if (total > point_cap) throw resource_error("grid_sup: grid too large");
  }
  double best = 0.0;
  // Additive evaluation checks the point width against dim, so inactive
  // trailing variables still need a (unit) slot.
  int top = s.kind() == GroupKind::additive ? s.dim() - 1 : vars.back();
  detail::for_each_grid_point(vars, sizes, top, [&](const TorusPoint& z) {
    best = std::max(best, std::abs(eval(s, z)));
  });
  return best;
}

// ---------------------------------------------------------------------------
// Text format: one "<frequency> <re> <im>" triple per line, frequency either
// "q=a" / "q=a/b" (multiplicative) or "alpha=(i1,...,id)" (additive).
// Blank lines and lines starting with '#' are skipped.

inline Frequency parse_frequency(const std::string& token) {
  if (token.rfind("q=", 0) == 0) {
    std::string body = token.substr(2);
    auto slash = body.find('/');
    std::uint64_t num = 0, den = 1;
    try {
      num = std::stoull(body.substr(0, slash));
      if (slash != std::string::npos) den = std::stoull(body.substr(slash + 1));
    } catch (const std::exception&) {
      throw parse_error("bad rational frequency: " + token);
    }
    if (num == 0 || den == 0)
      throw parse_error("bad rational frequency: " + token);
    return Frequency::multiplicative(ratio(factor(num), factor(den)));
  }
  if (token.rfind("alpha=(", 0) == 0 && token.back() == ')') {
    std::string body = token.substr(7, token.size() - 8);
    std::vector<std::int64_t> alpha;
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        alpha.push_back(std::stoll(part));
      } catch (const std::exception&) {
        throw parse_error("bad additive frequency: " + token);
      }
    }
    if (alpha.empty()) throw parse_error("bad additive frequency: " + token);
    return Frequency::additive(std::move(alpha));
  }
  throw parse_error("unrecognized frequency token: " + token);
}

inline Symbol parse_symbol(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool have_kind = false;
  Symbol out = Symbol::multiplicative();
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    double re = 0, im = 0;
    if (!(ls >> re >> im))
      throw parse_error("symbol line " + std::to_string(line_no) +
                        ": expected '<frequency> <re> <im>'");
    Frequency f = parse_frequency(tok);
    if (!have_kind) {
      out = f.kind() == GroupKind::additive
                ? Symbol::additive(static_cast<int>(f.alpha().size()))
                : Symbol::multiplicative();
      have_kind = true;
    }
    try {
      out.set(f, Complex(re, im));
    } catch (const std::domain_error& e) {
      throw parse_error("symbol line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!have_kind) throw parse_error("symbol text has no coefficient lines");
  return out;
}

inline std::string format_frequency(const Frequency& f) {
  return f.kind() == GroupKind::multiplicative ? "q=" + f.rational().str()
                                               : "alpha=" + f.str();
}

inline std::string format_symbol(const Symbol& s) {
  std::string out;
  char buf[80];
  for (const auto& [f, c] : s.coeffs()) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g\n", c.real(), c.imag());
    out += format_frequency(f) + buf;
  }
  return out;
}

}  // namespace szegolab

template <>
struct std::hash<szegolab::Frequency> {
  std::size_t operator()(const szegolab::Frequency& f) const { return f.hash(); }
};
