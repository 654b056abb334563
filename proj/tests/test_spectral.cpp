#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include <szegolab/index_set.hpp>
#include <szegolab/operators.hpp>
#include <szegolab/spectral.hpp>
#include <szegolab/symbol.hpp>

using namespace szegolab;

namespace {

Frequency mfreq(std::uint64_t num, std::uint64_t den) {
  return Frequency::multiplicative(ratio(factor(num), factor(den)));
}

Symbol cosine_symbol(std::int64_t n = 1) {      // z^n + conj
  auto s = Symbol::additive(1);
  s.set(Frequency::additive({n}), 1.0);
  s.set(Frequency::additive({-n}), 1.0);
  return s;
}

Symbol mult_two_sided(std::uint64_t a, std::uint64_t b) {  // z^q + z^{1/q}
  auto s = Symbol::multiplicative();
  s.set(mfreq(a, b), 1.0);
  s.set(mfreq(b, a), 1.0);
  return s;
}

Symbol random_hermitian_mult(std::mt19937_64& rng, int max_terms) {
  std::uniform_int_distribution<int> nterm(1, max_terms);
  std::uniform_int_distribution<int> expo(-2, 2);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  auto s = Symbol::multiplicative();
  int terms = nterm(rng);
  for (int t = 0; t < terms; ++t) {
    std::vector<PrimePower> pp;
    for (std::uint32_t p = 0; p < 2; ++p) {
      int e = expo(rng);
      if (e) pp.push_back({p, e});
    }
    auto f = Frequency::multiplicative(FactoredRational(pp));
    Complex c(coeff(rng), coeff(rng));
    s.set(f, s.coeff(f) + c);
    s.set(f.inverse(), s.coeff(f.inverse()) + std::conj(c));
  }
  if (s.support_size() == 0) s.set(Frequency::multiplicative({}), 1.0);
  return s;
}

Symbol random_hermitian_add(std::mt19937_64& rng, int max_terms) {
  std::uniform_int_distribution<int> nterm(1, max_terms);
  std::uniform_int_distribution<std::int64_t> expo(-3, 3);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  auto s = Symbol::additive(1);
  int terms = nterm(rng);
  for (int t = 0; t < terms; ++t) {
    std::vector<std::int64_t> alpha{expo(rng)};
    auto f = Frequency::additive(alpha);
    Complex c(coeff(rng), coeff(rng));
    s.set(f, s.coeff(f) + c);
    s.set(f.inverse(), s.coeff(f.inverse()) + std::conj(c));
  }
  if (s.support_size() == 0) s.set(Frequency::additive({0}), 1.0);
  return s;
}

IndexSet random_mult_set(std::mt19937_64& rng, std::size_t max_size) {
  std::uniform_int_distribution<std::uint64_t> elem(1, 60);
  std::uniform_int_distribution<std::size_t> count(2, max_size);
  std::vector<FactoredNatural> elems;
  std::size_t want = count(rng);
  for (std::size_t i = 0; i < want; ++i) elems.push_back(factor(elem(rng)));
  return IndexSet::from_naturals(std::move(elems));
}

IndexSet random_add_set(std::mt19937_64& rng, std::size_t max_size) {
  std::uniform_int_distribution<int> elem(0, 40);
  std::uniform_int_distribution<std::size_t> count(2, max_size);
  std::vector<LatticePoint> elems;
  std::size_t want = count(rng);
  for (std::size_t i = 0; i < want; ++i)
    elems.push_back({BigInt(elem(rng))});
  return IndexSet::from_lattice(std::move(elems));
}

}  // namespace

TEST_CASE("identity and scalar spectra", "[spectral]") {
  auto one = Symbol::multiplicative();
  one.set(Frequency::multiplicative({}), 1.0);
  auto spec = eigenvalues(truncate(one, natural_segment(6)));
  REQUIRE(spec.size == 6);
  for (double v : spec.values) REQUIRE(v == Catch::Approx(1.0).margin(1e-14));

  auto c = Symbol::multiplicative();
  c.set(Frequency::multiplicative({}), -2.5);
  auto single = IndexSet::from_naturals({factor(7)});
  auto s1 = eigenvalues(truncate(c, single));
  REQUIRE(s1.values == std::vector<double>{-2.5});
}

TEST_CASE("tridiagonal spectrum matches the closed form", "[spectral]") {
  const int N = 60;
  auto spec = eigenvalues(truncate(cosine_symbol(), additive_segment(N)));
  REQUIRE(spec.values.size() == static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    double expect =
        2.0 * std::cos((N - i) * std::numbers::pi / (N + 1));
    REQUIRE(spec.values[static_cast<std::size_t>(i)] ==
            Catch::Approx(expect).margin(1e-8));
  }
  double sum = 0.0;
  for (double v : spec.values) sum += v;
  REQUIRE(std::abs(sum) <= 1e-8 * N);
}

TEST_CASE("non-hermitian matrices are rejected by eigenvalues", "[spectral]") {
  auto s = Symbol::multiplicative();
  s.set(mfreq(2, 1), 1.0);
  REQUIRE_THROWS_AS(eigenvalues(truncate(s, natural_segment(8))),
                    std::domain_error);
}

TEST_CASE("spectra stay inside the coefficient one-norm", "[spectral]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_hermitian_mult(rng, 4);
    auto sigma = random_mult_set(rng, 40);
    auto spec = eigenvalues(truncate(s, sigma));
    double bound = s.one_norm() + 1e-10;
    REQUIRE(spec.values.front() >= -bound);
    REQUIRE(spec.values.back() <= bound);
  }
}

TEST_CASE("eigenvalue traces agree with power traces", "[spectral]") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    auto s = random_hermitian_mult(rng, 4);
    auto sigma = random_mult_set(rng, 60);
    auto op = truncate(s, sigma);
    auto spec = eigenvalues(op);
    double norm_bound =
        std::max({1.0, std::abs(spec.values.front()), spec.values.back()});
    for (int m = 1; m <= 6; ++m) {
      double via_eigs = 0.0;
      for (double v : spec.values) via_eigs += std::pow(v, m);
      double via_power = matrix_power(op.entries, m).trace().real();
      REQUIRE(std::abs(via_eigs - via_power) <=
              1e-8 * static_cast<double>(sigma.size()) *
                  std::pow(norm_bound, m));
    }
  }
}

TEST_CASE("normalized polynomial traces", "[spectral]") {
  std::mt19937_64 rng(123);
  auto s = random_hermitian_mult(rng, 4);
  auto sigma = random_mult_set(rng, 30);
  auto op = truncate(s, sigma);
  // f = 1: unitality, exact
  REQUIRE(trace_of_f(op, std::vector<double>{1.0}) == 1.0);
  // f = x: the mean coefficient sits on the whole diagonal
  double mean = s.mean_coeff().real();
  REQUIRE(trace_of_f(op, std::vector<double>{0.0, 1.0}) ==
          Catch::Approx(mean).margin(1e-10));
  // callable and polynomial paths agree
  auto spec = eigenvalues(op);
  double via_fn = trace_of_f(spec, [](double x) { return 1.0 + 2.0 * x * x; });
  double via_poly = trace_of_f(op, std::vector<double>{1.0, 0.0, 2.0});
  REQUIRE(via_fn == Catch::Approx(via_poly).margin(1e-12));
}

TEST_CASE("sharpness identity: x^2 trace equals twice the folner ratio",
          "[spectral]") {
  std::mt19937_64 rng(456);
  const std::vector<double> square{0.0, 0.0, 1.0};
  for (int trial = 0; trial < 15; ++trial) {
    auto sigma = random_add_set(rng, 25);
    std::int64_t n = 1 + static_cast<std::int64_t>(trial % 4);
    double lhs = trace_of_f(truncate(cosine_symbol(n), sigma), square);
    double rhs = 2.0 * folner_ratio(sigma, std::vector<std::int64_t>{n});
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10));
  }
  const std::pair<std::uint64_t, std::uint64_t> shifts[] = {
      {2, 1}, {3, 1}, {3, 2}, {5, 1}};
  for (int trial = 0; trial < 15; ++trial) {
    auto sigma = random_mult_set(rng, 25);
    auto [a, b] = shifts[trial % 4];
    double lhs = trace_of_f(truncate(mult_two_sided(a, b), sigma), square);
    double rhs = 2.0 * folner_ratio(sigma, ratio(factor(a), factor(b)));
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10));
  }
}

TEST_CASE("interval counts with boundary tallies", "[spectral]") {
  const int N = 100;
  auto spec = eigenvalues(truncate(cosine_symbol(), additive_segment(N)));
  auto whole = count_in_interval(spec, -3.0, 3.0);
  REQUIRE(whole.fraction == 1.0);
  REQUIRE(whole.boundary == 0);
  auto below = count_in_interval(spec, -10.0, -5.0);
  REQUIRE(below.fraction == 0.0);
  auto half = count_in_interval(spec, 0.0, 2.0);
  REQUIRE(half.fraction == 0.5);        // 50 of 100 strictly positive
  REQUIRE(half.boundary == 0);
  REQUIRE_THROWS_AS(count_in_interval(spec, 1.0, 1.0), std::domain_error);

  // eigenvalues exactly on an endpoint land in the boundary tally
  auto one = Symbol::multiplicative();
  one.set(Frequency::multiplicative({}), 1.0);
  auto id_spec = eigenvalues(truncate(one, natural_segment(4)));
  auto touching = count_in_interval(id_spec, 0.0, 1.0);
  REQUIRE(touching.fraction == 0.0);
  REQUIRE(touching.boundary == 4);
}

TEST_CASE("singular moments", "[spectral]") {
  auto one = Symbol::multiplicative();
  one.set(Frequency::multiplicative({}), 1.0);
  auto id = truncate(one, natural_segment(5));
  for (int m = 1; m <= 3; ++m)
    REQUIRE(singular_moments(id, m) == Catch::Approx(1.0).margin(1e-13));

  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  auto s = Symbol::multiplicative();
  s.set(mfreq(2, 1), Complex(coeff(rng), coeff(rng)));
  s.set(mfreq(3, 1), Complex(coeff(rng), coeff(rng)));
  s.set(mfreq(1, 6), Complex(coeff(rng), coeff(rng)));
  auto op = truncate(s, natural_segment(30));
  double frob = op.entries.squaredNorm() / 30.0;
  REQUIRE(singular_moments(op, 1) == Catch::Approx(frob).margin(1e-10));
  REQUIRE_THROWS_AS(singular_moments(op, 0), std::domain_error);
}

TEST_CASE("singular values large-matrix path matches the SVD path",
          "[spectral]") {
  std::mt19937_64 rng(31337);
  auto s = random_hermitian_mult(rng, 5);
  s.set(mfreq(5, 1), Complex(0.3, 0.1));   // break hermiticity
  auto op = truncate(s, natural_segment(40));
  auto svd_path = singular_values(op, 768);
  auto gram_path = singular_values(op, 8);
  REQUIRE(svd_path.values.size() == gram_path.values.size());
  // the gram route loses half the digits near zero: sqrt(eps)*||T|| floor
  double floor = 1e-7 * (1.0 + svd_path.values.front());
  for (std::size_t i = 0; i < svd_path.values.size(); ++i)
    REQUIRE(svd_path.values[i] ==
            Catch::Approx(gram_path.values[i]).margin(floor));
}

TEST_CASE("normalized determinants", "[spectral]") {
  auto one = Symbol::multiplicative();
  one.set(Frequency::multiplicative({}), 1.0);
  REQUIRE(normalized_det(truncate(one, natural_segment(9))) ==
          Catch::Approx(1.0).margin(1e-12));

  // phi = 3 + z + zbar: geometric means approach exp(int log phi) = (3+sqrt 5)/2
  auto s = cosine_symbol();
  s.set(Frequency::additive({0}), 3.0);
  double at500 = normalized_det(truncate(s, additive_segment(500)));
  double target = (3.0 + std::sqrt(5.0)) / 2.0;
  REQUIRE(std::abs(at500 - target) <= 5e-3);

  // quadrature oracle for the target constant itself
  const int q = 1 << 12;
  double integral = 0.0;
  for (int i = 0; i < q; ++i) {
    double theta = 2.0 * std::numbers::pi * (i + 0.5) / q;
    integral += std::log(3.0 + 2.0 * std::cos(theta));
  }
  integral /= q;
  REQUIRE(std::exp(integral) == Catch::Approx(target).margin(1e-12));

  // indefinite matrices are refused
  REQUIRE_THROWS_AS(
      normalized_det(truncate(cosine_symbol(), additive_segment(6))),
      std::domain_error);
}

TEST_CASE("AM-GM: normalized det below normalized trace", "[spectral]") {
  std::mt19937_64 rng(9001);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_hermitian_mult(rng, 3);
    double lift = s.one_norm() + 0.5;
    s.set(Frequency::multiplicative({}),
          s.coeff(Frequency::multiplicative({})) + lift);
    auto op = truncate(s, random_mult_set(rng, 25));
    double det = normalized_det(op);
    double tr = trace_of_f(op, std::vector<double>{0.0, 1.0});
    REQUIRE(det <= tr + 1e-10);
  }
}

TEST_CASE("trace-norm inequality for compressed powers", "[spectral]") {
  // equality case: n=2, phi = z + zbar on a segment; both sides are exactly 2
  auto rep = prop_b3_check(cosine_symbol(), additive_segment(50), 2);
  REQUIRE(rep.lhs == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(rep.rhs == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(rep.holds);
  REQUIRE(rep.rhs_certified >= rep.rhs - 1e-12);

  // no leakage: a constant symbol commutes with the projection
  auto c = Symbol::multiplicative();
  c.set(Frequency::multiplicative({}), 0.7);
  auto flat = prop_b3_check(c, natural_segment(10), 3);
  REQUIRE(flat.lhs <= 1e-12);
  REQUIRE(flat.holds);

  auto bad = Symbol::multiplicative();
  bad.set(mfreq(2, 1), 1.0);
  REQUIRE_THROWS_AS(prop_b3_check(bad, natural_segment(5), 2),
                    std::domain_error);
  REQUIRE_THROWS_AS(prop_b3_check(c, natural_segment(5), 1),
                    std::domain_error);
}

TEST_CASE("trace-norm inequality holds across random instances", "[spectral]") {
  std::mt19937_64 rng(60606);
  std::uniform_int_distribution<int> power(2, 5);
  for (int trial = 0; trial < 12; ++trial) {
    auto s = random_hermitian_mult(rng, 3);
    auto sigma = random_mult_set(rng, 15);
    auto rep = prop_b3_check(s, sigma, power(rng));
    INFO("mult trial " << trial << ": lhs " << rep.lhs << " rhs " << rep.rhs);
    REQUIRE(rep.holds);
    REQUIRE(rep.lhs <= rep.rhs_certified * (1.0 + 1e-8));
  }
  for (int trial = 0; trial < 12; ++trial) {
    auto s = random_hermitian_add(rng, 3);
    auto sigma = random_add_set(rng, 15);
    auto rep = prop_b3_check(s, sigma, power(rng));
    INFO("add trial " << trial << ": lhs " << rep.lhs << " rhs " << rep.rhs);
    REQUIRE(rep.holds);
  }
}

TEST_CASE("finite augmentations leave normalized moments in place",
          "[spectral]") {
  auto s = cosine_symbol();
  auto sigma = even_segment(50, 2);
  // F inside sigma: identical sets, identical moments
  std::vector<LatticePoint> inside = {{BigInt(0)}, {BigInt(2)}};
  auto drift0 =
      finite_augmentation_drift(s, sigma, IndexSet::from_lattice(inside), 3);
  for (double d : drift0) REQUIRE(d == 0.0);

  auto extra = additive_segment(5);       // {0..4}, partly outside
  auto small = finite_augmentation_drift(s, even_segment(50, 2), extra, 3);
  auto large = finite_augmentation_drift(s, even_segment(500, 2), extra, 3);
  for (std::size_t m = 0; m < 3; ++m) {
    REQUIRE(large[m] <= small[m] + 1e-12);
    REQUIRE(large[m] <= 0.05);
  }
}
