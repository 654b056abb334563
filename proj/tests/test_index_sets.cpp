#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include <szegolab/arith.hpp>
#include <szegolab/index_set.hpp>

using namespace szegolab;

namespace {

FactoredRational mrat(std::uint64_t a, std::uint64_t b) {
  return ratio(factor(a), factor(b));
}

}  // namespace

TEST_CASE("natural segment basics", "[index]") {
  auto s = natural_segment(10);
  REQUIRE(s.kind() == GroupKind::multiplicative);
  REQUIRE(s.size() == 10);
  for (std::uint64_t k = 1; k <= 10; ++k) {
    REQUIRE(s.naturals()[k - 1].value() == BigInt(k));
    REQUIRE(s.contains(factor(k)));
  }
  REQUIRE_FALSE(s.contains(factor(11)));
  REQUIRE(s.label(6) == "7");
  REQUIRE_THROWS_AS(natural_segment(0), std::domain_error);
  REQUIRE_THROWS_AS(s.lattice(), std::domain_error);
}

TEST_CASE("additive segments and progressions", "[index]") {
  auto s = additive_segment(5);
  REQUIRE(s.kind() == GroupKind::additive);
  REQUIRE(s.dim() == 1);
  REQUIRE(s.size() == 5);
  REQUIRE(s.contains(LatticePoint{BigInt(0)}));
  REQUIRE(s.contains(LatticePoint{BigInt(4)}));
  REQUIRE_FALSE(s.contains(LatticePoint{BigInt(5)}));
  REQUIRE(s.label(0) == "0");

  auto e = even_segment(4, 2);
  REQUIRE(e.size() == 5);
  for (std::uint64_t k = 0; k <= 4; ++k)
    REQUIRE(e.contains(LatticePoint{BigInt(2 * k)}));
  REQUIRE_FALSE(e.contains(LatticePoint{BigInt(3)}));

  auto t = even_segment(3, 5);
  REQUIRE(t.size() == 4);
  REQUIRE(t.contains(LatticePoint{BigInt(15)}));
  REQUIRE_THROWS_AS(even_segment(3, 0), std::domain_error);
  REQUIRE_THROWS_AS(e.naturals(), std::domain_error);
}

TEST_CASE("sparse powers reach beyond 64 bits", "[index]") {
  auto s = sparse_powers(5);
  REQUIRE(s.kind() == GroupKind::additive);
  REQUIRE(s.size() == 5);
  REQUIRE(s.contains(LatticePoint{BigInt(27)}));
  REQUIRE_FALSE(s.contains(LatticePoint{BigInt(2)}));

  auto big = sparse_powers(500);
  REQUIRE(big.size() == 500);
  // 3^499 has 239 decimal digits; the label must carry it exactly.
  std::string top = big.label(499);
  REQUIRE(top.size() == 239);
  BigInt check = 1;
  for (int i = 0; i < 499; ++i) check *= 3;
  REQUIRE(top == check.str());

  auto m = sparse_powers(4, 2, GroupKind::multiplicative);
  REQUIRE(m.kind() == GroupKind::multiplicative);
  REQUIRE(m.size() == 4);
  REQUIRE(m.contains(factor(8)));
  REQUIRE_FALSE(m.contains(factor(3)));
  REQUIRE_THROWS_AS(sparse_powers(3, 1), std::domain_error);
}

TEST_CASE("exponent box enumerates all divisor patterns", "[index]") {
  auto s = exponent_box({1, 1});
  REQUIRE(s.size() == 4);
  std::vector<std::uint64_t> values;
  for (const auto& e : s.naturals())
    values.push_back(e.value_u64());
  REQUIRE(values == std::vector<std::uint64_t>{1, 2, 3, 6});

  auto t = exponent_box({2, 1, 1});
  REQUIRE(t.size() == 12);   // 3 * 2 * 2
  REQUIRE(t.contains(factor(60)));   // 2^2 * 3 * 5
  REQUIRE_FALSE(t.contains(factor(8)));
  REQUIRE_FALSE(t.contains(factor(7)));

  REQUIRE_THROWS_AS(exponent_box({}), std::domain_error);
  REQUIRE_THROWS_AS(exponent_box({1200, 1200}), resource_error);
}

TEST_CASE("embedded and sublattice boxes", "[index]") {
  auto e = embedded_lattice_box(2, {1, 2});
  REQUIRE(e.kind() == GroupKind::multiplicative);
  REQUIRE(e.size() == 6);
  REQUIRE(e.contains(factor(18)));   // 2 * 3^2
  REQUIRE_THROWS_AS(embedded_lattice_box(3, {1, 2}), std::domain_error);

  auto s = sublattice_box({2, 3}, 2);
  REQUIRE(s.kind() == GroupKind::additive);
  REQUIRE(s.dim() == 2);
  REQUIRE(s.size() == 9);
  REQUIRE(s.contains(LatticePoint{BigInt(4), BigInt(6)}));
  REQUIRE_FALSE(s.contains(LatticePoint{BigInt(1), BigInt(0)}));
  REQUIRE(s.label(0) == "(0,0)");
  REQUIRE_THROWS_AS(sublattice_box({0}, 2), std::domain_error);
}

TEST_CASE("lattice construction validates input", "[index]") {
  REQUIRE_THROWS_AS(IndexSet::from_lattice({}), std::domain_error);
  REQUIRE_THROWS_AS(
      IndexSet::from_lattice({LatticePoint{BigInt(-1)}}),
      std::domain_error);
  REQUIRE_THROWS_AS(
      IndexSet::from_lattice(
          {LatticePoint{BigInt(0)}, LatticePoint{BigInt(0), BigInt(1)}}),
      std::domain_error);
  // duplicates collapse
  auto s = IndexSet::from_lattice(
      {LatticePoint{BigInt(1)}, LatticePoint{BigInt(1)}, LatticePoint{BigInt(0)}});
  REQUIRE(s.size() == 2);
}

TEST_CASE("folner ratio of natural segment is floor(N/n)/N", "[index]") {
  for (std::uint64_t n_set : {30u, 100u, 101u}) {
    auto s = natural_segment(n_set);
    for (std::uint64_t q : {2u, 3u, 5u, 7u, 12u}) {
      // k*q <= N and k <= N  <=>  k <= floor(N/q): the count is exact.
      std::size_t expected = static_cast<std::size_t>(n_set / q);
      REQUIRE(folner_count(s, factor(q).as_rational()) == expected);
      REQUIRE(folner_ratio(s, factor(q).as_rational()) ==
              static_cast<double>(expected) / static_cast<double>(n_set));
    }
    // identity shift
    REQUIRE(folner_ratio(s, FactoredRational::one()) == 1.0);
  }
}

TEST_CASE("rational shifts force divisibility", "[index]") {
  auto s = natural_segment(10);
  // k * 3/2 in {1..10} needs k even and 3k/2 <= 10: k in {2,4,6}.
  REQUIRE(folner_count(s, mrat(3, 2)) == 3);
  // k / 2 in sigma needs k even: k in {2,...,10}.
  REQUIRE(folner_count(s, mrat(1, 2)) == 5);

  // Brute-force oracle over random sets and shifts.
  std::mt19937_64 rng(20240811);
  std::uniform_int_distribution<std::uint64_t> elem(1, 60);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> raw;
    for (int i = 0; i < 25; ++i) raw.push_back(elem(rng));
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    std::vector<FactoredNatural> elems;
    for (auto v : raw) elems.push_back(factor(v));
    auto sigma = IndexSet::from_naturals(elems);

    std::uint64_t a = elem(rng) % 6 + 1, b = elem(rng) % 6 + 1;
    auto q = mrat(a, b);
    std::size_t expected = 0;
    for (auto k : raw) {
      if ((k * a) % b != 0) continue;
      std::uint64_t img = k * a / b;
      if (std::binary_search(raw.begin(), raw.end(), img)) ++expected;
    }
    REQUIRE(folner_count(sigma, q) == expected);
  }
}

TEST_CASE("shift count inequality for composite shifts", "[index]") {
  // #{n : (a/b) n in sigma} >= #{n : a n in sigma} + #{n : n/b in sigma} - #sigma
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::uint64_t> elem(1, 200);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<FactoredNatural> elems;
    for (int i = 0; i < 60; ++i) elems.push_back(factor(elem(rng)));
    auto sigma = IndexSet::from_naturals(elems);
    std::uint64_t a = elem(rng) % 5 + 1, b = elem(rng) % 5 + 1;
    auto lhs = folner_count(sigma, mrat(a, b));
    auto up = folner_count(sigma, factor(a).as_rational());
    auto down = folner_count(sigma, mrat(1, b));
    REQUIRE(lhs + sigma.size() >= up + down);
  }
}

TEST_CASE("exponent box folner ratio on a prime shift is A/(A+1)", "[index]") {
  for (std::uint32_t A : {3u, 7u, 20u}) {
    for (std::uint32_t B : {2u, 9u}) {
      auto s = exponent_box({A, B});
      // multiplying by 2 stays in the box iff the exponent of 2 is < A.
      double expect2 = static_cast<double>(A) / (A + 1);
      double expect3 = static_cast<double>(B) / (B + 1);
      REQUIRE(folner_ratio(s, factor(2).as_rational()) ==
              Catch::Approx(expect2).margin(1e-15));
      REQUIRE(folner_ratio(s, factor(3).as_rational()) ==
              Catch::Approx(expect3).margin(1e-15));
      // shifting by a prime outside the box kills everything
      REQUIRE(folner_count(s, factor(5).as_rational()) == 0);
    }
  }
}

TEST_CASE("additive shifts count overlaps exactly", "[index]") {
  auto s = additive_segment(10);
  REQUIRE(folner_count(s, std::vector<std::int64_t>{3}) == 7);
  REQUIRE(folner_count(s, std::vector<std::int64_t>{-3}) == 7);
  REQUIRE(folner_count(s, std::vector<std::int64_t>{0}) == 10);
  REQUIRE(folner_count(s, std::vector<std::int64_t>{10}) == 0);
  REQUIRE_THROWS_AS(folner_count(s, std::vector<std::int64_t>{1, 2}),
                    std::domain_error);
  REQUIRE_THROWS_AS(folner_count(s, mrat(2, 1)), std::domain_error);

  auto e = even_segment(100, 2);        // {0,2,...,200}
  REQUIRE(folner_count(e, std::vector<std::int64_t>{2}) == 100);
  REQUIRE(folner_count(e, std::vector<std::int64_t>{1}) == 0);

  auto box = sublattice_box({1, 1}, 4);  // {0..4}^2
  REQUIRE(folner_count(box, std::vector<std::int64_t>{1, 1}) == 16);
  REQUIRE(folner_count(box, std::vector<std::int64_t>{1, -1}) == 16);
}

TEST_CASE("frequency shifts route by kind", "[index]") {
  auto s = natural_segment(12);
  auto f = Frequency::multiplicative(mrat(2, 1));
  REQUIRE(folner_count(s, f) == 6);
  auto a = additive_segment(12);
  auto g = Frequency::additive({4});
  REQUIRE(folner_count(a, g) == 8);
}

TEST_CASE("sparse sets are nowhere folner", "[index]") {
  auto s = sparse_powers(40);   // {1,3,...,3^39} in Z_+
  // 3^j + n = 3^k has at most one solution per shift: gaps grow geometrically.
  REQUIRE(folner_count(s, std::vector<std::int64_t>{1}) == 0);
  REQUIRE(folner_count(s, std::vector<std::int64_t>{2}) == 1);   // 1 -> 3
  REQUIRE(folner_count(s, std::vector<std::int64_t>{4}) == 0);
  REQUIRE(folner_count(s, std::vector<std::int64_t>{6}) == 1);   // 3 -> 9
  REQUIRE(folner_count(s, std::vector<std::int64_t>{10}) == 0);
  auto m = sparse_powers(40, 3, GroupKind::multiplicative);
  // dividing by 3 maps all but the first element back into the set
  REQUIRE(folner_count(m, mrat(1, 3)) == 39);
  REQUIRE(folner_count(m, mrat(2, 1)) == 0);
}

TEST_CASE("finite unions perturb the ratio negligibly", "[index]") {
  auto sigma = natural_segment(500);
  std::vector<FactoredNatural> extra;
  for (std::uint64_t v : {501, 777, 1024, 2048, 5000}) extra.push_back(factor(v));
  auto aug = IndexSet::from_naturals(extra);
  auto joined = sigma.union_with(aug);
  REQUIRE(joined.size() == 505);
  for (std::uint64_t q : {2u, 3u, 7u}) {
    double r0 = folner_ratio(sigma, factor(q).as_rational());
    double r1 = folner_ratio(joined, factor(q).as_rational());
    // adding #F points moves both count and size by at most #F each
    REQUIRE(std::abs(r1 - r0) <= 3.0 * 5.0 / 500.0);
  }
  REQUIRE_THROWS_AS(sigma.union_with(additive_segment(3)), std::domain_error);
}

TEST_CASE("set families produce schedules", "[index]") {
  SetFamily f;
  f.kind = SetFamily::Kind::even_segment;
  f.ell = 3;
  auto s = f.make(0, 5);
  REQUIRE(s.size() == 6);
  REQUIRE(s.contains(LatticePoint{BigInt(15)}));

  SetFamily box;
  box.kind = SetFamily::Kind::exponent_box;
  box.axes = 2;
  auto b = box.make(0, 3);
  REQUIRE(b.size() == 16);

  SetFamily wbox;
  wbox.kind = SetFamily::Kind::exponent_box;
  wbox.axes = 2;
  wbox.log_weights = true;
  // bounds: floor(10/log2 2) = 10, floor(10/log2 3) = 6
  auto wb = wbox.make(0, 10);
  REQUIRE(wb.size() == 11 * 7);

  SetFamily alt;
  alt.kind = SetFamily::Kind::alternating;
  alt.first = std::make_shared<SetFamily>();
  alt.first->kind = SetFamily::Kind::additive_segment;
  alt.second = std::make_shared<SetFamily>();
  alt.second->kind = SetFamily::Kind::even_segment;
  alt.second->ell = 2;
  REQUIRE(alt.make(0, 8).size() == 8);    // {0..7}
  REQUIRE(alt.make(1, 8).size() == 9);    // {0,2,...,16}
  REQUIRE(alt.make(1, 8).contains(LatticePoint{BigInt(16)}));

  SetFamily aug;
  aug.kind = SetFamily::Kind::even_segment;
  aug.augment = std::make_shared<IndexSet>(additive_segment(4));
  auto as = aug.make(0, 10);              // {0,2,...,20} u {0,1,2,3}
  REQUIRE(as.size() == 13);
  REQUIRE(as.contains(LatticePoint{BigInt(3)}));

  SetFamily ex;
  ex.kind = SetFamily::Kind::explicit_sets;
  ex.sets.push_back(natural_segment(4));
  ex.sets.push_back(natural_segment(9));
  REQUIRE(ex.make(1, 0).size() == 9);
  REQUIRE_THROWS_AS(ex.make(2, 0), std::domain_error);
  REQUIRE_FALSE(ex.describe().empty());
}

TEST_CASE("set files parse explicit multiplicative sets", "[index]") {
  auto sets = parse_set_file("# two sets\n1 2 3\n\n2 4 8 16   # powers\n");
  REQUIRE(sets.size() == 2);
  REQUIRE(sets[0].size() == 3);
  REQUIRE(sets[1].size() == 4);
  REQUIRE(sets[1].contains(factor(16)));
  REQUIRE_THROWS_AS(parse_set_file("1 2 x"), parse_error);
  REQUIRE_THROWS_AS(parse_set_file("1 0 2"), parse_error);
  REQUIRE_THROWS_AS(parse_set_file("# nothing\n"), parse_error);
}
