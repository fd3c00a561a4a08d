#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "doctest.h"
#include "rgkit/amenable.hpp"
#include "rgkit/errors.hpp"
#include "rgkit/schreier.hpp"

using namespace rgkit;

namespace {

std::shared_ptr<Presentation const> pres(char const* text) {
  return std::make_shared<Presentation const>(parse_presentation(text));
}

Word power(std::size_t gen, std::int64_t e) {
  std::vector<Letter> letters(static_cast<std::size_t>(std::abs(e)), letter_of(gen, e < 0));
  return Word::reduce_unchecked(letters);
}

Word monomial(std::int64_t i, std::int64_t j) { return power(0, i) * power(1, j); }

InvariantTransversal single_factor(Chain const& c, std::size_t level, std::vector<Word> words,
                                   GroupModel const& m) {
  InvariantTransversal t;
  t.level = level;
  t.generators = m.generator_count();
  t.factors = {std::move(words)};
  t.boundary = boundary_size(m, expand(t, *c.level(level).table, m).keys);
  return t;
}

Chain square_chain(std::size_t depth) {
  std::vector<LevelHom> homs;
  for (std::size_t j = 1; j <= depth; ++j) {
    std::uint64_t const q = std::uint64_t{1} << j;
    homs.push_back(AbelianHom{{q, q}, {{1, 0}, {0, 1}}});
  }
  return nested_kernel_chain(pres("gens a b; rels [a,b];"), homs, std::size_t{1} << 20);
}

// Exponents of a transversal of Z, or of Z^2, read off the words directly.
std::vector<std::int64_t> exponents(Word const& w, std::size_t rank) {
  std::vector<std::int64_t> e(rank, 0);
  for (Letter x : w.letters()) {
    e[generator_of(x)] += x > 0 ? 1 : -1;
  }
  return e;
}

std::size_t best_cover(FiniteGroup const& g, std::vector<std::size_t> const& a, std::size_t k) {
  std::size_t const n = g.order();
  std::size_t best = 0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(std::min(k, n)), true);
  do {
    std::set<std::size_t> covered;
    for (std::size_t x = 0; x < n; ++x) {
      if (pick[x]) {
        for (std::size_t y : a) {
          covered.insert(g.multiply(y, x));
        }
      }
    }
    best = std::max(best, covered.size());
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("covering lemma on small groups") {
  FiniteGroup z10 = FiniteGroup::generated_by({parse_cycles("(1,2,3,4,5,6,7,8,9,10)", 10)});
  REQUIRE(z10.order() == 10);

  SUBCASE("full set covers in one round") {
    std::vector<std::size_t> all(10);
    std::iota(all.begin(), all.end(), 0);
    CoverResult r = cover_greedy(z10, all, 1);
    CHECK(r.covered.back() == 10);
    CHECK(r.bound_met);
  }

  SUBCASE("progression of three in Z/10") {
    // Breadth-first enumeration lists the powers of the generator in order.
    CoverResult r = cover_greedy(z10, {0, 1, 2}, 4);
    std::size_t const bound = static_cast<std::size_t>(std::ceil(10 * (1 - std::pow(0.7, 4))));
    CHECK(bound == 8);
    CHECK(r.covered.back() >= bound);
    CHECK(r.bound_met);
    CHECK(best_cover(z10, {0, 1, 2}, 4) >= r.covered.back());
    CHECK(best_cover(z10, {0, 1, 2}, 4) >= bound);
  }

  SUBCASE("empty A") { CHECK_THROWS_AS(cover_greedy(z10, {}, 2), InvalidArgument); }
}

TEST_CASE("covering lemma on random groups") {
  std::mt19937 rng(7);
  std::size_t exhaustive = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t const degree = 2 + rng() % 3;
    std::vector<Perm> gens;
    for (int i = 0; i < 2; ++i) {
      Perm p(degree);
      std::iota(p.begin(), p.end(), 0);
      std::shuffle(p.begin(), p.end(), rng);
      gens.push_back(p);
    }
    FiniteGroup g = FiniteGroup::generated_by(gens);
    std::size_t const n = g.order();
    REQUIRE(n <= 24);
    std::vector<std::size_t> elems(n);
    std::iota(elems.begin(), elems.end(), 0);
    std::shuffle(elems.begin(), elems.end(), rng);
    std::vector<std::size_t> a(elems.begin(), elems.begin() + 1 + static_cast<long>(rng() % n));
    std::size_t const k = (n + a.size() - 1) / a.size();
    CoverResult r = cover_greedy(g, a, k);
    CHECK(r.bound_met);
    for (std::size_t round = 0; round < k; ++round) {
      CHECK(coverage_bound_holds(r.covered[round], n, a.size(), round + 1));
    }
    // k = ceil(1/mu(A)) rounds leave less than a 1/e fraction uncovered.
    CHECK(static_cast<double>(r.covered.back()) > (1 - 1 / std::exp(1.0)) * static_cast<double>(n));
    if (n <= 12) {
      CHECK(best_cover(g, a, k) >= r.covered.back());
      ++exhaustive;
    }
  }
  CHECK(exhaustive > 0);
}

TEST_CASE("quotient multiplication table") {
  auto s3 = pres("gens a b; rels a^2 b^3 (a*b)^2;");
  CosetTable t = enumerate(s3, parse_subgroup_spec("sub gens", *s3));
  FiniteGroup g = FiniteGroup::quotient(t);
  REQUIRE(g.order() == 6);
  std::size_t abelian_pairs = 0;
  for (std::size_t x = 0; x < 6; ++x) {
    CHECK(g.multiply(0, x) == x);
    CHECK(g.multiply(x, 0) == x);
    for (std::size_t y = 0; y < 6; ++y) {
      abelian_pairs += g.multiply(x, y) == g.multiply(y, x);
      for (std::size_t z = 0; z < 6; ++z) {
        CHECK(g.multiply(g.multiply(x, y), z) == g.multiply(x, g.multiply(y, z)));
      }
    }
  }
  // S3 has three conjugacy classes, so 3 * 6 commuting pairs.
  CHECK(abelian_pairs == 18);
}

TEST_CASE("boundary is invariant under right translation") {
  std::mt19937 rng(11);
  FreeAbelianModel z2(2);
  FreeModel f2(2);
  for (GroupModel const* m : {static_cast<GroupModel const*>(&z2), static_cast<GroupModel const*>(&f2)}) {
    for (int trial = 0; trial < 20; ++trial) {
      KeySet set;
      std::vector<Key> a;
      for (int i = 0; i < 30; ++i) {
        std::vector<Letter> letters;
        for (int j = 0; j < 6; ++j) {
          letters.push_back(letter_of(rng() % 2, rng() % 2));
        }
        Key k = m->normal_form(Word::reduce_unchecked(letters));
        if (set.insert(k).second) {
          a.push_back(k);
        }
      }
      std::vector<Letter> gl;
      for (int j = 0; j < 5; ++j) {
        gl.push_back(letter_of(rng() % 2, rng() % 2));
      }
      Key const g = m->normal_form(Word::reduce_unchecked(gl));
      std::vector<Key> ag;
      for (Key const& k : a) {
        ag.push_back(m->multiply(k, g));
      }
      CHECK(boundary_size(*m, ag) == boundary_size(*m, a));
    }
  }
}

TEST_CASE("models agree with words") {
  FreeModel f2(2);
  Word const w = monomial(2, -1) * power(0, -3) * power(1, 2);
  CHECK(f2.to_word(f2.normal_form(w)) == w);
  CHECK(f2.multiply(f2.normal_form(w), f2.inverse(f2.normal_form(w))) == f2.identity());
  FreeAbelianModel z2(2);
  CHECK(z2.normal_form(w) == Key{-1, 1});
  CHECK(z2.to_word(z2.normal_form(w)) == monomial(-1, 1));

  auto s3 = pres("gens a b; rels a^2 b^3 (a*b)^2;");
  FiniteModel fm(std::make_shared<CosetTable const>(enumerate(s3, parse_subgroup_spec("sub gens", *s3))));
  for (std::int64_t x = 0; x < 6; ++x) {
    Key const k{x};
    CHECK(fm.normal_form(fm.to_word(k)) == k);
    CHECK(fm.multiply(k, fm.inverse(k)) == fm.identity());
  }
}

TEST_CASE("step 1 on the integers") {
  auto z = pres("gens a; rels ;");
  Chain c = derived_p_chain(z, 2, 10);
  FreeAbelianModel m(1);
  std::vector<Word> a;
  for (int i = 0; i < 28; ++i) {
    a.push_back(power(0, i));
  }
  Step1Report rep = weiss_step1(c, m, a);
  // 2^8 = 256 is not more than ten times 28.
  CHECK(rep.transversal.level == 9);
  CHECK(rep.a_boundary == 1);
  CHECK(rep.x_size == 19);
  CHECK(rep.cover_bound_met);
  CHECK(rep.b_chain_holds);
  CHECK(rep.b_bound_holds);
  CHECK(rep.t_bound_holds);

  // Direct count on the exponents: n a^t leaves T exactly when t + 1 is
  // missing.
  std::set<std::int64_t> exps;
  for (Word const& w : rep.transversal.factors.at(0)) {
    exps.insert(exponents(w, 1)[0]);
  }
  CHECK(exps.size() == 512);
  std::set<std::int64_t> residues;
  std::size_t boundary = 0;
  for (std::int64_t e : exps) {
    residues.insert(((e % 512) + 512) % 512);
    boundary += exps.count(e + 1) == 0;
  }
  CHECK(residues.size() == 512);
  CHECK(boundary == rep.transversal.boundary);
  CHECK(rep.transversal.epsilon_achieved().to_double() <= 0.813);

  std::string const text = export_transversal(rep.transversal, *c.level(9).table);
  CHECK(std::count(text.begin(), text.end(), '\n') == 512);

  SUBCASE("preconditions") {
    std::vector<Word> small(a.begin(), a.begin() + 10);
    CHECK_THROWS_AS(weiss_step1(c, m, small), InvalidArgument);
    Chain shallow = derived_p_chain(z, 2, 8);
    CHECK_THROWS_AS(weiss_step1(shallow, m, a), InvalidArgument);
  }
}

TEST_CASE("step 2 on the integers") {
  auto z = pres("gens a; rels ;");
  Chain c = derived_p_chain(z, 2, 14);
  FreeAbelianModel m(1);

  SUBCASE("interval transversal doubles") {
    for (std::size_t k = 1; k < 8; ++k) {
      std::vector<Word> words;
      for (std::int64_t i = 0; i < (std::int64_t{1} << k); ++i) {
        words.push_back(power(0, i));
      }
      InvariantTransversal t1 = single_factor(c, k, words, m);
      REQUIRE(t1.boundary == 1);
      Step2Report rep = weiss_step2(c, m, t1);
      CHECK(rep.s1_size == 1);
      CHECK(rep.s1_distinct == 1);
      CHECK(rep.transversal.level == k + 1);
      CHECK(rep.product_identity);
      CHECK(rep.transversal.epsilon_achieved() == Fraction(1, std::int64_t{1} << (k + 1)));
      std::set<std::int64_t> exps;
      for (std::size_t i = 0; i < rep.transversal.size(); ++i) {
        exps.insert(exponents(rep.transversal.element(i), 1)[0]);
      }
      CHECK(*exps.begin() == 0);
      CHECK(*exps.rbegin() == (std::int64_t{1} << (k + 1)) - 1);
      CHECK(exps.size() == rep.transversal.size());
    }
  }

  SUBCASE("geometric decay from step 1") {
    std::vector<Word> a;
    for (int i = 0; i < 28; ++i) {
      a.push_back(power(0, i));
    }
    InvariantTransversal t = weiss_step1(c, m, a).transversal;
    double const eps0 = t.epsilon_achieved().to_double();
    for (int n = 1; n <= 3; ++n) {
      Step2Report rep = weiss_step2(c, m, t);
      CHECK(rep.product_identity);
      CHECK(rep.t2_epsilon.to_double() <= kWeissC);
      CHECK(rep.transversal.epsilon_achieved().to_double() <= kWeissC * t.epsilon_achieved().to_double() + 1e-12);
      CHECK(rep.transversal.epsilon_achieved().to_double() <= std::pow(kWeissC, n) * eps0 + 1e-12);
      t = rep.transversal;
    }
    CHECK(t.level == 12);
  }

  SUBCASE("finite group has no boundary") {
    Chain fin = nested_kernel_chain(pres("gens a; rels a^4;"), {AbelianHom{{4}, {{1}}}});
    FiniteModel fm(fin.level(1).table);
    InvariantTransversal t1 =
        single_factor(fin, 1, {power(0, 0), power(0, 1), power(0, 2), power(0, 3)}, fm);
    CHECK(t1.boundary == 0);
    CHECK_THROWS_AS(weiss_step2(fin, fm, t1), InvalidArgument);
  }
}

TEST_CASE("step 1 and step 2 on a square lattice") {
  Chain c = square_chain(10);
  FreeAbelianModel m(2);
  std::vector<Word> box;
  for (int i = 0; i < 28; ++i) {
    for (int j = 0; j < 28; ++j) {
      box.push_back(monomial(i, j));
    }
  }
  Step1Report rep = weiss_step1(c, m, box);
  CHECK(rep.a_boundary == 56);
  CHECK(rep.transversal.level == 7);
  CHECK(rep.t_bound_holds);

  // Box arithmetic oracle: translate by a or by b leaves T exactly when the
  // neighbour is absent.
  std::set<std::pair<std::int64_t, std::int64_t>> pts, residues;
  for (Word const& w : rep.transversal.factors.at(0)) {
    auto e = exponents(w, 2);
    pts.emplace(e[0], e[1]);
    residues.emplace(((e[0] % 128) + 128) % 128, ((e[1] % 128) + 128) % 128);
  }
  CHECK(residues.size() == 16384);
  std::size_t boundary = 0;
  for (auto [x, y] : pts) {
    boundary += pts.count({x + 1, y}) == 0;
    boundary += pts.count({x, y + 1}) == 0;
  }
  CHECK(boundary == rep.transversal.boundary);
  CHECK(rep.transversal.epsilon_achieved().to_double() <= kWeissC);

  InvariantTransversal t = rep.transversal;
  double const eps0 = t.epsilon_achieved().to_double();
  for (int n = 1; n <= 3; ++n) {
    Step2Report r2 = weiss_step2(c, m, t);
    CHECK(r2.product_identity);
    CHECK(r2.transversal.epsilon_achieved().to_double() <= std::pow(kWeissC, n) * eps0 + 1e-12);
    t = r2.transversal;
  }
  CHECK(t.level == 10);
}

TEST_CASE("Schreier generating sets from transversals") {
  SUBCASE("cyclic levels give one generator") {
    auto z = pres("gens a; rels ;");
    Chain c = derived_p_chain(z, 2, 6);
    FreeAbelianModel m(1);
    for (std::size_t n = 1; n <= 6; ++n) {
      std::vector<Word> words;
      for (std::int64_t i = 0; i < (std::int64_t{1} << n); ++i) {
        words.push_back(power(0, i));
      }
      SchreierGeneratingSet s =
          schreier_generators_from_transversal(c, m, single_factor(c, n, words, m));
      CHECK(s.size() == 1);
      CHECK(s.distinct == 1);
      CHECK(s.word(m, 0) == power(0, std::int64_t{1} << n));
      CHECK(s.certified);
      CHECK_FALSE(s.conjugated);
    }
  }

  SUBCASE("boxes in the square lattice") {
    Chain c = square_chain(4);
    FreeAbelianModel m(2);
    for (std::size_t n = 1; n <= 4; ++n) {
      std::int64_t const side = std::int64_t{1} << n;
      std::vector<Word> words;
      for (std::int64_t i = 0; i < side; ++i) {
        for (std::int64_t j = 0; j < side; ++j) {
          words.push_back(monomial(i, j));
        }
      }
      SchreierGeneratingSet s =
          schreier_generators_from_transversal(c, m, single_factor(c, n, words, m));
      CHECK(s.size() == static_cast<std::size_t>(2 * side));
      CHECK(s.size() <= static_cast<std::size_t>(4 * side));
      CHECK(s.distinct == 2);
      CHECK(s.certified);
      CHECK(s.r_upper == Fraction(1, side * side));
    }
  }

  SUBCASE("free group, shifted transversal") {
    auto f2 = pres("gens a b; rels ;");
    auto table = std::make_shared<CosetTable const>(
        enumerate(f2, parse_subgroup_spec("sub perm degree=5 a=(1,2,3) b=(2,4,5) stab=1", *f2)));
    Chain c(f2);
    c.push(table);
    FreeModel m(2);
    SchreierGraph g(table);
    std::size_t const n = table->coset_count();
    Word const shift = monomial(1, -1);
    for (Word const& pre : {Word(), shift}) {
      std::vector<Word> words(n);
      for (Coset v = 0; v < n; ++v) {
        words[table->apply(pre, v)] = pre * g.transversal(v);
      }
      InvariantTransversal t = single_factor(c, 1, words, m);
      SchreierGeneratingSet s = schreier_generators_from_transversal(c, m, t);
      CHECK(s.certified);
      // Nielsen-Schreier: a subgroup of index n in F_2 is free of rank n + 1.
      if (pre.empty()) {
        CHECK(s.size() == n + 1);
        CHECK_FALSE(s.conjugated);
      } else {
        CHECK(s.size() >= n + 1);
      }
      CHECK(s.distinct >= n + 1);
    }
  }
}
