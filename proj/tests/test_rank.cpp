#include <memory>

#include "doctest.h"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"
#include "rgkit/rank.hpp"

using namespace rgkit;

namespace {

std::shared_ptr<Presentation const> pres(char const* text) {
  return std::make_shared<Presentation const>(parse_presentation(text));
}

std::shared_ptr<CosetTable const> table(std::shared_ptr<Presentation const> p, char const* spec) {
  return std::make_shared<CosetTable const>(enumerate(p, parse_subgroup_spec(spec, *p)));
}

std::shared_ptr<CosetTable const> abelian_kernel(std::shared_ptr<Presentation const> p,
                                                 AbelianHom hom) {
  return std::make_shared<CosetTable const>(abelian_kernel_table(p, hom));
}

SubgroupPresentation rs(std::shared_ptr<CosetTable const> t) {
  return reidemeister_schreier(SchreierGraph(std::move(t)));
}

// Tietze moves preserve the abelianisation; compare the full invariants.
void check_same_abelianisation(SubgroupPresentation const& a, SubgroupPresentation const& b) {
  SmithForm const x = smith_normal_form(relation_matrix(a.relators, a.generator_count));
  SmithForm const y = smith_normal_form(relation_matrix(b.relators, b.generator_count));
  CHECK(x.free_rank() == y.free_rank());
  CHECK(x.torsion() == y.torsion());
}

}  // namespace

TEST_CASE("abelianisation rank") {
  SubgroupPresentation free{3, {}, {}};
  CHECK(abelianization_rank(free) == 3);
  CHECK(abelianization_rank(free, {2}) == 3);

  auto z2 = pres("gens a b; rels [a,b];");
  SubgroupPresentation sp = rs(table(z2, "sub gens a^2 b^2"));
  CHECK(sp.generator_count == 5);
  CHECK(sp.relators.size() == 4);
  CHECK(abelianization_rank(sp) == 2);
  CHECK(abelianization_rank(sp, {2}) == 2);

  // C_6: integer rank 1, but rank 0 mod 5.
  SubgroupPresentation c6{1, {Word::reduce({1, 1, 1, 1, 1, 1}, 1)}, {}};
  CHECK(abelianization_rank(c6) == 1);
  CHECK(abelianization_rank(c6, {5}) == 0);
  CHECK(abelianization_rank(c6, {3}) == 1);
}

TEST_CASE("Tietze simplification") {
  auto z2 = pres("gens a b; rels [a,b];");
  SubgroupPresentation sp = rs(table(z2, "sub gens a^2 b^2"));
  TietzeResult t = tietze_upper(sp);
  CHECK(t.upper == 2);
  CHECK_FALSE(t.budget_hit);
  check_same_abelianisation(sp, t.simplified);

  auto c2c3 = pres("gens x y; rels x^2 y^3;");
  SubgroupPresentation k = rs(abelian_kernel(c2c3, {{6}, {{3}, {2}}}));
  CHECK(k.generator_count == 7);
  CHECK(k.relators.size() == 12);
  TietzeResult tk = tietze_upper(k);
  CHECK(tk.upper == 2);
  CHECK(abelianization_rank(k) == 2);
  check_same_abelianisation(k, tk.simplified);

  SubgroupPresentation free{5, {Word(), Word()}, {}};
  CHECK(tietze_upper(free).upper == 5);

  TietzeResult none = tietze_upper(sp, 0);
  CHECK(none.budget_hit);
  CHECK(none.upper == 5);
}

TEST_CASE("Tietze preserves the abelianisation") {
  auto g = pres("gens a b; rels a^3 b^2 (a*b)^7;");
  auto h = pres("gens a b; rels [a,b] a^4;");
  for (auto const& p : {g, h}) {
    for (char const* sub : {"sub gens a", "sub gens b", "sub gens a*b", "sub gens a^2*b"}) {
      std::shared_ptr<CosetTable const> t;
      try {
        t = std::make_shared<CosetTable const>(
            enumerate(p, parse_subgroup_spec(sub, *p), EnumerationOptions{5000}));
      } catch (BudgetExhausted const&) {
        continue;
      }
      SubgroupPresentation sp = rs(t);
      TietzeResult r = tietze_upper(sp);
      CHECK(r.upper >= abelianization_rank(sp));
      CHECK(r.upper <= sp.generator_count);
      check_same_abelianisation(sp, r.simplified);
    }
  }
}

TEST_CASE("subgroup rank bounds") {
  auto f2 = pres("gens a b; rels ;");
  RankBounds b = subgroup_rank_bounds(table(f2, "sub perm degree=3 a=(1,2,3) b=(1,2)"));
  CHECK(b.lower == b.upper);
  CHECK(b.upper_method == UpperMethod::nielsen_schreier_exact);

  auto c2c3 = pres("gens x y; rels x^2 y^3;");
  RankBounds k = subgroup_rank_bounds(abelian_kernel(c2c3, {{6}, {{3}, {2}}}));
  CHECK(k.lower == 2);
  CHECK(k.upper == 2);
}

TEST_CASE("rank gradient along chains") {
  Chain f2 = derived_p_chain(pres("gens a b; rels ;"), 2, 2);
  RankGradientReport rf = rank_gradient(f2);
  for (auto const& l : rf.levels) {
    CHECK(l.r_lower == Fraction(1));
    CHECK(l.r_upper == Fraction(1));
  }
  CHECK(rf.headline_upper == Fraction(1));

  Chain z2 = derived_p_chain(pres("gens a b; rels [a,b];"), 2, 3);
  RankGradientReport rz = rank_gradient(z2, RankOptions{100000, true});
  REQUIRE(rz.levels.size() == 4);
  CHECK(rz.levels[1].r_upper == Fraction(1, 4));
  CHECK(rz.levels[2].r_upper == Fraction(1, 16));
  CHECK(rz.levels[3].r_upper == Fraction(1, 64));
  CHECK(rz.headline_upper == Fraction(1, 64));
  for (std::size_t n = 1; n < rz.levels.size(); ++n) {
    CHECK(rz.levels[n].r_upper <= rz.levels[n - 1].r_upper);
  }
  RankGradientReport serial = rank_gradient(z2);
  CHECK(serial.to_json() == rz.to_json());
  CHECK(rz.to_csv().rfind("level,index,lower,upper,r_lower,r_upper", 0) == 0);
}

TEST_CASE("free product and amalgam formulas") {
  CHECK(free_product_rank(6, 2, 3, 0, 0).d_n == 2);
  for (std::int64_t m = 1; m <= 6; ++m) {
    CHECK(free_product_rank(2 * m, 2, 2, 0, 0).d_n == 1);
  }
  for (std::int64_t n = 1; n <= 10; ++n) {
    auto r = free_product_rank(n, 1, 1, 1, 1);
    CHECK(r.d_n == n + 1);
    CHECK(r.r_form == Fraction(1));
  }
  CHECK_THROWS_AS(free_product_rank(6, 4, 3, 0, 0), InvalidArgument);

  // Trivial edge group: a = 1 and the bound is the free-product value.
  CHECK(amalgam_rank_bound(6, 2, 3, 1, 0, 0).bound == free_product_rank(6, 2, 3, 0, 0).d_n);
  CHECK(amalgam_rank_bound(4, 2, 2, 2, 1, 1).bound == 3);
  CHECK(amalgam_rank_bound(7, 7, 7, 7, 0, 0).bound == 0);
  CHECK(amalgam_rank_bound(4, 2, 2, 2, 1, 1).r_form == Fraction(1, 2));
  CHECK_THROWS_AS(amalgam_rank_bound(4, 2, 2, 3, 1, 1), InvalidArgument);

  // <x,y | x^2 y^-2> is Z *_{2Z} Z. The kernel of x, y -> 1 in C_4 meets each
  // factor in 4Z (k = 4, d = 1) and the edge group 2Z in 4Z (a = 2).
  auto g = pres("gens x y; rels x^2*y^-2;");
  RankBounds b = subgroup_rank_bounds(abelian_kernel(g, {{4}, {{1}, {1}}}));
  std::int64_t const bound = amalgam_rank_bound(4, 4, 4, 2, 1, 1).bound;
  CHECK(bound == 3);
  CHECK(static_cast<std::int64_t>(b.upper) <= bound);
  CHECK(b.lower <= b.upper);
}

TEST_CASE("closed-form bounds") {
  CHECK(closed_form_bound(ClosedFormKind::finite_normal, {3, 100, 1, 0}) == doctest::Approx(0.03));
  CHECK(closed_form_bound(ClosedFormKind::module_gen, {2, 1, 8, 1}) == doctest::Approx(16));
  CHECK(closed_form_bound(ClosedFormKind::soluble, {2, 1, 1, 0}) == doctest::Approx(3));
  CHECK(closed_form_bound(ClosedFormKind::module_gen, {2, 1, 8, 1}, 8.0) == doctest::Approx(6));
  CHECK_THROWS_AS(closed_form_bound(ClosedFormKind::soluble, {2, 1, 1, 0}, 1.0), InvalidArgument);
}

TEST_CASE("free product formula against direct computation") {
  auto p = pres("gens a b; rels a^2 b^3;");
  for (char const* spec : {"sub perm degree=5 a=(1,2) b=(3,4,5)", "sub perm degree=3 a=(1,2) b=(1,2,3)",
                           "sub perm degree=4 a=(1,2)(3,4) b=(1,2,3)",
                           "sub perm degree=4 a=(1,2) b=(2,3,4)",
                           "sub perm degree=6 a=(1,2)(3,4)(5,6) b=(1,2,3)"}) {
    auto t = table(p, spec);
    FreeProductCheck c = free_product_check(t, {0}, {1});
    CHECK(c.k1 == 2);
    CHECK(c.k2 == 3);
    CHECK(c.d1 == 0);
    CHECK(c.d2 == 0);
    CHECK(c.collapsed());
    CHECK(c.agrees());
    CHECK(static_cast<std::size_t>(c.formula.d_n) == c.index / 6 + 1);
  }
  CHECK(table(p, "sub perm degree=6 a=(1,2)(3,4)(5,6) b=(1,2,3)")->coset_count() == 24);

  // Z * Z/2 with N the kernel onto Z/4 x Z/2: N cap <a> = <a^4> has rank 1.
  auto q = pres("gens a b; rels b^2;");
  FreeProductCheck c = free_product_check(abelian_kernel(q, {{4, 2}, {{1, 0}, {0, 1}}}), {0}, {1});
  CHECK(c.k1 == 4);
  CHECK(c.d1 == 1);
  CHECK(c.d2 == 0);
  CHECK(c.agrees());

  CHECK_THROWS_AS(free_product_check(table(p, "sub perm degree=3 a=(1,2) b=(1,2,3)"), {0}, {0}),
                  InvalidArgument);
  auto mixed = pres("gens a b; rels a^2 b^3 (a*b)^5;");
  CHECK_THROWS_AS(free_product_check(table(mixed, "sub gens"), {0}, {1}), InvalidArgument);
  CHECK_THROWS_AS(
      free_product_check(table(p, "sub perm degree=3 a=(1,2) b=(1,2,3) stab=1"), {0}, {1}),
      InvalidArgument);
}
