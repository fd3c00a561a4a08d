#include <memory>

#include "doctest.h"
#include "rgkit/chains.hpp"
#include "rgkit/errors.hpp"

using namespace rgkit;

namespace {

std::shared_ptr<Presentation const> pres(char const* text) {
  return std::make_shared<Presentation const>(parse_presentation(text));
}

std::vector<std::size_t> indices(Chain const& c) {
  std::vector<std::size_t> out;
  for (auto const& l : c.levels()) {
    out.push_back(l.index());
  }
  return out;
}

void check_chain_invariants(Chain const& c) {
  for (std::size_t n = 1; n < c.levels().size(); ++n) {
    auto const& fine = *c.level(n).table;
    auto const& coarse = *c.level(n - 1).table;
    CHECK(fine.coset_count() % coarse.coset_count() == 0);
    auto const& map = c.level(n).refinement;
    for (Coset x = 0; x < fine.coset_count(); ++x) {
      for (std::size_t s = 0; s < fine.generator_count(); ++s) {
        CHECK(map[fine.act(s, x)] == coarse.act(s, map[x]));
      }
    }
  }
  CosetTree tree = coset_tree(c);
  for (std::size_t n = 0; n < c.levels().size(); ++n) {
    CHECK(tree.shadow_denominator[n] == c.level(n).index());
    if (n > 0) {
      // Parent measure equals the sum of its children's measures, and each
      // level sums to 1.
      CHECK(tree.shadow_denominator[n] == tree.branching[n - 1] * tree.shadow_denominator[n - 1]);
      CHECK(tree.parents[n].size() == tree.shadow_denominator[n]);
    }
  }
}

}  // namespace

TEST_CASE("derived p-chains") {
  Chain f2 = derived_p_chain(pres("gens a b; rels ;"), 2, 2);
  CHECK(indices(f2) == std::vector<std::size_t>{1, 4, 128});
  check_chain_invariants(f2);

  Chain z = derived_p_chain(pres("gens a; rels ;"), 2, 5);
  CHECK(indices(z) == std::vector<std::size_t>{1, 2, 4, 8, 16, 32});
  check_chain_invariants(z);

  Chain z2 = derived_p_chain(pres("gens a b; rels [a,b];"), 3, 3);
  CHECK(indices(z2) == std::vector<std::size_t>{1, 9, 81, 729});
  for (auto const& l : z2.levels()) {
    CHECK(l.normal);
  }
  check_chain_invariants(z2);
}

TEST_CASE("derived chain truncates on budget") {
  Chain f2 = derived_p_chain(pres("gens a b; rels ;"), 2, 4, 100000);
  CHECK(f2.depth() == 2);
  CHECK(f2.truncated());
  CHECK_THROWS_AS(derived_p_chain(pres("gens a; rels ;"), 4, 2), InvalidArgument);
}

TEST_CASE("nested kernel chains") {
  auto z = pres("gens a; rels ;");
  auto homs = parse_chain_homs(
      "perm degree=2 a=(1,2)\nperm degree=4 a=(1,2,3,4)\n# comment\nabelian moduli=8 a=1\n", *z);
  Chain c = nested_kernel_chain(z, homs);
  CHECK(indices(c) == std::vector<std::size_t>{1, 2, 4, 8});
  check_chain_invariants(c);

  auto bad = parse_chain_homs("perm degree=2 a=(1,2)\nperm degree=3 a=(1,2,3)\n", *z);
  CHECK_THROWS_AS(nested_kernel_chain(z, bad), InvalidArgument);
  CHECK_THROWS_AS(parse_chain_homs("perm degree=2 q=(1,2)\n", *z), ParseError);
  CHECK_THROWS_AS(parse_chain_homs("abelian moduli=2 a=x\n", *z), ParseError);
}

TEST_CASE("lamplighter wreath quotients give a nested chain") {
  // C2 wr C4 is a quotient of the lamplighter group; kernels of the maps onto
  // C2 and C4 (lamps forgotten) are the first two levels of the chain.
  auto w = pres("gens a t; rels a^2 t^4 [a,t*a*t^-1] [a,t^2*a*t^-2];");
  auto homs = parse_chain_homs("abelian moduli=2 a=0 t=1\nabelian moduli=4 a=0 t=1\n", *w);
  Chain c = nested_kernel_chain(w, homs);
  CHECK(indices(c) == std::vector<std::size_t>{1, 2, 4});
  check_chain_invariants(c);
}

TEST_CASE("coset trees") {
  Chain z = derived_p_chain(pres("gens a; rels ;"), 2, 3);
  CosetTree tree = coset_tree(z);
  CHECK(tree.branching == std::vector<std::size_t>{2, 2, 2});
  CHECK(tree.shadow_denominator[3] == 8);

  auto f2 = pres("gens a b; rels ;");
  Chain one = nested_kernel_chain(f2, parse_chain_homs("perm degree=3 a=(1,2,3) b=(1,2,3)\n", *f2));
  CHECK(coset_tree(one).branching == std::vector<std::size_t>{3});

  Chain d = derived_p_chain(f2, 2, 2);
  CHECK(coset_tree(d).branching == std::vector<std::size_t>{4, 32});
}

TEST_CASE("trivial intersection evidence") {
  auto z = pres("gens a; rels ;");
  Chain c = derived_p_chain(z, 2, 3);
  auto ev = trivial_intersection_evidence(c, {Word::generator(0).power(3)});
  REQUIRE(ev.records[0].separated_at.has_value());
  CHECK(*ev.records[0].separated_at == 1);
  auto ev4 = trivial_intersection_evidence(c, {Word::generator(0).power(4)});
  CHECK(*ev4.records[0].separated_at == 3);

  auto homs = parse_chain_homs("perm degree=2 a=(1,2)\nperm degree=2 a=(1,2)\n", *z);
  Chain constant = nested_kernel_chain(z, homs);
  auto ev2 = trivial_intersection_evidence(constant, {Word::generator(0).power(2)});
  CHECK_FALSE(ev2.records[0].separated_at.has_value());
  CHECK(ev2.summary().find("not separated") != std::string::npos);

  auto f2 = pres("gens a b; rels ;");
  Chain d = derived_p_chain(f2, 2, 2);
  Word comm = commutator(Word::generator(0), Word::generator(1));
  auto ev3 = trivial_intersection_evidence(d, {comm});
  CHECK(*ev3.records[0].separated_at == 2);
}
