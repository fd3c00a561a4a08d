#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rgkit/fraction.hpp"
#include "rgkit/schreier.hpp"

namespace rgkit {

// A Reidemeister-Schreier presentation split along a vertex set A, giving
// H = H_1 *_{H_3} H_2. Generator and relator numbers refer to the input
// SubgroupPresentation.
struct SplitDatum {
  std::vector<bool> in_a;
  std::vector<EdgeId> boundary;  // oriented edges with one endpoint in A

  // R1: relators whose full edge path (tree edges included) touches A;
  // R2: those touching the complement. R3 = R1 cap R2.
  std::vector<std::size_t> r1, r2, r3;
  // Disjoint classification of the subgroup generators. X3 holds the labels
  // of boundary edges and every generator on the path of a relator that
  // crosses the boundary; X1 and X2 the rest, by endpoints.
  std::vector<std::uint32_t> x1, x2, x3;
  // Generators on some relator path in R1 (R2), plus orphans by the endpoint
  // rule. S3 = S1 cap S2.
  std::vector<std::uint32_t> s1, s2, s3;
  // Generators that lie on no relator path.
  std::vector<std::uint32_t> orphans;

  // <S_i | R_i> with generators renumbered in increasing order of symbol.
  SubgroupPresentation t1, t2, t3;

  bool trivial_amalgam() const noexcept { return x1.empty() || x2.empty(); }
};

// Throws InvalidArgument if A is empty or everything, or if `sp` was not
// produced from `g`. The pushout of T1 <- T3 -> T2 is checked to have the
// same abelianisation as `sp` (InvariantViolation otherwise).
SplitDatum split(SubgroupPresentation const& sp, SchreierGraph const& g,
                 std::vector<bool> const& in_a);

// <S1 u S2 | R1, R2, x_1 = x_2 for x in S3> with S1 and S2 as disjoint copies.
SubgroupPresentation pushout_presentation(SplitDatum const& d);

struct TrichotomyWitness {
  std::size_t level = 0;
  std::vector<Coset> a;
  std::size_t index = 0;
  Fraction density;  // |A| / index
  std::size_t boundary = 0;
  std::size_t relator_length_sum = 0;  // L
  // Verdict pieces: index/4 < |A| < index/2 and |dA| < |A| / (2 (1 + L^2)).
  bool size_ok = false;
  bool boundary_ok = false;
  bool hypotheses_met() const noexcept { return size_ok && boundary_ok; }

  std::string to_json() const;
};

TrichotomyWitness make_witness(SchreierGraph const& g, std::vector<bool> const& in_a,
                               std::size_t level = 0);

struct SearchOptions {
  // Improvement moves per seed.
  std::size_t effort = 2000;
  // Seeds tried; 0 means every vertex.
  std::size_t max_seeds = 0;
  // Nonzero: visit seed vertices in a shuffled order, which matters only
  // when max_seeds cuts the list short.
  std::uint64_t seed = 0;
};

struct SearchResult {
  std::vector<bool> in_a;
  TrichotomyWitness witness;
  bool found = false;  // some A within the density window
};

// Looks for A with | |A|/index - alpha | < eps and small boundary. Each vertex
// seeds a ball (the first round(alpha * index) vertices in breadth-first
// order, edges taken both ways), which is then improved by single additions,
// removals and swaps that strictly reduce |dA| and stay in the density window.
// Candidates are compared by (verdict, |dA|, sorted A); lowest vertex wins
// ties. A failed search only means no certificate was found.
SearchResult search_almost_invariant(SchreierGraph const& g, double alpha, double eps,
                                     SearchOptions const& options = {}, std::size_t level = 0);

struct IndexProbe {
  std::size_t x2 = 0;
  std::size_t x2_bound = 0;  // (d - 1) |A^c| + 1
  std::size_t x3 = 0;
  std::size_t x3_bound = 0;    // |dA| (1 + sum l_i^2)
  std::size_t x3_bound_l = 0;  // |dA| (1 + L^2)
  bool trivial_amalgam = false;
  // Set when T1, T2, T3 have no relators: each T_i is free on S_i, so
  // |T_i : T_3| is infinite exactly when S_i is strictly larger.
  std::optional<bool> free_case_infinite_1, free_case_infinite_2;
  // Index of <S3> in T1 and T2 by coset enumeration, when it closed within
  // the budget.
  std::optional<std::size_t> enumerated_index_1, enumerated_index_2;

  std::string to_json() const;
};

IndexProbe index_condition_probe(SplitDatum const& d, SchreierGraph const& g,
                                 std::size_t max_cosets = 10'000);

// T1 and T2 in the presentation grammar, plus the amalgamated generators.
// Generator e<k> is symbol k - 1 of the input presentation.
std::string export_split(SplitDatum const& d);

}  // namespace rgkit
