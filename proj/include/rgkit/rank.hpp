#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rgkit/chains.hpp"
#include "rgkit/fraction.hpp"
#include "rgkit/schreier.hpp"

namespace rgkit {

enum class LowerMethod { abelianization, mod_p, trivial };
enum class UpperMethod { nielsen_schreier_exact, tietze, schreier_count };

std::string to_string(LowerMethod m);
std::string to_string(UpperMethod m);

// d(H) lies in [lower, upper].
struct RankBounds {
  std::size_t lower = 0;
  std::size_t upper = 0;
  LowerMethod lower_method = LowerMethod::trivial;
  UpperMethod upper_method = UpperMethod::schreier_count;
};

// Mod-p mode when `prime` is set, integer Smith normal form otherwise.
struct AbelianizationMode {
  std::optional<std::uint32_t> prime;
};

// Minimal number of generators of H^ab (integer mode) or the rank of
// H / H'H^p (mod-p mode). Either is a lower bound for d(H).
std::size_t abelianization_rank(SubgroupPresentation const& sp, AbelianizationMode mode = {});

struct TietzeResult {
  std::size_t upper = 0;
  std::size_t passes = 0;
  bool budget_hit = false;
  SubgroupPresentation simplified;  // generators renumbered densely
};

// Fixed pass list, repeated until nothing changes or `pass_budget` passes
// have run:
//   1. cyclically reduce every relator and drop empty ones;
//   2. drop relators equal to an earlier one up to rotation and inversion;
//   3. pick the shortest relator containing some generator exactly once
//      (lowest generator on ties), solve it for that generator and substitute
//      the solution everywhere.
// A substitution that would push the total relator length past
// `max_total_length` is skipped. The result is never below the abelianisation
// lower bound (checked).
TietzeResult tietze_upper(SubgroupPresentation const& sp, std::size_t pass_budget = 100000,
                          std::size_t max_total_length = 2'000'000);

struct RankOptions {
  std::size_t tietze_passes = 100000;
  bool parallel = false;
};

// Bounds on d(H) for a single finite-index subgroup, via Reidemeister-Schreier.
RankBounds subgroup_rank_bounds(std::shared_ptr<CosetTable const> table,
                                RankOptions const& options = {});

struct LevelRankReport {
  std::size_t level = 0;
  std::size_t index = 0;
  std::optional<RankBounds> bounds;
  Fraction r_lower;
  Fraction r_upper;
  std::string error;  // set when the level could not be analysed
};

struct RankGradientReport {
  std::vector<LevelRankReport> levels;
  // r_lower at the deepest analysed level; an estimate, not a certified bound.
  Fraction headline_lower;
  // Smallest r_upper: a certified upper bound for the rank gradient.
  Fraction headline_upper;

  std::string to_json() const;
  std::string to_csv() const;
};

// Per-level bounds. The upper end is the minimum of the Tietze count and the
// Schreier bound propagated from the previous level, so r_upper never
// increases along the chain.
RankGradientReport rank_gradient(Chain const& c, RankOptions const& options = {});

struct FreeProductRank {
  std::int64_t d_n = 0;
  // (d(N) - 1) / n = (d_1 - 1)/k_1 + (d_2 - 1)/k_2 + 1
  Fraction r_form;
};

// d(N) for N normal of index n in G_1 * G_2 with |G_j : N cap G_j| = k_j and
// d(N cap G_j) = d_j.
FreeProductRank free_product_rank(std::int64_t n, std::int64_t k1, std::int64_t k2,
                                  std::int64_t d1, std::int64_t d2);

// The formula against a direct computation, for N = `level` normal in a free
// product whose factors are generated by the listed generators. k_j is the
// size of the G_j-orbit of the base coset and d_j the rank of N cap G_j,
// computed from the restricted coset table; both ranks must come out exact.
struct FreeProductCheck {
  std::size_t index = 0;
  std::size_t k1 = 0, k2 = 0;
  std::size_t d1 = 0, d2 = 0;
  FreeProductRank formula;
  RankBounds direct;

  bool agrees() const noexcept {
    return direct.lower <= static_cast<std::size_t>(formula.d_n) &&
           static_cast<std::size_t>(formula.d_n) <= direct.upper;
  }
  bool collapsed() const noexcept { return direct.lower == direct.upper; }
  std::string to_json() const;
};

// Throws InvalidArgument if the level is not normal, the generator lists do
// not partition the generators, some relator mixes the factors, or a factor
// rank is not determined exactly.
FreeProductCheck free_product_check(std::shared_ptr<CosetTable const> level,
                                    std::vector<std::size_t> const& factor1,
                                    std::vector<std::size_t> const& factor2,
                                    RankOptions const& options = {});

struct AmalgamRankBound {
  std::int64_t bound = 0;
  // (bound - 1) / n = (d_1 - 1)/k_1 + (d_2 - 1)/k_2 + 1/a
  Fraction r_form;
};

AmalgamRankBound amalgam_rank_bound(std::int64_t n, std::int64_t k1, std::int64_t k2,
                                    std::int64_t a, std::int64_t d1, std::int64_t d2);

enum class ClosedFormKind { finite_normal, soluble, module_gen };

struct ClosedFormParams {
  double d = 0;  // number of generators of G
  double a = 1;  // finite_normal: order of the finite normal subgroup
  double b = 1;  // soluble, module_gen: index b
  double t = 0;  // module_gen: module generators
};

// finite_normal: d/a; soluble: d/b + (1 + (2d+1) log b)/b;
// module_gen: t + (2d+1) log b. Logarithms use `log_base`.
double closed_form_bound(ClosedFormKind kind, ClosedFormParams const& p, double log_base = 2.0);

}  // namespace rgkit
