#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rgkit/cosets.hpp"
#include "rgkit/presentation.hpp"

namespace rgkit {

struct ChainLevel {
  std::shared_ptr<CosetTable const> table;
  // Normality in the whole group, certified from the table.
  bool normal = false;
  // refinement[c] is the coset of the previous level containing coset c;
  // empty for level 0.
  std::vector<Coset> refinement;

  std::size_t index() const noexcept { return table->coset_count(); }
};

// Builds the next level from the chain so far, or returns nullptr when the
// builder has nothing more to offer. May throw BudgetExhausted.
class Chain;
using LevelBuilder =
    std::function<std::shared_ptr<CosetTable const>(Chain const&, std::size_t max_cosets)>;

// A nested sequence G = G_0 > G_1 > ... of finite-index subgroups. Only the
// materialised levels are stored; a builder, when present, extends the chain.
class Chain {
 public:
  explicit Chain(std::shared_ptr<Presentation const> origin, LevelBuilder builder = {});

  Presentation const& origin() const noexcept { return *origin_; }
  std::shared_ptr<Presentation const> const& origin_ptr() const noexcept { return origin_; }
  std::vector<ChainLevel> const& levels() const noexcept { return levels_; }
  ChainLevel const& level(std::size_t n) const { return levels_.at(n); }
  std::size_t depth() const noexcept { return levels_.size() - 1; }
  bool truncated() const noexcept { return !truncation_.empty(); }
  std::string const& truncation_reason() const noexcept { return truncation_; }

  // Appends a level, computing and checking the refinement map onto the
  // current last level. Throws InvalidArgument if the new subgroup is not
  // contained in the last one.
  void push(std::shared_ptr<CosetTable const> table);

  // Materialises levels up to `depth` with the builder. Budget exhaustion
  // marks the chain truncated instead of throwing. Returns the new depth.
  std::size_t extend_to(std::size_t depth, std::size_t max_cosets);

 private:
  std::shared_ptr<Presentation const> origin_;
  LevelBuilder builder_;
  std::vector<ChainLevel> levels_;
  std::string truncation_;
};

// The map sending each coset of `fine` to the coset of `coarse` containing it,
// if fine's subgroup is contained in coarse's (commutes with every generator).
std::optional<std::vector<Coset>> refinement_map(CosetTable const& fine,
                                                 CosetTable const& coarse);

// G_{n+1} = G_n' G_n^p. Level n+1 is built from the mod-p abelianisation of the
// Reidemeister-Schreier presentation of level n. Levels whose index would
// exceed `max_cosets` are not built; the chain is then marked truncated.
Chain derived_p_chain(std::shared_ptr<Presentation const> p, std::uint32_t prime,
                      std::size_t depth, std::size_t max_cosets = 1'000'000);
// The next level of a derived p-series step from an arbitrary finite-index
// subgroup. Throws BudgetExhausted if the index would exceed `max_cosets`.
std::shared_ptr<CosetTable const> derived_p_step(std::shared_ptr<CosetTable const> level,
                                                 std::uint32_t prime,
                                                 std::size_t max_cosets);

using LevelHom = std::variant<PermSubgroup, AbelianHom>;

// Kernels (or stabilisers) of the given homomorphisms, certified nested. A
// level over `max_cosets` truncates the chain there, as for derived_p_chain.
Chain nested_kernel_chain(std::shared_ptr<Presentation const> p,
                          std::vector<LevelHom> const& homs,
                          std::size_t max_cosets = 1'000'000);

// One homomorphism per non-empty line:
//   perm degree=<n> <gen>=<cycles>... [stab=<point>]
//   abelian moduli=<m1>,<m2>,... <gen>=<v1>,<v2>,...
// `#` starts a comment.
std::vector<LevelHom> parse_chain_homs(std::string_view text, Presentation const& p);

struct CosetTree {
  // parents[n][c]: parent at level n-1 of vertex c at level n (empty for n = 0).
  std::vector<std::vector<Coset>> parents;
  // Number of children of every level-n vertex, n < depth.
  std::vector<std::size_t> branching;
  // Every level-n vertex has shadow measure 1 / shadow_denominator[n], with
  // shadow_denominator[n] = |G : G_n|.
  std::vector<std::uint64_t> shadow_denominator;
};

// Throws InvariantViolation if some level has non-uniform branching.
CosetTree coset_tree(Chain const& c);

struct SeparationRecord {
  Word word;
  // First level whose action moves coset 0 under the word.
  std::optional<std::size_t> separated_at;
};

struct SeparationEvidence {
  std::vector<SeparationRecord> records;
  std::size_t depth = 0;
  std::size_t max_word_length = 0;
  // "separated up to word length l at depth n" or the list of survivors.
  std::string summary() const;
};

SeparationEvidence trivial_intersection_evidence(Chain const& c, std::vector<Word> const& words);

}  // namespace rgkit
