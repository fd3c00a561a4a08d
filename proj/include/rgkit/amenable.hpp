#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rgkit/chains.hpp"
#include "rgkit/fraction.hpp"

namespace rgkit {

// Normal form of a group element. The layout depends on the model.
using Key = std::vector<std::int64_t>;

struct KeyHash {
  std::size_t operator()(Key const& k) const noexcept;
};

using KeySet = std::unordered_set<Key, KeyHash>;

// Solves the word problem in the ambient group, so that boundaries are
// counted in the group itself rather than in a quotient.
class GroupModel {
 public:
  virtual ~GroupModel() = default;
  virtual std::size_t generator_count() const = 0;
  virtual Key identity() const = 0;
  virtual Key left_multiply(Letter x, Key const& k) const = 0;
  virtual Key multiply(Key const& a, Key const& b) const = 0;
  virtual Key inverse(Key const& a) const = 0;
  virtual std::string name() const = 0;
  // A word for the element; words built from keys stay short even when the
  // construction that produced the element multiplies long words.
  virtual Word to_word(Key const& k) const = 0;

  Key normal_form(Word const& w) const;
};

// Z^d: keys are exponent vectors.
class FreeAbelianModel final : public GroupModel {
 public:
  explicit FreeAbelianModel(std::size_t rank) : rank_(rank) {}
  std::size_t generator_count() const override { return rank_; }
  Key identity() const override { return Key(rank_, 0); }
  Key left_multiply(Letter x, Key const& k) const override;
  Key multiply(Key const& a, Key const& b) const override;
  Key inverse(Key const& a) const override;
  std::string name() const override { return "free-abelian"; }
  Word to_word(Key const& k) const override;

 private:
  std::size_t rank_;
};

// F_d: keys are freely reduced letter sequences.
class FreeModel final : public GroupModel {
 public:
  explicit FreeModel(std::size_t rank) : rank_(rank) {}
  std::size_t generator_count() const override { return rank_; }
  Key identity() const override { return {}; }
  Key left_multiply(Letter x, Key const& k) const override;
  Key multiply(Key const& a, Key const& b) const override;
  Key inverse(Key const& a) const override;
  std::string name() const override { return "free"; }
  Word to_word(Key const& k) const override;

 private:
  std::size_t rank_;
};

// The finite group G/H of a normal coset table: keys are cosets. A faithful
// model of G only when H is trivial, which the caller asserts.
class FiniteModel final : public GroupModel {
 public:
  explicit FiniteModel(std::shared_ptr<CosetTable const> table);
  std::size_t generator_count() const override { return table_->generator_count(); }
  Key identity() const override { return {0}; }
  Key left_multiply(Letter x, Key const& k) const override;
  Key multiply(Key const& a, Key const& b) const override;
  Key inverse(Key const& a) const override;
  std::string name() const override { return "finite"; }
  Word to_word(Key const& k) const override;

 private:
  std::shared_ptr<CosetTable const> table_;
  std::vector<Word> path_;  // path_[c] applied to coset 0 gives c
  std::vector<Coset> inverse_;
};

// |d_S(A)| = #{(a, s) : a in A, s in S, s a not in A}, S the positive
// generators, A given by distinct keys.
std::size_t boundary_size(GroupModel const& m, std::vector<Key> const& a);
std::size_t boundary_size(GroupModel const& m, std::vector<Key> const& a, KeySet const& set);

// ---------------------------------------------------------------------------
// Covering lemma

// A finite group by its multiplication table; element 0 is the identity.
class FiniteGroup {
 public:
  // Closure of the given permutations. Throws BudgetExhausted past max_order.
  static FiniteGroup generated_by(std::vector<Perm> const& gens, std::size_t max_order = 100000);
  // G / H for a normal coset table.
  static FiniteGroup quotient(CosetTable const& t);

  std::size_t order() const noexcept { return n_; }
  std::size_t multiply(std::size_t a, std::size_t b) const noexcept { return mult_[a * n_ + b]; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> mult_;
};

struct CoverResult {
  std::vector<std::size_t> x;
  // covered[r] = |A X_r| after r + 1 picks.
  std::vector<std::size_t> covered;
  // |A X_r| / |G| >= 1 - (1 - |A|/|G|)^r held after every round.
  bool bound_met = true;
};

// Greedy choice of k right translates A g, each maximising the number of
// newly covered elements; ties go to the smallest element.
CoverResult cover_greedy(FiniteGroup const& g, std::vector<std::size_t> const& a, std::size_t k);

// Same greedy on an abstract family: translate(c)[i] is the image of the
// i-th element of A under candidate c, all images in [0, n).
CoverResult cover_greedy(std::size_t n, std::size_t candidates, std::size_t a_size,
                         std::vector<std::uint32_t> const& images, std::size_t k);

// Exact check of covered / n >= 1 - (1 - a/n)^rounds.
bool coverage_bound_holds(std::size_t covered, std::size_t n, std::size_t a, std::size_t rounds);

// ---------------------------------------------------------------------------
// Almost invariant transversals

// T = F_0 F_1 ... F_m, stored factored: element i has mixed-radix digits
// (i_0, ..., i_m) with i_0 most significant, and word f_0 f_1 ... f_m.
struct InvariantTransversal {
  std::size_t level = 0;  // chain level
  std::vector<std::vector<Word>> factors;
  std::size_t boundary = 0;  // |d_S(T)| in the group
  std::size_t generators = 0;
  double epsilon_bound = 0;

  std::size_t size() const;
  Word element(std::size_t i) const;
  Fraction epsilon_achieved() const;

  // {level, size, boundary, epsilon_achieved, epsilon_bound}
  std::string to_json() const;
};

// Cosets and keys of every element of T, in element order.
struct ExpandedTransversal {
  std::vector<Coset> cosets;
  std::vector<Key> keys;
};

// Throws InvariantViolation unless T hits every coset of the level once.
ExpandedTransversal expand(InvariantTransversal const& t, CosetTable const& level,
                           GroupModel const& m);

// One word per line, in coset order.
std::string export_transversal(InvariantTransversal const& t, CosetTable const& level);

inline constexpr double kWeissDelta = 0.1 / 2.718281828459045;
inline constexpr double kWeissC = 2.21 / 2.718281828459045;

struct Step1Report {
  InvariantTransversal transversal;
  std::size_t a_size = 0;
  std::size_t a_boundary = 0;
  std::size_t x_size = 0;
  std::size_t ax_size = 0;   // |AX| in the group
  std::size_t ax_boundary = 0;
  std::size_t b_size = 0;    // = |image of AX|
  std::size_t b_boundary = 0;
  bool cover_bound_met = false;
  // The inequality chain of the construction, re-checked on the instance.
  bool b_chain_holds = false;   // |dB| <= |dAX| + |S|(|AX| - |B|) <= |S||A||X|(delta + 1/e)
  bool b_bound_holds = false;   // |dB| <= 1.21/(e-1) |S||B|
  bool t_bound_holds = false;   // |dT| <= 2.21/e |S||T|
};

// Builds a 2.21/e-invariant transversal from a delta-invariant set A (delta =
// 0.1/e). Uses the first materialised level where A injects and index/|A| >
// 10. Throws InvalidArgument if A is not delta-invariant or no level fits
// (extend the chain), InvariantViolation if the final bound fails.
Step1Report weiss_step1(Chain const& c, GroupModel const& m, std::vector<Word> const& a);

struct Step2Options {
  std::size_t max_levels_ahead = 4;
};

struct Step2Report {
  InvariantTransversal transversal;
  std::size_t from_level = 0;
  std::size_t s1_size = 0;      // |S_1| = |d_S(T_1)|, with multiplicity
  std::size_t s1_distinct = 0;
  std::size_t t2_size = 0;
  std::size_t t2_boundary = 0;  // |d_{S_1}(T_2)|
  Fraction t2_epsilon;
  bool product_identity = false;  // |d_S(T_1 T_2)| = |d_{S_1}(T_2)|
};

// T = T_1 T_2 with T_2 a breadth-first transversal of Gamma_l in Gamma_k over
// the distinct elements of S_1, for the first l > k where T_2 is
// 2.21/e-invariant with respect to the multiset S_1. Throws BudgetExhausted if
// no materialised level within max_levels_ahead works.
Step2Report weiss_step2(Chain const& c, GroupModel const& m, InvariantTransversal const& t1,
                        Step2Options const& options = {});

struct SchreierGeneratingSet {
  std::size_t level = 0;
  // One generator (~st)^-1 s t per boundary pair (t, st) of T: the element
  // index of t, the generator s, and the group element.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<Key> keys;
  std::size_t distinct = 0;  // distinct group elements among them
  // Every Reidemeister-Schreier generator of the level was rewritten over
  // the set and the rewrite checked in the group.
  bool certified = false;
  bool conjugated = false;  // set when T misses the identity: generates t_0^-1 H t_0
  Fraction r_upper;         // (distinct - 1) / index

  std::size_t size() const noexcept { return keys.size(); }
  Word word(GroupModel const& m, std::size_t i) const { return m.to_word(keys[i]); }
};

// Throws InvariantViolation when the certificate fails.
SchreierGeneratingSet schreier_generators_from_transversal(Chain const& c, GroupModel const& m,
                                                           InvariantTransversal const& t);

}  // namespace rgkit
