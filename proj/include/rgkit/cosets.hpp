#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rgkit/presentation.hpp"
#include "rgkit/word.hpp"

namespace rgkit {

using Coset = std::uint32_t;

// A permutation of {0, ..., degree-1}, stored as its image list.
using Perm = std::vector<std::uint32_t>;

// Parses disjoint-cycle notation with 1-based points, e.g. "(1,2)(3,4,5)" or
// "()" for the identity.
Perm parse_cycles(std::string_view text, std::size_t degree);
std::string format_cycles(Perm const& p);
bool is_permutation(Perm const& p);
// (f * g)(x) = f(g(x)): g is applied first.
Perm compose(Perm const& f, Perm const& g);
Perm perm_inverse(Perm const& p);

// The image of a word under a homomorphism given by generator images, with
// letters applied right to left.
Perm evaluate(Word const& w, std::span<Perm const> images, std::size_t degree);

// A complete coset table of a finite-index subgroup H. Cosets are left cosets
// gH, coset 0 is H itself, and generator s maps gH to sgH. Cosets are numbered
// in breadth-first discovery order from coset 0, generators tried in index
// order.
class CosetTable {
 public:
  // Relabels `action` (action[s][c] = s.c) breadth-first from `root` and checks
  // that every generator acts bijectively, the action is transitive and every
  // relator of `origin` fixes every coset. Throws InvalidArgument otherwise.
  static CosetTable make(std::shared_ptr<Presentation const> origin,
                         std::vector<std::vector<Coset>> const& action, Coset root = 0);

  std::size_t coset_count() const noexcept { return n_; }
  std::size_t index() const noexcept { return n_; }
  std::size_t generator_count() const noexcept { return d_; }
  Presentation const& origin() const noexcept { return *origin_; }
  std::shared_ptr<Presentation const> const& origin_ptr() const noexcept { return origin_; }

  Coset act(std::size_t gen, Coset c) const noexcept { return act_[gen * n_ + c]; }
  Coset act_inverse(std::size_t gen, Coset c) const noexcept { return inv_[gen * n_ + c]; }
  Coset apply(Letter x, Coset c) const noexcept {
    return x > 0 ? act(generator_of(x), c) : act_inverse(generator_of(x), c);
  }
  // w.c with the rightmost letter applied first.
  Coset apply(Word const& w, Coset c) const noexcept;
  std::span<Coset const> action(std::size_t gen) const noexcept {
    return {act_.data() + gen * n_, n_};
  }

  // Normality of H, certified by checking that right multiplication by every
  // generator is a well-defined map of the coset space (conjugation by the
  // generators preserves H). Linear in the table size.
  bool is_normal() const;
  // When H is normal, right multiplication gH -> g s H for each generator s;
  // std::nullopt otherwise.
  std::optional<std::vector<std::vector<Coset>>> right_multiplications() const;

  // Every relator fixes every coset; throws InvariantViolation if not.
  void verify() const;

  friend bool operator==(CosetTable const& a, CosetTable const& b) {
    return a.n_ == b.n_ && a.act_ == b.act_;
  }

 private:
  CosetTable() = default;
  std::shared_ptr<Presentation const> origin_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<Coset> act_;
  std::vector<Coset> inv_;
};

// H generated by words, realised by coset enumeration.
struct WordsSubgroup {
  std::vector<Word> generators;
};

// H obtained from a homomorphism to Sym(degree) given by generator images:
// the kernel, or the stabiliser of a point when `stabilized_point` is set.
struct PermSubgroup {
  std::size_t degree = 0;
  std::vector<Perm> images;
  std::optional<std::size_t> stabilized_point;
};

using SubgroupSpec = std::variant<WordsSubgroup, PermSubgroup>;

// `sub gens <word>+` or `sub perm degree=<n> <gen>=<cycles>+ [stab=<point>|kernel]`.
SubgroupSpec parse_subgroup_spec(std::string_view text, Presentation const& p);

struct EnumerationOptions {
  std::size_t max_cosets = 1'000'000;
};

// Realises the subgroup described by `spec` as a complete coset table.
// Word specs use HLT coset enumeration with lookahead; `max_cosets` bounds the
// number of simultaneously live cosets. Throws BudgetExhausted when the
// enumeration cannot close within the budget and InvalidArgument for an
// inconsistent spec.
CosetTable enumerate(std::shared_ptr<Presentation const> p, SubgroupSpec const& spec,
                     EnumerationOptions const& options = {});

// Todd-Coxeter (HLT + lookahead) for H = <subgroup_generators>.
CosetTable todd_coxeter(std::shared_ptr<Presentation const> p,
                        std::vector<Word> const& subgroup_generators,
                        std::size_t max_cosets);

// Coset table of the kernel of the homomorphism given by `images`: cosets are
// the elements of the image group. Throws InvalidArgument if a relator does not
// map to the identity, BudgetExhausted if the image has more than `max_order`
// elements.
CosetTable kernel_table(std::shared_ptr<Presentation const> p, std::span<Perm const> images,
                        std::size_t max_order = 1'000'000);

// Coset table of the stabiliser of `point`: cosets are the points of its orbit.
CosetTable stabilizer_table(std::shared_ptr<Presentation const> p,
                            std::span<Perm const> images, std::size_t point);

// A homomorphism to the finite abelian group Z/m_1 x ... x Z/m_k, given by
// the image vector of each generator.
struct AbelianHom {
  std::vector<std::uint64_t> moduli;
  std::vector<std::vector<std::int64_t>> images;
};

// Coset table of the kernel of an abelian homomorphism: cosets are the
// elements of the image. Much cheaper than kernel_table for large abelian
// quotients. Throws InvalidArgument if a relator has nonzero image and
// BudgetExhausted if the image has more than `max_order` elements.
CosetTable abelian_kernel_table(std::shared_ptr<Presentation const> p, AbelianHom const& hom,
                                std::size_t max_order = 1'000'000);

}  // namespace rgkit
