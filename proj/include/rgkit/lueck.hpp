#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rgkit/amenable.hpp"
#include "rgkit/chains.hpp"
#include "rgkit/fraction.hpp"
#include "rgkit/presentation.hpp"

namespace rgkit {

// Q, or F_p with p prime and below 2^31.
struct Field {
  enum class Kind { rationals, prime };
  Kind kind = Kind::rationals;
  std::uint32_t p = 0;

  static Field rationals() { return {}; }
  // Throws InvalidArgument unless p is a prime below 2^31.
  static Field prime(std::uint32_t p);
  std::string name() const;  // "Q" or "F<p>"
  friend bool operator==(Field const&, Field const&) = default;
};

struct GroupAlgebraTerm {
  Fraction coeff;
  Word word;
  friend bool operator==(GroupAlgebraTerm const&, GroupAlgebraTerm const&) = default;
};

// Sum of terms with distinct words and nonzero coefficients, sorted by word.
using GroupAlgebraElement = std::vector<GroupAlgebraTerm>;

GroupAlgebraElement normalize(std::vector<GroupAlgebraTerm> terms);
// Convolution product; words are multiplied freely.
GroupAlgebraElement multiply(GroupAlgebraElement const& x, GroupAlgebraElement const& y);

struct GroupAlgebraMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<GroupAlgebraElement> entries;  // row-major
  Field field;                               // as declared by the input

  GroupAlgebraMatrix() = default;
  GroupAlgebraMatrix(std::size_t n, std::size_t m, Field k = {})
      : rows(n), cols(m), entries(n * m), field(k) {}

  GroupAlgebraElement& at(std::size_t i, std::size_t j) { return entries.at(i * cols + j); }
  GroupAlgebraElement const& at(std::size_t i, std::size_t j) const {
    return entries.at(i * cols + j);
  }
  // Distinct words over all entries, sorted.
  std::vector<Word> support() const;
};

// 1 x 1 matrix with the given element.
GroupAlgebraMatrix scalar_matrix(GroupAlgebraElement x, Field k = {});

// `matrix K=<Q|Fp> n=<n> m=<m>` followed by lines `(<i>,<j>) = <term> [+|- <term>]...`
// with 1-based indices. A term is `<coeff>*<word>`, a bare word (coefficient
// 1) or a bare coefficient (times the identity); coefficients are integers
// or fractions p/q. K=Fp needs `p=<prime>`; `K=F5` is shorthand. Missing
// entries are zero; `#` starts a comment.
GroupAlgebraMatrix parse_group_algebra_matrix(std::string_view text, Presentation const& p);

// Exact sparse matrix over Q; over F_p the entries are reduced on use.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::pair<std::uint32_t, Fraction>>> data;  // sorted by column
};

// Block (i, j) is sum c_g P(g), with P(g) the permutation matrix of left
// translation by g on the cosets: P(g)[g x][x] = 1. Throws InvalidArgument
// unless the level is normal.
SparseMatrix pushforward(GroupAlgebraMatrix const& a, CosetTable const& level);

// Row rank by sparse elimination: modular over F_p, fraction-free with
// content removal over Q. Throws InvalidArgument if some coefficient has a
// denominator divisible by p.
std::size_t rank(SparseMatrix const& m, Field k);
std::size_t kernel_dim(SparseMatrix const& m, Field k);

struct KernelDimLevel {
  std::size_t level = 0;
  std::size_t index = 0;
  std::size_t kernel_dim = 0;
  Fraction value;  // kernel_dim / index
};

struct KernelDimSequence {
  Field field;
  std::vector<KernelDimLevel> levels;
  Fraction estimate;  // value at the last level
  Fraction spread;    // max - min over the trailing half of the levels

  std::string to_json() const;
  // level,index,kernel_dim,value
  std::string to_csv() const;
};

struct LueckOptions {
  bool parallel = false;
  std::size_t first_level = 1;
};

// dim ker A_i / |G : G_i| for every materialised level from first_level on.
// Throws InvalidArgument at the first level that is not normal.
KernelDimSequence approx_sequence(GroupAlgebraMatrix const& a, Chain const& c, Field k,
                                  LueckOptions const& options = {});

// h(Omega) = dim {A b : supp b_j in Omega}, as the rank of the map from
// coefficient vectors on Omega^m to coefficient vectors on the window
// supp(A) Omega. Omega is given by keys; repeated keys count once.
std::size_t folner_h(GroupAlgebraMatrix const& a, std::vector<Key> const& omega,
                     GroupModel const& m, Field k);
std::size_t folner_h(GroupAlgebraMatrix const& a, std::vector<Word> const& omega,
                     GroupModel const& m, Field k);

struct FolnerMember {
  std::vector<Word> words;
  double epsilon = 1;  // declared invariance
};

struct OwEstimate {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> h;
  std::vector<Fraction> ratios;  // h / |Omega|
  Fraction h_limit;              // last ratio
  Fraction spread;               // over the trailing half
  Fraction kernel_limit;         // m - H

  std::string to_json() const;
};

// Throws InvalidArgument if the declared epsilons do not decrease or some
// member is less invariant (for the generators of the model) than declared.
OwEstimate ow_limit_estimate(GroupAlgebraMatrix const& a, std::vector<FolnerMember> const& family,
                             GroupModel const& m, Field k);

// h(T) >= dim Im A_j >= h(T) - n |d_supp(A)(T)|, T a transversal of level j.
struct SandwichReport {
  std::size_t level = 0;
  std::size_t transversal_size = 0;
  std::size_t h = 0;
  std::size_t image_dim = 0;
  std::size_t boundary_term = 0;  // n |d_supp(A)(T)|, supp(A) as a set

  bool holds() const noexcept { return h >= image_dim && image_dim + boundary_term >= h; }
};

SandwichReport sandwich_check(GroupAlgebraMatrix const& a, Chain const& c,
                              InvariantTransversal const& t, GroupModel const& m, Field k);

struct BgLevel {
  std::size_t level = 0;
  std::size_t index = 0;
  std::size_t r = 0;  // rank of G_i / G_i' G_i^2
  double bound = 0;   // t + (t - 1) log2 |G : G_i|
  Fraction ratio;     // r / index
  bool violated = false;
};

struct BgReport {
  std::size_t t = 0;
  std::vector<BgLevel> levels;
  bool violation = false;
  std::optional<std::size_t> first_violation;

  std::string to_json() const;
};

// Checks r_i <= t + (t - 1) log2 |G : G_i| exactly (as 2^(r - t) <=
// index^(t - 1)) at every level, level 0 included. Bounded generation by t
// cyclic factors is the user's claim; a violation is evidence against it.
BgReport bounded_generation_probe(Chain const& c, std::size_t t);

}  // namespace rgkit
