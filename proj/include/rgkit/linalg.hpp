#pragma once

// Exact linear algebra: Smith normal form over Z and elimination over F_p.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rgkit/word.hpp"

namespace rgkit {

using BigInt = boost::multiprecision::cpp_int;

// Row-sparse integer matrix; each row lists (column, nonzero value) pairs in
// increasing column order.
struct SparseIntMatrix {
  std::size_t cols = 0;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> rows;
};

// Exponent-sum matrix of relators over `generator_count` generators: one row
// per relator. This is the relation matrix of the abelianisation.
SparseIntMatrix relation_matrix(std::vector<Word> const& relators, std::size_t generator_count);

using DenseMatrix = std::vector<std::vector<BigInt>>;

struct SmithForm {
  std::size_t rows = 0;
  std::size_t cols = 0;
  // Nonzero invariant factors d_1 | d_2 | ..., all positive.
  std::vector<BigInt> diagonal;

  std::size_t rank() const noexcept { return diagonal.size(); }
  std::size_t unit_count() const;
  // Free rank of Z^cols / rowspace.
  std::size_t free_rank() const noexcept { return cols - rank(); }
  std::vector<BigInt> torsion() const;
  // Minimal number of generators of Z^cols / rowspace.
  std::size_t minimal_generators() const noexcept { return cols - unit_count(); }

  friend bool operator==(SmithForm const&, SmithForm const&) = default;
};

// Smith normal form of a sparse matrix. Unit pivots are eliminated sparsely
// with overflow-checked 64-bit arithmetic, the remainder densely with
// unbounded integers and minimal-absolute-value pivoting.
SmithForm smith_normal_form(SparseIntMatrix const& m);
SmithForm smith_normal_form(DenseMatrix const& m);

// U * A * V = D with U, V unimodular. Dense; meant for verification.
struct SmithDecomposition {
  DenseMatrix u;
  DenseMatrix d;
  DenseMatrix v;
};
SmithDecomposition smith_decomposition(DenseMatrix const& a);

DenseMatrix multiply(DenseMatrix const& a, DenseMatrix const& b);
// Determinant by fraction-free (Bareiss) elimination.
BigInt determinant(DenseMatrix const& a);
DenseMatrix to_dense(SparseIntMatrix const& m);

// Rank over F_p of an integer matrix (entries reduced mod p).
std::size_t rank_mod_p(SparseIntMatrix const& m, std::uint32_t p);

// The quotient map F_p^cols -> F_p^cols / rowspace, expressed in the basis of
// the non-pivot ("free") columns: image[j] is the coordinate vector of e_j.
struct ModPQuotient {
  std::uint32_t p = 2;
  std::size_t dimension = 0;
  std::vector<std::vector<std::uint32_t>> image;
};
// Returns std::nullopt without building the map if the quotient dimension
// exceeds `max_dimension`; `dimension_out` receives it either way.
std::optional<ModPQuotient> mod_p_quotient(SparseIntMatrix const& m, std::uint32_t p,
                                           std::size_t max_dimension,
                                           std::size_t* dimension_out = nullptr);

bool is_prime(std::uint64_t n);

}  // namespace rgkit
