#include <random>

#include "doctest.h"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"

using namespace rgkit;

namespace {

DenseMatrix random_dense(std::mt19937& rng, std::size_t r, std::size_t c, int range) {
  std::uniform_int_distribution<int> dist(-range, range);
  DenseMatrix m(r, std::vector<BigInt>(c));
  for (auto& row : m) {
    for (auto& x : row) {
      x = dist(rng);
    }
  }
  return m;
}

SparseIntMatrix to_sparse(DenseMatrix const& m) {
  SparseIntMatrix s;
  s.cols = m.empty() ? 0 : m[0].size();
  for (auto const& row : m) {
    auto& out = s.rows.emplace_back();
    for (std::uint32_t c = 0; c < row.size(); ++c) {
      if (row[c] != 0) {
        out.emplace_back(c, static_cast<std::int64_t>(row[c]));
      }
    }
  }
  return s;
}

// Rank over F_p by plain dense Gaussian elimination.
std::size_t dense_rank_mod(DenseMatrix const& m, std::int64_t p) {
  std::vector<std::vector<std::int64_t>> a;
  for (auto const& row : m) {
    auto& r = a.emplace_back();
    for (auto const& x : row) {
      std::int64_t v = static_cast<std::int64_t>(x % p);
      r.push_back(v < 0 ? v + p : v);
    }
  }
  std::size_t rank = 0;
  std::size_t cols = a.empty() ? 0 : a[0].size();
  for (std::size_t c = 0; c < cols && rank < a.size(); ++c) {
    std::size_t piv = rank;
    while (piv < a.size() && a[piv][c] == 0) {
      ++piv;
    }
    if (piv == a.size()) {
      continue;
    }
    std::swap(a[piv], a[rank]);
    std::int64_t inv = 1;
    for (std::int64_t k = 1; k < p; ++k) {
      if (a[rank][c] * k % p == 1) {
        inv = k;
      }
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i != rank && a[i][c] != 0) {
        std::int64_t f = a[i][c] * inv % p;
        for (std::size_t j = 0; j < cols; ++j) {
          a[i][j] = ((a[i][j] - f * a[rank][j]) % p + p) % p;
        }
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("Smith normal form of small matrices") {
  DenseMatrix m{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
  SmithForm s = smith_normal_form(m);
  CHECK(s.diagonal == std::vector<BigInt>{2, 6, 12});
  CHECK(s.unit_count() == 0);
  CHECK(s.free_rank() == 0);

  SparseIntMatrix zero;
  zero.cols = 3;
  zero.rows.resize(2);
  CHECK(smith_normal_form(zero).minimal_generators() == 3);
  CHECK(smith_normal_form(zero).free_rank() == 3);
}

TEST_CASE("Smith decomposition reproduces the input") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t r = 1 + trial % 5;
    std::size_t c = 1 + (trial / 5) % 5;
    DenseMatrix a = random_dense(rng, r, c, 6);
    auto [u, d, v] = smith_decomposition(a);
    CHECK(multiply(multiply(u, a), v) == d);
    CHECK(abs(determinant(u)) == 1);
    CHECK(abs(determinant(v)) == 1);
    std::vector<BigInt> diag;
    for (std::size_t i = 0; i < std::min(r, c); ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        if (i != j) {
          CHECK(d[i][j] == 0);
        }
      }
      if (d[i][i] != 0) {
        CHECK(d[i][i] > 0);
        diag.push_back(d[i][i]);
      }
    }
    for (std::size_t i = 1; i < diag.size(); ++i) {
      CHECK(diag[i] % diag[i - 1] == 0);
    }
    // Sparse path agrees with the dense one.
    CHECK(smith_normal_form(to_sparse(a)).diagonal == diag);
    CHECK(smith_normal_form(a).diagonal == diag);
  }
}

TEST_CASE("sparse path survives 64-bit overflow") {
  SparseIntMatrix m;
  m.cols = 3;
  std::int64_t big = std::int64_t{1} << 62;
  m.rows = {{{0, 1}, {1, big}}, {{0, big}, {1, 1}, {2, 3}}, {{1, 2}, {2, big}}};
  SmithForm s = smith_normal_form(m);
  CHECK(s.diagonal == smith_normal_form(to_dense(m)).diagonal);
}

TEST_CASE("rank mod p matches dense elimination") {
  std::mt19937 rng(2);
  for (std::uint32_t p : {2U, 3U, 5U, 7U}) {
    for (int trial = 0; trial < 30; ++trial) {
      DenseMatrix a = random_dense(rng, 1 + trial % 7, 1 + trial % 6, 3);
      CHECK(rank_mod_p(to_sparse(a), p) == dense_rank_mod(a, p));
    }
  }
  CHECK_THROWS_AS(rank_mod_p(SparseIntMatrix{}, 4), InvalidArgument);
}

TEST_CASE("mod p quotient map kills every row") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    std::uint32_t p = trial % 2 == 0 ? 2 : 3;
    DenseMatrix a = random_dense(rng, 1 + trial % 4, 2 + trial % 5, 2);
    SparseIntMatrix s = to_sparse(a);
    std::size_t dim = 0;
    auto q = mod_p_quotient(s, p, 100, &dim);
    REQUIRE(q.has_value());
    CHECK(dim == s.cols - rank_mod_p(s, p));
    for (auto const& row : s.rows) {
      std::vector<std::int64_t> image(dim, 0);
      for (auto const& [c, v] : row) {
        for (std::size_t k = 0; k < dim; ++k) {
          image[k] += v * static_cast<std::int64_t>(q->image[c][k]);
        }
      }
      for (auto x : image) {
        CHECK(((x % p) + p) % p == 0);
      }
    }
  }
}
