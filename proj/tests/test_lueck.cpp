#include <algorithm>
#include <memory>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rgkit/errors.hpp"
#include "rgkit/lueck.hpp"

using namespace rgkit;

namespace {

std::shared_ptr<Presentation const> pres(char const* text) {
  return std::make_shared<Presentation const>(parse_presentation(text));
}

GroupAlgebraMatrix mat(char const* text, Presentation const& p) {
  return parse_group_algebra_matrix(text, p);
}

Word power(std::size_t gen, std::int64_t e) {
  std::vector<Letter> letters(static_cast<std::size_t>(std::abs(e)), letter_of(gen, e < 0));
  return Word::reduce_unchecked(letters);
}

using Dense = std::vector<std::vector<Fraction>>;

Dense to_dense(SparseMatrix const& m) {
  Dense d(m.rows, std::vector<Fraction>(m.cols));
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (auto const& [c, v] : m.data[r]) {
      d[r][c] = v;
    }
  }
  return d;
}

SparseMatrix to_sparse(Dense const& d, std::size_t cols) {
  SparseMatrix m;
  m.rows = d.size();
  m.cols = cols;
  for (auto const& row : d) {
    auto& out = m.data.emplace_back();
    for (std::size_t c = 0; c < cols; ++c) {
      if (row[c] != 0) {
        out.emplace_back(static_cast<std::uint32_t>(c), row[c]);
      }
    }
  }
  return m;
}

// Dense Gauss-Jordan over Q with exact fractions.
std::size_t dense_rank_q(Dense d) {
  std::size_t rank = 0;
  std::size_t const cols = d.empty() ? 0 : d[0].size();
  for (std::size_t c = 0; c < cols && rank < d.size(); ++c) {
    std::size_t r = rank;
    while (r < d.size() && d[r][c] == 0) {
      ++r;
    }
    if (r == d.size()) {
      continue;
    }
    std::swap(d[r], d[rank]);
    for (std::size_t x = 0; x < d.size(); ++x) {
      if (x != rank && d[x][c] != 0) {
        Fraction const f = d[x][c] / d[rank][c];
        for (std::size_t y = c; y < cols; ++y) {
          d[x][y] = d[x][y] - f * d[rank][y];
        }
      }
    }
    ++rank;
  }
  return rank;
}

// Dense elimination mod p on integer entries.
std::size_t dense_rank_p(std::vector<std::vector<std::int64_t>> d, std::int64_t p) {
  auto mod = [p](std::int64_t v) { return ((v % p) + p) % p; };
  auto inv = [&](std::int64_t v) {
    std::int64_t r = 1, b = v, e = p - 2;
    while (e) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
      e >>= 1;
    }
    return r;
  };
  std::size_t rank = 0;
  std::size_t const cols = d.empty() ? 0 : d[0].size();
  for (auto& row : d) {
    for (auto& v : row) v = mod(v);
  }
  for (std::size_t c = 0; c < cols && rank < d.size(); ++c) {
    std::size_t r = rank;
    while (r < d.size() && d[r][c] == 0) ++r;
    if (r == d.size()) continue;
    std::swap(d[r], d[rank]);
    std::int64_t const i = inv(d[rank][c]);
    for (std::size_t x = rank + 1; x < d.size(); ++x) {
      std::int64_t const f = d[x][c] * i % p;
      for (std::size_t y = c; y < cols; ++y) {
        d[x][y] = mod(d[x][y] - f * d[rank][y]);
      }
    }
    ++rank;
  }
  return rank;
}

std::shared_ptr<CosetTable const> cyclic_level(std::shared_ptr<Presentation const> p,
                                               std::uint64_t n) {
  return std::make_shared<CosetTable const>(abelian_kernel_table(p, AbelianHom{{n}, {{1}}}));
}

}  // namespace

TEST_CASE("fields and matrix input") {
  CHECK(Field::prime(2).name() == "F2");
  CHECK(Field::rationals().name() == "Q");
  CHECK_THROWS_AS(Field::prime(4), InvalidArgument);
  CHECK_THROWS_AS(Field::prime(1), InvalidArgument);

  auto z2 = pres("gens a b; rels [a,b];");
  GroupAlgebraMatrix a = mat("matrix K=Q n=1 m=2\n(1,1) = 1 - a\n(1,2) = 1/2*b^-1 + 3 + a*b", *z2);
  CHECK(a.rows == 1);
  CHECK(a.cols == 2);
  CHECK(a.field == Field::rationals());
  CHECK(a.at(0, 0) == normalize({{1, Word()}, {-1, power(0, 1)}}));
  CHECK(a.at(0, 1) ==
        normalize({{Fraction(1, 2), power(1, -1)}, {3, Word()}, {1, power(0, 1) * power(1, 1)}}));
  CHECK(a.support().size() == 4);

  CHECK(mat("matrix K=F5 n=1 m=1\n(1,1) = a", *z2).field == Field::prime(5));
  CHECK(mat("matrix K=Fp p=3 n=1 m=1 # comment\n", *z2).field == Field::prime(3));
  CHECK(mat("matrix n=1 m=1\n(1,1) = a - a", *z2).at(0, 0).empty());
  CHECK(mat("matrix n=1 m=1\n(1,1) = a^-1-b", *z2).at(0, 0).size() == 2);

  CHECK_THROWS_AS(mat("(1,1) = a", *z2), ParseError);
  CHECK_THROWS_AS(mat("matrix n=1 m=1\n(2,1) = a", *z2), ParseError);
  CHECK_THROWS_AS(mat("matrix n=1 m=1\n(1,1) = a\n(1,1) = b", *z2), ParseError);
  CHECK_THROWS_AS(mat("matrix n=1 m=1\n(1,1) = c", *z2), ParseError);
  CHECK_THROWS_AS(mat("matrix K=F4 n=1 m=1", *z2), ParseError);
  CHECK_THROWS_AS(mat("matrix K=Fp n=1 m=1", *z2), ParseError);
  CHECK_THROWS_AS(mat("matrix n=1 m=1\n(1,1) = a +", *z2), ParseError);
  CHECK_THROWS_AS(mat("", *z2), ParseError);
}

TEST_CASE("pushforward on cyclic quotients") {
  auto z = pres("gens a; rels ;");
  GroupAlgebraMatrix one = mat("matrix n=1 m=1\n(1,1) = 1", *z);
  GroupAlgebraMatrix diff = mat("matrix n=1 m=1\n(1,1) = 1 - a", *z);
  GroupAlgebraMatrix sum = mat("matrix n=1 m=1\n(1,1) = 1 + a", *z);
  GroupAlgebraMatrix tri = mat("matrix n=1 m=1\n(1,1) = 1 + a + a^2", *z);
  for (std::uint64_t n = 1; n <= 64; ++n) {
    auto level = cyclic_level(z, n);
    CHECK(kernel_dim(pushforward(one, *level), Field::rationals()) == 0);
    for (Field k : {Field::rationals(), Field::prime(2), Field::prime(3)}) {
      CHECK(kernel_dim(pushforward(diff, *level), k) == 1);
    }
    // Circulant oracle: dense elimination of I + C over F_2.
    SparseMatrix m = pushforward(sum, *level);
    std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t x = 0; x < n; ++x) {
      d[x][x] += 1;
      d[(x + 1) % n][x] += 1;
    }
    CHECK(kernel_dim(m, Field::prime(2)) == n - dense_rank_p(d, 2));
    CHECK(kernel_dim(m, Field::rationals()) == n - dense_rank_q(to_dense(m)));
    // 1 + x + x^2 shares a factor with x^n - 1 over Q exactly when 3 | n.
    CHECK(kernel_dim(pushforward(tri, *level), Field::rationals()) == (n % 3 == 0 ? 2 : 0));
  }
  auto eight = cyclic_level(z, 8);
  SparseMatrix m8 = pushforward(diff, *eight);
  CHECK(kernel_dim(m8, Field::rationals()) == 1);
  CHECK(dense_rank_q(to_dense(m8)) == 7);
}

TEST_CASE("elimination against dense oracles") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t const rows = 1 + rng() % 7, cols = 1 + rng() % 7;
    Dense d(rows, std::vector<Fraction>(cols));
    std::vector<std::vector<std::int64_t>> di(rows, std::vector<std::int64_t>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (rng() % 3 == 0) {
          std::int64_t const v = static_cast<std::int64_t>(rng() % 11) - 5;
          d[r][c] = v;
          di[r][c] = v;
        }
      }
    }
    // Low-rank rows: sums of earlier rows.
    if (rows > 2 && rng() % 2) {
      for (std::size_t c = 0; c < cols; ++c) {
        d[rows - 1][c] = d[0][c] + d[1][c] * 3;
        di[rows - 1][c] = di[0][c] + di[1][c] * 3;
      }
    }
    SparseMatrix m = to_sparse(d, cols);
    std::size_t const rq = rank(m, Field::rationals());
    CHECK(rq == dense_rank_q(d));
    CHECK(kernel_dim(m, Field::rationals()) + rq == cols);
    for (std::uint32_t p : {2u, 3u, 7u, 2147483647u}) {
      CHECK(rank(m, Field::prime(p)) == dense_rank_p(di, p));
    }
    // Row and column permutations leave the rank alone.
    std::vector<std::size_t> rp(rows), cp(cols);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), rng);
    std::shuffle(cp.begin(), cp.end(), rng);
    Dense e(rows, std::vector<Fraction>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        e[rp[r]][cp[c]] = d[r][c];
      }
    }
    CHECK(rank(to_sparse(e, cols), Field::rationals()) == rq);
    CHECK(rank(to_sparse(e, cols), Field::prime(3)) == rank(m, Field::prime(3)));
  }

  SparseMatrix zero;
  zero.rows = 3;
  zero.cols = 4;
  zero.data.resize(3);
  CHECK(kernel_dim(zero, Field::rationals()) == 4);
  SparseMatrix half = to_sparse({{Fraction(1, 2)}}, 1);
  CHECK(rank(half, Field::prime(3)) == 1);
  CHECK_THROWS_AS(rank(half, Field::prime(2)), InvalidArgument);
}

TEST_CASE("pushforward is multiplicative") {
  auto s3 = pres("gens a b; rels a^2 b^3 (a*b)^2;");
  auto z2 = pres("gens a b; rels [a,b];");
  std::mt19937 rng(5);
  for (auto const& p : {s3, z2}) {
    auto level = p == s3 ? std::make_shared<CosetTable const>(
                               enumerate(p, parse_subgroup_spec("sub gens", *p)))
                         : std::make_shared<CosetTable const>(abelian_kernel_table(
                               p, AbelianHom{{4, 2}, {{1, 0}, {0, 1}}}));
    std::size_t const n = level->coset_count();
    auto random_element = [&] {
      std::vector<GroupAlgebraTerm> terms;
      for (int t = 0; t < 3; ++t) {
        std::vector<Letter> letters;
        for (int l = 0; l < 4; ++l) {
          letters.push_back(letter_of(rng() % 2, rng() % 2));
        }
        terms.push_back({static_cast<std::int64_t>(rng() % 5) - 2, Word::reduce_unchecked(letters)});
      }
      return normalize(std::move(terms));
    };
    for (int trial = 0; trial < 20; ++trial) {
      GroupAlgebraElement x = random_element(), y = random_element();
      Dense px = to_dense(pushforward(scalar_matrix(x), *level));
      Dense py = to_dense(pushforward(scalar_matrix(y), *level));
      Dense pxy = to_dense(pushforward(scalar_matrix(multiply(x, y)), *level));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          Fraction s = 0;
          for (std::size_t k = 0; k < n; ++k) {
            s = s + px[r][k] * py[k][c];
          }
          CHECK(s == pxy[r][c]);
        }
      }
    }
  }
}

TEST_CASE("approximation sequences") {
  auto z = pres("gens a; rels ;");
  GroupAlgebraMatrix diff = mat("matrix n=1 m=1\n(1,1) = 1 - a", *z);
  Chain two = derived_p_chain(z, 2, 6);
  Chain three = derived_p_chain(z, 3, 6);
  for (Field k : {Field::rationals(), Field::prime(2)}) {
    KernelDimSequence s2 = approx_sequence(diff, two, k);
    KernelDimSequence s3 = approx_sequence(diff, three, k, {.parallel = true});
    REQUIRE(s2.levels.size() == 6);
    for (std::size_t n = 1; n <= 6; ++n) {
      CHECK(s2.levels[n - 1].kernel_dim == 1);
      CHECK(s2.levels[n - 1].value == Fraction(1, std::int64_t{1} << n));
      CHECK(s3.levels[n - 1].value ==
            Fraction(1, static_cast<std::int64_t>(std::pow(3, static_cast<double>(n)))));
    }
    CHECK(s2.estimate == Fraction(1, 64));
    CHECK((s2.estimate - s3.estimate).to_double() < 0.05);
    CHECK(s3.spread < Fraction(1, 5));
  }
  KernelDimSequence s = approx_sequence(diff, two, Field::rationals());
  CHECK(s.to_csv() ==
        "level,index,kernel_dim,value\n1,2,1,0.5\n2,4,1,0.25\n3,8,1,0.125\n4,16,1,0.0625\n"
        "5,32,1,0.03125\n6,64,1,0.015625\n");
  CHECK(s.to_json().find("\"estimate\"") != std::string::npos);

  GroupAlgebraMatrix zero = mat("matrix n=1 m=1", *z);
  KernelDimSequence sz = approx_sequence(zero, two, Field::rationals());
  for (auto const& l : sz.levels) {
    CHECK(l.value == 1);
  }
  CHECK(sz.estimate == 1);

  auto f2 = pres("gens a b; rels ;");
  Chain nonnormal(f2);
  nonnormal.push(std::make_shared<CosetTable const>(
      enumerate(f2, parse_subgroup_spec("sub perm degree=3 a=(1,2,3) b=(1,2) stab=1", *f2))));
  GroupAlgebraMatrix fa = mat("matrix n=1 m=1\n(1,1) = 1 - a", *f2);
  CHECK_THROWS_AS(approx_sequence(fa, nonnormal, Field::rationals()), InvalidArgument);
  CHECK_THROWS_AS(pushforward(fa, *nonnormal.level(1).table), InvalidArgument);
}

TEST_CASE("h on finite windows") {
  auto z = pres("gens a; rels ;");
  auto z2 = pres("gens a b; rels [a,b];");
  FreeAbelianModel m1(1), m2(2);
  auto interval = [](std::int64_t k) {
    std::vector<Word> w;
    for (std::int64_t i = 0; i < k; ++i) {
      w.push_back(power(0, i));
    }
    return w;
  };
  GroupAlgebraMatrix one = mat("matrix n=1 m=1\n(1,1) = 1", *z);
  GroupAlgebraMatrix diff = mat("matrix n=1 m=1\n(1,1) = 1 - a", *z);
  GroupAlgebraMatrix zero = mat("matrix n=1 m=1", *z);
  for (std::int64_t k = 1; k <= 20; ++k) {
    CHECK(folner_h(one, interval(k), m1, Field::rationals()) == static_cast<std::size_t>(k));
    CHECK(folner_h(diff, interval(k), m1, Field::prime(2)) == static_cast<std::size_t>(k));
    CHECK(folner_h(zero, interval(k), m1, Field::rationals()) == 0);
  }

  GroupAlgebraMatrix sq = mat("matrix n=1 m=1\n(1,1) = 1 - a - b + a*b", *z2);
  GroupAlgebraMatrix wide = mat("matrix n=2 m=2\n(1,1) = 1 - a\n(1,2) = b\n(2,1) = 1 + b\n(2,2) = a - a*b", *z2);
  std::mt19937 rng(9);
  auto random_set = [&] {
    std::vector<Key> s;
    for (int i = 0; i < 12; ++i) {
      s.push_back({static_cast<std::int64_t>(rng() % 6), static_cast<std::int64_t>(rng() % 6)});
    }
    return s;
  };
  for (int trial = 0; trial < 30; ++trial) {
    for (auto const* a : {&sq, &wide}) {
      for (Field k : {Field::rationals(), Field::prime(2)}) {
        auto o1 = random_set(), o2 = random_set();
        auto both = o1;
        both.insert(both.end(), o2.begin(), o2.end());
        std::size_t const h1 = folner_h(*a, o1, m2, k);
        CHECK(folner_h(*a, both, m2, k) <= h1 + folner_h(*a, o2, m2, k));
        Key const g{static_cast<std::int64_t>(rng() % 9) - 4, static_cast<std::int64_t>(rng() % 9) - 4};
        std::vector<Key> shifted;
        for (Key const& x : o1) {
          shifted.push_back(m2.multiply(x, g));
        }
        CHECK(folner_h(*a, shifted, m2, k) == h1);
      }
    }
  }

  // Right invariance in a free group.
  auto f2 = pres("gens a b; rels ;");
  FreeModel mf(2);
  GroupAlgebraMatrix fa = mat("matrix n=1 m=1\n(1,1) = 1 - a + 2*b^-1*a", *f2);
  std::vector<Word> ball;
  for (Letter x : {1, -1, 2, -2}) {
    for (Letter y : {1, -1, 2, -2}) {
      ball.push_back(Word::reduce_unchecked(std::vector<Letter>{x, y}));
    }
  }
  std::size_t const hb = folner_h(fa, ball, mf, Field::rationals());
  Word const g = power(0, 2) * power(1, -1);
  std::vector<Word> moved;
  for (Word const& w : ball) {
    moved.push_back(w * g);
  }
  CHECK(folner_h(fa, moved, mf, Field::rationals()) == hb);
}

TEST_CASE("Ornstein-Weiss limit") {
  auto z = pres("gens a; rels ;");
  FreeAbelianModel m1(1);
  std::vector<FolnerMember> family;
  for (std::int64_t k = 1; k <= 6; ++k) {
    FolnerMember f;
    for (std::int64_t i = 0; i < (std::int64_t{1} << k); ++i) {
      f.words.push_back(power(0, i));
    }
    f.epsilon = 1.0 / static_cast<double>(std::int64_t{1} << k);
    family.push_back(f);
  }
  GroupAlgebraMatrix diff = mat("matrix n=1 m=1\n(1,1) = 1 - a", *z);
  OwEstimate est = ow_limit_estimate(diff, family, m1, Field::rationals());
  for (Fraction r : est.ratios) {
    CHECK(r == 1);
  }
  CHECK(est.kernel_limit == 0);
  Chain two = derived_p_chain(z, 2, 6);
  CHECK((approx_sequence(diff, two, Field::rationals()).estimate - est.kernel_limit).to_double() < 0.05);

  CHECK(ow_limit_estimate(mat("matrix n=1 m=1", *z), family, m1, Field::rationals()).kernel_limit == 1);
  GroupAlgebraMatrix two_id = mat("matrix n=1 m=1\n(1,1) = 2", *z);
  CHECK(ow_limit_estimate(two_id, family, m1, Field::rationals()).kernel_limit == 0);
  CHECK(ow_limit_estimate(two_id, family, m1, Field::prime(2)).kernel_limit == 1);
  CHECK(ow_limit_estimate(two_id, family, m1, Field::prime(2)).h.back() == 0);

  std::vector<FolnerMember> bad = family;
  std::swap(bad[0], bad[1]);
  CHECK_THROWS_AS(ow_limit_estimate(diff, bad, m1, Field::rationals()), InvalidArgument);
  std::vector<FolnerMember> loose = {family[2]};
  loose[0].epsilon = 0.01;
  CHECK_THROWS_AS(ow_limit_estimate(diff, loose, m1, Field::rationals()), InvalidArgument);
}

TEST_CASE("sandwich on box transversals") {
  auto z2 = pres("gens a b; rels [a,b];");
  std::vector<LevelHom> homs;
  for (std::uint64_t j = 1; j <= 4; ++j) {
    homs.push_back(AbelianHom{{1u << j, 1u << j}, {{1, 0}, {0, 1}}});
  }
  Chain c = nested_kernel_chain(z2, homs);
  FreeAbelianModel m(2);
  for (char const* text : {"matrix n=1 m=1\n(1,1) = 1 - a", "matrix n=1 m=1\n(1,1) = 1 - a - b + a*b",
                           "matrix n=1 m=1\n(1,1) = 1 + a + b"}) {
    GroupAlgebraMatrix a = mat(text, *z2);
    for (std::size_t n = 1; n <= 4; ++n) {
      std::int64_t const side = std::int64_t{1} << n;
      InvariantTransversal t;
      t.level = n;
      t.generators = 2;
      t.factors.resize(2);
      for (std::int64_t i = 0; i < side; ++i) {
        t.factors[0].push_back(power(0, i));
        t.factors[1].push_back(power(1, i));
      }
      for (Field k : {Field::rationals(), Field::prime(2)}) {
        SandwichReport s = sandwich_check(a, c, t, m, k);
        CHECK(s.transversal_size == static_cast<std::size_t>(side * side));
        CHECK(s.holds());
      }
    }
  }
}

TEST_CASE("bounded generation probe") {
  auto z = pres("gens a; rels ;");
  BgReport cyclic = bounded_generation_probe(derived_p_chain(z, 2, 5), 1);
  CHECK_FALSE(cyclic.violation);
  for (auto const& l : cyclic.levels) {
    CHECK(l.r == 1);
  }

  BgReport lattice = bounded_generation_probe(derived_p_chain(pres("gens a b; rels [a,b];"), 2, 4), 2);
  CHECK_FALSE(lattice.violation);
  for (auto const& l : lattice.levels) {
    CHECK(l.r == 2);
    CHECK(static_cast<double>(l.r) <= l.bound);
  }
  CHECK(lattice.levels.back().ratio.to_double() < 0.01);

  BgReport free = bounded_generation_probe(derived_p_chain(pres("gens a b; rels ;"), 2, 2), 2);
  CHECK(free.violation);
  REQUIRE(free.first_violation);
  CHECK(*free.first_violation == 1);
  CHECK(free.levels[1].index == 4);
  CHECK(free.levels[1].r == 5);
  CHECK(free.levels[1].bound == 4);
  CHECK(free.to_json().find("\"first_violation\": 1") != std::string::npos);
  CHECK_THROWS_AS(bounded_generation_probe(derived_p_chain(z, 2, 1), 0), InvalidArgument);
}
