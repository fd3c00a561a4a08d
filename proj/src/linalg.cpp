#include "rgkit/linalg.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <queue>

#include "rgkit/errors.hpp"

namespace rgkit {

SparseIntMatrix relation_matrix(std::vector<Word> const& relators, std::size_t generator_count) {
  SparseIntMatrix m;
  m.cols = generator_count;
  m.rows.reserve(relators.size());
  std::map<std::uint32_t, std::int64_t> sums;
  for (Word const& r : relators) {
    sums.clear();
    for (Letter x : r.letters()) {
      auto const g = static_cast<std::uint32_t>(generator_of(x));
      if (g >= generator_count) {
        throw InvalidArgument("relator mentions an undeclared generator");
      }
      sums[g] += x > 0 ? 1 : -1;
    }
    auto& row = m.rows.emplace_back();
    for (auto const& [c, v] : sums) {
      if (v != 0) {
        row.emplace_back(c, v);
      }
    }
  }
  return m;
}

std::size_t SmithForm::unit_count() const {
  return static_cast<std::size_t>(
      std::count_if(diagonal.begin(), diagonal.end(), [](BigInt const& d) { return d == 1; }));
}

std::vector<BigInt> SmithForm::torsion() const {
  std::vector<BigInt> out;
  for (BigInt const& d : diagonal) {
    if (d > 1) {
      out.push_back(d);
    }
  }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Dense Smith normal form

class DenseSmith {
 public:
  DenseSmith(DenseMatrix a, bool track)
      : a_(std::move(a)),
        rows_(a_.size()),
        cols_(a_.empty() ? 0 : a_[0].size()),
        track_(track) {
    if (track_) {
      u_ = identity(rows_);
      v_ = identity(cols_);
    }
  }

  void run() {
    std::size_t const limit = std::min(rows_, cols_);
    for (std::size_t t = 0; t < limit; ++t) {
      if (!bring_min_to(t, t, t)) {
        break;
      }
      while (true) {
        bool clean = clear_column(t) & clear_row(t);
        if (!clean) {
          bring_min_in_cross(t);
          continue;
        }
        if (!fix_divisibility(t)) {
          break;
        }
      }
      if (a_[t][t] < 0) {
        negate_row(t);
      }
    }
  }

  std::vector<BigInt> diagonal() const {
    std::vector<BigInt> out;
    for (std::size_t t = 0; t < std::min(rows_, cols_); ++t) {
      if (a_[t][t] == 0) {
        break;
      }
      out.push_back(a_[t][t]);
    }
    return out;
  }

  DenseMatrix const& matrix() const { return a_; }
  DenseMatrix const& u() const { return u_; }
  DenseMatrix const& v() const { return v_; }

 private:
  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, std::vector<BigInt>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      m[i][i] = 1;
    }
    return m;
  }

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) {
      return;
    }
    std::swap(a_[i], a_[j]);
    if (track_) {
      std::swap(u_[i], u_[j]);
    }
  }

  void swap_cols(std::size_t i, std::size_t j) {
    if (i == j) {
      return;
    }
    for (auto& row : a_) {
      std::swap(row[i], row[j]);
    }
    if (track_) {
      for (auto& row : v_) {
        std::swap(row[i], row[j]);
      }
    }
  }

  void negate_row(std::size_t i) {
    for (auto& x : a_[i]) {
      x = -x;
    }
    if (track_) {
      for (auto& x : u_[i]) {
        x = -x;
      }
    }
  }

  // row_i += q * row_j
  void add_row(std::size_t i, std::size_t j, BigInt const& q, std::size_t from) {
    for (std::size_t c = from; c < cols_; ++c) {
      if (a_[j][c] != 0) {
        a_[i][c] += q * a_[j][c];
      }
    }
    if (track_) {
      for (std::size_t c = 0; c < rows_; ++c) {
        if (u_[j][c] != 0) {
          u_[i][c] += q * u_[j][c];
        }
      }
    }
  }

  // col_i += q * col_j
  void add_col(std::size_t i, std::size_t j, BigInt const& q, std::size_t from) {
    for (std::size_t r = from; r < rows_; ++r) {
      if (a_[r][j] != 0) {
        a_[r][i] += q * a_[r][j];
      }
    }
    if (track_) {
      for (std::size_t r = 0; r < cols_; ++r) {
        if (v_[r][j] != 0) {
          v_[r][i] += q * v_[r][j];
        }
      }
    }
  }

  bool bring_min_to(std::size_t t, std::size_t r0, std::size_t c0) {
    std::size_t bi = rows_;
    std::size_t bj = cols_;
    BigInt best = 0;
    for (std::size_t i = r0; i < rows_; ++i) {
      for (std::size_t j = c0; j < cols_; ++j) {
        if (a_[i][j] != 0) {
          BigInt const v = abs(a_[i][j]);
          if (bi == rows_ || v < best) {
            best = v;
            bi = i;
            bj = j;
            if (best == 1) {
              break;
            }
          }
        }
      }
      if (bi != rows_ && best == 1) {
        break;
      }
    }
    if (bi == rows_) {
      return false;
    }
    swap_rows(t, bi);
    swap_cols(t, bj);
    return true;
  }

  void bring_min_in_cross(std::size_t t) {
    std::size_t bi = t;
    std::size_t bj = t;
    BigInt best = abs(a_[t][t]);
    for (std::size_t i = t + 1; i < rows_; ++i) {
      if (a_[i][t] != 0 && (best == 0 || abs(a_[i][t]) < best)) {
        best = abs(a_[i][t]);
        bi = i;
        bj = t;
      }
    }
    for (std::size_t j = t + 1; j < cols_; ++j) {
      if (a_[t][j] != 0 && (best == 0 || abs(a_[t][j]) < best)) {
        best = abs(a_[t][j]);
        bi = t;
        bj = j;
      }
    }
    swap_rows(t, bi);
    swap_cols(t, bj);
  }

  bool clear_column(std::size_t t) {
    bool clean = true;
    for (std::size_t i = t + 1; i < rows_; ++i) {
      if (a_[i][t] == 0) {
        continue;
      }
      BigInt const q = a_[i][t] / a_[t][t];
      if (q != 0) {
        add_row(i, t, -q, t);
      }
      clean = clean && a_[i][t] == 0;
    }
    return clean;
  }

  bool clear_row(std::size_t t) {
    bool clean = true;
    for (std::size_t j = t + 1; j < cols_; ++j) {
      if (a_[t][j] == 0) {
        continue;
      }
      BigInt const q = a_[t][j] / a_[t][t];
      if (q != 0) {
        add_col(j, t, -q, t);
      }
      clean = clean && a_[t][j] == 0;
    }
    return clean;
  }

  // If some entry of the trailing block is not divisible by the pivot, adds
  // its row to row t and reports that another sweep is needed.
  bool fix_divisibility(std::size_t t) {
    for (std::size_t i = t + 1; i < rows_; ++i) {
      for (std::size_t j = t + 1; j < cols_; ++j) {
        if (a_[i][j] != 0 && a_[i][j] % a_[t][t] != 0) {
          add_row(t, i, 1, t);
          return true;
        }
      }
    }
    return false;
  }

  DenseMatrix a_;
  std::size_t rows_;
  std::size_t cols_;
  bool track_;
  DenseMatrix u_;
  DenseMatrix v_;
};

// ---------------------------------------------------------------------------
// Sparse unit-pivot pre-elimination

using SparseRow = std::vector<std::pair<std::uint32_t, std::int64_t>>;

bool axpy_checked(SparseRow const& target, std::int64_t q, SparseRow const& pivot,
                  SparseRow& out) {
  // out = target - q * pivot
  out.clear();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < target.size() || j < pivot.size()) {
    if (j == pivot.size() || (i < target.size() && target[i].first < pivot[j].first)) {
      out.push_back(target[i++]);
      continue;
    }
    std::int64_t prod = 0;
    if (__builtin_mul_overflow(q, pivot[j].second, &prod)) {
      return false;
    }
    if (i < target.size() && target[i].first == pivot[j].first) {
      std::int64_t v = 0;
      if (__builtin_sub_overflow(target[i].second, prod, &v)) {
        return false;
      }
      if (v != 0) {
        out.emplace_back(target[i].first, v);
      }
      ++i;
    } else {
      std::int64_t v = 0;
      if (__builtin_sub_overflow(std::int64_t{0}, prod, &v)) {
        return false;
      }
      out.emplace_back(pivot[j].first, v);
    }
    ++j;
  }
  return true;
}

}  // namespace

SmithForm smith_normal_form(DenseMatrix const& m) {
  SmithForm out;
  out.rows = m.size();
  out.cols = m.empty() ? 0 : m[0].size();
  for (auto const& row : m) {
    if (row.size() != out.cols) {
      throw InvalidArgument("ragged matrix");
    }
  }
  DenseSmith s(m, false);
  s.run();
  out.diagonal = s.diagonal();
  return out;
}

SmithForm smith_normal_form(SparseIntMatrix const& m) {
  std::size_t const ncols = m.cols;
  std::vector<SparseRow> rows = m.rows;
  std::vector<bool> row_alive(rows.size(), true);
  std::vector<bool> col_alive(ncols, true);
  std::vector<std::vector<std::uint32_t>> col_rows(ncols);
  std::vector<std::size_t> col_count(ncols, 0);
  for (std::uint32_t r = 0; r < rows.size(); ++r) {
    for (auto const& [c, v] : rows[r]) {
      if (c >= ncols) {
        throw InvalidArgument("matrix entry column out of range");
      }
      col_rows[c].push_back(r);
      ++col_count[c];
    }
  }
  std::size_t units = 0;
  bool overflowed = false;
  SparseRow scratch;

  auto pivot_on = [&](std::uint32_t r, std::uint32_t c) -> bool {
    std::int64_t const pv = std::find_if(rows[r].begin(), rows[r].end(), [&](auto const& e) {
                              return e.first == c;
                            })->second;
    for (std::uint32_t other : col_rows[c]) {
      if (other == r || !row_alive[other]) {
        continue;
      }
      auto it = std::find_if(rows[other].begin(), rows[other].end(),
                             [&](auto const& e) { return e.first == c; });
      if (it == rows[other].end()) {
        continue;
      }
      std::int64_t const q = it->second * pv;  // pv = +-1, so q = entry / pv
      if (!axpy_checked(rows[other], q, rows[r], scratch)) {
        return false;
      }
      for (auto const& e : rows[other]) {
        --col_count[e.first];
      }
      for (auto const& e : scratch) {
        ++col_count[e.first];
        col_rows[e.first].push_back(other);
      }
      std::swap(rows[other], scratch);
    }
    for (auto const& e : rows[r]) {
      --col_count[e.first];
    }
    row_alive[r] = false;
    col_alive[c] = false;
    rows[r].clear();
    col_rows[c].clear();
    return true;
  };

  bool progress = true;
  while (progress && !overflowed) {
    progress = false;
    std::vector<std::uint32_t> order;
    for (std::uint32_t r = 0; r < rows.size(); ++r) {
      if (row_alive[r] && !rows[r].empty()) {
        order.push_back(r);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
      return rows[x].size() < rows[y].size();
    });
    for (std::uint32_t r : order) {
      if (!row_alive[r]) {
        continue;
      }
      std::uint32_t best = UINT32_MAX;
      std::size_t best_count = SIZE_MAX;
      for (auto const& [c, v] : rows[r]) {
        if ((v == 1 || v == -1) && col_count[c] < best_count) {
          best = c;
          best_count = col_count[c];
        }
      }
      if (best == UINT32_MAX) {
        continue;
      }
      if (!pivot_on(r, best)) {
        overflowed = true;
        break;
      }
      ++units;
      progress = true;
    }
  }

  std::vector<std::uint32_t> col_index(ncols, UINT32_MAX);
  std::uint32_t remaining_cols = 0;
  for (std::uint32_t c = 0; c < ncols; ++c) {
    if (col_alive[c]) {
      col_index[c] = remaining_cols++;
    }
  }
  DenseMatrix dense;
  for (std::uint32_t r = 0; r < rows.size(); ++r) {
    if (!row_alive[r] || rows[r].empty()) {
      continue;
    }
    std::vector<BigInt> row(remaining_cols, 0);
    for (auto const& [c, v] : rows[r]) {
      row[col_index[c]] = v;
    }
    dense.push_back(std::move(row));
  }
  SmithForm out;
  out.rows = m.rows.size();
  out.cols = ncols;
  out.diagonal.assign(units, 1);
  if (!dense.empty() && remaining_cols > 0) {
    DenseSmith s(std::move(dense), false);
    s.run();
    for (BigInt const& d : s.diagonal()) {
      out.diagonal.push_back(d);
    }
  }
  return out;
}

SmithDecomposition smith_decomposition(DenseMatrix const& a) {
  DenseSmith s(a, true);
  s.run();
  return {s.u(), s.matrix(), s.v()};
}

DenseMatrix multiply(DenseMatrix const& a, DenseMatrix const& b) {
  std::size_t const n = a.size();
  std::size_t const k = b.size();
  std::size_t const m = b.empty() ? 0 : b[0].size();
  DenseMatrix out(n, std::vector<BigInt>(m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != k) {
      throw InvalidArgument("matrix shapes do not match");
    }
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == 0) {
        continue;
      }
      for (std::size_t j = 0; j < m; ++j) {
        out[i][j] += a[i][l] * b[l][j];
      }
    }
  }
  return out;
}

BigInt determinant(DenseMatrix const& input) {
  DenseMatrix a = input;
  std::size_t const n = a.size();
  for (auto const& row : a) {
    if (row.size() != n) {
      throw InvalidArgument("determinant of a non-square matrix");
    }
  }
  if (n == 0) {
    return 1;
  }
  int sign = 1;
  BigInt prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t swap_with = k + 1;
      while (swap_with < n && a[swap_with][k] == 0) {
        ++swap_with;
      }
      if (swap_with == n) {
        return 0;
      }
      std::swap(a[k], a[swap_with]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
      }
    }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

DenseMatrix to_dense(SparseIntMatrix const& m) {
  DenseMatrix out(m.rows.size(), std::vector<BigInt>(m.cols, 0));
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (auto const& [c, v] : m.rows[r]) {
      out[r][c] = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elimination over F_p

namespace {

using ModRow = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::uint32_t mod_inverse(std::uint32_t a, std::uint32_t p) {
  std::int64_t t = 0;
  std::int64_t new_t = 1;
  std::int64_t r = p;
  std::int64_t new_r = a;
  while (new_r != 0) {
    std::int64_t const q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  return static_cast<std::uint32_t>(t < 0 ? t + p : t);
}

std::uint32_t reduce_mod(std::int64_t v, std::uint32_t p) {
  std::int64_t r = v % static_cast<std::int64_t>(p);
  return static_cast<std::uint32_t>(r < 0 ? r + p : r);
}

// Row echelon form by leading column. pivot_row[c] is the index into `basis`
// of the row whose leading column is c; leading coefficients are 1.
struct Echelon {
  std::uint32_t p;
  std::vector<std::uint32_t> pivot_row;
  std::vector<ModRow> basis;
  std::vector<std::uint32_t> acc;
  std::vector<bool> touched;

  Echelon(std::size_t cols, std::uint32_t prime)
      : p(prime), pivot_row(cols, UINT32_MAX), acc(cols, 0), touched(cols, false) {}

  void insert(ModRow const& row) {
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> heap;
    std::vector<std::uint32_t> dirty;
    auto add = [&](std::uint32_t c, std::uint64_t v) {
      acc[c] = static_cast<std::uint32_t>((acc[c] + v) % p);
      if (!touched[c]) {
        touched[c] = true;
        dirty.push_back(c);
        heap.push(c);
      }
    };
    for (auto const& [c, v] : row) {
      add(c, v);
    }
    ModRow result;
    while (!heap.empty()) {
      std::uint32_t const c = heap.top();
      heap.pop();
      touched[c] = false;
      std::uint32_t const v = acc[c];
      if (v == 0) {
        continue;
      }
      std::uint32_t const pr = pivot_row[c];
      if (pr == UINT32_MAX) {
        // New leading column: collect the rest of the row.
        std::uint32_t const inv = mod_inverse(v, p);
        result.emplace_back(c, 1);
        acc[c] = 0;
        while (!heap.empty()) {
          std::uint32_t const d = heap.top();
          heap.pop();
          touched[d] = false;
          if (acc[d] != 0) {
            result.emplace_back(
                d, static_cast<std::uint32_t>(static_cast<std::uint64_t>(acc[d]) * inv % p));
            acc[d] = 0;
          }
        }
        pivot_row[c] = static_cast<std::uint32_t>(basis.size());
        basis.push_back(std::move(result));
        for (std::uint32_t d : dirty) {
          acc[d] = 0;
          touched[d] = false;
        }
        return;
      }
      std::uint64_t const factor = p - v;
      acc[c] = 0;
      for (auto const& [d, w] : basis[pr]) {
        if (d == c) {
          continue;
        }
        add(d, factor * w % p);
      }
    }
    for (std::uint32_t d : dirty) {
      acc[d] = 0;
      touched[d] = false;
    }
  }
};

Echelon echelon_of(SparseIntMatrix const& m, std::uint32_t p) {
  if (p < 2 || p >= (1U << 31) || !is_prime(p)) {
    throw InvalidArgument("modulus must be a prime below 2^31");
  }
  Echelon e(m.cols, p);
  ModRow row;
  for (auto const& r : m.rows) {
    row.clear();
    for (auto const& [c, v] : r) {
      if (c >= m.cols) {
        throw InvalidArgument("matrix entry column out of range");
      }
      std::uint32_t const x = reduce_mod(v, p);
      if (x != 0) {
        row.emplace_back(c, x);
      }
    }
    if (!row.empty()) {
      e.insert(row);
    }
  }
  return e;
}

}  // namespace

std::size_t rank_mod_p(SparseIntMatrix const& m, std::uint32_t p) {
  return echelon_of(m, p).basis.size();
}

std::optional<ModPQuotient> mod_p_quotient(SparseIntMatrix const& m, std::uint32_t p,
                                           std::size_t max_dimension,
                                           std::size_t* dimension_out) {
  Echelon e = echelon_of(m, p);
  std::size_t const dim = m.cols - e.basis.size();
  if (dimension_out != nullptr) {
    *dimension_out = dim;
  }
  if (dim > max_dimension) {
    return std::nullopt;
  }
  ModPQuotient q;
  q.p = p;
  q.dimension = dim;
  q.image.assign(m.cols, std::vector<std::uint32_t>(dim, 0));
  std::size_t next = 0;
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (e.pivot_row[c] == UINT32_MAX) {
      q.image[c][next++] = 1;
    }
  }
  for (std::size_t c = m.cols; c-- > 0;) {
    std::uint32_t const pr = e.pivot_row[c];
    if (pr == UINT32_MAX) {
      continue;
    }
    auto& img = q.image[c];
    for (auto const& [d, w] : e.basis[pr]) {
      if (d == c) {
        continue;
      }
      std::uint64_t const factor = p - w;
      for (std::size_t k = 0; k < dim; ++k) {
        img[k] = static_cast<std::uint32_t>((img[k] + factor * q.image[d][k]) % p);
      }
    }
  }
  return q;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) {
    return false;
  }
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      return false;
    }
  }
  return true;
}

}  // namespace rgkit
