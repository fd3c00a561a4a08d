#include "rgkit/lueck.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <map>
#include <regex>
#include <sstream>

#include "detail/text.hpp"
#include "json.hpp"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"
#include "rgkit/rank.hpp"
#include "rgkit/schreier.hpp"

namespace rgkit {

namespace {

bool is_prime(std::uint32_t p) {
  if (p < 2) {
    return false;
  }
  for (std::uint64_t d = 2; d * d <= p; ++d) {
    if (p % d == 0) {
      return false;
    }
  }
  return true;
}

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

Fraction trailing_spread(std::vector<Fraction> const& values) {
  if (values.empty()) {
    return 0;
  }
  auto const first = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  auto [lo, hi] = std::minmax_element(first, values.end());
  return *hi - *lo;
}

}  // namespace

Field Field::prime(std::uint32_t p) {
  if (p >= (1u << 31) || !is_prime(p)) {
    throw InvalidArgument(std::to_string(p) + " is not a prime below 2^31");
  }
  return {Kind::prime, p};
}

std::string Field::name() const { return kind == Kind::rationals ? "Q" : "F" + std::to_string(p); }

GroupAlgebraElement normalize(std::vector<GroupAlgebraTerm> terms) {
  std::sort(terms.begin(), terms.end(),
            [](auto const& x, auto const& y) { return x.word < y.word; });
  GroupAlgebraElement out;
  for (auto& t : terms) {
    if (!out.empty() && out.back().word == t.word) {
      out.back().coeff = out.back().coeff + t.coeff;
    } else {
      out.push_back(std::move(t));
    }
    if (out.back().coeff == 0) {
      out.pop_back();
    }
  }
  return out;
}

GroupAlgebraElement multiply(GroupAlgebraElement const& x, GroupAlgebraElement const& y) {
  std::vector<GroupAlgebraTerm> terms;
  for (auto const& s : x) {
    for (auto const& t : y) {
      terms.push_back({s.coeff * t.coeff, s.word * t.word});
    }
  }
  return normalize(std::move(terms));
}

std::vector<Word> GroupAlgebraMatrix::support() const {
  std::vector<Word> out;
  for (auto const& e : entries) {
    for (auto const& t : e) {
      out.push_back(t.word);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GroupAlgebraMatrix scalar_matrix(GroupAlgebraElement x, Field k) {
  GroupAlgebraMatrix a(1, 1, k);
  a.at(0, 0) = normalize(std::move(x));
  return a;
}

// ---------------------------------------------------------------------------
// Input format

namespace {

struct Source {
  std::size_t line;
  std::size_t column;
};

[[noreturn]] void fail(Source s, std::string const& what) {
  throw ParseError(what, s.line, s.column);
}

std::optional<Fraction> parse_number(std::string_view s) {
  static std::regex const number(R"(\d+(/\d+)?)");
  if (!std::regex_match(s.begin(), s.end(), number)) {
    return std::nullopt;
  }
  auto const slash = s.find('/');
  auto to_int = [](std::string_view t) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw std::out_of_range("coefficient");
    }
    return v;
  };
  try {
    if (slash == std::string_view::npos) {
      return Fraction(to_int(s));
    }
    return Fraction(to_int(s.substr(0, slash)), to_int(s.substr(slash + 1)));
  } catch (std::exception const&) {
    return std::nullopt;
  }
}

GroupAlgebraElement parse_element(std::string const& raw, Source at,
                                  std::vector<std::string> const& names) {
  // Drop whitespace but remember where each character came from.
  std::string text;
  std::vector<std::size_t> column;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isspace(static_cast<unsigned char>(raw[i]))) {
      text.push_back(raw[i]);
      column.push_back(at.column + i);
    }
  }
  if (text.empty()) {
    fail(at, "empty entry");
  }
  std::vector<GroupAlgebraTerm> terms;
  std::size_t begin = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    char const ch = i < text.size() ? text[i] : '\0';
    if (ch == '(' || ch == '[') {
      ++depth;
    } else if (ch == ')' || ch == ']') {
      --depth;
    }
    bool const split =
        i == text.size() ||
        (depth == 0 && (ch == '+' || ch == '-') && i > begin && text[i - 1] != '^');
    if (!split) {
      continue;
    }
    Source const s{at.line, column[begin]};
    bool negative = false;
    std::size_t b = begin;
    if (text[b] == '+' || text[b] == '-') {
      negative = text[b] == '-';
      ++b;
    }
    std::string_view body(text.data() + b, i - b);
    if (body.empty()) {
      fail(s, "missing term");
    }
    GroupAlgebraTerm term{1, Word()};
    if (auto c = parse_number(body)) {
      term.coeff = *c;
    } else {
      std::size_t word_start = b;
      auto const star = body.find('*');
      if (star != std::string_view::npos) {
        if (auto c2 = parse_number(body.substr(0, star))) {
          term.coeff = *c2;
          word_start = b + star + 1;
        }
      }
      detail::Token token{text.substr(word_start, i - word_start), at.line, column[word_start]};
      if (token.text.empty()) {
        fail(s, "missing word after coefficient");
      }
      term.word = detail::parse_word_token(token, names);
    }
    if (negative) {
      term.coeff = Fraction(0) - term.coeff;
    }
    terms.push_back(std::move(term));
    begin = i;
  }
  return normalize(std::move(terms));
}

}  // namespace

GroupAlgebraMatrix parse_group_algebra_matrix(std::string_view text, Presentation const& p) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::optional<GroupAlgebraMatrix> a;
  std::vector<bool> seen;
  static std::regex const entry(R"(^\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*=(.*)$)");
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    Source const start{line_no, line.find_first_not_of(" \t\r") + 1};
    if (!a) {
      std::istringstream words(line);
      std::string w;
      words >> w;
      if (w != "matrix") {
        fail(start, "expected `matrix`");
      }
      std::string field = "Q";
      std::optional<std::size_t> n, m;
      std::optional<std::uint32_t> prime;
      while (words >> w) {
        auto const eq = w.find('=');
        std::string const key = w.substr(0, eq);
        std::string const value = eq == std::string::npos ? "" : w.substr(eq + 1);
        auto number = [&]() -> std::uint64_t {
          std::uint64_t v = 0;
          auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
          if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
            fail(start, "bad value for " + key);
          }
          return v;
        };
        if (key == "K") {
          field = value;
        } else if (key == "n") {
          n = number();
        } else if (key == "m") {
          m = number();
        } else if (key == "p") {
          prime = static_cast<std::uint32_t>(number());
        } else {
          fail(start, "unknown matrix option " + key);
        }
      }
      if (!n || !m || *n == 0 || *m == 0) {
        fail(start, "matrix needs positive n and m");
      }
      Field k;
      try {
        if (field == "Q") {
          k = Field::rationals();
        } else if (field == "Fp") {
          if (!prime) {
            fail(start, "K=Fp needs p=<prime>");
          }
          k = Field::prime(*prime);
        } else if (field.size() > 1 && field[0] == 'F') {
          std::uint64_t v = 0;
          auto [ptr, ec] = std::from_chars(field.data() + 1, field.data() + field.size(), v);
          if (ec != std::errc() || ptr != field.data() + field.size() || v >= (1u << 31)) {
            fail(start, "unknown field " + field);
          }
          k = Field::prime(static_cast<std::uint32_t>(v));
        } else {
          fail(start, "unknown field " + field);
        }
      } catch (InvalidArgument const& e) {
        fail(start, e.what());
      }
      a.emplace(*n, *m, k);
      seen.assign(*n * *m, false);
      continue;
    }
    std::smatch match;
    if (!std::regex_match(line, match, entry)) {
      fail(start, "expected `(i,j) = ...`");
    }
    std::size_t const i = std::stoul(match[1].str());
    std::size_t const j = std::stoul(match[2].str());
    if (i == 0 || j == 0 || i > a->rows || j > a->cols) {
      fail(start, "entry (" + match[1].str() + "," + match[2].str() + ") outside the matrix");
    }
    std::size_t const slot = (i - 1) * a->cols + (j - 1);
    if (seen[slot]) {
      fail(start, "entry given twice");
    }
    seen[slot] = true;
    a->entries[slot] = parse_element(match[3].str(),
                                     {line_no, static_cast<std::size_t>(match.position(3)) + 1},
                                     p.generator_names());
  }
  if (!a) {
    throw ParseError("missing `matrix` header", line_no + 1, 1);
  }
  return std::move(*a);
}

// ---------------------------------------------------------------------------
// Pushforward and elimination

SparseMatrix pushforward(GroupAlgebraMatrix const& a, CosetTable const& level) {
  if (!level.is_normal()) {
    throw InvalidArgument("pushforward needs a normal level; the group algebra of G/G_i "
                          "is only defined for normal G_i");
  }
  std::size_t const n = level.coset_count();
  SparseMatrix out;
  out.rows = a.rows * n;
  out.cols = a.cols * n;
  out.data.resize(out.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      for (auto const& t : a.at(i, j)) {
        if (t.word.alphabet_bound() > level.generator_count()) {
          throw InvalidArgument("matrix word uses a generator the group lacks");
        }
        for (Coset x = 0; x < n; ++x) {
          out.data[i * n + level.apply(t.word, x)].emplace_back(
              static_cast<std::uint32_t>(j * n + x), t.coeff);
        }
      }
    }
  }
  for (auto& row : out.data) {
    std::sort(row.begin(), row.end(), [](auto const& x, auto const& y) { return x.first < y.first; });
    std::vector<std::pair<std::uint32_t, Fraction>> merged;
    for (auto& e : row) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second = merged.back().second + e.second;
      } else {
        merged.push_back(e);
      }
      if (merged.back().second == 0) {
        merged.pop_back();
      }
    }
    row = std::move(merged);
  }
  return out;
}

namespace {

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1;
  b %= p;
  while (e) {
    if (e & 1) {
      r = r * b % p;
    }
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

std::uint32_t to_fp(Fraction f, std::uint32_t p) {
  auto residue = [p](std::int64_t v) {
    std::int64_t r = v % static_cast<std::int64_t>(p);
    return static_cast<std::uint64_t>(r < 0 ? r + p : r);
  };
  std::uint64_t const den = residue(f.denominator());
  if (den == 0) {
    throw InvalidArgument("coefficient " + f.str() + " is undefined mod " + std::to_string(p));
  }
  return static_cast<std::uint32_t>(residue(f.numerator()) * pow_mod(den, p - 2, p) % p);
}

std::size_t rank_fp(SparseMatrix const& m, std::uint32_t p) {
  using Row = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
  std::vector<Row> pivots(m.cols);
  std::size_t rank = 0;
  Row scratch;
  for (auto const& src : m.data) {
    Row r;
    for (auto const& [c, v] : src) {
      if (std::uint32_t const x = to_fp(v, p)) {
        r.emplace_back(c, x);
      }
    }
    while (!r.empty()) {
      std::uint32_t const lead = r.front().first;
      Row& piv = pivots[lead];
      if (piv.empty()) {
        std::uint64_t const inv = pow_mod(r.front().second, p - 2, p);
        for (auto& e : r) {
          e.second = static_cast<std::uint32_t>(e.second * inv % p);
        }
        piv = std::move(r);
        ++rank;
        break;
      }
      // r -= f * piv, where piv has lead coefficient 1.
      std::uint64_t const f = r.front().second;
      scratch.clear();
      std::size_t x = 0, y = 0;
      while (x < r.size() || y < piv.size()) {
        if (y == piv.size() || (x < r.size() && r[x].first < piv[y].first)) {
          scratch.push_back(r[x++]);
        } else {
          std::uint64_t v = (p - f * piv[y].second % p) % p;
          std::uint32_t const c = piv[y].first;
          if (x < r.size() && r[x].first == c) {
            v = (v + r[x++].second) % p;
          }
          ++y;
          if (v != 0) {
            scratch.emplace_back(c, static_cast<std::uint32_t>(v));
          }
        }
      }
      r.swap(scratch);
    }
  }
  return rank;
}

std::size_t rank_q(SparseMatrix const& m) {
  using Row = std::vector<std::pair<std::uint32_t, BigInt>>;
  std::vector<Row> pivots(m.cols);
  std::size_t rank = 0;
  auto strip_content = [](Row& r) {
    BigInt g = 0;
    for (auto const& e : r) {
      g = boost::multiprecision::gcd(g, e.second);
      if (g == 1) {
        break;
      }
    }
    if (r.front().second < 0) {
      g = -g;
    }
    if (g != 1) {
      for (auto& e : r) {
        e.second /= g;
      }
    }
  };
  for (auto const& src : m.data) {
    // Clear denominators: the row times the lcm of its denominators.
    std::int64_t l = 1;
    for (auto const& e : src) {
      l = std::lcm(l, e.second.denominator());
    }
    Row r;
    for (auto const& [c, v] : src) {
      r.emplace_back(c, BigInt(v.numerator()) * (l / v.denominator()));
    }
    while (!r.empty()) {
      strip_content(r);
      Row& piv = pivots[r.front().first];
      if (piv.empty()) {
        piv = std::move(r);
        ++rank;
        break;
      }
      // r := piv_lead * r - r_lead * piv, which cancels the lead.
      BigInt const a = piv.front().second;
      BigInt const b = r.front().second;
      Row next;
      std::size_t x = 0, y = 0;
      while (x < r.size() || y < piv.size()) {
        std::uint32_t c;
        BigInt v;
        if (y == piv.size() || (x < r.size() && r[x].first < piv[y].first)) {
          c = r[x].first;
          v = a * r[x++].second;
        } else if (x == r.size() || piv[y].first < r[x].first) {
          c = piv[y].first;
          v = -b * piv[y++].second;
        } else {
          c = r[x].first;
          v = a * r[x++].second - b * piv[y++].second;
        }
        if (v != 0) {
          next.emplace_back(c, std::move(v));
        }
      }
      r = std::move(next);
    }
  }
  return rank;
}

}  // namespace

std::size_t rank(SparseMatrix const& m, Field k) {
  return k.kind == Field::Kind::prime ? rank_fp(m, k.p) : rank_q(m);
}

std::size_t kernel_dim(SparseMatrix const& m, Field k) { return m.cols - rank(m, k); }

// ---------------------------------------------------------------------------
// Approximation sequence

std::string KernelDimSequence::to_json() const {
  nlohmann::ordered_json j;
  j["field"] = field.name();
  j["levels"] = nlohmann::ordered_json::array();
  for (auto const& l : levels) {
    j["levels"].push_back({{"level", l.level},
                           {"index", l.index},
                           {"kernel_dim", l.kernel_dim},
                           {"value", l.value.str()},
                           {"value_decimal", l.value.to_double()}});
  }
  j["estimate"] = {{"value", estimate.str()},
                   {"value_decimal", estimate.to_double()},
                   {"spread", spread.str()},
                   {"spread_decimal", spread.to_double()}};
  return j.dump(2);
}

std::string KernelDimSequence::to_csv() const {
  std::string out = "level,index,kernel_dim,value\n";
  for (auto const& l : levels) {
    out += std::to_string(l.level) + ',' + std::to_string(l.index) + ',' +
           std::to_string(l.kernel_dim) + ',' + shortest(l.value.to_double()) + '\n';
  }
  return out;
}

KernelDimSequence approx_sequence(GroupAlgebraMatrix const& a, Chain const& c, Field k,
                                  LueckOptions const& options) {
  auto const& levels = c.levels();
  std::size_t const first = std::min(options.first_level, levels.size());
  for (std::size_t n = first; n < levels.size(); ++n) {
    if (!levels[n].normal) {
      throw InvalidArgument("level " + std::to_string(n) + " is not normal");
    }
  }
  KernelDimSequence seq;
  seq.field = k;
  seq.levels.resize(levels.size() - first);
  auto job = [&](std::size_t n) {
    KernelDimLevel& l = seq.levels[n - first];
    l.level = n;
    l.index = levels[n].index();
    l.kernel_dim = kernel_dim(pushforward(a, *levels[n].table), k);
    l.value = Fraction(static_cast<std::int64_t>(l.kernel_dim), static_cast<std::int64_t>(l.index));
  };
  if (options.parallel) {
    std::vector<std::future<void>> futures;
    for (std::size_t n = first; n < levels.size(); ++n) {
      futures.push_back(std::async(std::launch::async, job, n));
    }
    for (auto& f : futures) {
      f.get();
    }
  } else {
    for (std::size_t n = first; n < levels.size(); ++n) {
      job(n);
    }
  }
  std::vector<Fraction> values;
  for (auto const& l : seq.levels) {
    values.push_back(l.value);
  }
  if (!values.empty()) {
    seq.estimate = values.back();
  }
  seq.spread = trailing_spread(values);
  return seq;
}

// ---------------------------------------------------------------------------
// h(Omega) and the Ornstein-Weiss limit

std::size_t folner_h(GroupAlgebraMatrix const& a, std::vector<Key> const& omega,
                     GroupModel const& m, Field k) {
  std::vector<Key> om = omega;
  std::sort(om.begin(), om.end());
  om.erase(std::unique(om.begin(), om.end()), om.end());

  struct Term {
    std::size_t i;
    Key key;
    Fraction coeff;
  };
  // Terms of column j, with the support words already in normal form.
  std::vector<std::vector<Term>> columns(a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      for (auto const& t : a.at(i, j)) {
        columns[j].push_back({i, m.normal_form(t.word), t.coeff});
      }
    }
  }
  std::vector<Key> window;
  for (auto const& col : columns) {
    for (auto const& t : col) {
      for (Key const& w : om) {
        window.push_back(m.multiply(t.key, w));
      }
    }
  }
  std::sort(window.begin(), window.end());
  window.erase(std::unique(window.begin(), window.end()), window.end());
  std::unordered_map<Key, std::uint32_t, KeyHash> position;
  for (std::size_t x = 0; x < window.size(); ++x) {
    position.emplace(window[x], static_cast<std::uint32_t>(x));
  }

  // Row (j, w) of the transpose is A_{.j} w spread over the window.
  SparseMatrix mt;
  mt.cols = a.rows * window.size();
  for (std::size_t j = 0; j < a.cols; ++j) {
    for (Key const& w : om) {
      std::map<std::uint32_t, Fraction> row;
      for (auto const& t : columns[j]) {
        auto const c = static_cast<std::uint32_t>(t.i * window.size() +
                                                  position.at(m.multiply(t.key, w)));
        row[c] = row[c] + t.coeff;
      }
      auto& out = mt.data.emplace_back();
      for (auto const& [c, v] : row) {
        if (v != 0) {
          out.emplace_back(c, v);
        }
      }
    }
  }
  mt.rows = mt.data.size();
  return rank(mt, k);
}

std::size_t folner_h(GroupAlgebraMatrix const& a, std::vector<Word> const& omega,
                     GroupModel const& m, Field k) {
  std::vector<Key> keys;
  for (Word const& w : omega) {
    keys.push_back(m.normal_form(w));
  }
  return folner_h(a, keys, m, k);
}

std::string OwEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["members"] = nlohmann::ordered_json::array();
  for (std::size_t x = 0; x < sizes.size(); ++x) {
    j["members"].push_back({{"size", sizes[x]}, {"h", h[x]}, {"ratio", ratios[x].str()}});
  }
  j["H"] = h_limit.str();
  j["spread"] = spread.str();
  j["m_minus_H"] = kernel_limit.str();
  j["m_minus_H_decimal"] = kernel_limit.to_double();
  return j.dump(2);
}

OwEstimate ow_limit_estimate(GroupAlgebraMatrix const& a, std::vector<FolnerMember> const& family,
                             GroupModel const& m, Field k) {
  if (family.empty()) {
    throw InvalidArgument("empty Folner family");
  }
  OwEstimate est;
  for (std::size_t x = 0; x < family.size(); ++x) {
    FolnerMember const& f = family[x];
    if (x > 0 && f.epsilon > family[x - 1].epsilon) {
      throw InvalidArgument("declared invariance must decrease along the family");
    }
    KeySet set;
    std::vector<Key> keys;
    for (Word const& w : f.words) {
      Key key = m.normal_form(w);
      if (set.insert(key).second) {
        keys.push_back(std::move(key));
      }
    }
    if (keys.empty()) {
      throw InvalidArgument("empty Folner set");
    }
    std::size_t const boundary = boundary_size(m, keys, set);
    if (static_cast<double>(boundary) >
        f.epsilon * static_cast<double>(m.generator_count() * keys.size())) {
      throw InvalidArgument("member " + std::to_string(x) + " is not " +
                            std::to_string(f.epsilon) + "-invariant");
    }
    std::size_t const h = folner_h(a, keys, m, k);
    est.sizes.push_back(keys.size());
    est.h.push_back(h);
    est.ratios.push_back(Fraction(static_cast<std::int64_t>(h), static_cast<std::int64_t>(keys.size())));
  }
  est.h_limit = est.ratios.back();
  est.spread = trailing_spread(est.ratios);
  est.kernel_limit = Fraction(static_cast<std::int64_t>(a.cols)) - est.h_limit;
  return est;
}

SandwichReport sandwich_check(GroupAlgebraMatrix const& a, Chain const& c,
                              InvariantTransversal const& t, GroupModel const& m, Field k) {
  CosetTable const& level = *c.level(t.level).table;
  ExpandedTransversal const ex = expand(t, level, m);
  SandwichReport rep;
  rep.level = t.level;
  rep.transversal_size = ex.keys.size();
  rep.h = folner_h(a, ex.keys, m, k);
  rep.image_dim = rank(pushforward(a, level), k);

  KeySet support;
  for (Word const& w : a.support()) {
    support.insert(m.normal_form(w));
  }
  KeySet const members(ex.keys.begin(), ex.keys.end());
  std::size_t boundary = 0;
  for (Key const& g : support) {
    for (Key const& x : ex.keys) {
      boundary += members.count(m.multiply(g, x)) == 0;
    }
  }
  rep.boundary_term = a.rows * boundary;
  return rep;
}

// ---------------------------------------------------------------------------
// Bounded generation

std::string BgReport::to_json() const {
  nlohmann::ordered_json j;
  j["t"] = t;
  j["levels"] = nlohmann::ordered_json::array();
  for (auto const& l : levels) {
    j["levels"].push_back({{"level", l.level},
                           {"index", l.index},
                           {"r", l.r},
                           {"bound", l.bound},
                           {"ratio", l.ratio.str()},
                           {"ratio_decimal", l.ratio.to_double()},
                           {"violated", l.violated}});
  }
  j["violation"] = violation;
  if (first_violation) {
    j["first_violation"] = *first_violation;
  } else {
    j["first_violation"] = nullptr;
  }
  return j.dump(2);
}

BgReport bounded_generation_probe(Chain const& c, std::size_t t) {
  if (t == 0) {
    throw InvalidArgument("the number of cyclic factors must be at least 1");
  }
  BgReport rep;
  rep.t = t;
  for (std::size_t n = 0; n < c.levels().size(); ++n) {
    auto const& lvl = c.level(n);
    if (!lvl.normal) {
      throw InvalidArgument("level " + std::to_string(n) + " is not normal");
    }
    BgLevel l;
    l.level = n;
    l.index = lvl.index();
    SubgroupPresentation const sp = reidemeister_schreier(SchreierGraph(lvl.table));
    l.r = abelianization_rank(sp, AbelianizationMode{2});
    l.bound = static_cast<double>(t) + static_cast<double>(t - 1) * std::log2(static_cast<double>(l.index));
    l.ratio = Fraction(static_cast<std::int64_t>(l.r), static_cast<std::int64_t>(l.index));
    if (l.r > t) {
      BigInt lhs = BigInt(1) << (l.r - t);
      BigInt rhs = boost::multiprecision::pow(BigInt(l.index), static_cast<unsigned>(t - 1));
      l.violated = lhs > rhs;
    }
    if (l.violated && !rep.violation) {
      rep.violation = true;
      rep.first_violation = n;
    }
    rep.levels.push_back(l);
  }
  return rep;
}

}  // namespace rgkit
