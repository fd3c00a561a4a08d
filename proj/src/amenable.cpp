#include "rgkit/amenable.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"
#include "rgkit/schreier.hpp"

namespace rgkit {

std::size_t KeyHash::operator()(Key const& k) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::int64_t x : k) {
    h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

Key GroupModel::normal_form(Word const& w) const {
  Key k = identity();
  auto const letters = w.letters();
  for (std::size_t i = letters.size(); i-- > 0;) {
    k = left_multiply(letters[i], k);
  }
  return k;
}

// ---------------------------------------------------------------------------
// Models

Key FreeAbelianModel::left_multiply(Letter x, Key const& k) const {
  Key out = k;
  out[generator_of(x)] += x > 0 ? 1 : -1;
  return out;
}

Key FreeAbelianModel::multiply(Key const& a, Key const& b) const {
  Key out = a;
  for (std::size_t i = 0; i < rank_; ++i) {
    out[i] += b[i];
  }
  return out;
}

Key FreeAbelianModel::inverse(Key const& a) const {
  Key out = a;
  for (auto& x : out) {
    x = -x;
  }
  return out;
}

Word FreeAbelianModel::to_word(Key const& k) const {
  std::vector<Letter> letters;
  for (std::size_t g = 0; g < rank_; ++g) {
    Letter const x = letter_of(g, k[g] < 0);
    for (std::int64_t i = 0; i < std::abs(k[g]); ++i) {
      letters.push_back(x);
    }
  }
  return Word::reduce_unchecked(letters);
}

Key FreeModel::left_multiply(Letter x, Key const& k) const {
  if (!k.empty() && k.front() == -x) {
    return Key(k.begin() + 1, k.end());
  }
  Key out;
  out.reserve(k.size() + 1);
  out.push_back(x);
  out.insert(out.end(), k.begin(), k.end());
  return out;
}

Key FreeModel::multiply(Key const& a, Key const& b) const {
  std::size_t cancel = 0;
  while (cancel < a.size() && cancel < b.size() && a[a.size() - 1 - cancel] == -b[cancel]) {
    ++cancel;
  }
  Key out(a.begin(), a.end() - static_cast<std::ptrdiff_t>(cancel));
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(cancel), b.end());
  return out;
}

Key FreeModel::inverse(Key const& a) const {
  Key out(a.rbegin(), a.rend());
  for (auto& x : out) {
    x = -x;
  }
  return out;
}

Word FreeModel::to_word(Key const& k) const {
  std::vector<Letter> letters(k.begin(), k.end());
  return Word::reduce_unchecked(letters);
}

FiniteModel::FiniteModel(std::shared_ptr<CosetTable const> table) : table_(std::move(table)) {
  if (!table_->is_normal()) {
    throw InvalidArgument("a finite model needs a normal coset table");
  }
  SchreierGraph g(table_);
  path_.resize(table_->coset_count());
  inverse_.resize(table_->coset_count());
  for (Coset c = 0; c < table_->coset_count(); ++c) {
    path_[c] = g.transversal(c);
    inverse_[c] = table_->apply(path_[c].inverse(), 0);
  }
}

Key FiniteModel::left_multiply(Letter x, Key const& k) const {
  return {static_cast<std::int64_t>(table_->apply(x, static_cast<Coset>(k[0])))};
}

Key FiniteModel::multiply(Key const& a, Key const& b) const {
  return {static_cast<std::int64_t>(
      table_->apply(path_[static_cast<std::size_t>(a[0])], static_cast<Coset>(b[0])))};
}

Key FiniteModel::inverse(Key const& a) const {
  return {static_cast<std::int64_t>(inverse_[static_cast<std::size_t>(a[0])])};
}

Word FiniteModel::to_word(Key const& k) const { return path_[static_cast<std::size_t>(k[0])]; }

std::size_t boundary_size(GroupModel const& m, std::vector<Key> const& a, KeySet const& set) {
  std::size_t count = 0;
  for (Key const& k : a) {
    for (std::size_t s = 0; s < m.generator_count(); ++s) {
      count += set.count(m.left_multiply(letter_of(s), k)) == 0;
    }
  }
  return count;
}

std::size_t boundary_size(GroupModel const& m, std::vector<Key> const& a) {
  KeySet set(a.begin(), a.end());
  return boundary_size(m, a, set);
}

// ---------------------------------------------------------------------------
// Covering lemma

FiniteGroup FiniteGroup::generated_by(std::vector<Perm> const& gens, std::size_t max_order) {
  if (gens.empty()) {
    throw InvalidArgument("need at least one permutation");
  }
  std::size_t const degree = gens.front().size();
  Perm id(degree);
  std::iota(id.begin(), id.end(), 0);
  std::vector<Perm> elements{id};
  std::map<Perm, std::uint32_t> index{{id, 0}};
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (Perm const& g : gens) {
      Perm p = compose(g, elements[i]);
      if (index.emplace(p, static_cast<std::uint32_t>(elements.size())).second) {
        elements.push_back(std::move(p));
        if (elements.size() > max_order) {
          throw BudgetExhausted("group order exceeds " + std::to_string(max_order),
                                elements.size());
        }
      }
    }
  }
  FiniteGroup out;
  out.n_ = elements.size();
  out.mult_.resize(out.n_ * out.n_);
  for (std::size_t a = 0; a < out.n_; ++a) {
    for (std::size_t b = 0; b < out.n_; ++b) {
      out.mult_[a * out.n_ + b] = index.at(compose(elements[a], elements[b]));
    }
  }
  return out;
}

FiniteGroup FiniteGroup::quotient(CosetTable const& t) {
  auto right = t.right_multiplications();
  if (!right) {
    throw InvalidArgument("quotient needs a normal coset table");
  }
  FiniteGroup out;
  out.n_ = t.coset_count();
  out.mult_.assign(out.n_ * out.n_, 0);
  std::vector<bool> seen(out.n_);
  for (std::size_t a = 0; a < out.n_; ++a) {
    // a (b s) = (a b) s: fill row a breadth-first over right multiplications.
    std::fill(seen.begin(), seen.end(), false);
    std::deque<Coset> queue{0};
    seen[0] = true;
    out.mult_[a * out.n_] = static_cast<std::uint32_t>(a);
    while (!queue.empty()) {
      Coset const b = queue.front();
      queue.pop_front();
      for (std::size_t s = 0; s < t.generator_count(); ++s) {
        Coset const bs = (*right)[s][b];
        if (!seen[bs]) {
          seen[bs] = true;
          out.mult_[a * out.n_ + bs] = (*right)[s][out.mult_[a * out.n_ + b]];
          queue.push_back(bs);
        }
      }
    }
  }
  return out;
}

bool coverage_bound_holds(std::size_t covered, std::size_t n, std::size_t a, std::size_t rounds) {
  if (rounds == 0) {
    return true;
  }
  BigInt nr = 1, mr = 1;
  for (std::size_t i = 0; i < rounds; ++i) {
    nr *= n;
    mr *= n - a;
  }
  BigInt lhs = BigInt(covered) * nr;
  return lhs >= (nr - mr) * n;
}

CoverResult cover_greedy(std::size_t n, std::size_t candidates, std::size_t a_size,
                         std::vector<std::uint32_t> const& images, std::size_t k) {
  if (a_size == 0) {
    throw InvalidArgument("A must be nonempty");
  }
  CoverResult res;
  std::vector<bool> covered(n, false);
  std::size_t total = 0;
  for (std::size_t round = 0; round < k; ++round) {
    std::size_t best = 0, best_gain = 0;
    bool have = false;
    for (std::size_t c = 0; c < candidates; ++c) {
      std::size_t gain = 0;
      for (std::size_t i = 0; i < a_size; ++i) {
        gain += !covered[images[c * a_size + i]];
      }
      if (!have || gain > best_gain) {
        best = c;
        best_gain = gain;
        have = true;
      }
    }
    for (std::size_t i = 0; i < a_size; ++i) {
      std::uint32_t const y = images[best * a_size + i];
      if (!covered[y]) {
        covered[y] = true;
        ++total;
      }
    }
    res.x.push_back(best);
    res.covered.push_back(total);
    res.bound_met = res.bound_met && coverage_bound_holds(total, n, a_size, round + 1);
  }
  return res;
}

CoverResult cover_greedy(FiniteGroup const& g, std::vector<std::size_t> const& a, std::size_t k) {
  std::size_t const n = g.order();
  std::vector<std::uint32_t> images(n * a.size());
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      images[x * a.size() + i] = static_cast<std::uint32_t>(g.multiply(a[i], x));
    }
  }
  return cover_greedy(n, n, a.size(), images, k);
}

// ---------------------------------------------------------------------------
// Transversals

std::size_t InvariantTransversal::size() const {
  std::size_t n = 1;
  for (auto const& f : factors) {
    n *= f.size();
  }
  return n;
}

Word InvariantTransversal::element(std::size_t i) const {
  std::vector<std::size_t> digits(factors.size());
  for (std::size_t f = factors.size(); f-- > 0;) {
    digits[f] = i % factors[f].size();
    i /= factors[f].size();
  }
  Word w;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    w = w * factors[f][digits[f]];
  }
  return w;
}

Fraction InvariantTransversal::epsilon_achieved() const {
  return Fraction(static_cast<std::int64_t>(boundary),
                  static_cast<std::int64_t>(generators * size()));
}

std::string InvariantTransversal::to_json() const {
  nlohmann::ordered_json j;
  j["level"] = level;
  j["size"] = size();
  j["boundary"] = boundary;
  j["epsilon_achieved"] = epsilon_achieved().to_double();
  j["epsilon_achieved_exact"] = epsilon_achieved().str();
  j["epsilon_bound"] = epsilon_bound;
  return j.dump();
}

ExpandedTransversal expand(InvariantTransversal const& t, CosetTable const& level,
                           GroupModel const& m) {
  ExpandedTransversal out;
  out.cosets = {0};
  out.keys = {m.identity()};
  for (std::size_t f = t.factors.size(); f-- > 0;) {
    auto const& words = t.factors[f];
    ExpandedTransversal next;
    next.cosets.reserve(words.size() * out.cosets.size());
    next.keys.reserve(words.size() * out.cosets.size());
    for (Word const& w : words) {
      Key const kw = m.normal_form(w);
      for (std::size_t j = 0; j < out.cosets.size(); ++j) {
        next.cosets.push_back(level.apply(w, out.cosets[j]));
        next.keys.push_back(m.multiply(kw, out.keys[j]));
      }
    }
    out = std::move(next);
  }
  if (out.cosets.size() != level.coset_count()) {
    throw InvariantViolation("transversal has " + std::to_string(out.cosets.size()) +
                             " elements for " + std::to_string(level.coset_count()) + " cosets");
  }
  std::vector<bool> hit(level.coset_count(), false);
  for (Coset c : out.cosets) {
    if (hit[c]) {
      throw InvariantViolation("transversal meets coset " + std::to_string(c) + " twice");
    }
    hit[c] = true;
  }
  return out;
}

std::string export_transversal(InvariantTransversal const& t, CosetTable const& level) {
  std::vector<std::string> lines(level.coset_count());
  auto const& names = level.origin().generator_names();
  for (std::size_t i = 0; i < t.size(); ++i) {
    Word const w = t.element(i);
    lines.at(level.apply(w, 0)) = format_word(w, names);
  }
  std::string out;
  for (auto const& l : lines) {
    out += l + '\n';
  }
  return out;
}

namespace {

constexpr double kE = 2.718281828459045;

// images[c * |A| + i] = a_i . c
std::vector<std::uint32_t> left_images(CosetTable const& t, std::vector<Word> const& a) {
  std::size_t const n = t.coset_count();
  std::vector<std::uint32_t> images(n * a.size());
  auto right = t.right_multiplications();
  if (!right) {
    for (Coset c = 0; c < n; ++c) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        images[c * a.size() + i] = t.apply(a[i], c);
      }
    }
    return images;
  }
  // a (c s) = (a c) s, so each column follows from its breadth-first parent.
  std::vector<bool> seen(n, false);
  std::deque<Coset> queue{0};
  seen[0] = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    images[i] = t.apply(a[i], 0);
  }
  while (!queue.empty()) {
    Coset const c = queue.front();
    queue.pop_front();
    for (std::size_t s = 0; s < t.generator_count(); ++s) {
      Coset const cs = (*right)[s][c];
      if (seen[cs]) {
        continue;
      }
      seen[cs] = true;
      for (std::size_t i = 0; i < a.size(); ++i) {
        images[cs * a.size() + i] = (*right)[s][images[c * a.size() + i]];
      }
      queue.push_back(cs);
    }
  }
  return images;
}

}  // namespace

Step1Report weiss_step1(Chain const& c, GroupModel const& m, std::vector<Word> const& a) {
  std::size_t const d = c.origin().generator_count();
  if (m.generator_count() != d) {
    throw InvalidArgument("group model and chain disagree on the generators");
  }
  if (a.empty()) {
    throw InvalidArgument("A must be nonempty");
  }
  Step1Report rep;
  std::vector<Key> a_keys;
  for (Word const& w : a) {
    a_keys.push_back(m.normal_form(w));
  }
  KeySet a_set(a_keys.begin(), a_keys.end());
  if (a_set.size() != a.size()) {
    throw InvalidArgument("A lists some element twice");
  }
  rep.a_size = a.size();
  rep.a_boundary = boundary_size(m, a_keys, a_set);
  if (static_cast<double>(rep.a_boundary) > kWeissDelta * static_cast<double>(d * a.size())) {
    throw InvalidArgument("A is not " + std::to_string(kWeissDelta) + "-invariant: boundary " +
                          std::to_string(rep.a_boundary));
  }

  std::optional<std::size_t> level;
  for (std::size_t j = 0; j < c.levels().size() && !level; ++j) {
    CosetTable const& t = *c.level(j).table;
    if (t.coset_count() <= 10 * a.size()) {
      continue;
    }
    std::vector<bool> hit(t.coset_count(), false);
    bool injective = true;
    for (Word const& w : a) {
      Coset const x = t.apply(w, 0);
      injective = injective && !hit[x];
      hit[x] = true;
    }
    if (injective) {
      level = j;
    }
  }
  if (!level) {
    throw InvalidArgument("no materialised level has A injective with index > 10 |A|; "
                          "extend the chain");
  }
  auto const table = c.level(*level).table;
  std::size_t const n = table->coset_count();
  SchreierGraph g(table);

  std::vector<std::uint32_t> images = left_images(*table, a);
  std::size_t const k = (n + a.size() - 1) / a.size();
  CoverResult cover = cover_greedy(n, n, a.size(), images, k);
  rep.x_size = k;
  rep.cover_bound_met = cover.bound_met;

  // B: one element of AX per covered coset, first pick first.
  std::vector<Word> words(n);
  std::vector<bool> taken(n, false);
  std::vector<Key> ax_keys, b_keys;
  for (std::size_t x : cover.x) {
    Word const tx = g.transversal(static_cast<Coset>(x));
    Key const kx = m.normal_form(tx);
    for (std::size_t i = 0; i < a.size(); ++i) {
      Key const key = m.multiply(a_keys[i], kx);
      ax_keys.push_back(key);
      std::uint32_t const coset = images[x * a.size() + i];
      if (!taken[coset]) {
        taken[coset] = true;
        words[coset] = m.to_word(key);
        b_keys.push_back(key);
      }
    }
  }
  KeySet ax_set(ax_keys.begin(), ax_keys.end());
  std::vector<Key> ax_distinct(ax_set.begin(), ax_set.end());
  rep.ax_size = ax_set.size();
  rep.ax_boundary = boundary_size(m, ax_distinct, ax_set);
  rep.b_size = b_keys.size();
  rep.b_boundary = boundary_size(m, b_keys);

  for (Coset v = 0; v < n; ++v) {
    if (!taken[v]) {
      words[v] = g.transversal(v);
    }
  }
  InvariantTransversal& t = rep.transversal;
  t.level = *level;
  t.generators = d;
  t.epsilon_bound = kWeissC;
  t.factors = {std::move(words)};
  ExpandedTransversal ex = expand(t, *table, m);
  t.boundary = boundary_size(m, ex.keys);

  double const s = static_cast<double>(d);
  double const middle = static_cast<double>(rep.ax_boundary) +
                        s * static_cast<double>(rep.ax_size - rep.b_size);
  rep.b_chain_holds =
      static_cast<double>(rep.b_boundary) <= middle &&
      middle <= s * static_cast<double>(a.size() * k) * (kWeissDelta + 1 / kE);
  rep.b_bound_holds = static_cast<double>(rep.b_boundary) <=
                      1.21 / (kE - 1) * s * static_cast<double>(rep.b_size);
  rep.t_bound_holds = static_cast<double>(t.boundary) <= kWeissC * s * static_cast<double>(n);
  if (!rep.t_bound_holds) {
    throw InvariantViolation("step 1 transversal is only " +
                             std::to_string(t.epsilon_achieved().to_double()) + "-invariant");
  }
  return rep;
}

Step2Report weiss_step2(Chain const& c, GroupModel const& m, InvariantTransversal const& t1,
                        Step2Options const& options) {
  std::size_t const d = c.origin().generator_count();
  std::size_t const k = t1.level;
  CosetTable const& tk = *c.level(k).table;
  ExpandedTransversal ex = expand(t1, tk, m);
  std::vector<std::size_t> of_coset(tk.coset_count());
  for (std::size_t i = 0; i < ex.cosets.size(); ++i) {
    of_coset[ex.cosets[i]] = i;
  }
  KeySet t1_set(ex.keys.begin(), ex.keys.end());

  // S_1 = {(~st)^-1 s t : (t, st) in d_S(T_1)}, grouped by element.
  std::vector<Key> s1_keys;
  std::vector<std::size_t> s1_count;
  std::unordered_map<Key, std::size_t, KeyHash> s1_index;
  std::size_t s1_size = 0;
  for (std::size_t i = 0; i < ex.keys.size(); ++i) {
    for (std::size_t s = 0; s < d; ++s) {
      Key const st = m.left_multiply(letter_of(s), ex.keys[i]);
      if (t1_set.count(st)) {
        continue;
      }
      std::size_t const r = of_coset[tk.act(s, ex.cosets[i])];
      Key const g = m.multiply(m.inverse(ex.keys[r]), st);
      auto [it, fresh] = s1_index.emplace(g, s1_keys.size());
      if (fresh) {
        s1_keys.push_back(g);
        s1_count.push_back(0);
      }
      ++s1_count[it->second];
      ++s1_size;
    }
  }
  if (s1_size == 0) {
    throw InvalidArgument("T_1 has empty boundary; the group is finite");
  }
  // Heaviest elements first, so the breadth-first transversal is most
  // invariant where the multiset has most weight.
  std::vector<std::size_t> order(s1_keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return s1_count[x] > s1_count[y]; });
  std::vector<Word> s1_words;
  for (std::size_t i : order) {
    s1_words.push_back(m.to_word(s1_keys[i]));
  }

  std::size_t const last = std::min(c.depth(), k + options.max_levels_ahead);
  for (std::size_t l = k + 1; l <= last; ++l) {
    CosetTable const& tl = *c.level(l).table;
    std::size_t const want = tl.coset_count() / tk.coset_count();
    std::vector<bool> seen(tl.coset_count(), false);
    std::vector<Word> t2_words{Word()};
    std::vector<Key> t2_keys{m.identity()};
    std::vector<Coset> t2_cosets{0};
    seen[0] = true;
    for (std::size_t q = 0; q < t2_cosets.size(); ++q) {
      for (std::size_t j = 0; j < order.size(); ++j) {
        Coset const x = tl.apply(s1_words[j], t2_cosets[q]);
        if (!seen[x]) {
          seen[x] = true;
          Key key = m.multiply(s1_keys[order[j]], t2_keys[q]);
          t2_words.push_back(m.to_word(key));
          t2_keys.push_back(std::move(key));
          t2_cosets.push_back(x);
        }
      }
    }
    if (t2_words.size() != want) {
      throw InvariantViolation("S_1 does not generate level " + std::to_string(k) + " modulo level " +
                               std::to_string(l));
    }
    KeySet t2_set(t2_keys.begin(), t2_keys.end());
    std::size_t t2_boundary = 0;
    for (std::size_t j = 0; j < s1_keys.size(); ++j) {
      for (Key const& t2 : t2_keys) {
        t2_boundary += s1_count[j] * (t2_set.count(m.multiply(s1_keys[j], t2)) == 0);
      }
    }
    double const bound = kWeissC * static_cast<double>(s1_size * want);
    if (static_cast<double>(t2_boundary) > bound) {
      continue;
    }

    Step2Report rep;
    rep.from_level = k;
    rep.s1_size = s1_size;
    rep.s1_distinct = s1_keys.size();
    rep.t2_size = want;
    rep.t2_boundary = t2_boundary;
    rep.t2_epsilon = Fraction(static_cast<std::int64_t>(t2_boundary),
                              static_cast<std::int64_t>(s1_size * want));
    InvariantTransversal& t = rep.transversal;
    t.level = l;
    t.generators = d;
    t.factors = t1.factors;
    t.factors.push_back(std::move(t2_words));
    t.epsilon_bound = kWeissC * t1.epsilon_achieved().to_double();
    ExpandedTransversal full = expand(t, tl, m);
    t.boundary = boundary_size(m, full.keys);
    rep.product_identity = t.boundary == t2_boundary;
    if (!rep.product_identity) {
      throw InvariantViolation("boundary of T_1 T_2 is " + std::to_string(t.boundary) +
                               ", expected " + std::to_string(t2_boundary));
    }
    return rep;
  }
  throw BudgetExhausted("no level up to " + std::to_string(last) +
                            " gives a c-invariant T_2; extend the chain",
                        last);
}

SchreierGeneratingSet schreier_generators_from_transversal(Chain const& c, GroupModel const& m,
                                                           InvariantTransversal const& t) {
  auto const table = c.level(t.level).table;
  std::size_t const n = table->coset_count();
  std::size_t const d = table->generator_count();
  ExpandedTransversal ex = expand(t, *table, m);
  std::vector<std::size_t> of_coset(n);
  for (std::size_t i = 0; i < n; ++i) {
    of_coset[ex.cosets[i]] = i;
  }
  auto tau = [&](Coset v) -> Key const& { return ex.keys[of_coset[v]]; };

  SchreierGeneratingSet out;
  out.level = t.level;
  // gen_of[v * d + s]: generator number of the pair (tau_v, s), or -1 when
  // s tau_v lies in T.
  std::vector<std::int64_t> gen_of(n * d, -1);
  KeySet t_set(ex.keys.begin(), ex.keys.end());
  KeySet distinct;
  for (Coset v = 0; v < n; ++v) {
    for (std::size_t s = 0; s < d; ++s) {
      Key const st = m.left_multiply(letter_of(s), tau(v));
      if (t_set.count(st)) {
        continue;
      }
      Key g = m.multiply(m.inverse(tau(table->act(s, v))), st);
      gen_of[v * d + s] = static_cast<std::int64_t>(out.keys.size());
      out.pairs.emplace_back(of_coset[v], s);
      distinct.insert(g);
      out.keys.push_back(std::move(g));
    }
  }
  out.distinct = distinct.size();
  if (out.keys.size() != t.boundary) {
    throw InvariantViolation("generating set size differs from the transversal boundary");
  }

  // Replay: along the breadth-first tree, t_w tau_0 = tau_w W_w with W_w a
  // word in the generators; each Reidemeister-Schreier generator T(e) then
  // satisfies tau_0^-1 T(e) tau_0 = W_{sv}^-1 gamma(v, s) W_v. The right side
  // is evaluated from the generator keys and compared in the group.
  SchreierGraph g(table);
  Key const id = m.identity();
  auto gamma = [&](Coset v, std::size_t s) {
    std::int64_t const k = gen_of[v * d + s];
    return k < 0 ? id : out.keys[static_cast<std::size_t>(k)];
  };
  // The generator value must match its definition even when trivial.
  for (Coset v = 0; v < n; ++v) {
    for (std::size_t s = 0; s < d; ++s) {
      Key const direct =
          m.multiply(m.inverse(tau(table->act(s, v))), m.left_multiply(letter_of(s), tau(v)));
      if (direct != gamma(v, s)) {
        throw InvariantViolation("Schreier generator disagrees with its definition");
      }
    }
  }
  std::vector<Key> w(n), tree(n);
  std::vector<Coset> order{0};
  w[0] = id;
  tree[0] = id;
  std::vector<bool> done(n, false);
  done[0] = true;
  for (std::size_t q = 0; q < order.size(); ++q) {
    Coset const v = order[q];
    for (std::size_t s = 0; s < d; ++s) {
      Coset const x = table->act(s, v);
      if (!done[x] && g.parent(x) == v && g.parent_generator(x) == s && x != 0) {
        done[x] = true;
        w[x] = m.multiply(gamma(v, s), w[v]);
        tree[x] = m.left_multiply(letter_of(s), tree[v]);
        order.push_back(x);
      }
    }
  }
  Key const tau0 = tau(0);
  Key const tau0_inv = m.inverse(tau0);
  for (std::size_t k = 0; k < g.non_tree_count(); ++k) {
    EdgeId const e = g.edge_of_symbol(k);
    Coset const v = g.source(e);
    std::size_t const s = g.edge_generator(e);
    Coset const x = g.target(e);
    Key const label = m.multiply(m.inverse(tree[x]), m.left_multiply(letter_of(s), tree[v]));
    Key const lhs = m.multiply(tau0_inv, m.multiply(label, tau0));
    Key const rhs = m.multiply(m.inverse(w[x]), m.multiply(gamma(v, s), w[v]));
    if (lhs != rhs) {
      throw InvariantViolation("Reidemeister-Schreier generator " + std::to_string(k + 1) +
                               " is not reproduced by the Schreier set");
    }
  }
  out.certified = true;
  out.conjugated = tau0 != id && !c.level(t.level).normal;
  out.r_upper = Fraction(static_cast<std::int64_t>(out.distinct) - 1, static_cast<std::int64_t>(n));
  return out;
}

}  // namespace rgkit
