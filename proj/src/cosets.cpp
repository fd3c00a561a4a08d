#include "rgkit/cosets.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <unordered_map>

#include "detail/text.hpp"
#include "rgkit/errors.hpp"

namespace rgkit {

namespace {

constexpr Coset kUndefined = std::numeric_limits<Coset>::max();

struct PermHash {
  std::size_t operator()(Perm const& p) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto x : p) {
      h ^= x;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

Perm identity_perm(std::size_t degree) {
  Perm p(degree);
  for (std::size_t i = 0; i < degree; ++i) {
    p[i] = static_cast<std::uint32_t>(i);
  }
  return p;
}

void check_images(Presentation const& p, std::span<Perm const> images, std::size_t degree) {
  if (images.size() != p.generator_count()) {
    throw InvalidArgument("expected " + std::to_string(p.generator_count()) +
                          " generator images, got " + std::to_string(images.size()));
  }
  for (Perm const& g : images) {
    if (g.size() != degree || !is_permutation(g)) {
      throw InvalidArgument("generator image is not a permutation of degree " +
                            std::to_string(degree));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Permutations

Perm parse_cycles(std::string_view text, std::size_t degree) {
  Perm p = identity_perm(degree);
  std::vector<bool> used(degree, false);
  std::size_t i = 0;
  auto fail = [&](std::string const& what) {
    throw ParseError(what + " in '" + std::string(text) + "'", 1, i + 1);
  };
  while (i < text.size()) {
    if (text[i] != '(') {
      fail("expected '('");
    }
    ++i;
    std::vector<std::size_t> cycle;
    while (i < text.size() && text[i] != ')') {
      if (text[i] == ',') {
        ++i;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(text[i])) == 0) {
        fail("expected point");
      }
      std::size_t v = 0;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) != 0) {
        v = v * 10 + static_cast<std::size_t>(text[i] - '0');
        if (v > degree) {
          fail("point exceeds degree " + std::to_string(degree));
        }
        ++i;
      }
      if (v == 0) {
        fail("points are 1-based");
      }
      if (used[v - 1]) {
        fail("point " + std::to_string(v) + " repeated");
      }
      used[v - 1] = true;
      cycle.push_back(v - 1);
    }
    if (i >= text.size()) {
      fail("unterminated cycle");
    }
    ++i;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      p[cycle[k]] = static_cast<std::uint32_t>(cycle[(k + 1) % cycle.size()]);
    }
  }
  return p;
}

std::string format_cycles(Perm const& p) {
  std::string out;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i] || p[i] == i) {
      continue;
    }
    out += '(';
    std::size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first) {
        out += ',';
      }
      out += std::to_string(j + 1);
      first = false;
      j = p[j];
    }
    out += ')';
  }
  return out.empty() ? "()" : out;
}

bool is_permutation(Perm const& p) {
  std::vector<bool> hit(p.size(), false);
  for (auto x : p) {
    if (x >= p.size() || hit[x]) {
      return false;
    }
    hit[x] = true;
  }
  return true;
}

Perm compose(Perm const& f, Perm const& g) {
  Perm out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = f[g[i]];
  }
  return out;
}

Perm perm_inverse(Perm const& p) {
  Perm out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[p[i]] = static_cast<std::uint32_t>(i);
  }
  return out;
}

Perm evaluate(Word const& w, std::span<Perm const> images, std::size_t degree) {
  Perm out = identity_perm(degree);
  std::vector<Perm> inverses;
  inverses.reserve(images.size());
  for (Perm const& g : images) {
    inverses.push_back(perm_inverse(g));
  }
  auto const letters = w.letters();
  for (std::size_t k = letters.size(); k-- > 0;) {
    Letter const x = letters[k];
    Perm const& g = x > 0 ? images[generator_of(x)] : inverses[generator_of(x)];
    out = compose(g, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CosetTable

CosetTable CosetTable::make(std::shared_ptr<Presentation const> origin,
                            std::vector<std::vector<Coset>> const& action, Coset root) {
  if (!origin) {
    throw InvalidArgument("coset table needs an origin presentation");
  }
  std::size_t const d = origin->generator_count();
  if (action.size() != d) {
    throw InvalidArgument("coset table needs one action per generator");
  }
  std::size_t const n = action.empty() ? 0 : action[0].size();
  if (n == 0 || root >= n) {
    throw InvalidArgument("coset table must have at least one coset");
  }
  for (auto const& a : action) {
    if (a.size() != n || !is_permutation(Perm(a.begin(), a.end()))) {
      throw InvalidArgument("generator action is not a bijection of the cosets");
    }
  }
  std::vector<Coset> relabel(n, kUndefined);
  std::vector<Coset> order;
  order.reserve(n);
  relabel[root] = 0;
  order.push_back(root);
  for (std::size_t head = 0; head < order.size(); ++head) {
    Coset const c = order[head];
    for (std::size_t s = 0; s < d; ++s) {
      Coset const t = action[s][c];
      if (relabel[t] == kUndefined) {
        relabel[t] = static_cast<Coset>(order.size());
        order.push_back(t);
      }
    }
  }
  if (order.size() != n) {
    throw InvalidArgument("action is not transitive: " + std::to_string(order.size()) +
                          " of " + std::to_string(n) + " cosets reachable");
  }
  CosetTable t;
  t.origin_ = std::move(origin);
  t.n_ = n;
  t.d_ = d;
  t.act_.resize(n * d);
  t.inv_.resize(n * d);
  for (std::size_t s = 0; s < d; ++s) {
    for (std::size_t c = 0; c < n; ++c) {
      Coset const from = relabel[c];
      Coset const to = relabel[action[s][c]];
      t.act_[s * n + from] = to;
      t.inv_[s * n + to] = from;
    }
  }
  for (Word const& r : t.origin_->relators()) {
    for (Coset c = 0; c < n; ++c) {
      if (t.apply(r, c) != c) {
        throw InvalidArgument("relator " + format_word(r, t.origin_->generator_names()) +
                              " does not act trivially on coset " + std::to_string(c));
      }
    }
  }
  return t;
}

Coset CosetTable::apply(Word const& w, Coset c) const noexcept {
  auto const letters = w.letters();
  for (std::size_t k = letters.size(); k-- > 0;) {
    c = apply(letters[k], c);
  }
  return c;
}

std::optional<std::vector<std::vector<Coset>>> CosetTable::right_multiplications() const {
  std::vector<std::vector<Coset>> out;
  out.reserve(d_);
  for (std::size_t s = 0; s < d_; ++s) {
    std::vector<Coset> r(n_, kUndefined);
    r[0] = act(s, 0);
    std::vector<Coset> queue{0};
    queue.reserve(n_);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      Coset const c = queue[head];
      for (std::size_t t = 0; t < d_; ++t) {
        Coset const target = act(t, c);
        Coset const value = act(t, r[c]);
        if (r[target] == kUndefined) {
          r[target] = value;
          queue.push_back(target);
        } else if (r[target] != value) {
          return std::nullopt;
        }
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool CosetTable::is_normal() const { return right_multiplications().has_value(); }

void CosetTable::verify() const {
  for (std::size_t s = 0; s < d_; ++s) {
    for (Coset c = 0; c < n_; ++c) {
      if (inv_[s * n_ + act_[s * n_ + c]] != c) {
        throw InvariantViolation("coset table action is not a bijection");
      }
    }
  }
  for (Word const& r : origin_->relators()) {
    for (Coset c = 0; c < n_; ++c) {
      if (apply(r, c) != c) {
        throw InvariantViolation("relator does not act trivially on coset table");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Subgroup specs

SubgroupSpec parse_subgroup_spec(std::string_view text, Presentation const& p) {
  auto const tokens = detail::tokenize(text, "");
  if (tokens.size() < 2 || tokens[0].text != "sub") {
    throw ParseError("subgroup spec must start with 'sub gens' or 'sub perm'", 1, 1);
  }
  if (tokens[1].text == "gens") {
    WordsSubgroup spec;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      spec.generators.push_back(detail::parse_word_token(tokens[i], p.generator_names()));
    }
    return spec;
  }
  if (tokens[1].text != "perm") {
    detail::fail_at(tokens[1], "expected 'gens' or 'perm'");
  }
  PermSubgroup spec;
  std::size_t i = 2;
  if (i >= tokens.size() || tokens[i].text.rfind("degree=", 0) != 0) {
    throw ParseError("expected degree=<n>", tokens.back().line, tokens.back().column);
  }
  try {
    spec.degree = std::stoul(tokens[i].text.substr(7));
  } catch (std::exception const&) {
    detail::fail_at(tokens[i], "invalid degree", 7);
  }
  if (spec.degree == 0) {
    detail::fail_at(tokens[i], "degree must be positive", 7);
  }
  ++i;
  std::vector<std::optional<Perm>> images(p.generator_count());
  for (; i < tokens.size(); ++i) {
    auto const& tok = tokens[i];
    if (tok.text == "kernel") {
      spec.stabilized_point.reset();
      continue;
    }
    if (tok.text.rfind("stab=", 0) == 0) {
      std::size_t point = 0;
      try {
        point = std::stoul(tok.text.substr(5));
      } catch (std::exception const&) {
        detail::fail_at(tok, "invalid point", 5);
      }
      if (point == 0 || point > spec.degree) {
        detail::fail_at(tok, "stabilised point out of range", 5);
      }
      spec.stabilized_point = point - 1;
      continue;
    }
    auto const eq = tok.text.find('=');
    if (eq == std::string::npos) {
      detail::fail_at(tok, "expected <gen>=<cycles>");
    }
    std::string const name = tok.text.substr(0, eq);
    auto const& names = p.generator_names();
    auto const it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      detail::fail_at(tok, "undeclared generator '" + name + "'");
    }
    try {
      images[static_cast<std::size_t>(it - names.begin())] =
          parse_cycles(std::string_view(tok.text).substr(eq + 1), spec.degree);
    } catch (ParseError const& e) {
      detail::fail_at(tok, e.what(), eq + 1);
    }
  }
  for (std::size_t g = 0; g < images.size(); ++g) {
    spec.images.push_back(images[g] ? *images[g] : identity_perm(spec.degree));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// HLT coset enumeration

namespace {

class HltEnumerator {
 public:
  HltEnumerator(Presentation const& p, std::size_t max_cosets)
      : cols_(2 * p.generator_count()), budget_(max_cosets) {
    for (Word const& r : p.relators()) {
      relators_.push_back(to_columns(r));
    }
    new_coset();
  }

  static std::vector<std::size_t> to_columns(Word const& w) {
    std::vector<std::size_t> out;
    out.reserve(w.length());
    for (Letter x : w.letters()) {
      out.push_back(2 * generator_of(x) + (x > 0 ? 0 : 1));
    }
    return out;
  }

  void run(std::vector<Word> const& subgroup_generators) {
    for (Word const& w : subgroup_generators) {
      auto const cols = to_columns(w);
      while (!scan_and_fill(0, cols)) {
        make_room();
      }
    }
    for (std::size_t a = 0; a < forward_.size(); ++a) {
      for (std::size_t r = 0; r < relators_.size() && live(a); ++r) {
        while (live(a) && !scan_and_fill(static_cast<Coset>(a), relators_[r])) {
          make_room();
        }
      }
      for (std::size_t x = 0; x < cols_ && live(a); ++x) {
        if (entry(static_cast<Coset>(a), x) == kUndefined) {
          if (live_ >= budget_) {
            make_room();
          }
          if (live(a) && entry(static_cast<Coset>(a), x) == kUndefined) {
            define(static_cast<Coset>(a), x);
          }
        }
      }
    }
  }

  // Left action of generator s on the closed table: left cosets g^-1 H
  // correspond to right cosets Hg, so s acts as right multiplication by s^-1.
  std::vector<std::vector<Coset>> left_action() const {
    std::vector<Coset> number(forward_.size(), kUndefined);
    Coset n = 0;
    for (std::size_t c = 0; c < forward_.size(); ++c) {
      if (live(c)) {
        number[c] = n++;
      }
    }
    std::size_t const d = cols_ / 2;
    std::vector<std::vector<Coset>> action(d, std::vector<Coset>(n));
    for (std::size_t c = 0; c < forward_.size(); ++c) {
      if (!live(c)) {
        continue;
      }
      for (std::size_t s = 0; s < d; ++s) {
        Coset const t = entry(static_cast<Coset>(c), 2 * s + 1);
        if (t == kUndefined) {
          throw InvariantViolation("coset enumeration finished with an incomplete table");
        }
        action[s][number[c]] = number[rep(t)];
      }
    }
    return action;
  }

 private:
  bool live(std::size_t c) const { return forward_[c] == c; }
  Coset& entry(Coset c, std::size_t x) { return table_[c * cols_ + x]; }
  Coset entry(Coset c, std::size_t x) const { return table_[c * cols_ + x]; }

  Coset new_coset() {
    auto const c = static_cast<Coset>(forward_.size());
    forward_.push_back(c);
    table_.resize(table_.size() + cols_, kUndefined);
    ++live_;
    return c;
  }

  void define(Coset c, std::size_t x) {
    if (forward_.size() >= hard_limit()) {
      throw BudgetExhausted("coset enumeration defined too many cosets", live_);
    }
    Coset const n = new_coset();
    entry(c, x) = n;
    entry(n, x ^ 1U) = c;
  }

  std::size_t hard_limit() const {
    return std::max<std::size_t>(budget_ * 64, 1U << 16);
  }

  void make_room() {
    lookahead();
    if (live_ >= budget_) {
      throw BudgetExhausted("index not certified finite within budget of " +
                                std::to_string(budget_) + " cosets",
                            live_);
    }
  }

  void lookahead() {
    for (std::size_t c = 0; c < forward_.size(); ++c) {
      for (std::size_t r = 0; r < relators_.size() && live(c); ++r) {
        scan(static_cast<Coset>(c), relators_[r]);
      }
    }
  }

  // Returns false if a new coset was needed while the budget is full.
  bool scan_and_fill(Coset a, std::vector<std::size_t> const& w) {
    std::size_t i = 0;
    std::size_t j = w.size();
    Coset f = a;
    Coset b = a;
    while (true) {
      while (i < j && entry(f, w[i]) != kUndefined) {
        f = entry(f, w[i]);
        ++i;
      }
      if (i == j) {
        coincidence(f, b);
        return true;
      }
      while (j > i && entry(b, w[j - 1] ^ 1U) != kUndefined) {
        b = entry(b, w[j - 1] ^ 1U);
        --j;
      }
      if (i == j) {
        coincidence(f, b);
        return true;
      }
      if (j == i + 1) {
        entry(f, w[i]) = b;
        entry(b, w[i] ^ 1U) = f;
        return true;
      }
      if (live_ >= budget_) {
        return false;
      }
      define(f, w[i]);
    }
  }

  void scan(Coset a, std::vector<std::size_t> const& w) {
    std::size_t i = 0;
    std::size_t j = w.size();
    Coset f = a;
    Coset b = a;
    while (i < j && entry(f, w[i]) != kUndefined) {
      f = entry(f, w[i]);
      ++i;
    }
    if (i == j) {
      coincidence(f, b);
      return;
    }
    while (j > i && entry(b, w[j - 1] ^ 1U) != kUndefined) {
      b = entry(b, w[j - 1] ^ 1U);
      --j;
    }
    if (i == j) {
      coincidence(f, b);
    } else if (j == i + 1) {
      entry(f, w[i]) = b;
      entry(b, w[i] ^ 1U) = f;
    }
  }

  Coset rep(Coset c) const {
    while (forward_[c] != c) {
      c = forward_[c];
    }
    return c;
  }

  Coset rep_compress(Coset c) {
    Coset root = rep(c);
    while (forward_[c] != root) {
      Coset const next = forward_[c];
      forward_[c] = root;
      c = next;
    }
    return root;
  }

  void merge(Coset k, Coset l, std::vector<Coset>& queue) {
    Coset const phi = rep_compress(k);
    Coset const psi = rep_compress(l);
    if (phi == psi) {
      return;
    }
    Coset const mu = std::min(phi, psi);
    Coset const nu = std::max(phi, psi);
    forward_[nu] = mu;
    --live_;
    queue.push_back(nu);
  }

  void coincidence(Coset a, Coset b) {
    if (a == b) {
      return;
    }
    std::vector<Coset> queue;
    merge(a, b, queue);
    for (std::size_t i = 0; i < queue.size(); ++i) {
      Coset const g = queue[i];
      for (std::size_t x = 0; x < cols_; ++x) {
        Coset const d = entry(g, x);
        if (d == kUndefined) {
          continue;
        }
        entry(d, x ^ 1U) = kUndefined;
        Coset const mu = rep_compress(g);
        Coset const nu = rep_compress(d);
        if (entry(mu, x) != kUndefined) {
          merge(nu, entry(mu, x), queue);
        } else if (entry(nu, x ^ 1U) != kUndefined) {
          merge(mu, entry(nu, x ^ 1U), queue);
        } else {
          entry(mu, x) = nu;
          entry(nu, x ^ 1U) = mu;
        }
      }
    }
  }

  std::size_t cols_;
  std::size_t budget_;
  std::size_t live_ = 0;
  std::vector<std::vector<std::size_t>> relators_;
  std::vector<Coset> forward_;
  std::vector<Coset> table_;
};

}  // namespace

CosetTable todd_coxeter(std::shared_ptr<Presentation const> p,
                        std::vector<Word> const& subgroup_generators,
                        std::size_t max_cosets) {
  if (max_cosets == 0) {
    throw InvalidArgument("coset budget must be at least 1");
  }
  for (Word const& w : subgroup_generators) {
    if (w.alphabet_bound() > p->generator_count()) {
      throw InvalidArgument("subgroup generator mentions an undeclared generator");
    }
  }
  HltEnumerator e(*p, max_cosets);
  e.run(subgroup_generators);
  CosetTable t = CosetTable::make(p, e.left_action());
  for (Word const& w : subgroup_generators) {
    if (t.apply(w, 0) != 0) {
      throw InvariantViolation("subgroup generator does not fix the subgroup coset");
    }
  }
  return t;
}

CosetTable kernel_table(std::shared_ptr<Presentation const> p, std::span<Perm const> images,
                        std::size_t max_order) {
  std::size_t const degree = images.empty() ? 0 : images[0].size();
  check_images(*p, images, degree);
  Perm const id = identity_perm(degree);
  for (Word const& r : p->relators()) {
    if (evaluate(r, images, degree) != id) {
      throw InvalidArgument("relator " + format_word(r, p->generator_names()) +
                            " does not map to the identity");
    }
  }
  std::vector<Perm> elements{id};
  std::unordered_map<Perm, Coset, PermHash> index{{id, 0}};
  std::size_t const d = images.size();
  std::vector<std::vector<Coset>> action(d);
  for (std::size_t head = 0; head < elements.size(); ++head) {
    for (std::size_t s = 0; s < d; ++s) {
      Perm next = compose(images[s], elements[head]);
      auto const [it, inserted] =
          index.try_emplace(std::move(next), static_cast<Coset>(elements.size()));
      if (inserted) {
        if (elements.size() >= max_order) {
          throw BudgetExhausted("image group exceeds " + std::to_string(max_order) +
                                    " elements",
                                elements.size());
        }
        elements.push_back(it->first);
      }
      action[s].push_back(it->second);
    }
  }
  return CosetTable::make(p, action);
}

CosetTable stabilizer_table(std::shared_ptr<Presentation const> p,
                            std::span<Perm const> images, std::size_t point) {
  std::size_t const degree = images.empty() ? 0 : images[0].size();
  check_images(*p, images, degree);
  if (point >= degree) {
    throw InvalidArgument("stabilised point out of range");
  }
  std::vector<std::uint32_t> slot(degree, kUndefined);
  std::vector<std::uint32_t> orbit{static_cast<std::uint32_t>(point)};
  slot[point] = 0;
  for (std::size_t head = 0; head < orbit.size(); ++head) {
    for (Perm const& g : images) {
      std::uint32_t const y = g[orbit[head]];
      if (slot[y] == kUndefined) {
        slot[y] = static_cast<std::uint32_t>(orbit.size());
        orbit.push_back(y);
      }
    }
  }
  std::vector<std::vector<Coset>> action(images.size());
  for (std::size_t s = 0; s < images.size(); ++s) {
    action[s].resize(orbit.size());
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      action[s][k] = slot[images[s][orbit[k]]];
    }
  }
  return CosetTable::make(p, action);
}

CosetTable abelian_kernel_table(std::shared_ptr<Presentation const> p, AbelianHom const& hom,
                                std::size_t max_order) {
  std::size_t const d = p->generator_count();
  std::size_t const k = hom.moduli.size();
  if (hom.images.size() != d) {
    throw InvalidArgument("expected one image vector per generator");
  }
  std::uint64_t order = 1;
  for (std::uint64_t m : hom.moduli) {
    if (m == 0) {
      throw InvalidArgument("moduli must be positive");
    }
    if (order > max_order / m + 1) {
      throw BudgetExhausted("abelian quotient exceeds " + std::to_string(max_order) +
                                " elements",
                            max_order);
    }
    order *= m;
  }
  auto normalise = [&](std::vector<std::int64_t> v) {
    for (std::size_t i = 0; i < k; ++i) {
      auto const m = static_cast<std::int64_t>(hom.moduli[i]);
      v[i] = ((v[i] % m) + m) % m;
    }
    return v;
  };
  std::vector<std::vector<std::int64_t>> images;
  for (auto const& img : hom.images) {
    if (img.size() != k) {
      throw InvalidArgument("image vector has the wrong length");
    }
    images.push_back(normalise(img));
  }
  for (Word const& r : p->relators()) {
    std::vector<std::int64_t> sum(k, 0);
    for (Letter x : r.letters()) {
      for (std::size_t i = 0; i < k; ++i) {
        sum[i] += (x > 0 ? 1 : -1) * images[generator_of(x)][i];
      }
    }
    for (auto v : normalise(sum)) {
      if (v != 0) {
        throw InvalidArgument("relator " + format_word(r, p->generator_names()) +
                              " does not map to zero");
      }
    }
  }
  // Mixed-radix encoding; the step of generator s is added digitwise.
  auto step = [&](std::uint64_t code, std::size_t s) {
    std::uint64_t out = 0;
    std::uint64_t radix = 1;
    for (std::size_t i = 0; i < k; ++i) {
      std::uint64_t const m = hom.moduli[i];
      std::uint64_t const digit = (code / radix) % m;
      out += ((digit + static_cast<std::uint64_t>(images[s][i])) % m) * radix;
      radix *= m;
    }
    return out;
  };
  std::unordered_map<std::uint64_t, Coset> index{{0, 0}};
  std::vector<std::uint64_t> elements{0};
  std::vector<std::vector<Coset>> action(d);
  for (std::size_t head = 0; head < elements.size(); ++head) {
    for (std::size_t s = 0; s < d; ++s) {
      auto const [it, inserted] =
          index.try_emplace(step(elements[head], s), static_cast<Coset>(elements.size()));
      if (inserted) {
        if (elements.size() >= max_order) {
          throw BudgetExhausted("image group exceeds " + std::to_string(max_order) +
                                    " elements",
                                elements.size());
        }
        elements.push_back(it->first);
      }
      action[s].push_back(it->second);
    }
  }
  return CosetTable::make(std::move(p), action);
}

CosetTable enumerate(std::shared_ptr<Presentation const> p, SubgroupSpec const& spec,
                     EnumerationOptions const& options) {
  if (options.max_cosets == 0) {
    throw InvalidArgument("coset budget must be at least 1");
  }
  if (auto const* words = std::get_if<WordsSubgroup>(&spec)) {
    return todd_coxeter(std::move(p), words->generators, options.max_cosets);
  }
  auto const& perm = std::get<PermSubgroup>(spec);
  if (perm.stabilized_point) {
    CosetTable t = stabilizer_table(p, perm.images, *perm.stabilized_point);
    if (t.coset_count() > options.max_cosets) {
      throw BudgetExhausted("orbit exceeds coset budget", t.coset_count());
    }
    return t;
  }
  return kernel_table(std::move(p), perm.images, options.max_cosets);
}

}  // namespace rgkit
