#include "rgkit/chains.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "detail/text.hpp"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"
#include "rgkit/schreier.hpp"

namespace rgkit {

namespace {

constexpr Coset kUnset = std::numeric_limits<Coset>::max();

std::shared_ptr<CosetTable const> whole_group(std::shared_ptr<Presentation const> const& p) {
  std::vector<std::vector<Coset>> trivial(p->generator_count(), std::vector<Coset>{0});
  return std::make_shared<CosetTable const>(CosetTable::make(p, trivial));
}

}  // namespace

Chain::Chain(std::shared_ptr<Presentation const> origin, LevelBuilder builder)
    : origin_(std::move(origin)), builder_(std::move(builder)) {
  if (!origin_) {
    throw InvalidArgument("chain needs an origin presentation");
  }
  levels_.push_back({whole_group(origin_), true, {}});
}

void Chain::push(std::shared_ptr<CosetTable const> table) {
  if (&table->origin() != origin_.get() && !(table->origin() == *origin_)) {
    throw InvalidArgument("chain level enumerated against a different presentation");
  }
  auto map = refinement_map(*table, *levels_.back().table);
  if (!map) {
    throw InvalidArgument("level " + std::to_string(levels_.size()) +
                          " is not contained in the previous level");
  }
  bool const normal = table->is_normal();
  levels_.push_back({std::move(table), normal, std::move(*map)});
}

std::size_t Chain::extend_to(std::size_t depth, std::size_t max_cosets) {
  while (this->depth() < depth && builder_ && !truncated()) {
    try {
      auto next = builder_(*this, max_cosets);
      if (!next) {
        truncation_ = "builder has no further levels";
        break;
      }
      push(std::move(next));
    } catch (BudgetExhausted const& e) {
      truncation_ = e.what();
    }
  }
  return this->depth();
}

std::optional<std::vector<Coset>> refinement_map(CosetTable const& fine,
                                                 CosetTable const& coarse) {
  if (fine.generator_count() != coarse.generator_count()) {
    return std::nullopt;
  }
  std::vector<Coset> map(fine.coset_count(), kUnset);
  map[0] = 0;
  std::vector<Coset> queue{0};
  queue.reserve(fine.coset_count());
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Coset const c = queue[head];
    for (std::size_t s = 0; s < fine.generator_count(); ++s) {
      Coset const f = fine.act(s, c);
      Coset const m = coarse.act(s, map[c]);
      if (map[f] == kUnset) {
        map[f] = m;
        queue.push_back(f);
      } else if (map[f] != m) {
        return std::nullopt;
      }
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Derived p-series

std::shared_ptr<CosetTable const> derived_p_step(std::shared_ptr<CosetTable const> level,
                                                 std::uint32_t prime,
                                                 std::size_t max_cosets) {
  SchreierGraph g(level);
  SubgroupPresentation sp = reidemeister_schreier(g);
  SparseIntMatrix rel = relation_matrix(sp.relators, sp.generator_count);
  std::size_t const n = level->coset_count();
  // n * p^r <= max_cosets
  std::size_t max_dim = 0;
  for (std::size_t bound = n; bound <= max_cosets / prime; bound *= prime) {
    ++max_dim;
  }
  std::size_t dim = 0;
  auto quotient = mod_p_quotient(rel, prime, max_dim, &dim);
  if (!quotient) {
    throw BudgetExhausted("next level would have index " + std::to_string(n) + " * " +
                              std::to_string(prime) + "^" + std::to_string(dim) +
                              ", above the budget of " + std::to_string(max_cosets),
                          n);
  }
  std::size_t pr = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    pr *= prime;
  }
  std::size_t const d = level->generator_count();
  // Each non-tree edge shifts the F_p^dim coordinate by the image of its label.
  std::vector<std::vector<std::uint32_t>> shift(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!g.is_tree_edge(e)) {
      shift[e] = quotient->image[g.symbol(e)];
    }
  }
  std::vector<std::vector<Coset>> action(d, std::vector<Coset>(n * pr));
  std::vector<std::uint32_t> digits(dim);
  for (Coset v = 0; v < n; ++v) {
    for (std::size_t x = 0; x < pr; ++x) {
      std::size_t rest = x;
      for (std::size_t k = 0; k < dim; ++k) {
        digits[k] = static_cast<std::uint32_t>(rest % prime);
        rest /= prime;
      }
      for (std::size_t s = 0; s < d; ++s) {
        EdgeId const e = g.edge(v, s);
        std::size_t y = x;
        if (!shift[e].empty()) {
          y = 0;
          std::size_t radix = 1;
          for (std::size_t k = 0; k < dim; ++k) {
            y += ((digits[k] + shift[e][k]) % prime) * radix;
            radix *= prime;
          }
        }
        action[s][v * pr + x] = static_cast<Coset>(g.target(e) * pr + y);
      }
    }
  }
  return std::make_shared<CosetTable const>(CosetTable::make(level->origin_ptr(), action));
}

Chain derived_p_chain(std::shared_ptr<Presentation const> p, std::uint32_t prime,
                      std::size_t depth, std::size_t max_cosets) {
  if (!is_prime(prime) || prime >= (1U << 31)) {
    throw InvalidArgument("derived p-chain needs a prime below 2^31");
  }
  Chain c(std::move(p), [prime](Chain const& chain, std::size_t budget) {
    return derived_p_step(chain.levels().back().table, prime, budget);
  });
  c.extend_to(depth, max_cosets);
  for (std::size_t n = 1; n < c.levels().size(); ++n) {
    if (!c.level(n).normal) {
      throw InvariantViolation("derived p-chain level " + std::to_string(n) +
                               " failed the normality check");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Chains of kernels

Chain nested_kernel_chain(std::shared_ptr<Presentation const> p,
                          std::vector<LevelHom> const& homs, std::size_t max_cosets) {
  auto builder = [p, homs](Chain const& c, std::size_t cap) -> std::shared_ptr<CosetTable const> {
    if (c.depth() >= homs.size()) {
      return nullptr;
    }
    LevelHom const& hom = homs[c.depth()];
    if (auto const* perm = std::get_if<PermSubgroup>(&hom)) {
      return std::make_shared<CosetTable const>(
          enumerate(p, SubgroupSpec{*perm}, EnumerationOptions{cap}));
    }
    return std::make_shared<CosetTable const>(
        abelian_kernel_table(p, std::get<AbelianHom>(hom), cap));
  };
  Chain c(p, builder);
  c.extend_to(homs.size(), max_cosets);
  return c;
}

std::vector<LevelHom> parse_chain_homs(std::string_view text, Presentation const& p) {
  std::vector<LevelHom> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto const& names = p.generator_names();
  auto generator_index = [&](detail::Token const& tok, std::string const& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      detail::fail_at(tok, "undeclared generator '" + name + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
  };
  auto parse_vector = [](detail::Token const& tok, std::string_view body, std::size_t offset) {
    std::vector<std::int64_t> v;
    std::size_t i = 0;
    while (i <= body.size()) {
      std::size_t j = body.find(',', i);
      if (j == std::string_view::npos) {
        j = body.size();
      }
      std::string const item(body.substr(i, j - i));
      try {
        std::size_t used = 0;
        v.push_back(std::stoll(item, &used));
        if (used != item.size()) {
          throw std::invalid_argument(item);
        }
      } catch (std::exception const&) {
        detail::fail_at(tok, "expected an integer list", offset + i);
      }
      i = j + 1;
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = detail::tokenize(line, "");
    for (auto& t : tokens) {
      t.line = line_no;
    }
    if (tokens.empty()) {
      continue;
    }
    if (tokens[0].text == "perm") {
      std::string spec = "sub perm";
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        spec += ' ' + tokens[i].text;
      }
      try {
        out.emplace_back(std::get<PermSubgroup>(parse_subgroup_spec(spec, p)));
      } catch (ParseError const& e) {
        throw ParseError(e.what(), line_no, 1);
      }
      continue;
    }
    if (tokens[0].text != "abelian") {
      detail::fail_at(tokens[0], "expected 'perm' or 'abelian'");
    }
    AbelianHom hom;
    hom.images.assign(p.generator_count(), {});
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto const& tok = tokens[i];
      auto const eq = tok.text.find('=');
      if (eq == std::string::npos) {
        detail::fail_at(tok, "expected key=value");
      }
      std::string const key = tok.text.substr(0, eq);
      auto const values = parse_vector(tok, std::string_view(tok.text).substr(eq + 1), eq + 1);
      if (key == "moduli") {
        for (auto v : values) {
          if (v <= 0) {
            detail::fail_at(tok, "moduli must be positive", eq + 1);
          }
          hom.moduli.push_back(static_cast<std::uint64_t>(v));
        }
      } else {
        hom.images[generator_index(tok, key)] = values;
      }
    }
    if (hom.moduli.empty()) {
      detail::fail_at(tokens[0], "abelian hom needs moduli=");
    }
    for (auto& img : hom.images) {
      if (img.empty()) {
        img.assign(hom.moduli.size(), 0);
      }
      if (img.size() != hom.moduli.size()) {
        detail::fail_at(tokens[0], "image length differs from the number of moduli");
      }
    }
    out.emplace_back(std::move(hom));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coset tree and separation evidence

CosetTree coset_tree(Chain const& c) {
  CosetTree tree;
  auto const& levels = c.levels();
  for (std::size_t n = 0; n < levels.size(); ++n) {
    tree.parents.push_back(levels[n].refinement);
    tree.shadow_denominator.push_back(levels[n].index());
    if (n == 0) {
      continue;
    }
    std::vector<std::size_t> children(levels[n - 1].index(), 0);
    for (Coset parent : levels[n].refinement) {
      ++children[parent];
    }
    auto const [lo, hi] = std::minmax_element(children.begin(), children.end());
    if (*lo != *hi) {
      throw InvariantViolation("coset tree level " + std::to_string(n - 1) +
                               " has non-uniform branching");
    }
    tree.branching.push_back(*lo);
    if (*lo * tree.shadow_denominator[n - 1] != tree.shadow_denominator[n]) {
      throw InvariantViolation("shadow measures are not consistent at level " +
                               std::to_string(n));
    }
  }
  return tree;
}

SeparationEvidence trivial_intersection_evidence(Chain const& c, std::vector<Word> const& words) {
  SeparationEvidence ev;
  ev.depth = c.depth();
  for (Word const& w : words) {
    if (w.alphabet_bound() > c.origin().generator_count()) {
      throw InvalidArgument("test word mentions an undeclared generator");
    }
    SeparationRecord rec{w, std::nullopt};
    for (std::size_t n = 0; n < c.levels().size(); ++n) {
      if (c.level(n).table->apply(w, 0) != 0) {
        rec.separated_at = n;
        break;
      }
    }
    ev.max_word_length = std::max(ev.max_word_length, w.length());
    ev.records.push_back(std::move(rec));
  }
  return ev;
}

std::string SeparationEvidence::summary() const {
  std::size_t survivors = 0;
  std::size_t deepest = 0;
  for (auto const& r : records) {
    if (r.word.empty()) {
      continue;
    }
    if (r.separated_at) {
      deepest = std::max(deepest, *r.separated_at);
    } else {
      ++survivors;
    }
  }
  if (survivors == 0) {
    return "separated up to word length " + std::to_string(max_word_length) + " at depth " +
           std::to_string(deepest);
  }
  return std::to_string(survivors) + " test word(s) not separated within " +
         std::to_string(depth) + " built level(s)";
}

}  // namespace rgkit
