#include "rgkit/rank.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"

namespace rgkit {

std::string to_string(LowerMethod m) {
  switch (m) {
    case LowerMethod::abelianization:
      return "abelianization rank";
    case LowerMethod::mod_p:
      return "mod-p rank";
    case LowerMethod::trivial:
      return "trivial";
  }
  return "?";
}

std::string to_string(UpperMethod m) {
  switch (m) {
    case UpperMethod::nielsen_schreier_exact:
      return "Nielsen-Schreier exact";
    case UpperMethod::tietze:
      return "Tietze-simplified generator count";
    case UpperMethod::schreier_count:
      return "Schreier count";
  }
  return "?";
}

std::size_t abelianization_rank(SubgroupPresentation const& sp, AbelianizationMode mode) {
  SparseIntMatrix m = relation_matrix(sp.relators, sp.generator_count);
  if (mode.prime) {
    return sp.generator_count - rank_mod_p(m, *mode.prime);
  }
  return smith_normal_form(m).minimal_generators();
}

// ---------------------------------------------------------------------------
// Tietze simplification

namespace {

struct TietzeState {
  std::size_t generators;
  std::vector<bool> alive;
  std::vector<Word> relators;
  std::size_t total_length = 0;

  void normalise() {
    std::vector<Word> kept;
    std::unordered_set<Word, WordHash> seen;
    total_length = 0;
    for (Word const& r : relators) {
      Word c = r.cyclically_reduced();
      if (c.empty() || !seen.insert(cyclic_canonical(c)).second) {
        continue;
      }
      total_length += c.length();
      kept.push_back(std::move(c));
    }
    relators = std::move(kept);
  }

  // Occurrences of each generator over all relators.
  std::vector<std::size_t> occurrences() const {
    std::vector<std::size_t> occ(generators, 0);
    for (Word const& r : relators) {
      for (Letter x : r.letters()) {
        ++occ[generator_of(x)];
      }
    }
    return occ;
  }

  // Returns false when no generator can be eliminated within the length cap.
  bool eliminate_one(std::size_t max_total_length) {
    std::vector<std::size_t> order(relators.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return relators[a].length() < relators[b].length();
    });
    std::vector<std::size_t> const occ = occurrences();
    std::vector<std::size_t> local(generators, 0);
    for (std::size_t ri : order) {
      Word const& r = relators[ri];
      for (Letter x : r.letters()) {
        ++local[generator_of(x)];
      }
      std::size_t best = generators;
      for (Letter x : r.letters()) {
        std::size_t const g = generator_of(x);
        if (local[g] != 1 || g >= best) {
          continue;
        }
        std::size_t const growth = (occ[g] - 1) * (r.length() >= 2 ? r.length() - 2 : 0);
        if (total_length + growth <= max_total_length) {
          best = g;
        }
      }
      for (Letter x : r.letters()) {
        local[generator_of(x)] = 0;
      }
      if (best != generators) {
        substitute(ri, best);
        return true;
      }
    }
    return false;
  }

  void substitute(std::size_t ri, std::size_t g) {
    Word const r = relators[ri];
    auto const letters = r.letters();
    std::size_t pos = 0;
    while (generator_of(letters[pos]) != g) {
      ++pos;
    }
    std::vector<Letter> rest;
    for (std::size_t k = 1; k < letters.size(); ++k) {
      rest.push_back(letters[(pos + k) % letters.size()]);
    }
    Word const w = Word::reduce_unchecked(rest);
    // x w = 1 gives x = w^-1; x^-1 w = 1 gives x = w.
    Word const value = letters[pos] > 0 ? w.inverse() : w;
    Word const value_inv = value.inverse();
    relators.erase(relators.begin() + static_cast<std::ptrdiff_t>(ri));
    for (Word& other : relators) {
      bool mentions = false;
      for (Letter x : other.letters()) {
        mentions = mentions || generator_of(x) == g;
      }
      if (!mentions) {
        continue;
      }
      std::vector<Letter> out;
      for (Letter x : other.letters()) {
        if (generator_of(x) != g) {
          out.push_back(x);
        } else {
          auto const rep = (x > 0 ? value : value_inv).letters();
          out.insert(out.end(), rep.begin(), rep.end());
        }
      }
      other = Word::reduce_unchecked(out);
    }
    alive[g] = false;
  }
};

}  // namespace

TietzeResult tietze_upper(SubgroupPresentation const& sp, std::size_t pass_budget,
                          std::size_t max_total_length) {
  TietzeState st{sp.generator_count, std::vector<bool>(sp.generator_count, true), sp.relators};
  TietzeResult res;
  st.normalise();
  while (true) {
    if (res.passes >= pass_budget) {
      res.budget_hit = true;
      break;
    }
    if (!st.eliminate_one(max_total_length)) {
      break;
    }
    ++res.passes;
    st.normalise();
  }
  std::vector<Letter> renumber(sp.generator_count, 0);
  std::size_t next = 0;
  for (std::size_t g = 0; g < sp.generator_count; ++g) {
    if (st.alive[g]) {
      renumber[g] = static_cast<Letter>(++next);
    }
  }
  res.simplified.generator_count = next;
  for (Word const& r : st.relators) {
    std::vector<Letter> out;
    for (Letter x : r.letters()) {
      Letter const y = renumber[generator_of(x)];
      out.push_back(x > 0 ? y : -y);
    }
    res.simplified.relators.push_back(Word::reduce_unchecked(out));
  }
  res.upper = next;
  std::size_t const lower = abelianization_rank(sp);
  if (res.upper < lower) {
    throw InvariantViolation("Tietze simplification went below the abelianisation bound");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Rank gradient

RankBounds subgroup_rank_bounds(std::shared_ptr<CosetTable const> table,
                                RankOptions const& options) {
  SchreierGraph g(std::move(table));
  SubgroupPresentation sp = reidemeister_schreier(g);
  RankBounds b;
  b.lower = abelianization_rank(sp);
  b.lower_method = LowerMethod::abelianization;
  bool const free = std::all_of(sp.relators.begin(), sp.relators.end(),
                                [](Word const& r) { return r.empty(); });
  if (free) {
    b.upper = sp.generator_count;
    b.upper_method = UpperMethod::nielsen_schreier_exact;
  } else {
    TietzeResult t = tietze_upper(sp, options.tietze_passes);
    b.upper = t.upper;
    b.upper_method = t.upper < sp.generator_count ? UpperMethod::tietze : UpperMethod::schreier_count;
  }
  if (b.lower > b.upper) {
    throw InvariantViolation("rank lower bound exceeds upper bound");
  }
  return b;
}

RankGradientReport rank_gradient(Chain const& c, RankOptions const& options) {
  auto const& levels = c.levels();
  std::vector<std::optional<RankBounds>> bounds(levels.size());
  std::vector<std::string> errors(levels.size());
  auto job = [&](std::size_t n) {
    try {
      bounds[n] = subgroup_rank_bounds(levels[n].table, options);
    } catch (BudgetExhausted const& e) {
      errors[n] = e.what();
    }
  };
  if (options.parallel) {
    std::vector<std::future<void>> futures;
    for (std::size_t n = 0; n < levels.size(); ++n) {
      futures.push_back(std::async(std::launch::async, job, n));
    }
    for (auto& f : futures) {
      f.get();
    }
  } else {
    for (std::size_t n = 0; n < levels.size(); ++n) {
      job(n);
    }
  }

  RankGradientReport report;
  std::optional<std::size_t> prev_upper;
  std::size_t prev_index = 1;
  bool have_headline = false;
  for (std::size_t n = 0; n < levels.size(); ++n) {
    LevelRankReport lr;
    lr.level = n;
    lr.index = levels[n].index();
    lr.error = errors[n];
    if (bounds[n]) {
      RankBounds b = *bounds[n];
      std::size_t const schreier = (c.origin().generator_count() - 1) * lr.index + 1;
      if (schreier < b.upper) {
        b.upper = schreier;
        b.upper_method = UpperMethod::schreier_count;
      }
      if (prev_upper) {
        std::size_t const k = lr.index / prev_index;
        std::size_t const propagated = (*prev_upper - 1) * k + 1;
        if (propagated < b.upper) {
          b.upper = propagated;
          b.upper_method = UpperMethod::schreier_count;
        }
      }
      if (b.lower > b.upper) {
        throw InvariantViolation("rank bounds crossed at level " + std::to_string(n));
      }
      auto const idx = static_cast<std::int64_t>(lr.index);
      lr.r_lower = Fraction(static_cast<std::int64_t>(b.lower) - 1, idx);
      lr.r_upper = Fraction(static_cast<std::int64_t>(b.upper) - 1, idx);
      lr.bounds = b;
      prev_upper = b.upper;
      prev_index = lr.index;
      report.headline_lower = lr.r_lower;
      report.headline_upper = have_headline ? std::min(report.headline_upper, lr.r_upper)
                                            : lr.r_upper;
      have_headline = true;
    } else {
      prev_upper.reset();
    }
    report.levels.push_back(std::move(lr));
  }
  return report;
}

std::string RankGradientReport::to_json() const {
  nlohmann::ordered_json j;
  j["levels"] = nlohmann::ordered_json::array();
  for (auto const& l : levels) {
    nlohmann::ordered_json e;
    e["level"] = l.level;
    e["index"] = l.index;
    if (l.bounds) {
      e["lower"] = l.bounds->lower;
      e["upper"] = l.bounds->upper;
      e["r_lower"] = l.r_lower.str();
      e["r_upper"] = l.r_upper.str();
      e["methods"] = {{"lower", to_string(l.bounds->lower_method)},
                      {"upper", to_string(l.bounds->upper_method)}};
    } else {
      e["error"] = l.error;
    }
    j["levels"].push_back(e);
  }
  j["headline"] = {{"r_lower_estimate", headline_lower.str()},
                   {"r_upper", headline_upper.str()},
                   {"r_lower_estimate_value", headline_lower.to_double()},
                   {"r_upper_value", headline_upper.to_double()}};
  return j.dump(2);
}

std::string RankGradientReport::to_csv() const {
  std::ostringstream out;
  out << "level,index,lower,upper,r_lower,r_upper,lower_method,upper_method\n";
  for (auto const& l : levels) {
    out << l.level << ',' << l.index << ',';
    if (l.bounds) {
      out << l.bounds->lower << ',' << l.bounds->upper << ',' << l.r_lower.str() << ','
          << l.r_upper.str() << ',' << to_string(l.bounds->lower_method) << ','
          << to_string(l.bounds->upper_method) << '\n';
    } else {
      out << ",,,,,\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

void require_divides(std::int64_t k, std::int64_t n, char const* what) {
  if (k <= 0 || n <= 0 || n % k != 0) {
    throw InvalidArgument(std::string(what) + " = " + std::to_string(k) +
                          " must be positive and divide n = " + std::to_string(n));
  }
}

}  // namespace

FreeProductRank free_product_rank(std::int64_t n, std::int64_t k1, std::int64_t k2,
                                  std::int64_t d1, std::int64_t d2) {
  require_divides(k1, n, "k1");
  require_divides(k2, n, "k2");
  FreeProductRank r;
  r.d_n = (n / k1) * d1 + (n / k2) * d2 + n - n / k1 - n / k2 + 1;
  r.r_form = Fraction(d1 - 1, k1) + Fraction(d2 - 1, k2) + 1;
  if (Fraction(r.d_n - 1, n) != r.r_form) {
    throw InvariantViolation("free product rank identity failed");
  }
  return r;
}

AmalgamRankBound amalgam_rank_bound(std::int64_t n, std::int64_t k1, std::int64_t k2,
                                    std::int64_t a, std::int64_t d1, std::int64_t d2) {
  require_divides(k1, n, "k1");
  require_divides(k2, n, "k2");
  require_divides(a, n, "a");
  AmalgamRankBound r;
  r.bound = (n / k1) * d1 + (n / k2) * d2 + n / a - n / k1 - n / k2 + 1;
  r.r_form = Fraction(d1 - 1, k1) + Fraction(d2 - 1, k2) + Fraction(1, a);
  if (Fraction(r.bound - 1, n) != r.r_form) {
    throw InvariantViolation("amalgam rank identity failed");
  }
  return r;
}

double closed_form_bound(ClosedFormKind kind, ClosedFormParams const& p, double log_base) {
  if (log_base <= 1.0) {
    throw InvalidArgument("logarithm base must exceed 1");
  }
  auto lg = [&](double x) { return std::log(x) / std::log(log_base); };
  switch (kind) {
    case ClosedFormKind::finite_normal:
      if (p.a <= 0) {
        throw InvalidArgument("finite normal subgroup order must be positive");
      }
      return p.d / p.a;
    case ClosedFormKind::soluble:
      if (p.b < 1) {
        throw InvalidArgument("index b must be at least 1");
      }
      return p.d / p.b + (1 + (2 * p.d + 1) * lg(p.b)) / p.b;
    case ClosedFormKind::module_gen:
      if (p.b < 1) {
        throw InvalidArgument("index b must be at least 1");
      }
      return p.t + (2 * p.d + 1) * lg(p.b);
  }
  throw InvalidArgument("unknown closed form");
}

}  // namespace rgkit

namespace rgkit {

namespace {

// N cap G_j as a subgroup of the factor G_j = <gens | relators in gens>.
std::shared_ptr<CosetTable const> factor_table(CosetTable const& level,
                                               std::vector<std::size_t> const& gens) {
  Presentation const& p = level.origin();
  std::vector<Letter> local(p.generator_count(), 0);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    local[gens[i]] = letter_of(i);
    names.push_back(p.generator_name(gens[i]));
  }
  std::vector<Word> rels;
  for (Word const& r : p.relators()) {
    std::vector<Letter> letters;
    for (Letter x : r.letters()) {
      letters.push_back(x > 0 ? local[generator_of(x)] : -local[generator_of(x)]);
    }
    if (local[generator_of(r[0])] != 0) {
      rels.push_back(Word::reduce_unchecked(letters));
    }
  }
  auto fp = std::make_shared<Presentation const>(names, rels);

  std::vector<Coset> orbit{0};
  std::unordered_map<Coset, Coset> where{{0, 0}};
  for (std::size_t q = 0; q < orbit.size(); ++q) {
    for (std::size_t g : gens) {
      Coset const x = level.act(g, orbit[q]);
      if (where.emplace(x, static_cast<Coset>(orbit.size())).second) {
        orbit.push_back(x);
      }
    }
  }
  std::vector<std::vector<Coset>> action(gens.size(), std::vector<Coset>(orbit.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t v = 0; v < orbit.size(); ++v) {
      action[i][v] = where.at(level.act(gens[i], orbit[v]));
    }
  }
  return std::make_shared<CosetTable const>(CosetTable::make(fp, action));
}

}  // namespace

std::string FreeProductCheck::to_json() const {
  nlohmann::ordered_json j;
  j["index"] = index;
  j["k1"] = k1;
  j["k2"] = k2;
  j["d1"] = d1;
  j["d2"] = d2;
  j["formula_d"] = formula.d_n;
  j["formula_r"] = formula.r_form.str();
  j["direct_lower"] = direct.lower;
  j["direct_upper"] = direct.upper;
  j["methods"] = {{"lower", to_string(direct.lower_method)},
                  {"upper", to_string(direct.upper_method)}};
  j["collapsed"] = collapsed();
  j["agrees"] = agrees();
  return j.dump(2);
}

FreeProductCheck free_product_check(std::shared_ptr<CosetTable const> level,
                                    std::vector<std::size_t> const& factor1,
                                    std::vector<std::size_t> const& factor2,
                                    RankOptions const& options) {
  Presentation const& p = level->origin();
  std::vector<int> side(p.generator_count(), 0);
  for (auto [list, tag] : {std::pair{&factor1, 1}, std::pair{&factor2, 2}}) {
    if (list->empty()) {
      throw InvalidArgument("each factor needs a generator");
    }
    for (std::size_t g : *list) {
      if (g >= side.size() || side[g] != 0) {
        throw InvalidArgument("factor generator lists must partition the generators");
      }
      side[g] = tag;
    }
  }
  if (std::count(side.begin(), side.end(), 0) != 0) {
    throw InvalidArgument("factor generator lists must partition the generators");
  }
  for (Word const& r : p.relators()) {
    for (Letter x : r.letters()) {
      if (side[generator_of(x)] != side[generator_of(r[0])]) {
        throw InvalidArgument("relator mixes the two factors");
      }
    }
  }
  if (!level->is_normal()) {
    throw InvalidArgument("the subgroup must be normal");
  }
  FreeProductCheck c;
  c.index = level->coset_count();
  std::size_t* ks[] = {&c.k1, &c.k2};
  std::size_t* ds[] = {&c.d1, &c.d2};
  std::vector<std::size_t> const* lists[] = {&factor1, &factor2};
  for (int j = 0; j < 2; ++j) {
    auto t = factor_table(*level, *lists[j]);
    *ks[j] = t->coset_count();
    RankBounds b = subgroup_rank_bounds(t, options);
    if (b.lower != b.upper) {
      throw InvalidArgument("rank of the intersection with factor " + std::to_string(j + 1) +
                            " is only known to lie in [" + std::to_string(b.lower) + ", " +
                            std::to_string(b.upper) + "]");
    }
    *ds[j] = b.lower;
  }
  auto const i64 = [](std::size_t x) { return static_cast<std::int64_t>(x); };
  c.formula = free_product_rank(i64(c.index), i64(c.k1), i64(c.k2), i64(c.d1), i64(c.d2));
  c.direct = subgroup_rank_bounds(level, options);
  return c;
}

}  // namespace rgkit
