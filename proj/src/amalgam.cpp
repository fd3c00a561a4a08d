#include "rgkit/amalgam.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "json.hpp"
#include "rgkit/errors.hpp"
#include "rgkit/linalg.hpp"

namespace rgkit {

namespace {

std::vector<std::uint32_t> members(std::vector<bool> const& flags) {
  std::vector<std::uint32_t> out;
  for (std::size_t k = 0; k < flags.size(); ++k) {
    if (flags[k]) {
      out.push_back(static_cast<std::uint32_t>(k));
    }
  }
  return out;
}

// <S | R> over a subset S of the symbols, renumbered in increasing order.
SubgroupPresentation restrict_to(SubgroupPresentation const& sp,
                                 std::vector<std::uint32_t> const& gens,
                                 std::vector<std::size_t> const& rels) {
  std::vector<Letter> renumber(sp.generator_count, 0);
  for (std::size_t k = 0; k < gens.size(); ++k) {
    renumber[gens[k]] = static_cast<Letter>(k + 1);
  }
  SubgroupPresentation out;
  out.generator_count = gens.size();
  for (std::size_t i : rels) {
    std::vector<Letter> letters;
    for (Letter x : sp.relators[i].letters()) {
      Letter const y = renumber[generator_of(x)];
      if (y == 0) {
        throw InvariantViolation("relator uses a generator outside its side of the split");
      }
      letters.push_back(x > 0 ? y : -y);
    }
    out.relators.push_back(Word::reduce_unchecked(letters));
    if (i < sp.provenance.size()) {
      out.provenance.push_back(sp.provenance[i]);
    }
  }
  return out;
}

bool all_empty(SubgroupPresentation const& sp) {
  return std::all_of(sp.relators.begin(), sp.relators.end(),
                     [](Word const& w) { return w.empty(); });
}

std::pair<std::size_t, std::vector<BigInt>> invariants(SubgroupPresentation const& sp) {
  SmithForm f = smith_normal_form(relation_matrix(sp.relators, sp.generator_count));
  return {f.free_rank(), f.torsion()};
}

}  // namespace

SplitDatum split(SubgroupPresentation const& sp, SchreierGraph const& g,
                 std::vector<bool> const& in_a) {
  std::size_t const n = g.vertex_count();
  if (in_a.size() != n) {
    throw InvalidArgument("vertex set has the wrong size");
  }
  std::size_t const size = static_cast<std::size_t>(std::count(in_a.begin(), in_a.end(), true));
  if (size == 0 || size == n) {
    throw InvalidArgument("A must be a nonempty proper subset of the vertices");
  }
  if (sp.generator_count != g.non_tree_count() || sp.provenance.size() != sp.relators.size()) {
    throw InvalidArgument("subgroup presentation does not come from this Schreier graph");
  }

  SplitDatum d;
  d.in_a = in_a;
  d.boundary = vertex_boundary(g, in_a);

  std::size_t const gens = sp.generator_count;
  std::vector<bool> s1(gens, false), s2(gens, false), x3(gens, false), on_path(gens, false);
  auto const& origin = g.table().origin().relators();
  for (std::size_t i = 0; i < sp.relators.size(); ++i) {
    auto const& prov = sp.provenance[i];
    std::vector<PathStep> path = relator_path(g, origin[prov.relator], prov.vertex);
    bool touches_a = false, touches_c = false, crosses = false;
    for (PathStep const& st : path) {
      bool const u = in_a[g.source(st.edge)];
      bool const v = in_a[g.target(st.edge)];
      touches_a = touches_a || u || v;
      touches_c = touches_c || !u || !v;
      crosses = crosses || u != v;
    }
    if (touches_a) {
      d.r1.push_back(i);
    }
    if (touches_c) {
      d.r2.push_back(i);
    }
    if (touches_a && touches_c) {
      d.r3.push_back(i);
    }
    for (PathStep const& st : path) {
      std::uint32_t const k = g.symbol(st.edge);
      if (k == SchreierGraph::kTree) {
        continue;
      }
      on_path[k] = true;
      if (touches_a) {
        s1[k] = true;
      }
      if (touches_c) {
        s2[k] = true;
      }
      if (crosses) {
        x3[k] = true;
      }
    }
  }

  std::vector<bool> x1(gens, false), x2(gens, false), orphan(gens, false);
  for (std::size_t k = 0; k < gens; ++k) {
    EdgeId const e = g.edge_of_symbol(k);
    bool const u = in_a[g.source(e)];
    bool const v = in_a[g.target(e)];
    if (u != v) {
      x3[k] = true;
    }
    if (!on_path[k]) {
      orphan[k] = true;
      s1[k] = s1[k] || u || v;
      s2[k] = s2[k] || !u || !v;
    }
  }
  for (std::size_t k = 0; k < gens; ++k) {
    if (!x3[k]) {
      EdgeId const e = g.edge_of_symbol(k);
      (in_a[g.source(e)] ? x1 : x2)[k] = true;
    }
  }
  for (std::size_t k = 0; k < gens; ++k) {
    if (s1[k] != (x1[k] || x3[k]) || s2[k] != (x2[k] || x3[k])) {
      throw InvariantViolation("generator " + std::to_string(k + 1) +
                               " classified inconsistently by the split");
    }
  }

  d.x1 = members(x1);
  d.x2 = members(x2);
  d.x3 = members(x3);
  d.s1 = members(s1);
  d.s2 = members(s2);
  d.s3 = d.x3;
  d.orphans = members(orphan);
  d.t1 = restrict_to(sp, d.s1, d.r1);
  d.t2 = restrict_to(sp, d.s2, d.r2);
  d.t3 = restrict_to(sp, d.s3, d.r3);

  if (invariants(pushout_presentation(d)) != invariants(sp)) {
    throw InvariantViolation("pushout abelianisation differs from the subgroup's");
  }
  return d;
}

SubgroupPresentation pushout_presentation(SplitDatum const& d) {
  SubgroupPresentation out;
  std::size_t const n1 = d.s1.size();
  out.generator_count = n1 + d.s2.size();
  out.relators = d.t1.relators;
  for (Word const& r : d.t2.relators) {
    std::vector<Letter> shifted;
    for (Letter x : r.letters()) {
      shifted.push_back(x > 0 ? x + static_cast<Letter>(n1) : x - static_cast<Letter>(n1));
    }
    out.relators.push_back(Word::reduce_unchecked(shifted));
  }
  for (std::uint32_t k : d.s3) {
    auto const i = std::lower_bound(d.s1.begin(), d.s1.end(), k) - d.s1.begin();
    auto const j = std::lower_bound(d.s2.begin(), d.s2.end(), k) - d.s2.begin();
    Letter const a = static_cast<Letter>(i + 1);
    Letter const b = static_cast<Letter>(n1 + static_cast<std::size_t>(j) + 1);
    out.relators.push_back(Word::reduce_unchecked(std::vector<Letter>{a, -b}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Witnesses and search

TrichotomyWitness make_witness(SchreierGraph const& g, std::vector<bool> const& in_a,
                               std::size_t level) {
  TrichotomyWitness w;
  w.level = level;
  w.index = g.vertex_count();
  for (Coset v = 0; v < w.index; ++v) {
    if (in_a[v]) {
      w.a.push_back(v);
    }
  }
  w.density = Fraction(static_cast<std::int64_t>(w.a.size()), static_cast<std::int64_t>(w.index));
  w.boundary = vertex_boundary(g, in_a).size();
  w.relator_length_sum = g.table().origin().total_relator_length();
  std::size_t const a = w.a.size();
  w.size_ok = w.index < 4 * a && 2 * a < w.index;
  unsigned __int128 const l = w.relator_length_sum;
  w.boundary_ok = 2 * (1 + l * l) * w.boundary < a;
  return w;
}

std::string TrichotomyWitness::to_json() const {
  std::size_t const l = relator_length_sum;
  nlohmann::ordered_json j;
  j["level"] = level;
  j["index"] = index;
  j["size"] = a.size();
  j["density"] = density.str();
  j["boundary"] = boundary;
  j["L"] = l;
  j["thresholds"] = {{"size_lower", static_cast<double>(index) / 4},
                     {"size_upper", static_cast<double>(index) / 2},
                     {"boundary", static_cast<double>(a.size()) /
                                      (2.0 * (1.0 + static_cast<double>(l) * static_cast<double>(l)))}};
  j["size_ok"] = size_ok;
  j["boundary_ok"] = boundary_ok;
  j["hypotheses_met"] = hypotheses_met();
  j["A"] = a;
  return j.dump();
}

namespace {

class Improver {
 public:
  Improver(SchreierGraph const& g, std::vector<bool> in_a) : g_(g), in_a_(std::move(in_a)) {
    boundary_ = vertex_boundary(g_, in_a_).size();
    size_ = static_cast<std::size_t>(std::count(in_a_.begin(), in_a_.end(), true));
  }

  std::vector<bool> const& set() const noexcept { return in_a_; }
  std::size_t boundary() const noexcept { return boundary_; }
  std::size_t size() const noexcept { return size_; }

  // Change in |dA| if v switches sides.
  long toggle_delta(Coset v) const {
    long delta = 0;
    for (std::size_t s = 0; s < g_.generator_count(); ++s) {
      for (Coset w : {g_.table().act(s, v), g_.table().act_inverse(s, v)}) {
        if (w != v) {
          delta += in_a_[w] != in_a_[v] ? -1 : 1;
        }
      }
    }
    return delta;
  }

  // Edges joining u and v, in either direction.
  long joining(Coset u, Coset v) const {
    long count = 0;
    for (std::size_t s = 0; s < g_.generator_count(); ++s) {
      count += g_.table().act(s, u) == v;
      count += g_.table().act(s, v) == u;
    }
    return count;
  }

  void toggle(Coset v) {
    boundary_ = static_cast<std::size_t>(static_cast<long>(boundary_) + toggle_delta(v));
    size_ = in_a_[v] ? size_ - 1 : size_ + 1;
    in_a_[v] = !in_a_[v];
  }

  // One strictly improving move inside the size window [lo, hi]; false if
  // there is none.
  bool step(std::size_t lo, std::size_t hi) {
    std::size_t const n = in_a_.size();
    std::vector<long> delta(n);
    for (Coset v = 0; v < n; ++v) {
      delta[v] = toggle_delta(v);
    }
    for (Coset v = 0; v < n; ++v) {
      std::size_t const next = in_a_[v] ? size_ - 1 : size_ + 1;
      if (delta[v] < 0 && next >= lo && next <= hi) {
        toggle(v);
        return true;
      }
    }
    std::vector<Coset> inside, outside;
    for (Coset v = 0; v < n; ++v) {
      if (on_boundary(v)) {
        (in_a_[v] ? inside : outside).push_back(v);
      }
    }
    for (Coset u : inside) {
      for (Coset v : outside) {
        if (delta[u] + delta[v] + 2 * joining(u, v) < 0) {
          toggle(u);
          toggle(v);
          return true;
        }
      }
    }
    return false;
  }

 private:
  bool on_boundary(Coset v) const {
    for (std::size_t s = 0; s < g_.generator_count(); ++s) {
      if (in_a_[g_.table().act(s, v)] != in_a_[v] ||
          in_a_[g_.table().act_inverse(s, v)] != in_a_[v]) {
        return true;
      }
    }
    return false;
  }

  SchreierGraph const& g_;
  std::vector<bool> in_a_;
  std::size_t boundary_ = 0;
  std::size_t size_ = 0;
};

std::vector<bool> ball(SchreierGraph const& g, Coset seed, std::size_t count) {
  std::vector<bool> in(g.vertex_count(), false), seen(g.vertex_count(), false);
  std::deque<Coset> queue{seed};
  seen[seed] = true;
  std::size_t taken = 0;
  while (!queue.empty() && taken < count) {
    Coset const v = queue.front();
    queue.pop_front();
    in[v] = true;
    ++taken;
    for (std::size_t s = 0; s < g.generator_count(); ++s) {
      for (Coset w : {g.table().act(s, v), g.table().act_inverse(s, v)}) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
  }
  return in;
}

}  // namespace

SearchResult search_almost_invariant(SchreierGraph const& g, double alpha, double eps,
                                     SearchOptions const& options, std::size_t level) {
  if (!(alpha > 0 && alpha < 1) || !(eps > 0)) {
    throw InvalidArgument("need 0 < alpha < 1 and eps > 0");
  }
  std::size_t const n = g.vertex_count();
  if (n < 2) {
    throw InvalidArgument("graph needs at least two vertices");
  }
  auto in_window = [&](std::size_t k) {
    return std::abs(static_cast<double>(k) / static_cast<double>(n) - alpha) < eps;
  };
  std::size_t lo = n, hi = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (in_window(k)) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  auto const target = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n))), 1, n - 1);
  bool const window_nonempty = lo <= hi;
  if (!window_nonempty) {
    lo = hi = target;
  }

  SearchResult best;
  auto better = [](TrichotomyWitness const& x, TrichotomyWitness const& y) {
    if (x.hypotheses_met() != y.hypotheses_met()) {
      return x.hypotheses_met();
    }
    if (x.boundary != y.boundary) {
      return x.boundary < y.boundary;
    }
    return x.a < y.a;
  };
  bool have = false;
  std::size_t const seeds = options.max_seeds == 0 ? n : std::min(n, options.max_seeds);
  std::vector<Coset> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (options.seed != 0) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  for (std::size_t k = 0; k < seeds; ++k) {
    Improver imp(g, ball(g, order[k], target));
    for (std::size_t move = 0; move < options.effort && imp.step(lo, hi); ++move) {
    }
    TrichotomyWitness w = make_witness(g, imp.set(), level);
    if (!have || better(w, best.witness)) {
      best.in_a = imp.set();
      best.witness = std::move(w);
      have = true;
    }
  }
  best.found = window_nonempty;
  return best;
}

// ---------------------------------------------------------------------------
// Index probe

namespace {

Presentation named(SubgroupPresentation const& t, std::vector<std::uint32_t> const& symbols) {
  std::vector<std::string> names;
  for (std::uint32_t k : symbols) {
    names.push_back("e" + std::to_string(k + 1));
  }
  return Presentation(std::move(names), t.relators);
}

std::optional<std::size_t> enumerate_s3(SubgroupPresentation const& t,
                                        std::vector<std::uint32_t> const& symbols,
                                        std::vector<std::uint32_t> const& s3,
                                        std::size_t max_cosets) {
  auto p = std::make_shared<Presentation const>(named(t, symbols));
  std::vector<Word> gens;
  for (std::uint32_t k : s3) {
    auto const i = std::lower_bound(symbols.begin(), symbols.end(), k) - symbols.begin();
    gens.push_back(Word::generator(static_cast<std::size_t>(i)));
  }
  try {
    return todd_coxeter(p, gens, max_cosets).coset_count();
  } catch (BudgetExhausted const&) {
    return std::nullopt;
  }
}

}  // namespace

IndexProbe index_condition_probe(SplitDatum const& d, SchreierGraph const& g,
                                 std::size_t max_cosets) {
  IndexProbe p;
  Presentation const& origin = g.table().origin();
  std::size_t const complement =
      static_cast<std::size_t>(std::count(d.in_a.begin(), d.in_a.end(), false));
  p.x2 = d.x2.size();
  p.x2_bound = (origin.generator_count() - 1) * complement + 1;
  p.x3 = d.x3.size();
  std::size_t squares = 0;
  for (Word const& r : origin.relators()) {
    squares += r.length() * r.length();
  }
  std::size_t const l = origin.total_relator_length();
  p.x3_bound = d.boundary.size() * (1 + squares);
  p.x3_bound_l = d.boundary.size() * (1 + l * l);
  p.trivial_amalgam = d.trivial_amalgam();
  if (all_empty(d.t1) && all_empty(d.t2)) {
    p.free_case_infinite_1 = d.s1.size() > d.s3.size();
    p.free_case_infinite_2 = d.s2.size() > d.s3.size();
    return p;
  }
  p.enumerated_index_1 = enumerate_s3(d.t1, d.s1, d.s3, max_cosets);
  p.enumerated_index_2 = enumerate_s3(d.t2, d.s2, d.s3, max_cosets);
  return p;
}

std::string IndexProbe::to_json() const {
  nlohmann::ordered_json j;
  j["x2"] = x2;
  j["x2_bound"] = x2_bound;
  j["x3"] = x3;
  j["x3_bound"] = x3_bound;
  j["x3_bound_L"] = x3_bound_l;
  j["trivial_amalgam"] = trivial_amalgam;
  auto opt = [](auto const& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["free_case_infinite"] = {opt(free_case_infinite_1), opt(free_case_infinite_2)};
  j["enumerated_index"] = {opt(enumerated_index_1), opt(enumerated_index_2)};
  return j.dump();
}

std::string export_split(SplitDatum const& d) {
  std::string out = "# T1\n" + format_presentation(named(d.t1, d.s1)) + "# T2\n" +
                    format_presentation(named(d.t2, d.s2)) + "# amalgamated\n";
  for (std::uint32_t k : d.s3) {
    out += "e" + std::to_string(k + 1) + "\n";
  }
  return out;
}

}  // namespace rgkit
