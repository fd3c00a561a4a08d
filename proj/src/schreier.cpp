#include "rgkit/schreier.hpp"

#include <algorithm>
#include <numeric>

#include "rgkit/errors.hpp"

namespace rgkit {

SchreierGraph::SchreierGraph(std::shared_ptr<CosetTable const> table)
    : table_(std::move(table)) {
  std::vector<std::size_t> priority(generator_count());
  std::iota(priority.begin(), priority.end(), 0);
  build(priority);
}

SchreierGraph::SchreierGraph(std::shared_ptr<CosetTable const> table,
                             std::vector<std::size_t> priority)
    : table_(std::move(table)) {
  std::vector<std::size_t> sorted = priority;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != i) {
      throw InvalidArgument("generator priority must be a permutation of the generators");
    }
  }
  if (sorted.size() != generator_count()) {
    throw InvalidArgument("generator priority must list every generator");
  }
  build(priority);
}

void SchreierGraph::build(std::vector<std::size_t> const& priority) {
  if (!table_) {
    throw InvalidArgument("Schreier graph needs a coset table");
  }
  if (generator_count() > 255) {
    throw InvalidArgument("Schreier graphs support at most 255 generators");
  }
  std::size_t const n = vertex_count();
  parent_.assign(n, 0);
  parent_gen_.assign(n, 0);
  depth_.assign(n, 0);
  symbol_.assign(edge_count(), 0);
  std::vector<bool> seen(n, false);
  std::vector<Coset> queue{0};
  queue.reserve(n);
  seen[0] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Coset const v = queue[head];
    for (std::size_t s : priority) {
      Coset const w = table_->act(s, v);
      if (!seen[w]) {
        seen[w] = true;
        parent_[w] = v;
        parent_gen_[w] = static_cast<std::uint8_t>(s);
        depth_[w] = depth_[v] + 1;
        symbol_[edge(v, s)] = kTree;
        queue.push_back(w);
      }
    }
  }
  edge_of_symbol_.clear();
  edge_of_symbol_.reserve(edge_count() - n + 1);
  for (EdgeId e = 0; e < edge_count(); ++e) {
    if (symbol_[e] != kTree) {
      symbol_[e] = static_cast<std::uint32_t>(edge_of_symbol_.size());
      edge_of_symbol_.push_back(e);
    }
  }
  if (edge_of_symbol_.size() != (generator_count() - 1) * n + 1) {
    throw InvariantViolation("spanning tree does not have index - 1 edges");
  }
}

Word SchreierGraph::transversal(Coset v) const {
  std::vector<Letter> letters;
  letters.reserve(depth_[v]);
  while (v != 0) {
    letters.push_back(letter_of(parent_gen_[v]));
    v = parent_[v];
  }
  return Word::reduce_unchecked(letters);
}

Word SchreierGraph::label(EdgeId e) const {
  if (is_tree_edge(e)) {
    return {};
  }
  return transversal(target(e)).inverse() * Word::generator(edge_generator(e)) *
         transversal(source(e));
}

std::vector<PathStep> relator_path(SchreierGraph const& g, Word const& r, Coset t) {
  CosetTable const& table = g.table();
  std::vector<PathStep> path;
  path.reserve(r.length());
  auto const letters = r.letters();
  Coset c = t;
  for (std::size_t k = letters.size(); k-- > 0;) {
    Letter const x = letters[k];
    std::size_t const s = generator_of(x);
    if (x > 0) {
      path.push_back({g.edge(c, s), true});
      c = table.act(s, c);
    } else {
      c = table.act_inverse(s, c);
      path.push_back({g.edge(c, s), false});
    }
  }
  return path;
}

Word rewrite_relator(SchreierGraph const& g, Word const& r, Coset t) {
  std::vector<Letter> letters;
  letters.reserve(r.length());
  for (PathStep const& step : relator_path(g, r, t)) {
    std::uint32_t const sym = g.symbol(step.edge);
    if (sym != SchreierGraph::kTree) {
      letters.push_back(letter_of(sym, !step.forward));
    }
  }
  std::reverse(letters.begin(), letters.end());
  return Word::reduce_unchecked(letters);
}

Presentation SubgroupPresentation::presentation() const {
  std::vector<std::string> names;
  names.reserve(generator_count);
  for (std::size_t i = 0; i < generator_count; ++i) {
    names.push_back("e" + std::to_string(i + 1));
  }
  return Presentation(std::move(names), relators);
}

SubgroupPresentation reidemeister_schreier(SchreierGraph const& g) {
  SubgroupPresentation out;
  out.generator_count = g.non_tree_count();
  auto const& rels = g.table().origin().relators();
  out.relators.reserve(rels.size() * g.vertex_count());
  out.provenance.reserve(rels.size() * g.vertex_count());
  for (std::size_t i = 0; i < rels.size(); ++i) {
    for (Coset t = 0; t < g.vertex_count(); ++t) {
      out.relators.push_back(rewrite_relator(g, rels[i], t));
      out.provenance.push_back({i, t});
    }
  }
  return out;
}

std::vector<EdgeId> vertex_boundary(SchreierGraph const& g, std::vector<bool> const& in_a) {
  if (in_a.size() != g.vertex_count()) {
    throw InvalidArgument("vertex subset has the wrong size");
  }
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (in_a[g.source(e)] != in_a[g.target(e)]) {
      out.push_back(e);
    }
  }
  return out;
}

std::vector<EdgeId> vertex_boundary(SchreierGraph const& g, std::span<Coset const> a) {
  std::vector<bool> in_a(g.vertex_count(), false);
  for (Coset v : a) {
    if (v >= g.vertex_count()) {
      throw InvalidArgument("vertex " + std::to_string(v) + " out of range");
    }
    in_a[v] = true;
  }
  return vertex_boundary(g, in_a);
}

std::string export_graph(SchreierGraph const& g) {
  auto const& names = g.table().origin().generator_names();
  std::string out;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    out += std::to_string(g.source(e));
    out += ' ';
    out += names[g.edge_generator(e)];
    out += ' ';
    out += std::to_string(g.target(e));
    out += g.is_tree_edge(e) ? " tree " : " - ";
    out += format_word(g.label(e), names);
    out += '\n';
  }
  return out;
}

}  // namespace rgkit
