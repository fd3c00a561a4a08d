#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rgkit/cosets.hpp"
#include "rgkit/presentation.hpp"
#include "rgkit/word.hpp"

namespace rgkit {

// Oriented edge (v, s.v), identified by v * |S| + s.
using EdgeId = std::size_t;

// The Schreier graph of a coset table with a breadth-first spanning tree.
// Transversal words are read along tree paths from coset 0 and use positive
// letters only, so the transversal of Z/5 is {1, a, ..., a^4}. Non-tree edges
// are the generators of the subgroup, numbered by increasing edge id.
class SchreierGraph {
 public:
  static constexpr std::uint32_t kTree = std::numeric_limits<std::uint32_t>::max();

  explicit SchreierGraph(std::shared_ptr<CosetTable const> table);
  // Same graph, but the breadth-first search tries generators in `priority`
  // order. Used to check independence of the spanning tree.
  SchreierGraph(std::shared_ptr<CosetTable const> table, std::vector<std::size_t> priority);

  CosetTable const& table() const noexcept { return *table_; }
  std::shared_ptr<CosetTable const> const& table_ptr() const noexcept { return table_; }
  std::size_t vertex_count() const noexcept { return table_->coset_count(); }
  std::size_t generator_count() const noexcept { return table_->generator_count(); }
  std::size_t edge_count() const noexcept { return vertex_count() * generator_count(); }
  std::size_t non_tree_count() const noexcept { return edge_of_symbol_.size(); }

  EdgeId edge(Coset v, std::size_t gen) const noexcept { return v * generator_count() + gen; }
  Coset source(EdgeId e) const noexcept { return static_cast<Coset>(e / generator_count()); }
  std::size_t edge_generator(EdgeId e) const noexcept { return e % generator_count(); }
  Coset target(EdgeId e) const noexcept { return table_->act(edge_generator(e), source(e)); }

  bool is_tree_edge(EdgeId e) const noexcept { return symbol_[e] == kTree; }
  // Subgroup generator number of a non-tree edge, kTree for tree edges.
  std::uint32_t symbol(EdgeId e) const noexcept { return symbol_[e]; }
  EdgeId edge_of_symbol(std::size_t k) const noexcept { return edge_of_symbol_[k]; }

  // Tree parent of v != 0 and the generator s with s.parent = v.
  Coset parent(Coset v) const noexcept { return parent_[v]; }
  std::size_t parent_generator(Coset v) const noexcept { return parent_gen_[v]; }
  std::size_t depth(Coset v) const noexcept { return depth_[v]; }

  // t_v with t_v.0 = v. Computed from the tree on demand.
  Word transversal(Coset v) const;
  // T(e) = t_{sv}^-1 s t_v, an element of H written over the generators of G.
  Word label(EdgeId e) const;

 private:
  void build(std::vector<std::size_t> const& priority);

  std::shared_ptr<CosetTable const> table_;
  std::vector<Coset> parent_;
  std::vector<std::uint8_t> parent_gen_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> symbol_;
  std::vector<EdgeId> edge_of_symbol_;
};

// One step of a relator path: an edge and whether it was walked forwards.
struct PathStep {
  EdgeId edge;
  bool forward;
};

// The edges visited by r acting on coset t, in application order (rightmost
// letter first). Tree edges included.
std::vector<PathStep> relator_path(SchreierGraph const& g, Word const& r, Coset t);

// r_t = T(e_l) ... T(e_1) over the non-tree symbols (letter k+1 is symbol k),
// freely reduced.
Word rewrite_relator(SchreierGraph const& g, Word const& r, Coset t);

struct RelatorOrigin {
  std::size_t relator;  // index into origin().relators()
  Coset vertex;
};

// The Reidemeister-Schreier presentation of H: one generator per non-tree
// edge, one relator r_t per (r, t). Relators that rewrite to the empty word
// are kept so that the relator count is |R| * index.
struct SubgroupPresentation {
  std::size_t generator_count = 0;
  std::vector<Word> relators;
  std::vector<RelatorOrigin> provenance;

  // As a Presentation (empty relators dropped, generators named e1, e2, ...).
  Presentation presentation() const;
};

SubgroupPresentation reidemeister_schreier(SchreierGraph const& g);

// Oriented edges with exactly one endpoint in A, by increasing edge id.
std::vector<EdgeId> vertex_boundary(SchreierGraph const& g, std::vector<bool> const& in_a);
std::vector<EdgeId> vertex_boundary(SchreierGraph const& g, std::span<Coset const> a);

// `vertex generator target tree|- labelword`, one line per edge.
std::string export_graph(SchreierGraph const& g);

}  // namespace rgkit
