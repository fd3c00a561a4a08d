#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rgkit/word.hpp"

namespace rgkit {

// A finite presentation <S | R>. Relators are kept freely and cyclically
// reduced with empty relators dropped; duplicates are kept because later
// constructions count occurrences across relators.
class Presentation {
 public:
  Presentation() = default;
  Presentation(std::vector<std::string> generator_names, std::vector<Word> relators);

  // Free group of the given rank with generators named a, b, c, ...
  static Presentation free_group(std::size_t rank);

  std::size_t generator_count() const noexcept { return names_.size(); }
  std::vector<std::string> const& generator_names() const noexcept { return names_; }
  std::string const& generator_name(std::size_t i) const { return names_.at(i); }
  std::vector<Word> const& relators() const noexcept { return relators_; }
  // L, the sum of relator lengths.
  std::size_t total_relator_length() const noexcept { return total_length_; }
  std::size_t max_relator_length() const noexcept;

  friend bool operator==(Presentation const&, Presentation const&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Word> relators_;
  std::size_t total_length_ = 0;
};

// Default generator names: a..z for small alphabets, x1, x2, ... beyond.
std::vector<std::string> default_generator_names(std::size_t count);

// Parses `gens <name>+ ; rels <word>* ;`. Words are whitespace-free products
// of `name`, `name^k`, `(word)^k` and commutators `[u,v]`, optionally joined
// by `*`; `1` is the empty word. `#` starts a comment running to end of line.
Presentation parse_presentation(std::string_view text);

// Parses a single whitespace-free word over the given generator names.
Word parse_word(std::string_view text, std::vector<std::string> const& names);

std::string format_word(Word const& w, std::vector<std::string> const& names);
std::string format_presentation(Presentation const& p);

}  // namespace rgkit
