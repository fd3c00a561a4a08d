#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace rgkit {

// A letter is a signed generator index: +k is generator k-1, -k its inverse.
using Letter = std::int32_t;

inline constexpr std::size_t generator_of(Letter x) noexcept {
  return static_cast<std::size_t>(x > 0 ? x : -x) - 1;
}

inline constexpr Letter letter_of(std::size_t gen, bool inverse = false) noexcept {
  auto const x = static_cast<Letter>(gen + 1);
  return inverse ? -x : x;
}

// A freely reduced word over an implicit inverse-closed alphabet. Letters are
// stored in written order: the word s_l ... s_1 has letters()[0] == s_l.
class Word {
 public:
  Word() = default;

  // Builds the free reduction of `raw`. Throws InvalidArgument if a letter is 0
  // or refers to a generator >= alphabet_size.
  static Word reduce(std::span<Letter const> raw, std::size_t alphabet_size);
  static Word reduce(std::initializer_list<Letter> raw, std::size_t alphabet_size) {
    return reduce(std::span<Letter const>(raw.begin(), raw.size()), alphabet_size);
  }

  // Free reduction without an alphabet check; letters must be nonzero.
  static Word reduce_unchecked(std::span<Letter const> raw);
  static Word generator(std::size_t gen) { return Word(std::vector<Letter>{letter_of(gen)}); }

  std::span<Letter const> letters() const noexcept { return letters_; }
  std::size_t length() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  Letter operator[](std::size_t i) const noexcept { return letters_[i]; }

  Word inverse() const;
  // Cyclically reduced form: the shortest cyclic conjugate obtained by
  // cancelling the first letter against the last.
  Word cyclically_reduced() const;
  Word power(std::int64_t k) const;
  // Largest generator index mentioned plus one (0 for the empty word).
  std::size_t alphabet_bound() const noexcept;

  friend Word operator*(Word const& u, Word const& v);
  friend bool operator==(Word const&, Word const&) = default;
  friend auto operator<=>(Word const&, Word const&) = default;

 private:
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  std::vector<Letter> letters_;
};

// Commutator [u, v] = u v u^-1 v^-1.
Word commutator(Word const& u, Word const& v);

// Canonical representative of the cyclic class of w and w^-1, used to detect
// relators that are equal up to rotation and inversion.
Word cyclic_canonical(Word const& w);

struct WordHash {
  std::size_t operator()(Word const& w) const noexcept;
};

}  // namespace rgkit
