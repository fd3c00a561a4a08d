#include "rgkit/word.hpp"

#include <algorithm>
#include <string>

#include "rgkit/errors.hpp"

namespace rgkit {

namespace {

void push_reduced(std::vector<Letter>& out, Letter x) {
  if (!out.empty() && out.back() == -x) {
    out.pop_back();
  } else {
    out.push_back(x);
  }
}

}  // namespace

Word Word::reduce(std::span<Letter const> raw, std::size_t alphabet_size) {
  for (Letter x : raw) {
    if (x == 0 || generator_of(x) >= alphabet_size) {
      throw InvalidArgument("letter " + std::to_string(x) +
                            " out of range for alphabet of size " +
                            std::to_string(alphabet_size));
    }
  }
  return reduce_unchecked(raw);
}

Word Word::reduce_unchecked(std::span<Letter const> raw) {
  std::vector<Letter> out;
  out.reserve(raw.size());
  for (Letter x : raw) {
    push_reduced(out, x);
  }
  return Word(std::move(out));
}

Word Word::inverse() const {
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (Letter& x : out) {
    x = -x;
  }
  return Word(std::move(out));
}

Word Word::cyclically_reduced() const {
  std::size_t lo = 0;
  std::size_t hi = letters_.size();
  while (hi - lo >= 2 && letters_[lo] == -letters_[hi - 1]) {
    ++lo;
    --hi;
  }
  return Word(std::vector<Letter>(letters_.begin() + static_cast<std::ptrdiff_t>(lo),
                                  letters_.begin() + static_cast<std::ptrdiff_t>(hi)));
}

Word Word::power(std::int64_t k) const {
  Word base = k < 0 ? inverse() : *this;
  std::uint64_t n = k < 0 ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
  std::vector<Letter> out;
  out.reserve(base.length() * n);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (Letter x : base.letters_) {
      push_reduced(out, x);
    }
  }
  return Word(std::move(out));
}

std::size_t Word::alphabet_bound() const noexcept {
  std::size_t bound = 0;
  for (Letter x : letters_) {
    bound = std::max(bound, generator_of(x) + 1);
  }
  return bound;
}

Word operator*(Word const& u, Word const& v) {
  std::vector<Letter> out = u.letters_;
  out.reserve(u.length() + v.length());
  for (Letter x : v.letters_) {
    push_reduced(out, x);
  }
  return Word(std::move(out));
}

Word commutator(Word const& u, Word const& v) {
  return u * v * u.inverse() * v.inverse();
}

Word cyclic_canonical(Word const& w) {
  Word const c = w.cyclically_reduced();
  if (c.empty()) {
    return c;
  }
  std::vector<Letter> best;
  for (Word const& base : {c, c.inverse()}) {
    auto const letters = base.letters();
    std::size_t const n = letters.size();
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<Letter> rot;
      rot.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        rot.push_back(letters[(r + i) % n]);
      }
      if (best.empty() || rot < best) {
        best = std::move(rot);
      }
    }
  }
  return Word::reduce_unchecked(best);
}

std::size_t WordHash::operator()(Word const& w) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (Letter x : w.letters()) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(x));
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rgkit
