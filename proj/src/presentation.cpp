#include "rgkit/presentation.hpp"

#include <algorithm>
#include <set>

#include "detail/text.hpp"
#include "rgkit/errors.hpp"

namespace rgkit {

Presentation::Presentation(std::vector<std::string> generator_names,
                           std::vector<Word> relators)
    : names_(std::move(generator_names)) {
  if (names_.empty()) {
    throw InvalidArgument("a presentation needs at least one generator");
  }
  for (Word const& r : relators) {
    if (r.alphabet_bound() > names_.size()) {
      throw InvalidArgument("relator mentions an undeclared generator");
    }
    Word c = r.cyclically_reduced();
    if (!c.empty()) {
      total_length_ += c.length();
      relators_.push_back(std::move(c));
    }
  }
}

Presentation Presentation::free_group(std::size_t rank) {
  return Presentation(default_generator_names(rank), {});
}

std::size_t Presentation::max_relator_length() const noexcept {
  std::size_t best = 0;
  for (Word const& r : relators_) {
    best = std::max(best, r.length());
  }
  return best;
}

std::vector<std::string> default_generator_names(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (count <= 26) {
      names.emplace_back(1, static_cast<char>('a' + i));
    } else {
      names.push_back("x" + std::to_string(i + 1));
    }
  }
  return names;
}

Presentation parse_presentation(std::string_view text) {
  auto const tokens = detail::tokenize(text);
  std::size_t i = 0;
  auto expect_keyword = [&](std::string_view kw) {
    if (i >= tokens.size()) {
      std::size_t line = tokens.empty() ? 1 : tokens.back().line;
      throw ParseError("expected '" + std::string(kw) + "' before end of input", line, 1);
    }
    if (tokens[i].text != kw) {
      detail::fail_at(tokens[i], "expected '" + std::string(kw) + "', found '" +
                                     tokens[i].text + "'");
    }
    ++i;
  };
  auto eof_error = [&](std::string const& what) -> ParseError {
    std::size_t line = tokens.empty() ? 1 : tokens.back().line;
    return ParseError(what, line, 1);
  };

  expect_keyword("gens");
  std::vector<std::string> names;
  std::set<std::string> seen;
  while (i < tokens.size() && tokens[i].text != ";") {
    auto const& t = tokens[i];
    if (!detail::is_identifier_start(t.text[0]) ||
        !std::all_of(t.text.begin(), t.text.end(), detail::is_identifier_char)) {
      detail::fail_at(t, "invalid generator name '" + t.text + "'");
    }
    if (t.text == "gens" || t.text == "rels") {
      detail::fail_at(t, "reserved word used as generator name");
    }
    if (!seen.insert(t.text).second) {
      detail::fail_at(t, "duplicate generator '" + t.text + "'");
    }
    names.push_back(t.text);
    ++i;
  }
  if (i >= tokens.size()) {
    throw eof_error("expected ';' after generators");
  }
  if (names.empty()) {
    detail::fail_at(tokens[i], "at least one generator required");
  }
  ++i;
  expect_keyword("rels");
  std::vector<Word> relators;
  while (i < tokens.size() && tokens[i].text != ";") {
    relators.push_back(detail::parse_word_token(tokens[i], names));
    ++i;
  }
  if (i >= tokens.size()) {
    throw eof_error("expected ';' after relators");
  }
  ++i;
  if (i != tokens.size()) {
    detail::fail_at(tokens[i], "trailing input '" + tokens[i].text + "'");
  }
  return Presentation(std::move(names), std::move(relators));
}

Word parse_word(std::string_view text, std::vector<std::string> const& names) {
  detail::Token token{std::string(text), 1, 1};
  if (token.text.empty()) {
    throw ParseError("empty word", 1, 1);
  }
  return detail::parse_word_token(token, names);
}

std::string format_word(Word const& w, std::vector<std::string> const& names) {
  if (w.empty()) {
    return "1";
  }
  std::string out;
  auto const letters = w.letters();
  std::size_t i = 0;
  while (i < letters.size()) {
    std::size_t j = i;
    while (j < letters.size() && letters[j] == letters[i]) {
      ++j;
    }
    auto const run = static_cast<std::int64_t>(j - i);
    std::int64_t const exponent = letters[i] > 0 ? run : -run;
    if (!out.empty()) {
      out += '*';
    }
    std::size_t const g = generator_of(letters[i]);
    out += g < names.size() ? names[g] : "x" + std::to_string(g + 1);
    if (exponent != 1) {
      out += '^' + std::to_string(exponent);
    }
    i = j;
  }
  return out;
}

std::string format_presentation(Presentation const& p) {
  std::string out = "gens";
  for (auto const& n : p.generator_names()) {
    out += ' ' + n;
  }
  out += ";\nrels";
  for (Word const& r : p.relators()) {
    out += ' ' + format_word(r, p.generator_names());
  }
  out += ";\n";
  return out;
}

}  // namespace rgkit
