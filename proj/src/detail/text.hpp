#pragma once

// Shared tokenizer and word parser for the text input formats.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rgkit/word.hpp"

namespace rgkit::detail {

struct Token {
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

// Splits into whitespace-separated tokens, dropping `#` comments. Every
// character in `single` forms a token of its own.
std::vector<Token> tokenize(std::string_view text, std::string_view single = ";");

// Parses a word occupying the token text (or a suffix of it starting at
// `offset`). Errors carry the position inside the original source.
Word parse_word_token(Token const& token, std::vector<std::string> const& names,
                      std::size_t offset = 0);

[[noreturn]] void fail_at(Token const& token, std::string const& what,
                          std::size_t offset = 0);

bool is_identifier_start(char c);
bool is_identifier_char(char c);

}  // namespace rgkit::detail
