#include "detail/text.hpp"

#include <cctype>

#include "rgkit/errors.hpp"

namespace rgkit::detail {

bool is_identifier_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::vector<Token> tokenize(std::string_view text, std::string_view single) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t column = 1;
  Token current;
  bool in_token = false;
  bool in_comment = false;
  auto flush = [&] {
    if (in_token) {
      out.push_back(std::move(current));
      current = Token{};
      in_token = false;
    }
  };
  for (char c : text) {
    if (in_comment) {
      if (c == '\n') {
        in_comment = false;
      }
    } else if (c == '#') {
      flush();
      in_comment = true;
    } else if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      flush();
    } else if (single.find(c) != std::string_view::npos) {
      flush();
      out.push_back(Token{std::string(1, c), line, column});
    } else {
      if (!in_token) {
        current.line = line;
        current.column = column;
        in_token = true;
      }
      current.text.push_back(c);
    }
    if (c == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  flush();
  return out;
}

void fail_at(Token const& token, std::string const& what, std::size_t offset) {
  throw ParseError(what, token.line, token.column + offset);
}

namespace {

class WordParser {
 public:
  WordParser(Token const& token, std::vector<std::string> const& names, std::size_t offset)
      : token_(token), text_(token.text), names_(names), pos_(offset) {}

  Word parse_all() {
    Word w = parse_product();
    if (pos_ != text_.size()) {
      fail("unexpected character '" + std::string(1, text_[pos_]) + "' in word");
    }
    return w;
  }

 private:
  [[noreturn]] void fail(std::string const& what) { fail_at(token_, what, pos_); }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  Word parse_product() {
    Word w;
    bool first = true;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != ')') {
      if (!first && peek() == '*') {
        ++pos_;
      }
      w = w * parse_factor();
      first = false;
    }
    if (first) {
      fail("empty word");
    }
    return w;
  }

  Word parse_factor() {
    Word base = parse_atom();
    if (peek() != '^') {
      return base;
    }
    ++pos_;
    bool negative = false;
    if (peek() == '-' || peek() == '+') {
      negative = peek() == '-';
      ++pos_;
    }
    if (std::isdigit(static_cast<unsigned char>(peek())) == 0) {
      fail("expected integer exponent");
    }
    std::int64_t k = 0;
    while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      k = k * 10 + (peek() - '0');
      if (k > 1'000'000) {
        fail("exponent too large");
      }
      ++pos_;
    }
    if (k == 0) {
      fail("exponent must be nonzero");
    }
    return base.power(negative ? -k : k);
  }

  Word parse_atom() {
    char const c = peek();
    if (c == '[') {
      ++pos_;
      Word u = parse_product();
      if (peek() != ',') {
        fail("expected ',' in commutator");
      }
      ++pos_;
      Word v = parse_product();
      if (peek() != ']') {
        fail("expected ']' closing commutator");
      }
      ++pos_;
      return commutator(u, v);
    }
    if (c == '(') {
      ++pos_;
      Word u = parse_product();
      if (peek() != ')') {
        fail("expected ')'");
      }
      ++pos_;
      return u;
    }
    if (c == '1' && (pos_ + 1 >= text_.size() || !is_identifier_char(text_[pos_ + 1]))) {
      ++pos_;
      return Word{};
    }
    if (!is_identifier_start(c)) {
      fail("expected generator name");
    }
    std::size_t end = pos_;
    while (end < text_.size() && is_identifier_char(text_[end])) {
      ++end;
    }
    std::string_view const run(text_.data() + pos_, end - pos_);
    std::size_t best = names_.size();
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      auto const& n = names_[i];
      if (n.size() > best_len && run.substr(0, n.size()) == n) {
        best = i;
        best_len = n.size();
      }
    }
    if (best == names_.size()) {
      fail("undeclared generator '" + std::string(run) + "'");
    }
    pos_ += best_len;
    return Word::generator(best);
  }

  Token const& token_;
  std::string_view text_;
  std::vector<std::string> const& names_;
  std::size_t pos_;
};

}  // namespace

Word parse_word_token(Token const& token, std::vector<std::string> const& names,
                      std::size_t offset) {
  return WordParser(token, names, offset).parse_all();
}

}  // namespace rgkit::detail
