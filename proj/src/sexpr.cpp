#include "scottlab/sexpr.hpp"

#include <cctype>

namespace scottlab {

std::string Sexp::head() const {
  if (!is_list || items.empty() || items.front().is_list) return {};
  return items.front().atom;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  Sexp read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, col_);
    Sexp s;
    s.line = line_;
    s.column = col_;
    char c = text_[pos_];
    if (c == ')') throw ParseError("unexpected ')'", line_, col_);
    if (c == '(') {
      advance();
      s.is_list = true;
      while (true) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unterminated list", s.line, s.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        s.items.push_back(read());
      }
      return s;
    }
    while (pos_ < text_.size()) {
      c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      s.atom += c;
      advance();
    }
    return s;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

std::vector<Sexp> read_sexps(std::string_view text) {
  Reader r(text);
  std::vector<Sexp> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

Sexp read_sexp(std::string_view text) {
  Reader r(text);
  Sexp s = r.read();
  if (!r.at_end()) {
    auto extra = r.read();
    throw ParseError("trailing input after expression", extra.line, extra.column);
  }
  return s;
}

std::string write_sexp(const Sexp& s) {
  if (!s.is_list) return s.atom;
  std::string out = "(";
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    if (i) out += ' ';
    out += write_sexp(s.items[i]);
  }
  return out + ")";
}

}  // namespace scottlab
