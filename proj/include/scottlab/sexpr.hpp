#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scottlab {

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

// Minimal s-expression: an atom or a parenthesized list. ';' starts a
// comment running to end of line.
struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_atom() const { return !is_list; }
  bool is_atom(std::string_view text) const { return !is_list && atom == text; }
  // Head symbol of a non-empty list whose first item is an atom, else "".
  std::string head() const;

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line, column); }
};

// Parses every top-level expression in the text.
std::vector<Sexp> read_sexps(std::string_view text);
// Parses exactly one top-level expression.
Sexp read_sexp(std::string_view text);

std::string write_sexp(const Sexp& s);

}  // namespace scottlab
