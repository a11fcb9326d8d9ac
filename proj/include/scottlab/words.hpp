#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scottlab/formula.hpp"

namespace scottlab {

// A group word over generator letters: +j is the j-th generator (1-based),
// -j its inverse. The empty word is the identity.
struct Word {
  std::vector<int> letters;

  std::size_t length() const { return letters.size(); }
  bool is_reduced() const;
  friend bool operator==(const Word&, const Word&) = default;
};

std::string to_string(const Word& w);
Word inverse(const Word& w);
Word concat(const Word& a, const Word& b);
Word freely_reduce(const Word& w);

// Number of reduced words of exactly the given length over `rank` generators.
std::size_t reduced_word_count(std::size_t rank, std::size_t length);
// The index-th reduced word in shortlex order (letter order 1,-1,2,-2,...).
Word reduced_word_at(std::size_t rank, std::size_t index);
// All reduced words of length <= max_length in shortlex order.
std::vector<Word> reduced_words_up_to(std::size_t rank, std::size_t max_length);

// Symbols of the group language.
Symbol mul_symbol();
Symbol inv_symbol();
Symbol identity_symbol();
Term identity_term();
Term mul_term(Term a, Term b);
Term inv_term(Term a);
// The term w(g1..gk), left-nested products; the empty word maps to e.
Term word_term(const Word& w, const std::vector<Term>& generators);
Term word_term(const Word& w, const std::vector<Symbol>& vars);

}  // namespace scottlab
