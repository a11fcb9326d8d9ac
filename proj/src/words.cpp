#include "scottlab/words.hpp"

#include <stdexcept>

namespace scottlab {

bool Word::is_reduced() const {
  for (std::size_t i = 1; i < letters.size(); ++i)
    if (letters[i] == -letters[i - 1]) return false;
  return true;
}

std::string to_string(const Word& w) {
  if (w.letters.empty()) return "1";
  std::string out;
  for (int l : w.letters) {
    if (!out.empty()) out += ' ';
    out += (l > 0 ? "g" + std::to_string(l) : "g" + std::to_string(-l) + "^-1");
  }
  return out;
}

Word inverse(const Word& w) {
  Word out;
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) out.letters.push_back(-*it);
  return out;
}

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.letters.insert(out.letters.end(), b.letters.begin(), b.letters.end());
  return out;
}

Word freely_reduce(const Word& w) {
  Word out;
  for (int l : w.letters) {
    if (!out.letters.empty() && out.letters.back() == -l)
      out.letters.pop_back();
    else
      out.letters.push_back(l);
  }
  return out;
}

std::size_t reduced_word_count(std::size_t rank, std::size_t length) {
  if (length == 0) return 1;
  if (rank == 0) return 0;
  std::size_t n = 2 * rank;
  for (std::size_t i = 1; i < length; ++i) n *= 2 * rank - 1;
  return n;
}

namespace {

int letter_at(std::size_t slot) {
  // slots 0,1,2,3,... -> letters 1,-1,2,-2,...
  int g = static_cast<int>(slot / 2) + 1;
  return slot % 2 == 0 ? g : -g;
}

}  // namespace

Word reduced_word_at(std::size_t rank, std::size_t index) {
  std::size_t length = 0;
  while (true) {
    auto c = reduced_word_count(rank, length);
    if (c == 0) throw std::out_of_range("no words over zero generators beyond the empty word");
    if (index < c) break;
    index -= c;
    ++length;
  }
  Word w;
  if (length == 0) return w;
  std::size_t block = reduced_word_count(rank, length) / (2 * rank);
  w.letters.push_back(letter_at(index / block));
  index %= block;
  for (std::size_t pos = 1; pos < length; ++pos) {
    block /= 2 * rank - 1;
    std::size_t choice = index / block;
    index %= block;
    // Skip the slot holding the inverse of the previous letter.
    int forbidden = -w.letters.back();
    std::size_t slot = 0;
    for (std::size_t seen = 0;; ++slot) {
      if (letter_at(slot) == forbidden) continue;
      if (seen == choice) break;
      ++seen;
    }
    w.letters.push_back(letter_at(slot));
  }
  return w;
}

std::vector<Word> reduced_words_up_to(std::size_t rank, std::size_t max_length) {
  std::vector<Word> out;
  std::size_t total = 0;
  for (std::size_t l = 0; l <= max_length; ++l) total += reduced_word_count(rank, l);
  out.reserve(total);
  for (std::size_t i = 0; i < total; ++i) out.push_back(reduced_word_at(rank, i));
  return out;
}

Symbol mul_symbol() {
  static const Symbol s("mul");
  return s;
}
Symbol inv_symbol() {
  static const Symbol s("inv");
  return s;
}
Symbol identity_symbol() {
  static const Symbol s("e");
  return s;
}
Term identity_term() { return Term::constant(identity_symbol()); }
Term mul_term(Term a, Term b) { return Term::app(mul_symbol(), {std::move(a), std::move(b)}); }
Term inv_term(Term a) { return Term::app(inv_symbol(), {std::move(a)}); }

Term word_term(const Word& w, const std::vector<Term>& generators) {
  if (w.letters.empty()) return identity_term();
  auto letter = [&](int l) {
    const auto idx = static_cast<std::size_t>(l > 0 ? l : -l) - 1;
    if (idx >= generators.size()) throw std::out_of_range("word letter beyond generator count");
    return l > 0 ? generators[idx] : inv_term(generators[idx]);
  };
  Term t = letter(w.letters.front());
  for (std::size_t i = 1; i < w.letters.size(); ++i) t = mul_term(std::move(t), letter(w.letters[i]));
  return t;
}

Term word_term(const Word& w, const std::vector<Symbol>& vars) {
  std::vector<Term> gens;
  gens.reserve(vars.size());
  for (auto v : vars) gens.push_back(Term::var(v));
  return word_term(w, gens);
}

}  // namespace scottlab
