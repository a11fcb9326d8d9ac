#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scottlab {

// Ordinals below w^w in Cantor normal form: sum of w^e * c with strictly
// descending exponents and positive coefficients. The empty sum is 0.
class Ordinal {
 public:
  struct Term {
    std::uint32_t exponent;
    std::uint64_t coefficient;
    friend bool operator==(const Term&, const Term&) = default;
  };

  Ordinal() = default;
  // Throws std::invalid_argument if the terms are not in normal form.
  explicit Ordinal(std::vector<Term> terms);

  static Ordinal finite(std::uint64_t n);
  static Ordinal omega_power(std::uint32_t exponent, std::uint64_t coefficient = 1);
  static Ordinal omega() { return omega_power(1); }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_finite() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent == 0); }
  // Value of a finite ordinal; throws std::domain_error otherwise.
  std::uint64_t as_finite() const;

  Ordinal successor() const;
  // Ordinal (non-commutative) addition: w + 1 != 1 + w.
  Ordinal operator+(const Ordinal& rhs) const;

  std::strong_ordering operator<=>(const Ordinal& rhs) const;
  bool operator==(const Ordinal& rhs) const { return terms_ == rhs.terms_; }

  // Canonical text: "0", "3", "w", "w^2*3+w+1".
  std::string to_string() const;
  // Inverse of to_string. Throws std::invalid_argument on malformed text.
  static Ordinal parse(std::string_view text);

 private:
  std::vector<Term> terms_;
};

inline const Ordinal& max(const Ordinal& a, const Ordinal& b) { return a < b ? b : a; }
inline const Ordinal& min(const Ordinal& a, const Ordinal& b) { return b < a ? b : a; }

}  // namespace scottlab
