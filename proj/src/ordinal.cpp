#include "scottlab/ordinal.hpp"

#include <charconv>

namespace scottlab {

Ordinal::Ordinal(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].coefficient == 0) throw std::invalid_argument("ordinal term with zero coefficient");
    if (i > 0 && terms_[i - 1].exponent <= terms_[i].exponent)
      throw std::invalid_argument("ordinal exponents must be strictly descending");
  }
}

Ordinal Ordinal::finite(std::uint64_t n) {
  Ordinal o;
  if (n > 0) o.terms_.push_back({0, n});
  return o;
}

Ordinal Ordinal::omega_power(std::uint32_t exponent, std::uint64_t coefficient) {
  return Ordinal({{exponent, coefficient}});
}

std::uint64_t Ordinal::as_finite() const {
  if (!is_finite()) throw std::domain_error("ordinal " + to_string() + " is infinite");
  return terms_.empty() ? 0 : terms_[0].coefficient;
}

Ordinal Ordinal::successor() const { return *this + finite(1); }

Ordinal Ordinal::operator+(const Ordinal& rhs) const {
  if (rhs.is_zero()) return *this;
  // Terms of the left operand below the leading exponent of rhs are absorbed.
  const auto lead = rhs.terms_.front().exponent;
  Ordinal out;
  for (const auto& t : terms_) {
    if (t.exponent > lead) {
      out.terms_.push_back(t);
    } else if (t.exponent == lead) {
      out.terms_.push_back({lead, t.coefficient + rhs.terms_.front().coefficient});
      out.terms_.insert(out.terms_.end(), rhs.terms_.begin() + 1, rhs.terms_.end());
      return out;
    } else {
      break;
    }
  }
  out.terms_.insert(out.terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
  return out;
}

std::strong_ordering Ordinal::operator<=>(const Ordinal& rhs) const {
  const auto n = std::min(terms_.size(), rhs.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = terms_[i];
    const auto& b = rhs.terms_[i];
    if (a.exponent != b.exponent) return a.exponent <=> b.exponent;
    if (a.coefficient != b.coefficient) return a.coefficient <=> b.coefficient;
  }
  return terms_.size() <=> rhs.terms_.size();
}

std::string Ordinal::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += '+';
    if (t.exponent == 0) {
      out += std::to_string(t.coefficient);
      continue;
    }
    out += 'w';
    if (t.exponent > 1) out += '^' + std::to_string(t.exponent);
    if (t.coefficient > 1) out += '*' + std::to_string(t.coefficient);
  }
  return out;
}

namespace {

template <typename T>
T read_number(std::string_view& s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) throw std::invalid_argument("expected number in ordinal");
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return value;
}

}  // namespace

Ordinal Ordinal::parse(std::string_view text) {
  if (text == "0") return {};
  std::vector<Term> terms;
  std::string_view s = text;
  while (true) {
    Term t{0, 1};
    if (!s.empty() && s.front() == 'w') {
      s.remove_prefix(1);
      t.exponent = 1;
      if (!s.empty() && s.front() == '^') {
        s.remove_prefix(1);
        if (!s.empty() && s.front() == 'w')
          throw std::invalid_argument("ordinal overflow: only ordinals below w^w are supported");
        t.exponent = read_number<std::uint32_t>(s);
      }
      if (!s.empty() && s.front() == '*') {
        s.remove_prefix(1);
        t.coefficient = read_number<std::uint64_t>(s);
      }
    } else {
      t.coefficient = read_number<std::uint64_t>(s);
    }
    terms.push_back(t);
    if (s.empty()) break;
    if (s.front() != '+') throw std::invalid_argument("malformed ordinal '" + std::string(text) + "'");
    s.remove_prefix(1);
  }
  Ordinal o(std::move(terms));
  if (o.to_string() != text) throw std::invalid_argument("non-canonical ordinal '" + std::string(text) + "'");
  return o;
}

}  // namespace scottlab
