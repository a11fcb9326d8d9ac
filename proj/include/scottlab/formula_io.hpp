#pragma once

// Text format for formulas.
//
//   term    := var | @const | #n | (fn term...)
//   formula := (P term...) | (= term term) | (not formula)
//            | (and formula...) | (or formula...)
//            | (forall (var...) formula) | (exists (var...) formula)
//            | (schema and|or FAMILY [:args (var...)] [:forms (formula...)]
//                      [:bound n] :class (Sigma|Pi|Both ORD) [:neg]
//                      [:bind ((var term)...)])
// Input-only sugar: true, false, (implies a b), (exists>= n (x) body).
// `not` over a compound formula is pushed inward by negate.
//
// The printer emits the canonical form; print(parse(print(f))) == print(f).

#include <string>
#include <string_view>

#include "scottlab/formula.hpp"
#include "scottlab/sexpr.hpp"

namespace scottlab {

std::string print_term(const Term& t);
std::string print_formula(const Formula& f);

Term parse_term(const Sexp& s);
Formula parse_formula(const Sexp& s);
Formula parse_formula(std::string_view text);

// (exists>= n (x) body): n distinct witnesses of body.
Formula at_least(std::size_t n, Symbol var, const Formula& body);

}  // namespace scottlab
