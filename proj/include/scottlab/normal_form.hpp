#pragma once

// Shape-preserving connectives. A plain Or over a Pi formula is syntactically
// Sigma one level up; pulling the Pi side's conjunctions and universal blocks
// outward keeps the result Pi at the expected rank (and dually). Schema
// connectives are treated as units and never distributed over.

#include <vector>

#include "scottlab/formula.hpp"

namespace scottlab {

// a | b, with finite Ands and universal blocks of either side pulled outward.
// Bound variables are renamed apart when they would capture.
Formula pi_or(const Formula& a, const Formula& b);
// a & b, with finite Ors and existential blocks pulled outward.
Formula sigma_and(const Formula& a, const Formula& b);

// (forall u)(antecedent -> consequent) in Pi shape.
Formula forall_implies(const std::vector<Symbol>& u, const Formula& antecedent, const Formula& consequent);

}  // namespace scottlab
