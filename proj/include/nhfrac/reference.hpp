#pragma once

#include <span>

#include "nhfrac/field.hpp"
#include "nhfrac/operators.hpp"
#include "nhfrac/space.hpp"

// Slow, literal evaluations kept as oracles for the fast paths.
namespace nhfrac::reference {

/// T_0 = I_alpha, T_i f = b_i T_{i-1} f - T_{i-1}(b_i f), applied recursively.
inline FieldFunction nested_commutator(const Space& space, const FractionalKernel& k,
                                       std::span<const FieldFunction> b_vec, const FieldFunction& f) {
  if (b_vec.empty()) return apply_fractional_integral(space, k, f);
  const auto inner = b_vec.first(b_vec.size() - 1);
  const FieldFunction& b = b_vec.back();
  return hadamard(b, nested_commutator(space, k, inner, f)) - nested_commutator(space, k, inner, hadamard(b, f));
}

}  // namespace nhfrac::reference
