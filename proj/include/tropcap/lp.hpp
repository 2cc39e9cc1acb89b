#pragma once

#include <cstddef>

#include "tropcap/linalg.hpp"

namespace tropcap::lp {

/// maximize  objective · v
/// subject to  constraints * v <= rhs,  lower <= v <= upper.
/// Every variable must carry finite bounds; the feasible set is therefore a
/// polytope and the program is never unbounded.
struct LinearProgram {
    Matrix constraints;
    Vector rhs;
    Vector objective;
    Vector lower;
    Vector upper;
};

struct Solution {
    bool feasible = false;
    Vector point;            // optimal vertex when feasible
    double objective = 0.0;  // objective · point
    std::size_t pivots = 0;
};

/// Dense two-phase primal simplex with Bland's anti-cycling rule, run in
/// extended precision. Throws NumericFailure when a pivot column is
/// unbounded despite finite bounds, when the iteration cap is hit, or when
/// the returned vertex violates a constraint by more than the feasibility
/// tolerance; the error carries the offending constraint row (rows past
/// `constraints.rows()` are variable bounds).
Solution solve(const LinearProgram& program);

}  // namespace tropcap::lp
