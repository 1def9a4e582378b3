#pragma once

#include <vector>

#include "dosesens/error.hpp"

namespace dosesens {

/// maximize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
struct LinearProgram {
    std::vector<double> c;
    std::vector<std::vector<double>> A_ub;
    std::vector<double> b_ub;
    std::vector<std::vector<double>> A_eq;
    std::vector<double> b_eq;
};

struct SimplexResult {
    double value = 0.0;
    std::vector<double> x;
    // Row duals, ordered as [A_ub rows..., A_eq rows...].
    std::vector<double> dual;
    // z_j - c_j for the structural columns at the final basis (all >= -tol).
    std::vector<double> reduced_costs;
};

/// Dense two-phase tableau simplex. Dantzig pricing with a Bland's-rule
/// fallback after a degenerate stall, so termination is guaranteed.
SimplexResult simplex_solve(const LinearProgram& lp, double tol = 1e-9);

}  // namespace dosesens
