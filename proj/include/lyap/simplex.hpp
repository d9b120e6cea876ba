#pragma once

#include <limits>
#include <vector>

namespace lyap {

/// A dense LP in computational form:
///   minimize c.x   subject to   A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
struct DenseLP {
    int num_vars = 0;
    std::vector<double> objective;  // num_vars
    std::vector<double> eq_coeffs;  // eq_rows x num_vars, row-major
    std::vector<double> eq_rhs;
    std::vector<double> ub_coeffs;  // ub_rows x num_vars, row-major
    std::vector<double> ub_rhs;

    int eq_rows() const { return static_cast<int>(eq_rhs.size()); }
    int ub_rows() const { return static_cast<int>(ub_rhs.size()); }
};

enum class SimplexStatus {
    optimal,
    infeasible,
    unbounded,
    iteration_limit,
    numerically_suspect,
};

struct SimplexResult {
    SimplexStatus status = SimplexStatus::numerically_suspect;
    std::vector<double> x;  // primal solution over the original variables
    double objective = std::numeric_limits<double>::quiet_NaN();
    // Phase-1 optimum: total artificial mass. For equality rows this is the
    // L1 residual of the closest attainable point, so it doubles as a
    // distance-to-feasibility estimate.
    double infeasibility = 0.0;
    int iterations = 0;
};

struct SimplexOptions {
    double pivot_tol = 1e-9;   // smallest acceptable pivot magnitude
    double zero_tol = 1e-11;   // magnitudes below this are treated as zero
    double feas_tol = 1e-9;    // relative phase-1 acceptance threshold
    double opt_tol = 1e-10;    // relative dual feasibility threshold
    int max_iterations = 0;    // 0 = automatic from problem size
    bool phase1_only = false;  // stop after the feasibility phase
};

/// Two-phase dense tableau simplex. Equality rows carry paired signed
/// artificials so the phase-1 optimum is the exact L1 infeasibility.
/// Pricing is steepest-coefficient with lowest-index tie-breaks; a stall
/// watchdog switches to Bland's rule, which makes cycling impossible.
SimplexResult simplex_solve(const DenseLP& lp, const SimplexOptions& opts = {});

}  // namespace lyap
