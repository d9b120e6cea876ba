#pragma once

#include <vector>

#include "lyap/domain.hpp"
#include "lyap/family.hpp"
#include "lyap/field.hpp"
#include "lyap/simplex.hpp"

namespace lyap {

/// The discretized primal over per-cell simplex weights theta_{c,i}:
///   minimize  sum_c measure(c) sum_i theta_{c,i} v_i(x_c)
///   s.t.      sum_c measure(c) sum_i theta_{c,i} f_i(x_c) = alpha   (n rows)
///             sum_i theta_{c,i} = 1 per cell                        (C rows)
///             theta >= 0.
/// Variables are indexed c*m + i.
struct DiscreteLP {
    int num_cells = 0;   // C
    int family_size = 0; // m
    int value_dim = 0;   // n
    std::vector<double> objective;     // C*m, measure(c)*v_i(x_c)
    std::vector<double> moment_coeff;  // n x (C*m), measure(c)*f_i(x_c)[k]
    std::vector<double> alpha;         // n
    std::vector<double> cell_measure;  // C (simplex rows have unit pattern)

    int rows() const { return value_dim + num_cells; }
    int cols() const { return family_size * num_cells; }

    double moment(int k, int var) const {
        return moment_coeff[static_cast<std::size_t>(k) * cols() + var];
    }
};

/// The same feasible set after eliminating theta_{c,m} = 1 - sum_{i<m}:
/// (m-1)*C variables, n equality rows and one <=1 row per cell.
struct ReducedLP {
    int num_cells = 0;
    int family_size = 0;  // of the original problem
    int value_dim = 0;
    std::vector<double> objective;      // C*(m-1), measure(c)*(v_i - v_m)(x_c)
    double objective_offset = 0.0;      // quadrature of v_m
    std::vector<double> moment_coeff;   // n x C*(m-1), measure(c)*(f_i-f_m)[k]
    std::vector<double> rhs;            // alpha - quadrature(f_m)
    std::vector<double> cell_measure;

    int cols() const { return (family_size - 1) * num_cells; }
};

enum class OracleStatus { optimal, infeasible, numerically_suspect };

struct OracleSolution {
    RelaxedDensity theta;
    double objective_value = 0.0;
    OracleStatus status = OracleStatus::numerically_suspect;
    int fractional_cells = 0;  // cells with some 0 < theta_{c,i} < 1
    int iterations = 0;
    double constraint_residual = 0.0;  // max-norm moment residual
};

struct Phase1Report {
    bool feasible = false;
    double distance = 0.0;  // optimal artificial mass, L1 moment deviation
    int iterations = 0;
};

DiscreteLP build_discrete_lp(const FunctionFamily& family,
                             const MomentTarget& target,
                             const AuxiliaryField& field,
                             const SampledDomain& dom);

ReducedLP reduce(const DiscreteLP& lp);

// Maps reduced-variable values back to full simplex weights.
RelaxedDensity expand(const ReducedLP& red, const std::vector<double>& theta_tilde);

/// Ground-truth solve of the discretized primal. Internally works on the
/// reduced form; returns a basic optimal solution, so at most n cells can
/// be fractional.
OracleSolution oracle_solve(const DiscreteLP& lp, const SimplexOptions& opts = {});

/// Phase-1 feasibility of alpha against the reachable moment set, with the
/// optimal artificial mass as a distance estimate.
Phase1Report phase1_feasible(const FunctionFamily& family,
                             const MomentTarget& target,
                             const SampledDomain& dom,
                             const SimplexOptions& opts = {});

// Number of cells where some weight is strictly between the simplex
// vertices, at the given tolerance.
int count_fractional_cells(const RelaxedDensity& theta, double tol = 1e-9);

}  // namespace lyap
