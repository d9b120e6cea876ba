#pragma once

#include <optional>
#include <vector>

#include "lyap/domain.hpp"
#include "lyap/errors.hpp"
#include "lyap/family.hpp"
#include "lyap/field.hpp"
#include "lyap/simplex.hpp"

namespace lyap {

/// Concave piecewise-linear dual of the discretized problem:
///   D(lambda) = lambda.alpha + sum_c measure(c) min_i (v_i(x_c) - lambda.f_i(x_c)).
double dual_value(const std::vector<double>& lambda, const FunctionFamily& family,
                  const AuxiliaryField& field, const MomentTarget& target,
                  const SampledDomain& dom);

/// Supergradient alpha - sum_c measure(c) f_{i*(c)}(x_c) with i*(c) the
/// lowest-index per-cell argmin.
std::vector<double> dual_subgradient(const std::vector<double>& lambda,
                                     const FunctionFamily& family,
                                     const AuxiliaryField& field,
                                     const MomentTarget& target,
                                     const SampledDomain& dom);

struct DualSolveConfig {
    double box_radius = 1e3;      // trust region |lambda|_inf bound
    int max_box_enlargements = 3; // x10 growth when the optimum sits on the box
    int max_iterations = 500;
    double gap_tol = 1e-10;       // relative master-gap termination
    double tie_tol = 1e-8;        // absolute margin band for tie detection
    bool force_polyak = false;    // skip cutting planes (fallback test hook)
};

struct TieCell {
    int cell = 0;
    std::vector<int> tied;  // indices within tie_tol of the cell minimum
};

struct DualCertificate {
    std::vector<double> lambda_star;
    double dual_value = 0.0;
    int iterations = 0;
    std::vector<TieCell> tie_cells;
    double tie_measure = 0.0;
    double subgradient_norm_at_opt = 0.0;
    bool converged = false;
    bool box_bound_active = false;  // warning: optimum on the trust region edge
    bool used_polyak_fallback = false;
    double gap = 0.0;  // final master upper bound minus best value
};

DualCertificate maximize_dual(const FunctionFamily& family,
                              const AuxiliaryField& field,
                              const MomentTarget& target,
                              const SampledDomain& dom,
                              const DualSolveConfig& cfg = {});

/// Bang-bang primal recovered from a dual certificate: every cell with a
/// unique argmin gets that index, tied cells are settled by a small exact
/// LP so the moment constraint holds.
struct Partition {
    struct FractionalCell {
        int cell = 0;
        std::vector<double> weights;  // full simplex vector of length m
    };
    int family_size = 0;
    std::vector<int> assignment;  // per cell; -1 marks a fractional cell
    std::vector<FractionalCell> fractional;
};

// The certificate disagrees with itself: the tied cells cannot close the
// moment gap. Signals dual nonconvergence.
struct TieResolutionError : Error {
    using Error::Error;
};

Partition recover_bang_bang(const DualCertificate& cert,
                            const FunctionFamily& family,
                            const AuxiliaryField& field,
                            const MomentTarget& target,
                            const SampledDomain& dom,
                            double feas_tol = 1e-9);

struct PartitionReport {
    std::vector<double> moment;
    double moment_error = 0.0;  // Euclidean distance to alpha
    double objective_value = 0.0;
    bool has_objective = false;
    int fractional_cells = 0;
    double extremal_fraction = 0.0;  // measure carried by single-index cells
    std::vector<double> per_index_measure;
};

PartitionReport verify_partition(const Partition& p, const FunctionFamily& family,
                                 const MomentTarget& target, const SampledDomain& dom,
                                 const AuxiliaryField* field = nullptr);

// Per-cell argmin margins at a fixed multiplier; exposed for tie inspection.
std::vector<TieCell> tie_report(const std::vector<double>& lambda,
                                const FunctionFamily& family,
                                const AuxiliaryField& field,
                                const SampledDomain& dom, double tie_tol);

}  // namespace lyap
