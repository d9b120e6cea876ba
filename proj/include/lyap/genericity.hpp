#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lyap/domain.hpp"
#include "lyap/dual.hpp"
#include "lyap/errors.hpp"
#include "lyap/family.hpp"
#include "lyap/field.hpp"
#include "lyap/rng.hpp"

namespace lyap {

struct DetectConfig {
    double residual_tol = 1e-7;
    int trials = 0;               // 0 = 200 * value_dim
    std::uint64_t seed = 0;
    double measure_threshold = 0; // 0 = 10 * value_dim / num_cells
};

/// Evidence for the degeneracy obstruction: a multiplier making the field
/// difference v_{i1}-v_{i2} collinear with f_{i1}-f_{i2} on a nontrivial
/// measure. When the f difference vanishes identically the pair is flagged
/// constraint-degenerate and the inliers are the cells where the field
/// difference itself vanishes.
struct DegeneracyReport {
    int i1 = 0, i2 = 1;
    std::vector<double> lambda_hat;  // empty for constraint-degenerate pairs
    double inlier_measure = 0.0;
    std::vector<int> inlier_cells;
    double residual_tol = 0.0;
    bool constraint_degenerate = false;
};

DegeneracyReport detect_degeneracy(const AuxiliaryField& field,
                                   const FunctionFamily& family, int i1, int i2,
                                   const SampledDomain& dom,
                                   const DetectConfig& cfg = {});

struct GenericityVerdict {
    bool generic = true;
    double threshold = 0.0;
    DegeneracyReport worst;  // largest inlier measure over all pairs
    int constraint_degenerate_pairs = 0;
};

GenericityVerdict is_generic(const AuxiliaryField& field,
                             const FunctionFamily& family,
                             const SampledDomain& dom,
                             const DetectConfig& cfg = {});

/// One channel of the density construction: a sub-grid of spacing
/// h = 1/blocks_per_axis, an anchor offset in [0,h)^d, and one value per
/// block. Block j covers [h*j, h*(j+1)) per axis; its anchor sample sits at
/// offset + h*j.
struct PerturbationPlan {
    double eta = 0.0;
    double multiplier_radius = 0.0;  // the lambda box the plan certifies
    double eps = 0.0;                // measure budget; h^d < eps/(2n)
    int blocks_per_axis = 0;
    bool grid_aligned = false;       // fallback: blocks nested in grid cells
    std::vector<double> anchor;      // offset in [0,h)^d
    std::vector<double> block_values;

    std::int64_t num_blocks(int dim) const {
        std::int64_t t = 1;
        for (int k = 0; k < dim; ++k) t *= blocks_per_axis;
        return t;
    }

    // center-of-block anchor point for flat block index j
    std::vector<double> anchor_point(int dim, std::int64_t j) const;
};

struct ScalarPerturbation {
    std::vector<double> values;  // per cell
    PerturbationPlan plan;
};

/// Applies the piecewise-constant overlay to a single scalar channel:
/// blocks get the input's anchor value plus a jitter uniform in
/// (-eta/2, eta/2). The block size satisfies blocks^d >= n+1 and
/// h^d < eps/(2n) and is refined until the input oscillates less than
/// eta/2 inside every block, so the output stays within eta in sup norm.
ScalarPerturbation perturb_scalar(const std::vector<double>& w, int value_dim,
                                  double eta, double multiplier_radius, double eps,
                                  const SampledDomain& dom, Rng& rng);

struct PerturbError : Error {
    DegeneracyReport worst;
    explicit PerturbError(const std::string& what, DegeneracyReport report)
        : Error(what), worst(std::move(report)) {}
};

struct PerturbResult {
    AuxiliaryField field;
    std::vector<PerturbationPlan> plans;  // one per component, shared geometry
    int attempts = 1;
    GenericityVerdict verdict;
};

/// Perturbs every component of the field over one shared sub-grid with
/// independent per-(component, block) jitters, then verifies genericity;
/// retries with fresh jitter up to 3 times before giving up.
PerturbResult perturb_to_generic(const AuxiliaryField& field,
                                 const FunctionFamily& family, double eta,
                                 double multiplier_radius, double eps,
                                 const SampledDomain& dom, std::uint64_t seed,
                                 const DetectConfig& detect_cfg = {});

struct SampleModel {
    enum class Kind { iid_gaussian, smooth_fourier };
    Kind kind = Kind::smooth_fourier;
    double sigma = 1.0;
    int k_max = 4;  // band limit, smooth_fourier only
};

AuxiliaryField sample_field(const SampledDomain& dom, int family_size,
                            const SampleModel& model, std::uint64_t seed);

struct ProbeStats {
    int trials = 0;
    int generic_count = 0;
    int nonconverged = 0;  // reported separately, never dropped
    int constraint_degenerate_trials = 0;
    double generic_fraction = 0.0;
    double mean_tie_measure = 0.0;
    double max_tie_measure = 0.0;
    std::vector<double> tie_measures;      // per converged trial
    std::vector<int> fractional_counts;
    std::uint64_t seed = 0;
};

/// Monte-Carlo residuality surrogate: sample fields, run the dual method,
/// and tally genericity verdicts and tie statistics.
ProbeStats residuality_probe(const FunctionFamily& family,
                             const MomentTarget& target,
                             const SampledDomain& dom, int trials,
                             const SampleModel& model, std::uint64_t seed,
                             const DualSolveConfig& dual_cfg = {},
                             const DetectConfig& detect_cfg = {});

}  // namespace lyap
