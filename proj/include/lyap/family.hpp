#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyap/domain.hpp"

namespace lyap {

enum class FamilySource { builtin_expression, sampled_table };

/// A finite family f_1..f_m of vector-valued integrand samples: for every
/// grid cell c the m values f_i(x_c) in R^n, stored flat as
/// values[(c*m + i)*n + k].
struct FunctionFamily {
    int family_size = 0;  // m
    int value_dim = 0;    // n
    FamilySource source = FamilySource::sampled_table;
    std::string source_id;  // builtin name or file path, informational
    std::vector<double> values;

    int num_cells() const {
        const int mn = family_size * value_dim;
        return mn == 0 ? 0 : static_cast<int>(values.size()) / mn;
    }

    std::span<const double> value(int cell, int i) const {
        const std::size_t off =
            (static_cast<std::size_t>(cell) * family_size + i) * value_dim;
        return {values.data() + off, static_cast<std::size_t>(value_dim)};
    }

    double* mutable_value(int cell, int i) {
        return values.data() +
               (static_cast<std::size_t>(cell) * family_size + i) * value_dim;
    }

    void validate(const SampledDomain& dom) const;
};

/// Per-cell simplex weights theta(x_c): nonnegative, summing to 1.
/// Ingestion tolerates round-off: entries in [-1e-12, 0) are clamped to 0
/// and the cell is renormalized; sums must match 1 within 1e-10.
struct RelaxedDensity {
    int family_size = 0;
    std::vector<double> weights;  // num_cells x family_size

    int num_cells() const {
        return family_size == 0 ? 0
                                : static_cast<int>(weights.size()) / family_size;
    }

    std::span<const double> cell(int c) const {
        return {weights.data() + static_cast<std::size_t>(c) * family_size,
                static_cast<std::size_t>(family_size)};
    }

    double weight(int c, int i) const {
        return weights[static_cast<std::size_t>(c) * family_size + i];
    }

    // Clamps tiny negatives, renormalizes, and checks the simplex sums.
    void normalize_and_validate();
};

/// The moment target alpha = sum_c measure(c) * sum_i theta_i(x_c) f_i(x_c).
struct MomentTarget {
    std::vector<double> alpha;
    std::string source_note;  // optional provenance of the producing density

    int value_dim() const { return static_cast<int>(alpha.size()); }
};

MomentTarget compute_alpha(const FunctionFamily& family,
                           const RelaxedDensity& theta_bar,
                           const SampledDomain& dom);

// Quadrature of a single member: sum_c measure(c) f_i(x_c).
std::vector<double> quadrature_of(const FunctionFamily& family, int i,
                                  const SampledDomain& dom);

/// Countable family f_1, f_2, ... given by a generator rule together with
/// user-supplied bounds: envelope(c) >= sup_i ||f_i(x_c)|| and
/// tail_bound(I, c) >= sup_{i>I} ||f_i(x_c)||, the latter nonincreasing
/// in I. Truncation keeps f_1..f_I once the quadrature of the tail bound
/// falls below the requested budget.
struct CountableFamilySpec {
    int value_dim = 0;
    // generator(i, cell_point, out) writes f_i(x_c) into out[0..n)
    std::function<void(int, std::span<const double>, std::span<double>)> generator;
    std::function<double(std::span<const double>)> envelope;
    std::function<double(int, std::span<const double>)> tail_bound;
    int max_truncation_index = 64;
    std::string source_id;
};

struct TruncationResult {
    FunctionFamily family;
    int truncation_index = 0;
    double tail_error = 0.0;
};

TruncationResult truncate_countable(const CountableFamilySpec& spec,
                                    const SampledDomain& dom,
                                    double eps_tail);

// Uniform density theta_i = 1/m on every cell.
RelaxedDensity uniform_density(int family_size, int num_cells);

// All mass on one index.
RelaxedDensity vertex_density(int family_size, int num_cells, int index);

}  // namespace lyap
