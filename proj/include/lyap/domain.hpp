#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lyap {

/// Uniform midpoint grid over the unit cube [0,1]^d. Cells are the
/// axis-aligned boxes of a cells_per_axis^d product grid; each carries its
/// center as the sample point and its exact Lebesgue measure.
struct SampledDomain {
    int dim = 0;
    int cells_per_axis = 0;
    std::vector<double> points;    // num_cells x dim, row-major cell centers
    std::vector<double> measures;  // num_cells, sums to 1

    int num_cells() const { return static_cast<int>(measures.size()); }

    std::span<const double> point(int cell) const {
        return {points.data() + static_cast<std::size_t>(cell) * dim,
                static_cast<std::size_t>(dim)};
    }

    double measure(int cell) const { return measures[static_cast<std::size_t>(cell)]; }

    // Index of the cell whose box contains x (componentwise clamped to [0,1]).
    int cell_containing(std::span<const double> x) const;

    // Checks measure normalization and sample point placement.
    void validate() const;
};

inline constexpr std::int64_t kDefaultCellCap = 10'000'000;

SampledDomain build_domain(int dim, int cells_per_axis,
                           std::int64_t cell_cap = kDefaultCellCap);

}  // namespace lyap
