#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lyap/domain.hpp"

namespace lyap {

/// Sampled auxiliary field v: per cell a vector in R^m steering the dual
/// objective. values[(c*m)+i] = v_i(x_c).
struct AuxiliaryField {
    enum class Provenance { user, random_seed, perturbed_from };

    int family_size = 0;  // m
    std::vector<double> values;
    Provenance provenance = Provenance::user;
    std::uint64_t seed = 0;     // meaningful for random_seed / perturbed_from
    std::string reference;      // description of the perturbation source

    int num_cells() const {
        return family_size == 0 ? 0
                                : static_cast<int>(values.size()) / family_size;
    }

    double value(int cell, int i) const {
        return values[static_cast<std::size_t>(cell) * family_size + i];
    }

    double& value(int cell, int i) {
        return values[static_cast<std::size_t>(cell) * family_size + i];
    }

    std::span<const double> cell(int c) const {
        return {values.data() + static_cast<std::size_t>(c) * family_size,
                static_cast<std::size_t>(family_size)};
    }

    void validate(const SampledDomain& dom) const;
};

}  // namespace lyap
