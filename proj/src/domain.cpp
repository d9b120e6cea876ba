#include "lyap/domain.hpp"

#include <cmath>
#include <string>

#include "lyap/errors.hpp"

namespace lyap {

namespace {

// Compensated accumulation; the normalization invariant is checked at
// 1e-12 even for multi-million cell grids, which a plain running sum
// cannot certify.
double kahan_sum(const std::vector<double>& xs) {
    double sum = 0.0, carry = 0.0;
    for (double x : xs) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

SampledDomain build_domain(int dim, int cells_per_axis, std::int64_t cell_cap) {
    if (dim < 1) throw ValidationError("build_domain: dim must be >= 1");
    if (cells_per_axis < 1)
        throw ValidationError("build_domain: cells_per_axis must be >= 1");

    std::int64_t total = 1;
    for (int k = 0; k < dim; ++k) {
        total *= cells_per_axis;
        if (total > cell_cap)
            throw ResourceError("build_domain: grid of " +
                                std::to_string(cells_per_axis) + "^" +
                                std::to_string(dim) +
                                " cells exceeds the configured cell cap of " +
                                std::to_string(cell_cap));
    }

    SampledDomain dom;
    dom.dim = dim;
    dom.cells_per_axis = cells_per_axis;
    dom.points.resize(static_cast<std::size_t>(total) * dim);
    dom.measures.assign(static_cast<std::size_t>(total),
                        1.0 / static_cast<double>(total));

    const double h = 1.0 / static_cast<double>(cells_per_axis);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (std::int64_t c = 0; c < total; ++c) {
        for (int k = 0; k < dim; ++k)
            dom.points[static_cast<std::size_t>(c) * dim + k] = (idx[k] + 0.5) * h;
        // odometer increment, first axis fastest
        for (int k = 0; k < dim; ++k) {
            if (++idx[k] < cells_per_axis) break;
            idx[k] = 0;
        }
    }
    return dom;
}

int SampledDomain::cell_containing(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim)
        throw ValidationError("cell_containing: point dimension mismatch");
    std::int64_t cell = 0;
    std::int64_t stride = 1;
    for (int k = 0; k < dim; ++k) {
        double t = x[k];
        if (t < 0.0) t = 0.0;
        if (t > 1.0) t = 1.0;
        int i = static_cast<int>(t * cells_per_axis);
        if (i >= cells_per_axis) i = cells_per_axis - 1;
        cell += stride * i;
        stride *= cells_per_axis;
    }
    return static_cast<int>(cell);
}

void SampledDomain::validate() const {
    if (dim < 1 || cells_per_axis < 1)
        throw ValidationError("domain: empty or malformed grid");
    if (points.size() != measures.size() * static_cast<std::size_t>(dim))
        throw ValidationError("domain: point/measure size mismatch");
    for (double m : measures)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw ValidationError("domain: cell measures must be finite and nonnegative");
    for (double x : points)
        if (!(x >= 0.0 && x <= 1.0))
            throw ValidationError("domain: sample points must lie in [0,1]^d");
    const double total = kahan_sum(measures);
    if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("domain: cell measures must sum to 1 within 1e-12");
}

}  // namespace lyap
