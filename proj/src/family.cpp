#include "lyap/family.hpp"

#include <cmath>
#include <string>

#include "lyap/errors.hpp"

namespace lyap {

void FunctionFamily::validate(const SampledDomain& dom) const {
    if (family_size < 1 || value_dim < 1)
        throw ValidationError("family: family_size and value_dim must be >= 1");
    const std::size_t expected = static_cast<std::size_t>(dom.num_cells()) *
                                 family_size * value_dim;
    if (values.size() != expected)
        throw ValidationError(
            "family: expected " + std::to_string(expected) + " values, got " +
            std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v))
            throw ValidationError("family: all values must be finite");
}

void RelaxedDensity::normalize_and_validate() {
    if (family_size < 1)
        throw ValidationError("density: family_size must be >= 1");
    if (weights.size() % family_size != 0)
        throw ValidationError("density: ragged weight table");
    const int cells = num_cells();
    for (int c = 0; c < cells; ++c) {
        double* w = weights.data() + static_cast<std::size_t>(c) * family_size;
        double sum = 0.0;
        bool clamped = false;
        for (int i = 0; i < family_size; ++i) {
            if (!std::isfinite(w[i]))
                throw ValidationError("density: weights must be finite (cell " +
                                      std::to_string(c) + ")");
            if (w[i] < -1e-12)
                throw ValidationError("density: negative weight at cell " +
                                      std::to_string(c));
            if (w[i] < 0.0) {
                w[i] = 0.0;
                clamped = true;
            }
            sum += w[i];
        }
        if (std::abs(sum - 1.0) > 1e-10)
            throw ValidationError("density: weights at cell " + std::to_string(c) +
                                  " sum to " + std::to_string(sum) +
                                  ", expected 1 within 1e-10");
        // renormalize only after a clamp or a visible drift; untouched
        // tables re-ingest bit for bit
        if (clamped || std::abs(sum - 1.0) > 1e-14)
            for (int i = 0; i < family_size; ++i) w[i] /= sum;
    }
}

MomentTarget compute_alpha(const FunctionFamily& family,
                           const RelaxedDensity& theta_bar,
                           const SampledDomain& dom) {
    family.validate(dom);
    if (theta_bar.family_size != family.family_size ||
        theta_bar.num_cells() != dom.num_cells())
        throw ValidationError("compute_alpha: density shape mismatch");

    const int n = family.value_dim;
    const int m = family.family_size;
    MomentTarget target;
    target.alpha.assign(n, 0.0);
    for (int c = 0; c < dom.num_cells(); ++c) {
        const double w = dom.measure(c);
        for (int i = 0; i < m; ++i) {
            const double t = theta_bar.weight(c, i);
            if (t == 0.0) continue;
            const auto f = family.value(c, i);
            for (int k = 0; k < n; ++k) target.alpha[k] += w * t * f[k];
        }
    }
    return target;
}

std::vector<double> quadrature_of(const FunctionFamily& family, int i,
                                  const SampledDomain& dom) {
    std::vector<double> q(family.value_dim, 0.0);
    for (int c = 0; c < dom.num_cells(); ++c) {
        const double w = dom.measure(c);
        const auto f = family.value(c, i);
        for (int k = 0; k < family.value_dim; ++k) q[k] += w * f[k];
    }
    return q;
}

TruncationResult truncate_countable(const CountableFamilySpec& spec,
                                    const SampledDomain& dom,
                                    double eps_tail) {
    if (spec.value_dim < 1)
        throw ValidationError("truncate_countable: value_dim must be >= 1");
    if (!(eps_tail > 0.0))
        throw ValidationError("truncate_countable: eps_tail must be positive");
    if (!spec.generator || !spec.envelope || !spec.tail_bound)
        throw ValidationError("truncate_countable: generator, envelope and "
                              "tail_bound are all required");

    const int cells = dom.num_cells();
    double envelope_quad = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double e = spec.envelope(dom.point(c));
        if (!std::isfinite(e) || e < 0.0)
            throw ValidationError(
                "truncate_countable: envelope must be finite and nonnegative; "
                "the integrable sup-envelope hypothesis fails otherwise");
        envelope_quad += dom.measure(c) * e;
    }
    if (!std::isfinite(envelope_quad))
        throw EnvelopeHypothesisError(
            "truncate_countable: envelope quadrature is not finite");

    int chosen = -1;
    double tail = 0.0;
    double prev_tail = 0.0;
    for (int I = 1; I <= spec.max_truncation_index; ++I) {
        double q = 0.0;
        for (int c = 0; c < cells; ++c) {
            const double t = spec.tail_bound(I, dom.point(c));
            if (!std::isfinite(t) || t < 0.0)
                throw ValidationError(
                    "truncate_countable: tail_bound must be finite and "
                    "nonnegative");
            q += dom.measure(c) * t;
        }
        if (I > 1 && q > prev_tail + 1e-12 * (1.0 + prev_tail))
            throw ValidationError(
                "truncate_countable: tail_bound quadrature must be "
                "nonincreasing in the truncation index");
        prev_tail = q;
        if (q <= eps_tail) {
            chosen = I;
            tail = q;
            break;
        }
    }
    if (chosen < 0)
        throw EnvelopeHypothesisError(
            "truncate_countable: tail bound stays above " +
            std::to_string(eps_tail) + " for every index up to " +
            std::to_string(spec.max_truncation_index) +
            "; the integrable sup-envelope hypothesis cannot be met");

    TruncationResult result;
    result.truncation_index = chosen;
    result.tail_error = tail;
    result.family.family_size = chosen;
    result.family.value_dim = spec.value_dim;
    result.family.source = FamilySource::builtin_expression;
    result.family.source_id = spec.source_id;
    result.family.values.resize(static_cast<std::size_t>(cells) * chosen *
                                spec.value_dim);
    for (int c = 0; c < cells; ++c)
        for (int i = 0; i < chosen; ++i) {
            double* out = result.family.mutable_value(c, i);
            spec.generator(i + 1, dom.point(c),
                           {out, static_cast<std::size_t>(spec.value_dim)});
        }
    result.family.validate(dom);
    return result;
}

RelaxedDensity uniform_density(int family_size, int num_cells) {
    RelaxedDensity d;
    d.family_size = family_size;
    d.weights.assign(static_cast<std::size_t>(num_cells) * family_size,
                     1.0 / family_size);
    return d;
}

RelaxedDensity vertex_density(int family_size, int num_cells, int index) {
    if (index < 0 || index >= family_size)
        throw ValidationError("vertex_density: index out of range");
    RelaxedDensity d;
    d.family_size = family_size;
    d.weights.assign(static_cast<std::size_t>(num_cells) * family_size, 0.0);
    for (int c = 0; c < num_cells; ++c)
        d.weights[static_cast<std::size_t>(c) * family_size + index] = 1.0;
    return d;
}

}  // namespace lyap
