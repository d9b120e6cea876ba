#include "lyap/cli/builtins.hpp"

#include <cmath>

#include "lyap/cli/table_io.hpp"
#include "lyap/errors.hpp"
#include "lyap/genericity.hpp"
#include "lyap/rng.hpp"

namespace lyap::cli {

namespace {

std::uint64_t seed_of(const Json& spec, std::uint64_t fallback) {
    return spec.contains("seed") ? spec.at("seed").get<std::uint64_t>() : fallback;
}

// sum_{i>I} 1/i^2 by direct enumeration with a midpoint tail patch
double inverse_square_remainder(int I) {
    long double s = 0.0L;
    for (int i = I + 100000; i > I; --i)
        s += 1.0L / (static_cast<long double>(i) * i);
    s += 1.0L / (I + 100000 + 0.5L);
    return static_cast<double>(s);
}

}  // namespace

FunctionFamily make_builtin_family(const Json& spec, const SampledDomain& dom) {
    const std::string name = spec.at("name").get<std::string>();
    const int C = dom.num_cells();
    FunctionFamily fam;
    fam.source = FamilySource::builtin_expression;
    fam.source_id = name;

    if (name == "unit_and_zero" || name == "ramp_and_zero") {
        fam.family_size = 2;
        fam.value_dim = 1;
        fam.values.resize(static_cast<std::size_t>(C) * 2);
        for (int c = 0; c < C; ++c) {
            fam.mutable_value(c, 0)[0] =
                name == "unit_and_zero" ? 1.0 : dom.point(c)[0];
            fam.mutable_value(c, 1)[0] = 0.0;
        }
        return fam;
    }
    if (name == "constants") {
        const auto& rows = spec.at("values");
        fam.family_size = static_cast<int>(rows.size());
        fam.value_dim = static_cast<int>(rows.at(0).size());
        fam.values.resize(static_cast<std::size_t>(C) * fam.family_size *
                          fam.value_dim);
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < fam.family_size; ++i)
                for (int k = 0; k < fam.value_dim; ++k)
                    fam.mutable_value(c, i)[k] = rows.at(i).at(k).get<double>();
        return fam;
    }
    if (name == "random_gaussian" || name == "random_fourier") {
        fam.family_size = spec.at("m").get<int>();
        fam.value_dim = spec.at("n").get<int>();
        const double sigma = spec.value("sigma", 1.0);
        fam.values.resize(static_cast<std::size_t>(C) * fam.family_size *
                          fam.value_dim);
        if (name == "random_gaussian") {
            Rng rng(seed_of(spec, 1));
            for (double& v : fam.values) v = rng.gaussian(sigma);
            return fam;
        }
        SampleModel model;
        model.kind = SampleModel::Kind::smooth_fourier;
        model.sigma = sigma;
        model.k_max = spec.value("k_max", 3);
        // one band-limited scalar field per (member, output dimension)
        const AuxiliaryField flat = sample_field(
            dom, fam.family_size * fam.value_dim, model, seed_of(spec, 1));
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < fam.family_size; ++i)
                for (int k = 0; k < fam.value_dim; ++k)
                    fam.mutable_value(c, i)[k] =
                        flat.value(c, i * fam.value_dim + k);
        return fam;
    }
    throw ValidationError("unknown builtin family '" + name + "'");
}

AuxiliaryField make_builtin_field(const Json& spec, const FunctionFamily& family,
                                  const SampledDomain& dom) {
    const std::string name = spec.at("name").get<std::string>();
    const int C = dom.num_cells();
    const int m = family.family_size;
    AuxiliaryField field;
    field.family_size = m;
    field.provenance = AuxiliaryField::Provenance::user;
    field.reference = name;
    field.values.assign(static_cast<std::size_t>(C) * m, 0.0);

    if (name == "zero") return field;
    if (name == "coordinate_ramp") {
        for (int c = 0; c < C; ++c) field.value(c, 0) = dom.point(c)[0];
        return field;
    }
    if (name == "collinear") {
        const auto lam = spec.at("lambda").get<std::vector<double>>();
        if (static_cast<int>(lam.size()) != family.value_dim)
            throw ValidationError("collinear field: lambda dimension mismatch");
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < m; ++i) {
                double dot = 0.0;
                const auto f = family.value(c, i);
                for (int k = 0; k < family.value_dim; ++k) dot += lam[k] * f[k];
                field.value(c, i) = dot;
            }
        return field;
    }
    throw ValidationError("unknown builtin field '" + name + "'");
}

RelaxedDensity make_density(const Json& spec, int family_size,
                            const SampledDomain& dom) {
    const std::string source = spec.at("source").get<std::string>();
    const int C = dom.num_cells();
    if (source == "csv") {
        RelaxedDensity d = read_density_csv(spec.at("path").get<std::string>(), dom);
        if (d.family_size != family_size)
            throw ValidationError("density csv: component count mismatch");
        return d;
    }
    if (source == "uniform") return uniform_density(family_size, C);
    if (source == "vertex")
        return vertex_density(family_size, C, spec.value("index", 1) - 1);
    if (source == "random") {
        Rng rng(seed_of(spec, 2));
        RelaxedDensity d;
        d.family_size = family_size;
        d.weights.resize(static_cast<std::size_t>(C) * family_size);
        for (int c = 0; c < C; ++c) {
            double sum = 0.0;
            for (int i = 0; i < family_size; ++i) {
                const double u = 1e-3 + rng.uniform();
                d.weights[static_cast<std::size_t>(c) * family_size + i] = u;
                sum += u;
            }
            for (int i = 0; i < family_size; ++i)
                d.weights[static_cast<std::size_t>(c) * family_size + i] /= sum;
        }
        return d;
    }
    throw ValidationError("unknown density source '" + source + "'");
}

RelaxedDensity CountableBuiltin::matched_density(int truncation_index,
                                                 const SampledDomain& dom) const {
    const int I = truncation_index;
    const int C = dom.num_cells();
    std::vector<double> w(static_cast<std::size_t>(I), 0.0);
    if (name == "geometric") {
        for (int i = 0; i < I - 1; ++i) w[i] = std::pow(2.0, -(i + 1));
        w[I - 1] = std::pow(2.0, -(I - 1));  // tail mass folded onto the last
    } else if (name == "inverse_square") {
        const double total = inverse_square_remainder(0);
        for (int i = 0; i < I - 1; ++i)
            w[i] = 1.0 / (static_cast<double>(i + 1) * (i + 1)) / total;
        w[I - 1] = inverse_square_remainder(I - 1) / total;
    } else {
        throw ValidationError("countable builtin '" + name +
                              "' has no matched density");
    }
    RelaxedDensity d;
    d.family_size = I;
    d.weights.resize(static_cast<std::size_t>(C) * I);
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < I; ++i)
            d.weights[static_cast<std::size_t>(c) * I + i] = w[i];
    d.normalize_and_validate();
    return d;
}

CountableBuiltin make_countable_builtin(const Json& spec) {
    CountableBuiltin cb;
    cb.name = spec.at("name").get<std::string>();
    cb.spec.max_truncation_index = spec.value("max_index", 64);
    cb.spec.source_id = "countable:" + cb.name;
    cb.spec.value_dim = 1;
    if (cb.name == "geometric") {
        cb.spec.generator = [](int i, std::span<const double>, std::span<double> out) {
            out[0] = std::pow(2.0, -i);
        };
        cb.spec.envelope = [](std::span<const double>) { return 0.5; };
        cb.spec.tail_bound = [](int I, std::span<const double>) {
            return std::pow(2.0, -I);
        };
        return cb;
    }
    if (cb.name == "inverse_square") {
        cb.spec.generator = [](int i, std::span<const double> x, std::span<double> out) {
            out[0] = x[0] / (static_cast<double>(i) * i);
        };
        cb.spec.envelope = [](std::span<const double> x) { return x[0]; };
        cb.spec.tail_bound = [](int I, std::span<const double> x) {
            return x[0] * inverse_square_remainder(I);
        };
        return cb;
    }
    if (cb.name == "flat_tail") {
        // tail bound never decays: rejected by the truncation hypothesis
        cb.spec.generator = [](int, std::span<const double>, std::span<double> out) {
            out[0] = 1.0;
        };
        cb.spec.envelope = [](std::span<const double>) { return 1.0; };
        cb.spec.tail_bound = [](int, std::span<const double>) { return 1.0; };
        return cb;
    }
    throw ValidationError("unknown countable builtin '" + cb.name + "'");
}

}  // namespace lyap::cli
