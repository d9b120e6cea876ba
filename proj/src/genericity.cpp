#include "lyap/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lyap {

namespace {

// Dense n x n solve with partial pivoting; returns false when the sampled
// system is singular at the given tolerance.
bool solve_square(std::vector<double> a, std::vector<double> b,
                  std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * (1.0 + scale);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (std::abs(a[pivot * n + col]) <= tol) return false;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double factor = a[r * n + col] / a[col * n + col];
            if (factor == 0.0) continue;
            for (int j = col; j < n; ++j) a[r * n + j] -= factor * a[col * n + j];
            b[r] -= factor * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int j = r + 1; j < n; ++j) s -= a[r * n + j] * x[j];
        x[r] = s / a[r * n + r];
    }
    return true;
}

struct ChannelView {
    std::vector<double> w;  // v_{i1} - v_{i2} per cell
    std::vector<double> g;  // (f_{i1} - f_{i2}) per cell, n-major rows
};

ChannelView make_channel(const AuxiliaryField& field, const FunctionFamily& family,
                         int i1, int i2, const SampledDomain& dom) {
    const int C = dom.num_cells();
    const int n = family.value_dim;
    ChannelView ch;
    ch.w.resize(C);
    ch.g.resize(static_cast<std::size_t>(C) * n);
    for (int c = 0; c < C; ++c) {
        ch.w[c] = field.value(c, i1) - field.value(c, i2);
        const auto f1 = family.value(c, i1);
        const auto f2 = family.value(c, i2);
        for (int k = 0; k < n; ++k)
            ch.g[static_cast<std::size_t>(c) * n + k] = f1[k] - f2[k];
    }
    return ch;
}

// Measures the level-set fit of a candidate multiplier.
void count_inliers(const ChannelView& ch, const std::vector<double>& lambda,
                   const SampledDomain& dom, double tol, double& measure,
                   std::vector<int>* cells) {
    const int C = dom.num_cells();
    const int n = static_cast<int>(lambda.size());
    measure = 0.0;
    if (cells) cells->clear();
    for (int c = 0; c < C; ++c) {
        double r = ch.w[c];
        for (int k = 0; k < n; ++k)
            r -= lambda[k] * ch.g[static_cast<std::size_t>(c) * n + k];
        if (std::abs(r) <= tol) {
            measure += dom.measure(c);
            if (cells) cells->push_back(c);
        }
    }
}

}  // namespace

DegeneracyReport detect_degeneracy(const AuxiliaryField& field,
                                   const FunctionFamily& family, int i1, int i2,
                                   const SampledDomain& dom,
                                   const DetectConfig& cfg) {
    family.validate(dom);
    field.validate(dom);
    if (i1 == i2 || i1 < 0 || i2 < 0 || i1 >= family.family_size ||
        i2 >= family.family_size)
        throw ValidationError("detect_degeneracy: indices must be distinct and in range");

    const int C = dom.num_cells();
    const int n = family.value_dim;
    const ChannelView ch = make_channel(field, family, i1, i2, dom);

    DegeneracyReport report;
    report.i1 = i1;
    report.i2 = i2;
    report.residual_tol = cfg.residual_tol;

    bool g_vanishes = true;
    for (double v : ch.g)
        if (v != 0.0) {
            g_vanishes = false;
            break;
        }
    if (g_vanishes) {
        // every multiplier fits; the level set is where the field
        // difference itself vanishes
        report.constraint_degenerate = true;
        count_inliers(ch, std::vector<double>(n, 0.0), dom, cfg.residual_tol,
                      report.inlier_measure, &report.inlier_cells);
        return report;
    }

    const int trials = cfg.trials > 0 ? cfg.trials : 200 * n;
    Rng rng = Rng(cfg.seed).child(0x6c6162);

    std::vector<double> best_lambda(n, 0.0);
    double best_measure = 0.0;
    count_inliers(ch, best_lambda, dom, cfg.residual_tol, best_measure, nullptr);

    std::vector<int> sample(n);
    std::vector<double> a(static_cast<std::size_t>(n) * n), b(n), lambda;
    for (int t = 0; t < trials; ++t) {
        // n distinct random cells define the candidate multiplier
        for (int k = 0; k < n; ++k) {
            bool fresh = true;
            do {
                sample[k] = static_cast<int>(rng.uniform_index(C));
                fresh = true;
                for (int j = 0; j < k; ++j)
                    if (sample[j] == sample[k]) fresh = false;
            } while (!fresh);
        }
        for (int k = 0; k < n; ++k) {
            b[k] = ch.w[sample[k]];
            for (int j = 0; j < n; ++j)
                a[static_cast<std::size_t>(k) * n + j] =
                    ch.g[static_cast<std::size_t>(sample[k]) * n + j];
        }
        if (!solve_square(a, b, lambda)) continue;
        double measure = 0.0;
        count_inliers(ch, lambda, dom, cfg.residual_tol, measure, nullptr);
        if (measure > best_measure) {
            best_measure = measure;
            best_lambda = lambda;
        }
    }

    report.lambda_hat = best_lambda;
    count_inliers(ch, best_lambda, dom, cfg.residual_tol, report.inlier_measure,
                  &report.inlier_cells);
    return report;
}

GenericityVerdict is_generic(const AuxiliaryField& field,
                             const FunctionFamily& family,
                             const SampledDomain& dom, const DetectConfig& cfg) {
    const int m = family.family_size;
    const int n = family.value_dim;
    GenericityVerdict verdict;
    verdict.threshold = cfg.measure_threshold > 0.0
                            ? cfg.measure_threshold
                            : 10.0 * n / std::max(1, dom.num_cells());
    verdict.generic = true;
    double worst = -1.0;
    for (int i1 = 0; i1 < m; ++i1)
        for (int i2 = i1 + 1; i2 < m; ++i2) {
            DegeneracyReport r = detect_degeneracy(field, family, i1, i2, dom, cfg);
            if (r.inlier_measure >= verdict.threshold) verdict.generic = false;
            if (r.constraint_degenerate) ++verdict.constraint_degenerate_pairs;
            if (r.inlier_measure > worst) {
                worst = r.inlier_measure;
                verdict.worst = std::move(r);
            }
        }
    return verdict;
}

std::vector<double> PerturbationPlan::anchor_point(int dim, std::int64_t j) const {
    std::vector<double> p(dim);
    const double h = 1.0 / blocks_per_axis;
    for (int k = 0; k < dim; ++k) {
        p[k] = anchor.empty() ? h * (j % blocks_per_axis)
                              : anchor[k] + h * (j % blocks_per_axis);
        j /= blocks_per_axis;
    }
    return p;
}

namespace {

std::int64_t block_of(const SampledDomain& dom, int cell, int blocks) {
    std::int64_t idx = 0, stride = 1;
    const auto x = dom.point(cell);
    for (int k = 0; k < dom.dim; ++k) {
        int b = static_cast<int>(x[k] * blocks);
        if (b >= blocks) b = blocks - 1;
        idx += stride * b;
        stride *= blocks;
    }
    return idx;
}

// Smallest block count meeting both size constraints of the construction.
int minimal_blocks(int dim, int value_dim, double eps,
                   std::int64_t block_cap = kDefaultCellCap) {
    int mm = 1;
    auto ok = [&](int candidate) {
        double hd = 1.0;
        std::int64_t count = 1;
        for (int k = 0; k < dim; ++k) {
            hd /= candidate;
            count *= candidate;
        }
        return count >= value_dim + 1 && hd < eps / (2.0 * value_dim);
    };
    while (!ok(mm)) {
        ++mm;
        std::int64_t count = 1;
        for (int k = 0; k < dim; ++k) count *= mm;
        if (count > block_cap)
            throw ResourceError(
                "perturb: the measure budget eps requires more than " +
                std::to_string(block_cap) + " sub-grid blocks");
    }
    return mm;
}

// Largest input oscillation against the anchor value inside any block.
double block_oscillation(const std::vector<const std::vector<double>*>& channels,
                         const SampledDomain& dom, int blocks,
                         const std::vector<double>& anchor_offset) {
    const double h = 1.0 / blocks;
    std::int64_t total = 1;
    for (int k = 0; k < dom.dim; ++k) total *= blocks;
    std::vector<int> anchor_cell(static_cast<std::size_t>(total));
    std::vector<double> point(dom.dim);
    for (std::int64_t j = 0; j < total; ++j) {
        std::int64_t rest = j;
        for (int k = 0; k < dom.dim; ++k) {
            point[k] = anchor_offset[k] + h * (rest % blocks);
            rest /= blocks;
        }
        anchor_cell[static_cast<std::size_t>(j)] = dom.cell_containing(point);
    }
    double worst = 0.0;
    for (int c = 0; c < dom.num_cells(); ++c) {
        const std::int64_t j = block_of(dom, c, blocks);
        const int ac = anchor_cell[static_cast<std::size_t>(j)];
        for (const auto* ch : channels)
            worst = std::max(worst, std::abs((*ch)[c] - (*ch)[ac]));
    }
    return worst;
}

struct Geometry {
    int blocks = 0;
    bool aligned = false;
    std::vector<double> anchor_offset;
};

// Picks the shared sub-grid: starts at the minimal admissible size and
// refines while the input oscillates too much within blocks; the aligned
// fallback nests blocks inside grid cells, where the oscillation is zero.
Geometry choose_geometry(const std::vector<const std::vector<double>*>& channels,
                         const SampledDomain& dom, int value_dim, double eta,
                         double eps, Rng& rng) {
    Geometry geo;
    const int mm0 = minimal_blocks(dom.dim, value_dim, eps);
    int mm = mm0;
    while (mm < dom.cells_per_axis) {
        std::vector<double> xi(dom.dim);
        const double h = 1.0 / mm;
        for (int k = 0; k < dom.dim; ++k) xi[k] = rng.uniform(0.0, h);
        if (block_oscillation(channels, dom, mm, xi) < 0.5 * eta) {
            geo.blocks = mm;
            geo.anchor_offset = std::move(xi);
            return geo;
        }
        mm *= 2;
    }
    geo.blocks = dom.cells_per_axis *
                 ((mm0 + dom.cells_per_axis - 1) / dom.cells_per_axis);
    geo.aligned = true;
    // block centers keep the anchors safely interior: each block nests in a
    // grid cell, so the anchor snaps to the very cell it perturbs
    geo.anchor_offset.assign(dom.dim, 0.5 / geo.blocks);
    return geo;
}

double jitter(Rng& rng, double eta) {
    double u;
    do {
        u = rng.uniform();
    } while (u == 0.0);
    return eta * (u - 0.5);
}

}  // namespace

ScalarPerturbation perturb_scalar(const std::vector<double>& w, int value_dim,
                                  double eta, double multiplier_radius, double eps,
                                  const SampledDomain& dom, Rng& rng) {
    if (!(eta > 0.0) || !(eps > 0.0) || multiplier_radius < 1.0)
        throw ValidationError("perturb_scalar: need eta > 0, eps > 0 and a "
                              "multiplier radius >= 1");
    if (static_cast<int>(w.size()) != dom.num_cells())
        throw ValidationError("perturb_scalar: channel length mismatch");

    const Geometry geo = choose_geometry({&w}, dom, value_dim, eta, eps, rng);
    ScalarPerturbation out;
    out.plan.eta = eta;
    out.plan.multiplier_radius = multiplier_radius;
    out.plan.eps = eps;
    out.plan.blocks_per_axis = geo.blocks;
    out.plan.grid_aligned = geo.aligned;
    out.plan.anchor = geo.anchor_offset;

    const std::int64_t total = out.plan.num_blocks(dom.dim);
    out.plan.block_values.resize(static_cast<std::size_t>(total));
    std::vector<int> anchor_cell(static_cast<std::size_t>(total));
    for (std::int64_t j = 0; j < total; ++j) {
        const auto p = out.plan.anchor_point(dom.dim, j);
        anchor_cell[static_cast<std::size_t>(j)] = dom.cell_containing(p);
        out.plan.block_values[static_cast<std::size_t>(j)] =
            w[anchor_cell[static_cast<std::size_t>(j)]] + jitter(rng, eta);
    }
    out.values.resize(w.size());
    for (int c = 0; c < dom.num_cells(); ++c)
        out.values[c] =
            out.plan.block_values[static_cast<std::size_t>(block_of(dom, c, geo.blocks))];
    return out;
}

PerturbResult perturb_to_generic(const AuxiliaryField& field,
                                 const FunctionFamily& family, double eta,
                                 double multiplier_radius, double eps,
                                 const SampledDomain& dom, std::uint64_t seed,
                                 const DetectConfig& detect_cfg) {
    field.validate(dom);
    family.validate(dom);
    if (field.family_size != family.family_size)
        throw ValidationError("perturb_to_generic: field/family size mismatch");
    if (!(eta > 0.0) || !(eps > 0.0) || multiplier_radius < 1.0)
        throw ValidationError("perturb_to_generic: need eta > 0, eps > 0 and a "
                              "multiplier radius >= 1");

    const int m = field.family_size;
    const int C = dom.num_cells();

    // one shared geometry keeps every pair difference block-constant
    std::vector<std::vector<double>> channels(m);
    std::vector<const std::vector<double>*> views;
    for (int i = 0; i < m; ++i) {
        channels[i].resize(C);
        for (int c = 0; c < C; ++c) channels[i][c] = field.value(c, i);
        views.push_back(&channels[i]);
    }

    GenericityVerdict last_verdict;
    const int max_attempts = 3;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng = Rng(seed).child(0x70657274 + attempt);
        const Geometry geo =
            choose_geometry(views, dom, family.value_dim, eta, eps, rng);
        const double h = 1.0 / geo.blocks;
        std::int64_t total = 1;
        for (int k = 0; k < dom.dim; ++k) total *= geo.blocks;

        PerturbResult result;
        result.attempts = attempt + 1;
        result.field.family_size = m;
        result.field.values.assign(static_cast<std::size_t>(C) * m, 0.0);
        result.field.provenance = AuxiliaryField::Provenance::perturbed_from;
        result.field.seed = seed;
        result.field.reference = field.reference.empty() ? "input field"
                                                         : field.reference;

        std::vector<int> anchor_cell(static_cast<std::size_t>(total));
        std::vector<double> point(dom.dim);
        for (std::int64_t j = 0; j < total; ++j) {
            std::int64_t rest = j;
            for (int k = 0; k < dom.dim; ++k) {
                point[k] = geo.anchor_offset[k] + h * (rest % geo.blocks);
                rest /= geo.blocks;
            }
            anchor_cell[static_cast<std::size_t>(j)] = dom.cell_containing(point);
        }

        for (int i = 0; i < m; ++i) {
            PerturbationPlan plan;
            plan.eta = eta;
            plan.multiplier_radius = multiplier_radius;
            plan.eps = eps;
            plan.blocks_per_axis = geo.blocks;
            plan.grid_aligned = geo.aligned;
            plan.anchor = geo.anchor_offset;
            plan.block_values.resize(static_cast<std::size_t>(total));
            for (std::int64_t j = 0; j < total; ++j)
                plan.block_values[static_cast<std::size_t>(j)] =
                    channels[i][anchor_cell[static_cast<std::size_t>(j)]] +
                    jitter(rng, eta);
            for (int c = 0; c < C; ++c)
                result.field.value(c, i) = plan.block_values[static_cast<std::size_t>(
                    block_of(dom, c, geo.blocks))];
            result.plans.push_back(std::move(plan));
        }

        DetectConfig check = detect_cfg;
        check.seed = Rng::mix(seed, 0x636865636b);
        result.verdict = is_generic(result.field, family, dom, check);
        last_verdict = result.verdict;
        if (result.verdict.generic) return result;
    }
    throw PerturbError(
        "perturb_to_generic: output still fails the genericity check after " +
            std::to_string(max_attempts) + " jitter retries",
        last_verdict.worst);
}

AuxiliaryField sample_field(const SampledDomain& dom, int family_size,
                            const SampleModel& model, std::uint64_t seed) {
    if (family_size < 1)
        throw ValidationError("sample_field: family_size must be >= 1");
    const int C = dom.num_cells();
    AuxiliaryField field;
    field.family_size = family_size;
    field.provenance = AuxiliaryField::Provenance::random_seed;
    field.seed = seed;
    field.values.assign(static_cast<std::size_t>(C) * family_size, 0.0);

    Rng rng = Rng(seed).child(0x6669656c64);
    if (model.kind == SampleModel::Kind::iid_gaussian) {
        for (int c = 0; c < C; ++c)
            for (int i = 0; i < family_size; ++i)
                field.value(c, i) = rng.gaussian(model.sigma);
        return field;
    }

    // band-limited synthesis: one random cosine/sine pair per lattice mode
    const int kmax = std::max(0, model.k_max);
    std::vector<std::vector<int>> modes;
    std::vector<int> mode(dom.dim, 0);
    const std::int64_t mode_count = [&] {
        std::int64_t t = 1;
        for (int k = 0; k < dom.dim; ++k) t *= (kmax + 1);
        return t;
    }();
    for (std::int64_t idx = 1; idx < mode_count; ++idx) {
        std::int64_t rest = idx;
        for (int k = 0; k < dom.dim; ++k) {
            mode[k] = static_cast<int>(rest % (kmax + 1));
            rest /= (kmax + 1);
        }
        modes.push_back(mode);
    }
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int i = 0; i < family_size; ++i) {
        for (const auto& kvec : modes) {
            const double a = rng.gaussian(model.sigma);
            const double b = rng.gaussian(model.sigma);
            for (int c = 0; c < C; ++c) {
                const auto x = dom.point(c);
                double phase = 0.0;
                for (int k = 0; k < dom.dim; ++k) phase += kvec[k] * x[k];
                phase *= two_pi;
                field.value(c, i) += a * std::cos(phase) + b * std::sin(phase);
            }
        }
    }
    return field;
}

ProbeStats residuality_probe(const FunctionFamily& family,
                             const MomentTarget& target,
                             const SampledDomain& dom, int trials,
                             const SampleModel& model, std::uint64_t seed,
                             const DualSolveConfig& dual_cfg,
                             const DetectConfig& detect_cfg) {
    if (trials < 1)
        throw ValidationError("residuality_probe: trials must be >= 1");
    family.validate(dom);

    ProbeStats stats;
    stats.trials = trials;
    stats.seed = seed;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = Rng::mix(seed, 0x7472 + t);
        const AuxiliaryField field =
            sample_field(dom, family.family_size, model, trial_seed);

        DetectConfig dc = detect_cfg;
        dc.seed = Rng::mix(trial_seed, 0x766572);
        const GenericityVerdict verdict = is_generic(field, family, dom, dc);
        if (verdict.generic) ++stats.generic_count;
        if (verdict.constraint_degenerate_pairs > 0)
            ++stats.constraint_degenerate_trials;

        const DualCertificate cert =
            maximize_dual(family, field, target, dom, dual_cfg);
        if (!cert.converged) {
            ++stats.nonconverged;
            continue;
        }
        int fractional = 0;
        try {
            const Partition part =
                recover_bang_bang(cert, family, field, target, dom);
            fractional = static_cast<int>(part.fractional.size());
        } catch (const TieResolutionError&) {
            ++stats.nonconverged;
            continue;
        }
        stats.tie_measures.push_back(cert.tie_measure);
        stats.fractional_counts.push_back(fractional);
    }
    stats.generic_fraction = static_cast<double>(stats.generic_count) / trials;
    for (double tm : stats.tie_measures) {
        stats.mean_tie_measure += tm;
        stats.max_tie_measure = std::max(stats.max_tie_measure, tm);
    }
    if (!stats.tie_measures.empty())
        stats.mean_tie_measure /= static_cast<double>(stats.tie_measures.size());
    return stats;
}

}  // namespace lyap
