#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "lyap/genericity.hpp"
#include "lyap/rng.hpp"
#include "test_util.hpp"

using namespace lyap;
using namespace lyaptest;

TEST_CASE("an exactly collinear pair is detected with its multiplier") {
    const SampledDomain dom = build_domain(1, 32);
    const FunctionFamily fam = random_family(dom, 2, 1, 7);
    // v_i = 2 * f_i, so v_1 - v_2 = 2 (f_1 - f_2) exactly
    AuxiliaryField field;
    field.family_size = 2;
    field.values.resize(fam.values.size());
    for (int c = 0; c < dom.num_cells(); ++c)
        for (int i = 0; i < 2; ++i)
            field.value(c, i) = 2.0 * fam.value(c, i)[0];

    const DegeneracyReport rep = detect_degeneracy(field, fam, 0, 1, dom);
    REQUIRE_FALSE(rep.constraint_degenerate);
    CHECK(rep.lambda_hat[0] == 2.0);  // 1x1 solve is exact here
    CHECK(rep.inlier_measure == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(static_cast<int>(rep.inlier_cells.size()) == dom.num_cells());
}

TEST_CASE("a half-collinear construction yields inlier measure one half") {
    const SampledDomain dom = build_domain(1, 64);
    const FunctionFamily fam = random_family(dom, 2, 1, 17);
    AuxiliaryField field;
    field.family_size = 2;
    field.values.assign(fam.values.size(), 0.0);
    Rng rng(18);
    for (int c = 0; c < dom.num_cells(); ++c) {
        const double g = fam.value(c, 0)[0] - fam.value(c, 1)[0];
        if (c < dom.num_cells() / 2) {
            field.value(c, 0) = g;  // w = 1 * g on the left half
            field.value(c, 1) = 0.0;
        } else {
            field.value(c, 0) = 10.0 + rng.gaussian();  // generic elsewhere
            field.value(c, 1) = rng.gaussian();
        }
    }
    const DegeneracyReport rep = detect_degeneracy(field, fam, 0, 1, dom);
    CHECK(std::abs(rep.inlier_measure - 0.5) <= 1.0 / 64.0 + 1e-12);
    CHECK(rep.lambda_hat[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("random fields admit no positive-measure collinearity") {
    const SampledDomain dom = build_domain(1, 64);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const FunctionFamily fam = random_family(dom, 2, 2, 1000 + seed);
        const AuxiliaryField field = random_field(dom, 2, 2000 + seed);
        const DegeneracyReport rep = detect_degeneracy(field, fam, 0, 1, dom);
        // a sampled multiplier always fits its n=2 defining cells; allow
        // a little slack for chance near-fits
        CHECK(rep.inlier_measure <= 4.0 / 64.0);
    }
}

TEST_CASE("identical members are flagged constraint-degenerate") {
    const SampledDomain dom = build_domain(1, 16);
    FunctionFamily fam = random_family(dom, 2, 1, 27);
    for (int c = 0; c < dom.num_cells(); ++c)
        fam.mutable_value(c, 1)[0] = fam.value(c, 0)[0];  // f_2 = f_1

    AuxiliaryField field = random_field(dom, 2, 28);
    DegeneracyReport rep = detect_degeneracy(field, fam, 0, 1, dom);
    CHECK(rep.constraint_degenerate);
    CHECK(rep.lambda_hat.empty());
    CHECK(rep.inlier_measure == 0.0);  // the random field differs everywhere

    // with matching components on half the cells the level set shows up
    for (int c = 0; c < dom.num_cells() / 2; ++c)
        field.value(c, 1) = field.value(c, 0);
    rep = detect_degeneracy(field, fam, 0, 1, dom);
    CHECK(rep.constraint_degenerate);
    CHECK(rep.inlier_measure == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("detector reports exactly what its best candidate explains") {
    const SampledDomain dom = build_domain(1, 48);
    const FunctionFamily fam = random_family(dom, 2, 1, 37);
    const AuxiliaryField field = random_field(dom, 2, 38);
    const DegeneracyReport rep = detect_degeneracy(field, fam, 0, 1, dom);
    REQUIRE_FALSE(rep.constraint_degenerate);
    // recount the inliers of the reported multiplier
    double measure = 0.0;
    for (int c = 0; c < dom.num_cells(); ++c) {
        const double w = field.value(c, 0) - field.value(c, 1);
        const double g = fam.value(c, 0)[0] - fam.value(c, 1)[0];
        if (std::abs(w - rep.lambda_hat[0] * g) <= rep.residual_tol)
            measure += dom.measure(c);
    }
    CHECK(rep.inlier_measure == measure);
}

TEST_CASE("genericity verdicts: collinear no, random yes, singleton vacuously") {
    const SampledDomain dom = build_domain(1, 32);
    const FunctionFamily fam = random_family(dom, 3, 1, 47);

    AuxiliaryField collinear;
    collinear.family_size = 3;
    collinear.values.resize(fam.values.size());
    for (int c = 0; c < dom.num_cells(); ++c)
        for (int i = 0; i < 3; ++i)
            collinear.value(c, i) = -1.5 * fam.value(c, i)[0];
    CHECK_FALSE(is_generic(collinear, fam, dom).generic);

    CHECK(is_generic(random_field(dom, 3, 48), fam, dom).generic);

    const FunctionFamily single = random_family(dom, 1, 1, 49);
    const AuxiliaryField sfield = random_field(dom, 1, 50);
    CHECK(is_generic(sfield, single, dom).generic);
}

TEST_CASE("perturbation keeps a generic field generic and stays inside eta") {
    const SampledDomain dom = build_domain(1, 32);
    const FunctionFamily fam = random_family(dom, 2, 1, 57);
    const AuxiliaryField field = random_field(dom, 2, 58);
    REQUIRE(is_generic(field, fam, dom).generic);

    const double eta = 1e-4;
    const PerturbResult res =
        perturb_to_generic(field, fam, eta, 1.0, 0.3, dom, 59);
    CHECK(res.verdict.generic);
    double worst = 0.0;
    for (int c = 0; c < dom.num_cells(); ++c)
        for (int i = 0; i < 2; ++i)
            worst = std::max(worst,
                             std::abs(res.field.value(c, i) - field.value(c, i)));
    CHECK(worst <= eta);
    CHECK(res.field.provenance == AuxiliaryField::Provenance::perturbed_from);
}

TEST_CASE("flat channel with unit slope: all block values distinct, one per level") {
    // w = 0, g = 1, n = 1, N = 1: every block value is unique with
    // probability one, so each level lambda catches at most one block
    const SampledDomain dom = build_domain(1, 64);
    std::vector<double> w(dom.num_cells(), 0.0);
    Rng rng(67);
    const double eta = 0.5, eps = 0.25;
    const ScalarPerturbation sp = perturb_scalar(w, 1, eta, 1.0, eps, dom, rng);

    std::set<double> uniq(sp.plan.block_values.begin(), sp.plan.block_values.end());
    CHECK(uniq.size() == sp.plan.block_values.size());

    // h^d < eps/(2n) and blocks^d >= n+1
    const double h = 1.0 / sp.plan.blocks_per_axis;
    CHECK(h < eps / 2.0);
    CHECK(sp.plan.blocks_per_axis >= 2);

    for (double lambda = -1.0; lambda <= 1.0 + 1e-12; lambda += 0.1) {
        int hits = 0;
        for (double y : sp.plan.block_values)
            if (std::abs(y - lambda) <= 1e-8) ++hits;
        CHECK(hits <= 1);
    }
}

TEST_CASE("a collinear field is repaired below the genericity threshold") {
    const SampledDomain dom = build_domain(1, 64);
    const FunctionFamily fam = random_family(dom, 2, 1, 77);
    AuxiliaryField field;
    field.family_size = 2;
    field.values.resize(fam.values.size());
    for (int c = 0; c < dom.num_cells(); ++c)
        for (int i = 0; i < 2; ++i)
            field.value(c, i) = 2.0 * fam.value(c, i)[0];
    REQUIRE_FALSE(is_generic(field, fam, dom).generic);

    const PerturbResult res =
        perturb_to_generic(field, fam, 1e-3, 4.0, 0.3, dom, 78);
    CHECK(res.verdict.generic);
    const DegeneracyReport rep = detect_degeneracy(res.field, fam, 0, 1, dom);
    CHECK(rep.inlier_measure < 10.0 * 1.0 / 64.0);
}

TEST_CASE("sup-distance stays within eta for rough fields and any budget") {
    const SampledDomain dom = build_domain(2, 8);
    Rng outer(87);
    for (int trial = 0; trial < 10; ++trial) {
        const FunctionFamily fam = random_family(dom, 2, 2, 870 + trial);
        // deliberately rough field: large iid values cell to cell
        const AuxiliaryField field = random_field(dom, 2, 880 + trial, 10.0);
        const double eta = outer.uniform(1e-4, 0.5);
        const double eps = outer.uniform(0.05, 0.5);
        const PerturbResult res =
            perturb_to_generic(field, fam, eta, 2.0, eps, dom, 890 + trial);
        double worst = 0.0;
        for (std::size_t j = 0; j < field.values.size(); ++j)
            worst = std::max(worst, std::abs(res.field.values[j] - field.values[j]));
        CHECK(worst <= eta);
    }
}

TEST_CASE("per-level block hit count respects the value dimension bound") {
    Rng outer(97);
    for (int trial = 0; trial < 5; ++trial) {
        const int d = 1 + trial % 2;
        const int n = 1 + trial % 2;
        const SampledDomain dom = build_domain(d, d == 1 ? 64 : 12);
        const double eta = outer.uniform(0.05, 0.5);
        const double radius = outer.uniform(1.0, 2.0);
        const double eps = 0.4;

        // scalar channel w and slope function g sampled per cell
        Rng rng(970 + trial);
        std::vector<double> w(dom.num_cells());
        std::vector<double> g(static_cast<std::size_t>(dom.num_cells()) * n);
        for (double& x : w) x = rng.gaussian();
        for (double& x : g) x = rng.gaussian();

        Rng prng(980 + trial);
        const ScalarPerturbation sp = perturb_scalar(w, n, eta, radius, eps, dom, prng);

        // enumerate lambda on the 0.1-spaced grid of [-N, N]^n
        const int steps = static_cast<int>(std::floor(2 * radius / 0.1)) + 1;
        std::vector<double> lambda(n);
        std::vector<int> idx(n, 0);
        const std::int64_t blocks = sp.plan.num_blocks(d);
        bool done = false;
        while (!done) {
            for (int k = 0; k < n; ++k) lambda[k] = -radius + 0.1 * idx[k];
            int hits = 0;
            for (std::int64_t j = 0; j < blocks; ++j) {
                const auto p = sp.plan.anchor_point(d, j);
                const int cell = dom.cell_containing({p.data(), p.size()});
                double dot = 0.0;
                for (int k = 0; k < n; ++k)
                    dot += lambda[k] * g[static_cast<std::size_t>(cell) * n + k];
                if (std::abs(sp.plan.block_values[static_cast<std::size_t>(j)] - dot) <=
                    1e-8)
                    ++hits;
            }
            CHECK(hits <= n);
            done = true;
            for (int k = 0; k < n; ++k) {
                if (++idx[k] < steps) {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

TEST_CASE("sampled fields: zero sigma, determinism, band-limited spread") {
    const SampledDomain dom = build_domain(1, 128);
    SampleModel model;
    model.kind = SampleModel::Kind::iid_gaussian;
    model.sigma = 0.0;
    const AuxiliaryField zero = sample_field(dom, 2, model, 5);
    for (double v : zero.values) CHECK(v == 0.0);

    model.sigma = 1.3;
    const AuxiliaryField a = sample_field(dom, 3, model, 123);
    const AuxiliaryField b = sample_field(dom, 3, model, 123);
    CHECK(a.values == b.values);
    const AuxiliaryField c = sample_field(dom, 3, model, 124);
    CHECK(a.values != c.values);

    // smooth_fourier RMS tracks sigma * sqrt(#modes) = sigma * sqrt(k_max)
    model.kind = SampleModel::Kind::smooth_fourier;
    model.sigma = 0.7;
    for (int kmax : {4, 16}) {
        model.k_max = kmax;
        double sq = 0.0;
        int count = 0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const AuxiliaryField f = sample_field(dom, 1, model, 300 + seed);
            for (double v : f.values) {
                sq += v * v;
                ++count;
            }
        }
        const double rms = std::sqrt(sq / count);
        const double predicted = model.sigma * std::sqrt(static_cast<double>(kmax));
        CHECK(std::abs(rms - predicted) <= 0.2 * predicted);
    }
}

TEST_CASE("the probe is reproducible and honest about degenerate pairs") {
    const SampledDomain dom = build_domain(1, 32);
    FunctionFamily fam = random_family(dom, 3, 1, 201);
    MomentTarget target;
    target.alpha = compute_alpha(fam, uniform_density(3, dom.num_cells()), dom).alpha;
    SampleModel model;
    model.kind = SampleModel::Kind::smooth_fourier;
    model.k_max = 3;

    const ProbeStats s1 = residuality_probe(fam, target, dom, 5, model, 77);
    const ProbeStats s2 = residuality_probe(fam, target, dom, 5, model, 77);
    CHECK(s1.generic_count == s2.generic_count);
    CHECK(s1.tie_measures == s2.tie_measures);
    CHECK(s1.fractional_counts == s2.fractional_counts);

    // duplicated member: every trial flags the constraint-degenerate pair
    for (int c = 0; c < dom.num_cells(); ++c)
        fam.mutable_value(c, 1)[0] = fam.value(c, 0)[0];
    target.alpha = compute_alpha(fam, uniform_density(3, dom.num_cells()), dom).alpha;
    const ProbeStats s3 = residuality_probe(fam, target, dom, 4, model, 78);
    CHECK(s3.constraint_degenerate_trials == 4);
}

TEST_CASE("a modest probe on a generic family is mostly generic") {
    const SampledDomain dom = build_domain(1, 64);
    const FunctionFamily fam = random_family(dom, 3, 2, 301);
    MomentTarget target;
    target.alpha = compute_alpha(fam, random_density(dom, 3, 302), dom).alpha;
    SampleModel model;
    model.kind = SampleModel::Kind::smooth_fourier;
    model.k_max = 4;
    const ProbeStats stats = residuality_probe(fam, target, dom, 30, model, 303);
    CHECK(stats.generic_fraction >= 0.9);
    CHECK(stats.nonconverged == 0);
}

TEST_CASE("genericity verdicts are equivariant under joint relabeling") {
    const SampledDomain dom = build_domain(1, 24);
    const FunctionFamily fam = random_family(dom, 3, 2, 401);
    const AuxiliaryField field = random_field(dom, 3, 402);

    const int perm[3] = {1, 2, 0};
    FunctionFamily pfam = fam;
    AuxiliaryField pfield = field;
    for (int c = 0; c < dom.num_cells(); ++c)
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 2; ++k)
                pfam.mutable_value(c, i)[k] = fam.value(c, perm[i])[k];
            pfield.value(c, i) = field.value(c, perm[i]);
        }

    DetectConfig cfg;
    cfg.seed = 7;
    const GenericityVerdict a = is_generic(field, fam, dom, cfg);
    const GenericityVerdict b = is_generic(pfield, pfam, dom, cfg);
    CHECK(a.generic == b.generic);
    CHECK(a.worst.inlier_measure == doctest::Approx(b.worst.inlier_measure).epsilon(1e-12));
}
