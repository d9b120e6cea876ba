// Acceptance suite: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line. Returns nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "lyap/cli/builtins.hpp"
#include "lyap/cli/commands.hpp"
#include "lyap/cli/config.hpp"
#include "lyap/dual.hpp"
#include "lyap/genericity.hpp"
#include "lyap/lp_oracle.hpp"
#include "lyap/rng.hpp"

using namespace lyap;
using namespace lyap::cli;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
                name, detail.c_str());
    if (!pass) ++g_failures;
}

std::string out_dir() {
    const fs::path p = fs::temp_directory_path() / "lyap_acceptance";
    fs::create_directories(p);
    return p.string();
}

struct InstanceSpec {
    int dim, cells_per_axis, m, n;
    std::uint64_t seed;
    const char* model;
};

Json instance_config(const InstanceSpec& s, bool with_output) {
    Json cfg{
        {"seed", s.seed},
        {"domain", {{"dim", s.dim}, {"cells_per_axis", s.cells_per_axis}}},
        {"family",
         {{"source", "builtin"},
          {"name", "random_gaussian"},
          {"m", s.m},
          {"n", s.n},
          {"seed", Rng::mix(s.seed, 1)}}},
        {"density", {{"source", "random"}, {"seed", Rng::mix(s.seed, 2)}}},
        {"field",
         {{"source", "sample"},
          {"model", s.model},
          {"k_max", 4},
          {"seed", Rng::mix(s.seed, 3)}}},
    };
    if (with_output) {
        const std::string dir = out_dir();
        cfg["output"] = {
            {"partition", dir + "/part_" + std::to_string(s.seed) + ".csv"}};
    }
    return cfg;
}

std::vector<InstanceSpec> make_instances(int count, int max_cells_1d,
                                         int max_cells_2d, std::uint64_t seed0) {
    const int grids_1d[] = {16, 64, 256, 512, 1024};
    const int grids_2d[] = {4, 8, 16, 24, 32};
    std::vector<InstanceSpec> specs;
    for (int i = 0; i < count; ++i) {
        InstanceSpec s;
        s.dim = 1 + i % 2;
        s.cells_per_axis = s.dim == 1 ? std::min(grids_1d[(i / 2) % 5], max_cells_1d)
                                      : std::min(grids_2d[(i / 2) % 5], max_cells_2d);
        s.m = 2 + i % 4;
        s.n = 1 + i % 3;
        s.seed = seed0 + static_cast<std::uint64_t>(i);
        s.model = i % 3 == 0 ? "iid_gaussian" : "smooth_fourier";
        specs.push_back(s);
    }
    return specs;
}

struct DecomposeRecord {
    bool ok = false;
    bool generic = true;
    int n = 0;
    int fractional = 0;
    double moment_error = 0.0;
    double alpha_norm = 0.0;
    double dual_value = 0.0;
};

DecomposeRecord run_decompose(const InstanceSpec& s) {
    DecomposeRecord rec;
    rec.n = s.n;
    const RunOutcome out =
        run_command("decompose", RunConfig::from_json(instance_config(s, true)));
    if (out.exit_code != kExitOk) return rec;
    rec.ok = true;
    rec.generic = out.report.at("genericity").at("generic_on_input").get<bool>();
    rec.fractional = out.report.at("partition").at("fractional_cells").get<int>();
    rec.moment_error = out.report.at("partition").at("moment_error").get<double>();
    rec.dual_value = out.report.at("dual").at("dual_value").get<double>();
    double a2 = 0.0;
    for (double a : out.report.at("alpha").get<std::vector<double>>()) a2 += a * a;
    rec.alpha_norm = std::sqrt(a2);
    return rec;
}

// ---- criterion 1: partition identity at scale, under a time budget ----
std::vector<DecomposeRecord> g_records;

void criterion_lyapunov_identity() {
    const auto t0 = Clock::now();
    const auto specs = make_instances(50, 1024, 32, 20260800);
    int within = 0, converged = 0;
    double worst = 0.0;
    for (const auto& s : specs) {
        const DecomposeRecord rec = run_decompose(s);
        g_records.push_back(rec);
        if (!rec.ok) continue;
        ++converged;
        const double tol = 1e-8 * (1.0 + rec.alpha_norm);
        worst = std::max(worst, rec.moment_error / tol);
        if (rec.moment_error <= tol) ++within;
    }
    const double secs =
        std::chrono::duration<double>(Clock::now() - t0).count();
    const bool pass = converged == 50 && within == 50 && secs <= 60.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d/50 converged, %d/50 moment error within 1e-8*(1+|alpha|) "
                  "(worst ratio %.2e), %.1f s (budget 60 s)",
                  converged, within, worst, secs);
    report(1, "partition moment identity on random instances", pass, buf);
}

// ---- criterion 2: strong duality against the oracle, weak duality ----
void criterion_strong_duality() {
    const auto specs = make_instances(20, 200, 14, 20260850);  // C <= 200
    int strong_ok = 0, weak_violations = 0, solved = 0;
    double worst_gap = 0.0;
    for (const auto& s : specs) {
        const SampledDomain dom = build_domain(s.dim, s.cells_per_axis);
        const Json cfg = instance_config(s, false);
        const FunctionFamily fam =
            make_builtin_family(cfg.at("family"), dom);
        const RelaxedDensity dens = make_density(cfg.at("density"), s.m, dom);
        const MomentTarget target = compute_alpha(fam, dens, dom);
        SampleModel model;
        model.kind = s.model == std::string("iid_gaussian")
                         ? SampleModel::Kind::iid_gaussian
                         : SampleModel::Kind::smooth_fourier;
        const AuxiliaryField field =
            sample_field(dom, s.m, model, Rng::mix(s.seed, 3));

        const OracleSolution sol =
            oracle_solve(build_discrete_lp(fam, target, field, dom));
        const DualCertificate cert = maximize_dual(fam, field, target, dom);
        if (sol.status != OracleStatus::optimal || !cert.converged) continue;
        ++solved;
        const double gap = std::abs(cert.dual_value - sol.objective_value) /
                           (1.0 + std::abs(sol.objective_value));
        worst_gap = std::max(worst_gap, gap);
        if (gap <= 1e-8) ++strong_ok;

        Rng rng(Rng::mix(s.seed, 44));
        for (int t = 0; t < 100; ++t) {
            std::vector<double> lambda(s.n);
            for (double& l : lambda) l = rng.uniform(-10.0, 10.0);
            if (dual_value(lambda, fam, field, target, dom) >
                sol.objective_value + 1e-9)
                ++weak_violations;
        }
    }
    const bool pass = solved == 20 && strong_ok == 20 && weak_violations == 0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d/20 instances solved, %d/20 strong-duality gaps <= 1e-8 "
                  "(worst %.2e), %d weak-duality violations in 2000 draws",
                  solved, strong_ok, worst_gap, weak_violations);
    report(2, "dual equals the exact LP oracle at C <= 200", pass, buf);
}

// ---- criterion 3: extremal structure of recovered and basic solutions ----
void criterion_extremality() {
    int partition_ok = 0, partition_total = 0;
    for (const auto& rec : g_records) {
        if (!rec.ok) continue;
        ++partition_total;
        if (rec.fractional <= rec.n) ++partition_ok;
    }
    // independent check on oracle basic solutions
    const auto specs = make_instances(12, 128, 10, 20260870);
    int oracle_ok = 0;
    for (const auto& s : specs) {
        const SampledDomain dom = build_domain(s.dim, s.cells_per_axis);
        const Json cfg = instance_config(s, false);
        const FunctionFamily fam = make_builtin_family(cfg.at("family"), dom);
        const RelaxedDensity dens = make_density(cfg.at("density"), s.m, dom);
        const MomentTarget target = compute_alpha(fam, dens, dom);
        const AuxiliaryField field = sample_field(
            dom, s.m, SampleModel{SampleModel::Kind::iid_gaussian, 1.0, 0},
            Rng::mix(s.seed, 3));
        const OracleSolution sol =
            oracle_solve(build_discrete_lp(fam, target, field, dom));
        if (sol.status == OracleStatus::optimal && sol.fractional_cells <= s.n)
            ++oracle_ok;
    }
    const bool pass =
        partition_total == 50 && partition_ok == 50 && oracle_ok == 12;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d/%d recovered partitions with <= n fractional cells, "
                  "12 oracle basic solutions: %d/12 within the same bound",
                  partition_ok, partition_total, oracle_ok);
    report(3, "at most n fractional cells (vertex-valued elsewhere)", pass, buf);
}

// ---- criterion 4: first-order convergence on the closed-form fixture ----
void criterion_closed_form_fixture() {
    bool pass = true;
    std::string detail;
    for (int cells : {8, 64, 512}) {
        const Json cfg{
            {"seed", 123},
            {"domain", {{"dim", 1}, {"cells_per_axis", cells}}},
            {"family", {{"source", "builtin"}, {"name", "unit_and_zero"}}},
            {"density", {{"source", "uniform"}}},
            {"field", {{"source", "builtin"}, {"name", "coordinate_ramp"}}},
        };
        const RunOutcome out = run_command("decompose", RunConfig::from_json(cfg));
        const double tol = 2.0 / cells;
        double lam_err = 1e9, val_err = 1e9;
        if (out.exit_code == kExitOk) {
            lam_err = std::abs(
                out.report.at("dual").at("lambda_star").at(0).get<double>() - 0.5);
            val_err =
                std::abs(out.report.at("dual").at("dual_value").get<double>() - 0.125);
        }
        if (lam_err > tol || val_err > tol) pass = false;
        char buf[64];
        std::snprintf(buf, sizeof buf, "C=%d: |dl|=%.1e |dD|=%.1e; ", cells,
                      lam_err, val_err);
        detail += buf;
    }
    report(4, "1-D fixture converges to lambda*=1/2, value 1/8 at rate 2/C", pass,
           detail + "tolerance 2/C");
}

// ---- criterion 5: genericity probe and exact collinear detection ----
void criterion_residuality_probe() {
    const SampledDomain dom = build_domain(1, 256);
    FunctionFamily fam;
    {
        Json spec{{"name", "random_gaussian"}, {"m", 3}, {"n", 2}, {"seed", 515}};
        fam = make_builtin_family(spec, dom);
    }
    const MomentTarget target =
        compute_alpha(fam, uniform_density(3, dom.num_cells()), dom);
    SampleModel model;
    model.kind = SampleModel::Kind::smooth_fourier;
    model.k_max = 4;
    const ProbeStats stats =
        residuality_probe(fam, target, dom, 200, model, 20260880);

    // collinear fixture: v = 2 f exactly
    const SampledDomain cdom = build_domain(1, 64);
    FunctionFamily cfam;
    {
        Json spec{{"name", "random_gaussian"}, {"m", 2}, {"n", 1}, {"seed", 516}};
        cfam = make_builtin_family(spec, cdom);
    }
    AuxiliaryField cfield;
    {
        Json spec{{"name", "collinear"}, {"lambda", {2.0}}};
        cfield = make_builtin_field(spec, cfam, cdom);
    }
    const DegeneracyReport rep = detect_degeneracy(cfield, cfam, 0, 1, cdom);
    const bool collinear_exact = !rep.constraint_degenerate &&
                                 rep.lambda_hat.size() == 1 &&
                                 rep.lambda_hat[0] == 2.0 &&
                                 rep.inlier_measure == 1.0;

    const bool pass = stats.generic_fraction >= 0.99 && collinear_exact;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "generic fraction %.3f over 200 sampled fields (>= 0.99), "
                  "collinear fixture: lambda_hat=%.17g inlier=%.17g",
                  stats.generic_fraction,
                  rep.lambda_hat.empty() ? 0.0 : rep.lambda_hat[0],
                  rep.inlier_measure);
    report(5, "sampled fields are overwhelmingly generic; exact collinear hit",
           pass, buf);
}

// ---- criterion 6: density construction bounds ----
void criterion_construction() {
    Rng outer(20260890);
    int sup_ok = 0, level_ok = 0;
    const int configs = 20;
    for (int t = 0; t < configs; ++t) {
        const int dim = 1 + t % 2;
        const int n = 1 + t % 3;
        const SampledDomain dom = build_domain(dim, dim == 1 ? 96 : 10);
        const double eta = std::exp(outer.uniform(std::log(0.02), std::log(0.5)));
        const double radius = 1.0 + 0.5 * (t % 3);
        const double eps = outer.uniform(0.2, 0.6);

        Rng data(Rng::mix(20260891, t));
        std::vector<double> w(dom.num_cells());
        std::vector<double> g(static_cast<std::size_t>(dom.num_cells()) * n);
        for (double& x : w) x = data.gaussian(2.0);
        for (double& x : g) x = data.gaussian();

        Rng prng(Rng::mix(20260892, t));
        const ScalarPerturbation sp = perturb_scalar(w, n, eta, radius, eps, dom, prng);

        double sup = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const std::int64_t block =
                static_cast<std::int64_t>(sp.values.size()) ? 0 : 0;  // unused
            (void)block;
            sup = std::max(sup, std::abs(sp.values[j] - w[j]));
        }
        if (sup <= eta) ++sup_ok;

        // every lambda on the 0.1-grid of [-N,N]^n touches at most n blocks
        const int steps = static_cast<int>(std::floor(2 * radius / 0.1)) + 1;
        std::vector<int> idx(n, 0);
        std::vector<double> lambda(n);
        const std::int64_t blocks = sp.plan.num_blocks(dim);
        bool bound_holds = true;
        bool done = false;
        while (!done) {
            for (int k = 0; k < n; ++k) lambda[k] = -radius + 0.1 * idx[k];
            int hits = 0;
            for (std::int64_t j = 0; j < blocks; ++j) {
                const auto p = sp.plan.anchor_point(dim, j);
                const int cell = dom.cell_containing({p.data(), p.size()});
                double dot = 0.0;
                for (int k = 0; k < n; ++k)
                    dot += lambda[k] * g[static_cast<std::size_t>(cell) * n + k];
                if (std::abs(sp.plan.block_values[static_cast<std::size_t>(j)] -
                             dot) <= 1e-8)
                    ++hits;
            }
            if (hits > n) bound_holds = false;
            done = true;
            for (int k = 0; k < n; ++k) {
                if (++idx[k] < steps) {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
        }
        if (bound_holds) ++level_ok;
    }
    const bool pass = sup_ok == configs && level_ok == configs;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d/%d configs within eta in sup norm, %d/%d with <= n "
                  "near-level blocks on the 0.1-spaced multiplier grid",
                  sup_ok, configs, level_ok, configs);
    report(6, "perturbation overlay: sup-norm and level-set bounds", pass, buf);
}

// ---- criterion 7: subgradient against finite differences ----
void criterion_subgradient() {
    int instances_ok = 0;
    const int total = 50;
    for (int i = 0; i < total; ++i) {
        const int m = 2 + i % 4, n = 1 + i % 3;
        const SampledDomain dom = build_domain(1, 64);
        Rng data(Rng::mix(20260900, i));
        FunctionFamily fam;
        fam.family_size = m;
        fam.value_dim = n;
        fam.values.resize(static_cast<std::size_t>(dom.num_cells()) * m * n);
        for (double& v : fam.values) v = data.gaussian();
        AuxiliaryField field;
        field.family_size = m;
        field.values.resize(static_cast<std::size_t>(dom.num_cells()) * m);
        for (double& v : field.values) v = data.gaussian();
        MomentTarget target =
            compute_alpha(fam, uniform_density(m, dom.num_cells()), dom);

        Rng lrng(Rng::mix(20260901, i));
        int checked = 0;
        bool all_ok = true;
        int guard = 0;
        while (checked < 20 && ++guard < 2000) {
            std::vector<double> lambda(n);
            for (double& l : lambda) l = lrng.uniform(-2.0, 2.0);
            // smooth point: unique argmin everywhere at a safe margin
            bool smooth = true;
            for (int c = 0; c < dom.num_cells() && smooth; ++c) {
                double best = 1e300, second = 1e300;
                for (int j = 0; j < m; ++j) {
                    double v = field.value(c, j);
                    for (int k = 0; k < n; ++k)
                        v -= lambda[k] * fam.value(c, j)[k];
                    if (v < best) {
                        second = best;
                        best = v;
                    } else if (v < second) {
                        second = v;
                    }
                }
                if (second - best < 1e-4) smooth = false;
            }
            if (!smooth) continue;
            ++checked;
            const double base = dual_value(lambda, fam, field, target, dom);
            const auto grad = dual_subgradient(lambda, fam, field, target, dom);
            for (int k = 0; k < n; ++k) {
                auto shifted = lambda;
                shifted[k] += 1e-7;
                const double fd =
                    (dual_value(shifted, fam, field, target, dom) - base) / 1e-7;
                if (std::abs(fd - grad[k]) > 1e-6) all_ok = false;
            }
        }
        if (checked == 20 && all_ok) ++instances_ok;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "%d/%d instances with 20 finite-difference checks within 1e-6",
                  instances_ok, total);
    report(7, "supergradient matches finite differences at smooth points",
           instances_ok == total, buf);
}

// ---- criterion 8: countable truncation mode ----
void criterion_countable() {
    const std::string dir = out_dir();
    const Json cfg{
        {"seed", 31},
        {"domain", {{"dim", 1}, {"cells_per_axis", 64}}},
        {"countable", {{"name", "geometric"}, {"eps_tail", 1e-3}}},
        {"field",
         {{"source", "sample"}, {"model", "smooth_fourier"}, {"seed", 32}}},
        {"output", {{"partition", dir + "/countable_part.csv"}}},
    };
    const RunOutcome out = run_command("decompose", RunConfig::from_json(cfg));
    bool pass = out.exit_code == kExitOk;
    double tail = 0.0, ref_err = 1e9;
    if (pass) {
        tail = out.report.at("truncation").at("tail_error").get<double>();
        pass = tail <= 1e-3;
        // reference: the untruncated geometric family with matched weights
        // sums to exactly 1/3
        const double moment =
            out.report.at("partition").at("moment").at(0).get<double>();
        ref_err = std::abs(moment - 1.0 / 3.0);
        pass = pass && ref_err <= 1e-8 * (1.0 + 1.0 / 3.0) + tail;
    }

    bool rejected = false;
    try {
        const Json bad{
            {"seed", 31},
            {"domain", {{"dim", 1}, {"cells_per_axis", 8}}},
            {"countable", {{"name", "flat_tail"}, {"eps_tail", 1e-3}}},
        };
        run_command("decompose", RunConfig::from_json(bad));
    } catch (const EnvelopeHypothesisError&) {
        rejected = true;
    }
    pass = pass && rejected;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "tail_error %.3e <= 1e-3, reference moment error %.3e <= "
                  "1e-8*(1+|alpha|)+tail, undecaying tail rejected: %s",
                  tail, ref_err, rejected ? "yes" : "no");
    report(8, "countable truncation with reported tail error", pass, buf);
}

// ---- criterion 9: byte-identical determinism modulo timings ----
void criterion_determinism() {
    auto strip = [](Json j) {
        j.erase("timings");
        return j.dump();
    };
    const Json cfg{
        {"seed", 77},
        {"domain", {{"dim", 2}, {"cells_per_axis", 12}}},
        {"family",
         {{"source", "builtin"}, {"name", "random_gaussian"}, {"m", 4}, {"n", 2},
          {"seed", 78}}},
        {"density", {{"source", "random"}, {"seed", 79}}},
        {"field", {{"source", "sample"}, {"model", "iid_gaussian"}, {"seed", 80}}},
    };
    const std::string a = strip(run_command("decompose", RunConfig::from_json(cfg)).report);
    const std::string b = strip(run_command("decompose", RunConfig::from_json(cfg)).report);

    const Json pcfg{
        {"seed", 81},
        {"domain", {{"dim", 1}, {"cells_per_axis", 48}}},
        {"family",
         {{"source", "builtin"}, {"name", "random_gaussian"}, {"m", 3}, {"n", 1},
          {"seed", 82}}},
        {"density", {{"source", "uniform"}}},
        {"probe", {{"trials", 10}}},
    };
    const std::string pa = strip(run_command("probe", RunConfig::from_json(pcfg)).report);
    const std::string pb = strip(run_command("probe", RunConfig::from_json(pcfg)).report);

    const bool pass = a == b && pa == pb;
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "decompose reports identical: %s; probe reports identical: %s",
                  a == b ? "yes" : "no", pa == pb ? "yes" : "no");
    report(9, "identical config and seed reproduce reports byte for byte", pass,
           buf);
}

}  // namespace

int main() {
    criterion_lyapunov_identity();
    criterion_strong_duality();
    criterion_extremality();
    criterion_closed_form_fixture();
    criterion_residuality_probe();
    criterion_construction();
    criterion_subgradient();
    criterion_countable();
    criterion_determinism();
    if (g_failures == 0) {
        std::printf("acceptance: all 9 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
