#include "lyap/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>

#include "lyap/cli/builtins.hpp"
#include "lyap/cli/table_io.hpp"
#include "lyap/dual.hpp"
#include "lyap/genericity.hpp"
#include "lyap/lp_oracle.hpp"
#include "lyap/rng.hpp"

namespace lyap::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Instance {
    SampledDomain dom;
    FunctionFamily family;
    std::optional<RelaxedDensity> theta_bar;
    MomentTarget target;
    bool truncated = false;
    int truncation_index = 0;
    double tail_error = 0.0;
};

SampledDomain domain_from(const RunConfig& cfg) {
    const Json& d = cfg.doc.at("domain");
    return build_domain(d.at("dim").get<int>(), d.at("cells_per_axis").get<int>(),
                        d.value("cell_cap", kDefaultCellCap));
}

Instance build_instance(const RunConfig& cfg, bool need_target) {
    Instance inst;
    inst.dom = domain_from(cfg);

    if (cfg.doc.contains("countable")) {
        const Json& cj = cfg.doc.at("countable");
        const CountableBuiltin cb = make_countable_builtin(cj);
        const TruncationResult tr =
            truncate_countable(cb.spec, inst.dom, cj.at("eps_tail").get<double>());
        inst.family = tr.family;
        inst.truncated = true;
        inst.truncation_index = tr.truncation_index;
        inst.tail_error = tr.tail_error;
        if (!cfg.doc.contains("alpha")) {
            const std::string density_source =
                cfg.doc.contains("density")
                    ? cfg.doc.at("density").at("source").get<std::string>()
                    : "matched";
            inst.theta_bar =
                density_source == "matched"
                    ? cb.matched_density(tr.truncation_index, inst.dom)
                    : make_density(cfg.doc.at("density"), inst.family.family_size,
                                   inst.dom);
        }
    } else {
        const Json& fj = cfg.doc.at("family");
        const std::string source = fj.at("source").get<std::string>();
        if (source == "builtin")
            inst.family = make_builtin_family(fj, inst.dom);
        else if (source == "csv")
            inst.family = read_family_csv(fj.at("path").get<std::string>(), inst.dom);
        else
            throw ValidationError("config: unknown family source '" + source + "'");
        if (cfg.doc.contains("density"))
            inst.theta_bar = make_density(cfg.doc.at("density"),
                                          inst.family.family_size, inst.dom);
    }

    if (cfg.doc.contains("alpha")) {
        inst.target.alpha = cfg.doc.at("alpha").get<std::vector<double>>();
        if (static_cast<int>(inst.target.alpha.size()) != inst.family.value_dim)
            throw ValidationError("config: alpha dimension mismatch");
        inst.target.source_note = "literal";
    } else if (inst.theta_bar) {
        inst.target = compute_alpha(inst.family, *inst.theta_bar, inst.dom);
        inst.target.source_note = "density";
    } else if (need_target) {
        throw ValidationError("config: provide exactly one of density or alpha");
    }
    return inst;
}

AuxiliaryField acquire_field(const RunConfig& cfg, const FunctionFamily& family,
                             const SampledDomain& dom) {
    Json fj = cfg.doc.value("field", Json::object());
    if (!fj.contains("source")) {
        fj["source"] = "sample";
        fj["model"] = "smooth_fourier";
    }
    const std::string source = fj.at("source").get<std::string>();
    if (source == "csv") {
        AuxiliaryField f = read_field_csv(fj.at("path").get<std::string>(), dom);
        if (f.family_size != family.family_size)
            throw ValidationError("field csv: component count mismatch");
        return f;
    }
    if (source == "builtin") return make_builtin_field(fj, family, dom);
    if (source == "sample") {
        SampleModel model;
        const std::string name = fj.value("model", std::string("smooth_fourier"));
        if (name == "iid_gaussian")
            model.kind = SampleModel::Kind::iid_gaussian;
        else if (name == "smooth_fourier")
            model.kind = SampleModel::Kind::smooth_fourier;
        else
            throw ValidationError("field: unknown sample model '" + name + "'");
        model.sigma = fj.value("sigma", 1.0);
        model.k_max = fj.value("k_max", 4);
        const std::uint64_t seed =
            fj.contains("seed") ? fj.at("seed").get<std::uint64_t>()
                                : Rng::mix(cfg.seed(), 0x666c64);
        return sample_field(dom, family.family_size, model, seed);
    }
    throw ValidationError("config: unknown field source '" + source + "'");
}

DualSolveConfig dual_config(const RunConfig& cfg) {
    DualSolveConfig dc;
    const Json& dj = cfg.doc.at("dual");
    dc.box_radius = dj.at("box_radius").get<double>();
    dc.max_iterations = dj.at("max_iterations").get<int>();
    dc.gap_tol = cfg.gap_tol();
    dc.tie_tol = cfg.tie_tol();
    dc.force_polyak = dj.value("force_polyak", false);
    return dc;
}

DetectConfig detect_config(const RunConfig& cfg) {
    DetectConfig dc;
    const Json& dj = cfg.doc.at("detect");
    dc.residual_tol = dj.at("residual_tol").get<double>();
    dc.trials = dj.at("trials").get<int>();
    dc.measure_threshold = dj.at("measure_threshold").get<double>();
    dc.seed = Rng::mix(cfg.seed(), 0x646574656374);
    return dc;
}

SimplexOptions simplex_options(const RunConfig& cfg) {
    SimplexOptions opts;
    opts.feas_tol = cfg.feas_tol();
    return opts;
}

std::optional<std::string> output_path(const RunConfig& cfg, const char* key) {
    if (!cfg.doc.contains("output")) return std::nullopt;
    const Json& out = cfg.doc.at("output");
    if (!out.contains(key)) return std::nullopt;
    return out.at(key).get<std::string>();
}

Json report_skeleton(const std::string& command, const RunConfig& cfg) {
    Json rep;
    rep["format_version"] = kFormatVersion;
    rep["command"] = command;
    rep["seed"] = cfg.seed();
    rep["config"] = cfg.doc;
    return rep;
}

Json degeneracy_json(const DegeneracyReport& r) {
    Json j;
    j["pair"] = {r.i1 + 1, r.i2 + 1};
    j["constraint_degenerate"] = r.constraint_degenerate;
    j["lambda_hat"] = r.lambda_hat;
    j["inlier_measure"] = r.inlier_measure;
    j["inlier_cell_count"] = static_cast<int>(r.inlier_cells.size());
    j["residual_tol"] = r.residual_tol;
    return j;
}

Json certificate_json(const DualCertificate& cert) {
    Json j;
    j["lambda_star"] = cert.lambda_star;
    j["dual_value"] = cert.dual_value;
    j["iterations"] = cert.iterations;
    j["gap"] = cert.gap;
    j["tie_measure"] = cert.tie_measure;
    j["tie_cell_count"] = static_cast<int>(cert.tie_cells.size());
    j["subgradient_norm"] = cert.subgradient_norm_at_opt;
    j["converged"] = cert.converged;
    j["box_bound_active"] = cert.box_bound_active;
    j["used_polyak_fallback"] = cert.used_polyak_fallback;
    return j;
}

Json partition_json(const PartitionReport& rep) {
    Json j;
    j["moment"] = rep.moment;
    j["moment_error"] = rep.moment_error;
    if (rep.has_objective) j["objective_value"] = rep.objective_value;
    j["fractional_cells"] = rep.fractional_cells;
    j["extremal_fraction"] = rep.extremal_fraction;
    j["per_index_measure"] = rep.per_index_measure;
    return j;
}

void emit_outputs(const RunConfig& cfg, const SampledDomain& dom,
                  const Partition& part, const FunctionFamily& family,
                  const AuxiliaryField& field, const DualCertificate& cert,
                  Json& rep) {
    Json outputs = Json::object();
    if (const auto p = output_path(cfg, "partition")) {
        write_partition_csv(*p, part);
        outputs["partition_csv"] = *p;
    }
    if (const auto p = output_path(cfg, "plot_data")) {
        write_plot_csv(*p, dom, part, family, field, cert.lambda_star,
                       cfg.tie_tol());
        outputs["plot_csv"] = *p;
    }
    if (const auto p = output_path(cfg, "field")) {
        write_field_csv(*p, field);
        outputs["field_csv"] = *p;
    }
    if (!outputs.empty()) rep["outputs"] = std::move(outputs);
}

RunOutcome cmd_alpha(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Instance inst = build_instance(cfg, false);
    if (!inst.theta_bar)
        throw ValidationError("alpha: a density source is required");
    RunOutcome out;
    out.report = report_skeleton("alpha", cfg);
    out.report["alpha"] = inst.target.alpha;
    if (inst.truncated) {
        out.report["truncation"] = {{"index", inst.truncation_index},
                                    {"tail_error", inst.tail_error}};
    }
    out.report["timings"] = {{"total_ms", ms_since(t0)}};
    return out;
}

RunOutcome cmd_oracle(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Instance inst = build_instance(cfg, true);
    const AuxiliaryField field = acquire_field(cfg, inst.family, inst.dom);

    RunOutcome out;
    out.report = report_skeleton("oracle", cfg);
    out.report["alpha"] = inst.target.alpha;
    out.report["field_seed"] = field.seed;

    const DiscreteLP lp = build_discrete_lp(inst.family, inst.target, field, inst.dom);
    const OracleSolution sol = oracle_solve(lp, simplex_options(cfg));
    Json oj;
    oj["status"] = sol.status == OracleStatus::optimal ? "optimal"
                   : sol.status == OracleStatus::infeasible
                       ? "infeasible"
                       : "numerically_suspect";
    if (sol.status == OracleStatus::optimal) {
        oj["objective_value"] = sol.objective_value;
        oj["fractional_cells"] = sol.fractional_cells;
        oj["constraint_residual"] = sol.constraint_residual;
    }
    oj["iterations"] = sol.iterations;
    out.report["oracle"] = std::move(oj);
    out.report["timings"] = {{"total_ms", ms_since(t0)}};
    if (sol.status == OracleStatus::infeasible) out.exit_code = kExitInfeasible;
    if (sol.status == OracleStatus::numerically_suspect)
        out.exit_code = kExitNonconverged;
    return out;
}

RunOutcome cmd_decompose(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Instance inst = build_instance(cfg, true);

    RunOutcome out;
    out.report = report_skeleton("decompose", cfg);
    out.report["alpha"] = inst.target.alpha;
    if (inst.truncated)
        out.report["truncation"] = {{"index", inst.truncation_index},
                                    {"tail_error", inst.tail_error}};

    Json timings;
    // feasibility gate
    if (!cfg.doc.at("dual").at("trust_feasible").get<bool>()) {
        const auto tf = Clock::now();
        const Phase1Report ph = phase1_feasible(inst.family, inst.target, inst.dom,
                                                simplex_options(cfg));
        timings["phase1_ms"] = ms_since(tf);
        out.report["feasibility"] = {{"feasible", ph.feasible},
                                     {"hull_distance", ph.distance}};
        if (!ph.feasible) {
            out.exit_code = kExitInfeasible;
            out.report["timings"] = std::move(timings);
            return out;
        }
    }

    AuxiliaryField field = acquire_field(cfg, inst.family, inst.dom);
    out.report["field"] = {{"provenance",
                            field.provenance == AuxiliaryField::Provenance::user
                                ? "user"
                                : "random_seed"},
                           {"seed", field.seed}};

    // genericity gate with the construction as repair
    const auto tg = Clock::now();
    const DetectConfig dc = detect_config(cfg);
    GenericityVerdict verdict = is_generic(field, inst.family, inst.dom, dc);
    Json gj;
    gj["generic_on_input"] = verdict.generic;
    gj["threshold"] = verdict.threshold;
    gj["constraint_degenerate_pairs"] = verdict.constraint_degenerate_pairs;
    gj["worst"] = degeneracy_json(verdict.worst);
    if (!verdict.generic) {
        const Json& pj = cfg.doc.at("perturb");
        const double eps = pj.at("eps").get<double>() > 0.0
                               ? pj.at("eps").get<double>()
                               : verdict.threshold;
        try {
            PerturbResult pr = perturb_to_generic(
                field, inst.family, pj.at("eta").get<double>(),
                pj.at("multiplier_radius").get<double>(), eps, inst.dom,
                Rng::mix(cfg.seed(), 0x7065727462), dc);
            field = std::move(pr.field);
            gj["perturbed"] = true;
            gj["perturb_attempts"] = pr.attempts;
            gj["blocks_per_axis"] = pr.plans.front().blocks_per_axis;
            gj["grid_aligned"] = pr.plans.front().grid_aligned;
        } catch (const PerturbError& e) {
            gj["perturbed"] = false;
            gj["perturb_error"] = e.what();
            gj["perturb_worst"] = degeneracy_json(e.worst);
            out.report["genericity"] = std::move(gj);
            out.report["timings"] = std::move(timings);
            out.exit_code = kExitUsage;
            return out;
        }
    } else {
        gj["perturbed"] = false;
    }
    out.report["genericity"] = std::move(gj);
    timings["genericity_ms"] = ms_since(tg);

    // dual maximization
    const auto td = Clock::now();
    const DualCertificate cert =
        maximize_dual(inst.family, field, inst.target, inst.dom, dual_config(cfg));
    timings["dual_ms"] = ms_since(td);
    out.report["dual"] = certificate_json(cert);
    if (!cert.converged) {
        out.exit_code = kExitNonconverged;
        out.report["timings"] = std::move(timings);
        return out;
    }

    // bang-bang recovery and audit
    const auto tr = Clock::now();
    Partition part;
    try {
        part = recover_bang_bang(cert, inst.family, field, inst.target, inst.dom,
                                 cfg.feas_tol());
    } catch (const TieResolutionError& e) {
        out.exit_code = kExitNonconverged;
        out.report["recovery_error"] = e.what();
        out.report["timings"] = std::move(timings);
        return out;
    }
    const PartitionReport prep =
        verify_partition(part, inst.family, inst.target, inst.dom, &field);
    timings["recover_ms"] = ms_since(tr);
    out.report["partition"] = partition_json(prep);

    emit_outputs(cfg, inst.dom, part, inst.family, field, cert, out.report);
    timings["total_ms"] = ms_since(t0);
    out.report["timings"] = std::move(timings);
    return out;
}

RunOutcome cmd_probe(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Instance inst = build_instance(cfg, true);
    const Json pj = cfg.doc.value("probe", Json::object());
    const int trials = pj.value("trials", 200);
    SampleModel model;
    const std::string name = pj.value("model", std::string("smooth_fourier"));
    if (name == "iid_gaussian")
        model.kind = SampleModel::Kind::iid_gaussian;
    else if (name == "smooth_fourier")
        model.kind = SampleModel::Kind::smooth_fourier;
    else
        throw ValidationError("probe: unknown sample model '" + name + "'");
    model.sigma = pj.value("sigma", 1.0);
    model.k_max = pj.value("k_max", 4);

    const ProbeStats stats =
        residuality_probe(inst.family, inst.target, inst.dom, trials, model,
                          cfg.seed(), dual_config(cfg), detect_config(cfg));

    RunOutcome out;
    out.report = report_skeleton("probe", cfg);
    out.report["alpha"] = inst.target.alpha;
    Json sj;
    sj["trials"] = stats.trials;
    sj["model"] = name;
    sj["generic_count"] = stats.generic_count;
    sj["generic_fraction"] = stats.generic_fraction;
    sj["nonconverged"] = stats.nonconverged;
    sj["constraint_degenerate_trials"] = stats.constraint_degenerate_trials;
    sj["mean_tie_measure"] = stats.mean_tie_measure;
    sj["max_tie_measure"] = stats.max_tie_measure;
    sj["tie_measures"] = stats.tie_measures;
    sj["fractional_counts"] = stats.fractional_counts;
    out.report["probe"] = std::move(sj);
    out.report["timings"] = {{"total_ms", ms_since(t0)}};
    return out;
}

RunOutcome cmd_detect(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Instance inst = build_instance(cfg, false);
    const AuxiliaryField field = acquire_field(cfg, inst.family, inst.dom);
    const Json& dj = cfg.doc.at("detect");
    int i1 = 1, i2 = 2;
    if (dj.contains("pair")) {
        i1 = dj.at("pair").at(0).get<int>();
        i2 = dj.at("pair").at(1).get<int>();
    }
    const DegeneracyReport rep = detect_degeneracy(
        field, inst.family, i1 - 1, i2 - 1, inst.dom, detect_config(cfg));
    RunOutcome out;
    out.report = report_skeleton("detect", cfg);
    out.report["degeneracy"] = degeneracy_json(rep);
    out.report["timings"] = {{"total_ms", ms_since(t0)}};
    return out;
}

RunOutcome cmd_perturb(const RunConfig& cfg) {
    const auto t0 = Clock::now();
    Instance inst = build_instance(cfg, false);
    const AuxiliaryField field = acquire_field(cfg, inst.family, inst.dom);
    const Json& pj = cfg.doc.at("perturb");
    const DetectConfig dc = detect_config(cfg);
    const double threshold =
        dc.measure_threshold > 0.0
            ? dc.measure_threshold
            : 10.0 * inst.family.value_dim / inst.dom.num_cells();
    const double eps =
        pj.at("eps").get<double>() > 0.0 ? pj.at("eps").get<double>() : threshold;

    RunOutcome out;
    out.report = report_skeleton("perturb", cfg);
    try {
        const PerturbResult pr = perturb_to_generic(
            field, inst.family, pj.at("eta").get<double>(),
            pj.at("multiplier_radius").get<double>(), eps, inst.dom,
            Rng::mix(cfg.seed(), 0x7065727462), dc);
        double sup = 0.0;
        for (std::size_t j = 0; j < field.values.size(); ++j)
            sup = std::max(sup, std::abs(pr.field.values[j] - field.values[j]));
        Json gj;
        gj["attempts"] = pr.attempts;
        gj["blocks_per_axis"] = pr.plans.front().blocks_per_axis;
        gj["grid_aligned"] = pr.plans.front().grid_aligned;
        gj["eta"] = pj.at("eta").get<double>();
        gj["eps"] = eps;
        gj["sup_distance"] = sup;
        gj["generic"] = pr.verdict.generic;
        gj["worst"] = degeneracy_json(pr.verdict.worst);
        out.report["perturbation"] = std::move(gj);
        if (const auto p = output_path(cfg, "field")) {
            write_field_csv(*p, pr.field);
            out.report["outputs"] = {{"field_csv", *p}};
        }
    } catch (const PerturbError& e) {
        out.report["perturb_error"] = e.what();
        out.report["perturb_worst"] = degeneracy_json(e.worst);
        out.exit_code = kExitUsage;
    }
    out.report["timings"] = {{"total_ms", ms_since(t0)}};
    return out;
}

}  // namespace

RunOutcome run_command(const std::string& command, const RunConfig& cfg) {
    RunOutcome out;
    if (command == "decompose")
        out = cmd_decompose(cfg);
    else if (command == "oracle")
        out = cmd_oracle(cfg);
    else if (command == "probe")
        out = cmd_probe(cfg);
    else if (command == "detect")
        out = cmd_detect(cfg);
    else if (command == "perturb")
        out = cmd_perturb(cfg);
    else if (command == "alpha")
        out = cmd_alpha(cfg);
    else
        throw ValidationError("unknown command '" + command + "'");

    if (const auto p = output_path(cfg, "report")) {
        std::ofstream f(*p);
        if (!f) throw IoError("cannot write report " + *p);
        f << out.report.dump(2) << "\n";
    }
    return out;
}

}  // namespace lyap::cli
