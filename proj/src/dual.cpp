#include "lyap/dual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyap/lp_oracle.hpp"

namespace lyap {

namespace {

void check_shapes(const std::vector<double>& lambda, const FunctionFamily& family,
                  const AuxiliaryField& field, const MomentTarget& target,
                  const SampledDomain& dom) {
    family.validate(dom);
    field.validate(dom);
    if (field.family_size != family.family_size)
        throw ValidationError("dual: field/family size mismatch");
    if (static_cast<int>(lambda.size()) != family.value_dim ||
        target.value_dim() != family.value_dim)
        throw ValidationError("dual: multiplier/target dimension mismatch");
}

double reduced_cost(const FunctionFamily& family, const AuxiliaryField& field,
                    const std::vector<double>& lambda, int c, int i) {
    double r = field.value(c, i);
    const auto f = family.value(c, i);
    for (int k = 0; k < family.value_dim; ++k) r -= lambda[k] * f[k];
    return r;
}

int argmin_index(const FunctionFamily& family, const AuxiliaryField& field,
                 const std::vector<double>& lambda, int c) {
    int best = 0;
    double best_val = reduced_cost(family, field, lambda, c, 0);
    for (int i = 1; i < family.family_size; ++i) {
        const double v = reduced_cost(family, field, lambda, c, i);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    return best;  // lowest index wins ties
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double dual_value(const std::vector<double>& lambda, const FunctionFamily& family,
                  const AuxiliaryField& field, const MomentTarget& target,
                  const SampledDomain& dom) {
    check_shapes(lambda, family, field, target, dom);
    double value = 0.0;
    for (int k = 0; k < family.value_dim; ++k) value += lambda[k] * target.alpha[k];
    for (int c = 0; c < dom.num_cells(); ++c) {
        double cell_min = reduced_cost(family, field, lambda, c, 0);
        for (int i = 1; i < family.family_size; ++i)
            cell_min = std::min(cell_min, reduced_cost(family, field, lambda, c, i));
        value += dom.measure(c) * cell_min;
    }
    return value;
}

std::vector<double> dual_subgradient(const std::vector<double>& lambda,
                                     const FunctionFamily& family,
                                     const AuxiliaryField& field,
                                     const MomentTarget& target,
                                     const SampledDomain& dom) {
    check_shapes(lambda, family, field, target, dom);
    std::vector<double> g = target.alpha;
    for (int c = 0; c < dom.num_cells(); ++c) {
        const int i = argmin_index(family, field, lambda, c);
        const auto f = family.value(c, i);
        const double w = dom.measure(c);
        for (int k = 0; k < family.value_dim; ++k) g[k] -= w * f[k];
    }
    return g;
}

std::vector<TieCell> tie_report(const std::vector<double>& lambda,
                                const FunctionFamily& family,
                                const AuxiliaryField& field,
                                const SampledDomain& dom, double tie_tol) {
    std::vector<TieCell> ties;
    const int m = family.family_size;
    std::vector<double> costs(m);
    for (int c = 0; c < dom.num_cells(); ++c) {
        double cell_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            costs[i] = reduced_cost(family, field, lambda, c, i);
            cell_min = std::min(cell_min, costs[i]);
        }
        TieCell tc;
        tc.cell = c;
        for (int i = 0; i < m; ++i)
            if (costs[i] - cell_min <= tie_tol) tc.tied.push_back(i);
        if (tc.tied.size() >= 2) ties.push_back(std::move(tc));
    }
    return ties;
}

namespace {

struct Cut {
    double value = 0.0;               // D at the anchor
    std::vector<double> gradient;
    std::vector<double> anchor;
};

struct MasterSolution {
    bool ok = false;
    std::vector<double> lambda;
    double upper_bound = 0.0;
};

// Kelley master: maximize t subject to the accumulated overestimating cuts
// and the trust-region box. Solved in shifted nonnegative variables
// (lambda + radius, t - best) by the dense simplex.
MasterSolution solve_master(const std::vector<Cut>& cuts, int n, double radius,
                            double best) {
    DenseLP lp;
    lp.num_vars = n + 1;
    lp.objective.assign(n + 1, 0.0);
    lp.objective[n] = -1.0;  // maximize t'

    const int rows = static_cast<int>(cuts.size()) + n;
    lp.ub_coeffs.assign(static_cast<std::size_t>(rows) * (n + 1), 0.0);
    lp.ub_rhs.assign(rows, 0.0);
    for (std::size_t j = 0; j < cuts.size(); ++j) {
        double* row = lp.ub_coeffs.data() + j * (n + 1);
        double rhs = cuts[j].value - best;
        for (int k = 0; k < n; ++k) {
            row[k] = -cuts[j].gradient[k];
            rhs += cuts[j].gradient[k] * (-radius - cuts[j].anchor[k]);
        }
        row[n] = 1.0;
        lp.ub_rhs[j] = rhs;
    }
    for (int k = 0; k < n; ++k) {
        double* row = lp.ub_coeffs.data() + (cuts.size() + k) * (n + 1);
        row[k] = 1.0;
        lp.ub_rhs[cuts.size() + k] = 2.0 * radius;
    }

    SimplexOptions opts;
    const SimplexResult sr = simplex_solve(lp, opts);
    MasterSolution ms;
    if (sr.status != SimplexStatus::optimal) return ms;
    ms.ok = true;
    ms.lambda.assign(n, 0.0);
    for (int k = 0; k < n; ++k) ms.lambda[k] = sr.x[k] - radius;
    ms.upper_bound = sr.x[n] + best;
    return ms;
}

}  // namespace

DualCertificate maximize_dual(const FunctionFamily& family,
                              const AuxiliaryField& field,
                              const MomentTarget& target,
                              const SampledDomain& dom,
                              const DualSolveConfig& cfg) {
    const int n = family.value_dim;
    DualCertificate cert;

    auto evaluate = [&](const std::vector<double>& lambda) {
        Cut cut;
        cut.anchor = lambda;
        cut.value = dual_value(lambda, family, field, target, dom);
        cut.gradient = dual_subgradient(lambda, family, field, target, dom);
        return cut;
    };

    double radius = cfg.box_radius;
    int enlargements = 0;

    std::vector<Cut> cuts;
    std::vector<double> best_lambda(n, 0.0);
    Cut last = evaluate(best_lambda);
    double best = last.value;
    cuts.push_back(last);
    ++cert.iterations;

    double upper = std::numeric_limits<double>::infinity();
    bool polyak_mode = cfg.force_polyak;
    cert.used_polyak_fallback = cfg.force_polyak;
    double polyak_level = 0.0;
    int polyak_stall = 0;

    while (cert.iterations < cfg.max_iterations) {
        std::vector<double> next;
        if (!polyak_mode) {
            const MasterSolution ms = solve_master(cuts, n, radius, best);
            if (!ms.ok) {
                // master degenerated: fall back to Polyak steps
                polyak_mode = true;
                cert.used_polyak_fallback = true;
                continue;
            }
            upper = std::min(upper, ms.upper_bound);
            if (upper - best <= cfg.gap_tol * (1.0 + std::abs(best))) {
                // converged inside the box; enlarge and continue if the
                // optimum leans on the trust region edge
                bool on_edge = false;
                for (double l : best_lambda)
                    if (std::abs(l) >= radius * (1.0 - 1e-9)) on_edge = true;
                if (on_edge && enlargements < cfg.max_box_enlargements) {
                    radius *= 10.0;
                    ++enlargements;
                    upper = std::numeric_limits<double>::infinity();
                    continue;
                }
                cert.converged = true;
                cert.box_bound_active = on_edge;
                break;
            }
            next = ms.lambda;
        } else {
            // Polyak step from the last evaluated point, aiming at a level
            // best + delta with delta halved on stalls
            if (polyak_level <= 0.0)
                polyak_level = std::isfinite(upper) ? std::max(upper - best, 1e-6)
                                                    : 1.0 + std::abs(best);
            const double gn = norm2(last.gradient);
            if (gn <= 1e-14) {
                cert.converged = true;
                break;
            }
            const double level = best + polyak_level;
            const double step = std::max(level - last.value, 0.0) / (gn * gn);
            next = last.anchor;
            for (int k = 0; k < n; ++k) {
                next[k] += step * last.gradient[k];
                next[k] = std::clamp(next[k], -radius, radius);
            }
            if (++polyak_stall > 20) {
                polyak_level *= 0.5;
                polyak_stall = 0;
                if (polyak_level <= cfg.gap_tol * (1.0 + std::abs(best))) {
                    cert.converged =
                        norm2(dual_subgradient(best_lambda, family, field, target,
                                               dom)) <= 1e-12;
                    break;
                }
            }
        }

        last = evaluate(next);
        ++cert.iterations;
        if (last.value > best + 1e-15 * (1.0 + std::abs(best))) {
            best = last.value;
            best_lambda = next;
            polyak_stall = 0;
        }
        cuts.push_back(last);
    }

    cert.lambda_star = best_lambda;
    cert.dual_value = dual_value(best_lambda, family, field, target, dom);
    cert.gap = std::isfinite(upper) ? upper - best : std::numeric_limits<double>::quiet_NaN();
    cert.subgradient_norm_at_opt =
        norm2(dual_subgradient(best_lambda, family, field, target, dom));
    cert.tie_cells = tie_report(best_lambda, family, field, dom, cfg.tie_tol);
    cert.tie_measure = 0.0;
    for (const TieCell& tc : cert.tie_cells) cert.tie_measure += dom.measure(tc.cell);
    return cert;
}

Partition recover_bang_bang(const DualCertificate& cert,
                            const FunctionFamily& family,
                            const AuxiliaryField& field,
                            const MomentTarget& target,
                            const SampledDomain& dom,
                            double feas_tol) {
    check_shapes(cert.lambda_star, family, field, target, dom);
    const int C = dom.num_cells();
    const int m = family.family_size;
    const int n = family.value_dim;

    Partition part;
    part.family_size = m;
    part.assignment.assign(C, -1);

    // the certificate already carries the margin structure at lambda*
    const std::vector<TieCell>& ties = cert.tie_cells;
    std::vector<char> is_tied(C, 0);
    for (const TieCell& tc : ties) is_tied[tc.cell] = 1;

    std::vector<double> residual = target.alpha;
    for (int c = 0; c < C; ++c) {
        if (is_tied[c]) continue;
        const int i = argmin_index(family, field, cert.lambda_star, c);
        part.assignment[c] = i;
        const auto f = family.value(c, i);
        for (int k = 0; k < n; ++k) residual[k] -= dom.measure(c) * f[k];
    }

    const double alpha_scale = 1.0 + norm2(target.alpha);
    if (ties.empty()) {
        if (norm2(residual) > feas_tol * alpha_scale)
            throw TieResolutionError(
                "recover_bang_bang: no tied cells but the assigned moment "
                "misses the target by " + std::to_string(norm2(residual)) +
                "; the dual certificate looks unconverged");
        return part;
    }

    // exact tie LP over the tied cells only
    int num_vars = 0;
    std::vector<std::pair<int, int>> var_map;  // (cell, index)
    for (const TieCell& tc : ties)
        for (int i : tc.tied) var_map.emplace_back(tc.cell, i), ++num_vars;

    DenseLP lp;
    lp.num_vars = num_vars;
    lp.objective.assign(num_vars, 0.0);
    const int eq_rows = n + static_cast<int>(ties.size());
    lp.eq_coeffs.assign(static_cast<std::size_t>(eq_rows) * num_vars, 0.0);
    lp.eq_rhs.assign(eq_rows, 0.0);
    for (int v = 0; v < num_vars; ++v) {
        const auto [c, i] = var_map[v];
        const double w = dom.measure(c);
        lp.objective[v] = w * field.value(c, i);
        const auto f = family.value(c, i);
        for (int k = 0; k < n; ++k)
            lp.eq_coeffs[static_cast<std::size_t>(k) * num_vars + v] = w * f[k];
    }
    for (int k = 0; k < n; ++k) lp.eq_rhs[k] = residual[k];
    for (std::size_t tcell = 0; tcell < ties.size(); ++tcell) {
        const int row = n + static_cast<int>(tcell);
        lp.eq_rhs[row] = 1.0;
        for (int v = 0; v < num_vars; ++v)
            if (var_map[v].first == ties[tcell].cell)
                lp.eq_coeffs[static_cast<std::size_t>(row) * num_vars + v] = 1.0;
    }

    SimplexOptions opts;
    const SimplexResult sr = simplex_solve(lp, opts);
    if (sr.status == SimplexStatus::infeasible ||
        sr.infeasibility > feas_tol * alpha_scale)
        throw TieResolutionError(
            "recover_bang_bang: tie LP cannot close the moment gap "
            "(residual mass " + std::to_string(sr.infeasibility) +
            "); the dual certificate looks unconverged");
    if (sr.status != SimplexStatus::optimal)
        throw TieResolutionError("recover_bang_bang: tie LP did not solve cleanly");

    const double vertex_tol = 1e-9;
    std::size_t v = 0;
    for (const TieCell& tc : ties) {
        std::vector<double> weights(m, 0.0);
        int singleton = -1;
        int positives = 0;
        for (; v < var_map.size() && var_map[v].first == tc.cell; ++v) {
            weights[var_map[v].second] = sr.x[v];
            if (sr.x[v] > vertex_tol) {
                ++positives;
                if (sr.x[v] >= 1.0 - vertex_tol) singleton = var_map[v].second;
            }
        }
        if (singleton >= 0 || positives <= 1) {
            int pick = singleton;
            if (pick < 0) {
                // all mass below tolerance collapsed onto the largest entry
                pick = static_cast<int>(std::max_element(weights.begin(), weights.end()) -
                                        weights.begin());
            }
            part.assignment[tc.cell] = pick;
        } else {
            Partition::FractionalCell fc;
            fc.cell = tc.cell;
            fc.weights = std::move(weights);
            part.fractional.push_back(std::move(fc));
        }
    }
    return part;
}

PartitionReport verify_partition(const Partition& p, const FunctionFamily& family,
                                 const MomentTarget& target, const SampledDomain& dom,
                                 const AuxiliaryField* field) {
    family.validate(dom);
    const int C = dom.num_cells();
    const int m = family.family_size;
    const int n = family.value_dim;
    if (static_cast<int>(p.assignment.size()) != C)
        throw ValidationError("verify_partition: assignment length mismatch");

    PartitionReport rep;
    rep.moment.assign(n, 0.0);
    rep.per_index_measure.assign(m, 0.0);
    double extremal = 0.0;

    std::vector<const Partition::FractionalCell*> frac_at(C, nullptr);
    for (const auto& fc : p.fractional) frac_at[fc.cell] = &fc;

    for (int c = 0; c < C; ++c) {
        const double w = dom.measure(c);
        if (p.assignment[c] >= 0) {
            const int i = p.assignment[c];
            if (i >= m) throw ValidationError("verify_partition: index out of range");
            extremal += w;
            rep.per_index_measure[i] += w;
            const auto f = family.value(c, i);
            for (int k = 0; k < n; ++k) rep.moment[k] += w * f[k];
            if (field) rep.objective_value += w * field->value(c, i);
        } else {
            const auto* fc = frac_at[c];
            if (!fc)
                throw ValidationError("verify_partition: cell " + std::to_string(c) +
                                      " is neither assigned nor fractional");
            ++rep.fractional_cells;
            for (int i = 0; i < m; ++i) {
                const double t = fc->weights[i];
                if (t == 0.0) continue;
                rep.per_index_measure[i] += w * t;
                const auto f = family.value(c, i);
                for (int k = 0; k < n; ++k) rep.moment[k] += w * t * f[k];
                if (field) rep.objective_value += w * t * field->value(c, i);
            }
        }
    }
    rep.extremal_fraction = extremal;
    rep.has_objective = field != nullptr;
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
        const double d = rep.moment[k] - target.alpha[k];
        err += d * d;
    }
    rep.moment_error = std::sqrt(err);
    return rep;
}

}  // namespace lyap
