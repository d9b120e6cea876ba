#include "lyap/lp_oracle.hpp"

#include <cmath>

#include "lyap/errors.hpp"

namespace lyap {

void AuxiliaryField::validate(const SampledDomain& dom) const {
    if (family_size < 1)
        throw ValidationError("field: family_size must be >= 1");
    if (values.size() != static_cast<std::size_t>(dom.num_cells()) * family_size)
        throw ValidationError("field: value table does not match the grid");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("field: values must be finite");
}

DiscreteLP build_discrete_lp(const FunctionFamily& family,
                             const MomentTarget& target,
                             const AuxiliaryField& field,
                             const SampledDomain& dom) {
    family.validate(dom);
    field.validate(dom);
    if (field.family_size != family.family_size)
        throw ValidationError("build_discrete_lp: field/family size mismatch");
    if (target.value_dim() != family.value_dim)
        throw ValidationError("build_discrete_lp: target dimension mismatch");

    const int C = dom.num_cells();
    const int m = family.family_size;
    const int n = family.value_dim;

    DiscreteLP lp;
    lp.num_cells = C;
    lp.family_size = m;
    lp.value_dim = n;
    lp.alpha = target.alpha;
    lp.cell_measure = dom.measures;
    lp.objective.resize(static_cast<std::size_t>(C) * m);
    lp.moment_coeff.assign(static_cast<std::size_t>(n) * C * m, 0.0);
    for (int c = 0; c < C; ++c) {
        const double w = dom.measure(c);
        for (int i = 0; i < m; ++i) {
            const int var = c * m + i;
            lp.objective[var] = w * field.value(c, i);
            const auto f = family.value(c, i);
            for (int k = 0; k < n; ++k)
                lp.moment_coeff[static_cast<std::size_t>(k) * C * m + var] = w * f[k];
        }
    }
    return lp;
}

ReducedLP reduce(const DiscreteLP& lp) {
    const int C = lp.num_cells, m = lp.family_size, n = lp.value_dim;
    ReducedLP red;
    red.num_cells = C;
    red.family_size = m;
    red.value_dim = n;
    red.cell_measure = lp.cell_measure;
    red.objective.resize(static_cast<std::size_t>(C) * (m - 1));
    red.moment_coeff.assign(static_cast<std::size_t>(n) * C * (m - 1), 0.0);
    red.rhs = lp.alpha;
    red.objective_offset = 0.0;

    for (int c = 0; c < C; ++c) {
        const int last = c * m + (m - 1);
        red.objective_offset += lp.objective[last];
        for (int k = 0; k < n; ++k)
            red.rhs[k] -= lp.moment(k, last);
        for (int i = 0; i + 1 < m; ++i) {
            const int var = c * m + i;
            const int rvar = c * (m - 1) + i;
            red.objective[rvar] = lp.objective[var] - lp.objective[last];
            for (int k = 0; k < n; ++k)
                red.moment_coeff[static_cast<std::size_t>(k) * C * (m - 1) + rvar] =
                    lp.moment(k, var) - lp.moment(k, last);
        }
    }
    return red;
}

RelaxedDensity expand(const ReducedLP& red, const std::vector<double>& theta_tilde) {
    const int C = red.num_cells, m = red.family_size;
    if (static_cast<int>(theta_tilde.size()) != red.cols())
        throw ValidationError("expand: reduced solution size mismatch");
    RelaxedDensity theta;
    theta.family_size = m;
    theta.weights.assign(static_cast<std::size_t>(C) * m, 0.0);
    for (int c = 0; c < C; ++c) {
        double used = 0.0;
        for (int i = 0; i + 1 < m; ++i) {
            const double t = theta_tilde[static_cast<std::size_t>(c) * (m - 1) + i];
            theta.weights[static_cast<std::size_t>(c) * m + i] = t;
            used += t;
        }
        theta.weights[static_cast<std::size_t>(c) * m + (m - 1)] =
            std::max(0.0, 1.0 - used);
    }
    return theta;
}

namespace {

DenseLP to_dense(const ReducedLP& red, bool with_objective) {
    const int C = red.num_cells, m1 = red.family_size - 1, n = red.value_dim;
    DenseLP lp;
    lp.num_vars = red.cols();
    lp.objective.assign(lp.num_vars, 0.0);
    if (with_objective) lp.objective = red.objective;
    lp.eq_coeffs = red.moment_coeff;
    lp.eq_rhs = red.rhs;
    // one <=1 row per cell over its m-1 reduced weights
    lp.ub_coeffs.assign(static_cast<std::size_t>(C) * lp.num_vars, 0.0);
    lp.ub_rhs.assign(C, 1.0);
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < m1; ++i)
            lp.ub_coeffs[static_cast<std::size_t>(c) * lp.num_vars + c * m1 + i] = 1.0;
    (void)n;
    return lp;
}

double moment_residual(const DiscreteLP& lp, const RelaxedDensity& theta) {
    double worst = 0.0;
    for (int k = 0; k < lp.value_dim; ++k) {
        double s = -lp.alpha[k];
        for (int var = 0; var < lp.cols(); ++var)
            s += lp.moment(k, var) * theta.weights[var];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

double alpha_norm(const std::vector<double>& alpha) {
    double s = 0.0;
    for (double a : alpha) s += std::abs(a);
    return s;
}

}  // namespace

OracleSolution oracle_solve(const DiscreteLP& lp, const SimplexOptions& opts) {
    const ReducedLP red = reduce(lp);
    const DenseLP dense = to_dense(red, true);
    const SimplexResult sr = simplex_solve(dense, opts);

    OracleSolution sol;
    sol.iterations = sr.iterations;
    switch (sr.status) {
        case SimplexStatus::optimal:
            sol.status = OracleStatus::optimal;
            break;
        case SimplexStatus::infeasible:
            sol.status = OracleStatus::infeasible;
            return sol;
        default:
            sol.status = OracleStatus::numerically_suspect;
            return sol;
    }

    sol.theta = expand(red, sr.x);
    double obj = 0.0;
    for (int var = 0; var < lp.cols(); ++var)
        obj += lp.objective[var] * sol.theta.weights[var];
    sol.objective_value = obj;
    sol.fractional_cells = count_fractional_cells(sol.theta);
    sol.constraint_residual = moment_residual(lp, sol.theta);
    if (sol.constraint_residual > 1e-9 * (1.0 + alpha_norm(lp.alpha)))
        sol.status = OracleStatus::numerically_suspect;
    return sol;
}

Phase1Report phase1_feasible(const FunctionFamily& family,
                             const MomentTarget& target,
                             const SampledDomain& dom,
                             const SimplexOptions& opts) {
    AuxiliaryField zero;
    zero.family_size = family.family_size;
    zero.values.assign(static_cast<std::size_t>(dom.num_cells()) * family.family_size, 0.0);
    const DiscreteLP lp = build_discrete_lp(family, target, zero, dom);
    const ReducedLP red = reduce(lp);
    const DenseLP dense = to_dense(red, false);
    SimplexOptions phase_opts = opts;
    phase_opts.phase1_only = true;
    const SimplexResult sr = simplex_solve(dense, phase_opts);

    Phase1Report report;
    report.iterations = sr.iterations;
    report.distance = sr.infeasibility;
    report.feasible = sr.infeasibility <= opts.feas_tol * (1.0 + alpha_norm(target.alpha));
    return report;
}

int count_fractional_cells(const RelaxedDensity& theta, double tol) {
    int count = 0;
    for (int c = 0; c < theta.num_cells(); ++c) {
        const auto w = theta.cell(c);
        for (double t : w) {
            if (t > tol && t < 1.0 - tol) {
                ++count;
                break;
            }
        }
    }
    return count;
}

}  // namespace lyap
