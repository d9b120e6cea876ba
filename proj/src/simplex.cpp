#include "lyap/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "lyap/errors.hpp"

namespace lyap {

namespace {

// Dense tableau with an explicit right-hand-side column and two cost rows
// (phase-1 artificial mass, phase-2 true objective), both kept reduced
// with respect to the current basis.
struct Tableau {
    int rows = 0;
    int cols = 0;  // structural + slack + artificial columns, excluding rhs
    std::vector<double> a;       // rows x (cols + 1), last entry is rhs
    std::vector<double> cost1;   // cols + 1, phase-1 reduced costs, rhs = -z1
    std::vector<double> cost2;   // cols + 1, phase-2 reduced costs, rhs = -z2
    std::vector<int> basis;      // basic column per row
    std::vector<char> artificial;  // per column
    std::vector<char> row_active;  // redundant rows get switched off

    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * (cols + 1); }
    const double* row(int r) const {
        return a.data() + static_cast<std::size_t>(r) * (cols + 1);
    }
    double& rhs(int r) { return row(r)[cols]; }
};

void pivot(Tableau& t, int pr, int pc) {
    double* prow = t.row(pr);
    const double piv = prow[pc];
    const double inv = 1.0 / piv;
    for (int j = 0; j <= t.cols; ++j) prow[j] *= inv;
    prow[pc] = 1.0;

    auto eliminate = [&](double* r) {
        const double factor = r[pc];
        if (factor == 0.0) return;
        for (int j = 0; j <= t.cols; ++j) r[j] -= factor * prow[j];
        r[pc] = 0.0;
    };
    for (int r = 0; r < t.rows; ++r) {
        if (r == pr || !t.row_active[r]) continue;
        eliminate(t.row(r));
    }
    eliminate(t.cost1.data());
    eliminate(t.cost2.data());
    t.basis[pr] = pc;
}

// Min-ratio test. Ties go to the row whose basic variable has the lowest
// column index, which is what Bland's rule requires for the leaving side.
int select_leaving(const Tableau& t, int pc, double pivot_tol) {
    int best_row = -1;
    double best_ratio = 0.0;
    for (int r = 0; r < t.rows; ++r) {
        if (!t.row_active[r]) continue;
        const double arc = t.row(r)[pc];
        if (arc <= pivot_tol) continue;
        const double b = std::max(t.row(r)[t.cols], 0.0);
        const double ratio = b / arc;
        const double tie = 1e-12 * (1.0 + std::abs(best_ratio));
        if (best_row < 0 || ratio < best_ratio - tie ||
            (ratio <= best_ratio + tie && t.basis[r] < t.basis[best_row])) {
            best_row = r;
            best_ratio = ratio;
        }
    }
    return best_row;
}

struct PriceResult {
    int col = -1;
    bool optimal = false;
};

PriceResult price(const Tableau& t, const std::vector<double>& cost,
                  const std::vector<char>& allowed, double opt_tol, bool bland) {
    PriceResult res;
    double best = -opt_tol;
    for (int j = 0; j < t.cols; ++j) {
        if (!allowed[j]) continue;
        const double c = cost[j];
        if (c < best) {
            res.col = j;
            if (bland) return res;  // lowest index wins outright
            best = c;
        }
    }
    res.optimal = (res.col < 0);
    return res;
}

}  // namespace

SimplexResult simplex_solve(const DenseLP& lp, const SimplexOptions& opts) {
    const int n = lp.num_vars;
    const int n_eq = lp.eq_rows();
    const int n_ub = lp.ub_rows();
    if (static_cast<int>(lp.objective.size()) != n)
        throw ValidationError("simplex: objective size mismatch");
    if (static_cast<int>(lp.eq_coeffs.size()) != n_eq * n ||
        static_cast<int>(lp.ub_coeffs.size()) != n_ub * n)
        throw ValidationError("simplex: constraint matrix size mismatch");

    Tableau t;
    t.rows = n_eq + n_ub;
    // layout: [structural | ub slacks | eq artificial pairs | flipped-ub artificials]
    const int slack0 = n;
    const int art0 = n + n_ub;
    int art_count = 2 * n_eq;
    std::vector<int> ub_art(n_ub, -1);
    for (int r = 0; r < n_ub; ++r)
        if (lp.ub_rhs[r] < 0.0) ub_art[r] = art0 + art_count++;
    t.cols = n + n_ub + art_count;

    t.a.assign(static_cast<std::size_t>(t.rows) * (t.cols + 1), 0.0);
    t.cost1.assign(t.cols + 1, 0.0);
    t.cost2.assign(t.cols + 1, 0.0);
    t.basis.assign(t.rows, -1);
    t.artificial.assign(t.cols, 0);
    t.row_active.assign(t.rows, 1);
    for (int j = art0; j < t.cols; ++j) t.artificial[j] = 1;

    double rhs_norm = 0.0;

    // equality rows: flip to nonnegative rhs, basic artificial a+ with a
    // paired opposite-sign column a- so deviations of either sign price in
    for (int r = 0; r < n_eq; ++r) {
        double sign = lp.eq_rhs[r] < 0.0 ? -1.0 : 1.0;
        double* row = t.row(r);
        for (int j = 0; j < n; ++j) row[j] = sign * lp.eq_coeffs[static_cast<std::size_t>(r) * n + j];
        row[t.cols] = sign * lp.eq_rhs[r];
        rhs_norm += row[t.cols];
        const int ap = art0 + 2 * r, am = art0 + 2 * r + 1;
        row[ap] = 1.0;
        row[am] = -1.0;
        t.basis[r] = ap;
    }
    // inequality rows: slack is basic unless the rhs is negative, in which
    // case the flipped row needs an artificial
    for (int r = 0; r < n_ub; ++r) {
        const int tr = n_eq + r;
        double* row = t.row(tr);
        const double sign = lp.ub_rhs[r] < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) row[j] = sign * lp.ub_coeffs[static_cast<std::size_t>(r) * n + j];
        row[slack0 + r] = sign;
        row[t.cols] = sign * lp.ub_rhs[r];
        rhs_norm += row[t.cols];
        if (ub_art[r] >= 0) {
            row[ub_art[r]] = 1.0;
            t.basis[tr] = ub_art[r];
        } else {
            t.basis[tr] = slack0 + r;
        }
    }

    // phase-1 cost: unit on artificials, then reduce against the basis
    for (int j = art0; j < t.cols; ++j) t.cost1[j] = 1.0;
    for (int r = 0; r < t.rows; ++r) {
        if (!t.artificial[t.basis[r]]) continue;
        const double* row = t.row(r);
        for (int j = 0; j <= t.cols; ++j) t.cost1[j] -= row[j];
    }
    for (int j = 0; j < n; ++j) t.cost2[j] = lp.objective[j];

    double obj_scale = 1.0;
    for (int j = 0; j < n; ++j) obj_scale = std::max(obj_scale, std::abs(lp.objective[j]));
    const double opt_tol1 = opts.opt_tol * (1.0 + rhs_norm);
    const double opt_tol2 = opts.opt_tol * obj_scale;

    const int max_iter = opts.max_iterations > 0
                             ? opts.max_iterations
                             : 200 * (t.rows + t.cols) + 20000;

    SimplexResult result;
    std::vector<char> allowed(t.cols, 1);

    auto run_phase = [&](bool phase1) -> SimplexStatus {
        std::vector<double>& cost = phase1 ? t.cost1 : t.cost2;
        const double opt_tol = phase1 ? opt_tol1 : opt_tol2;
        int stall = 0;
        bool bland = false;
        double last_obj = -cost[t.cols];
        while (true) {
            if (result.iterations >= max_iter) return SimplexStatus::iteration_limit;
            const PriceResult pr = price(t, cost, allowed, opt_tol, bland);
            if (pr.optimal) return SimplexStatus::optimal;
            const int leave = select_leaving(t, pr.col, opts.pivot_tol);
            if (leave < 0) {
                if (phase1) return SimplexStatus::numerically_suspect;
                return SimplexStatus::unbounded;
            }
            pivot(t, leave, pr.col);
            ++result.iterations;
            const double obj = -cost[t.cols];
            if (obj < last_obj - opts.zero_tol * (1.0 + std::abs(last_obj))) {
                last_obj = obj;
                stall = 0;
                bland = false;
            } else if (++stall > 50) {
                bland = true;  // anti-cycling fallback on degenerate plateaus
            }
        }
    };

    // ---- phase 1 ----
    SimplexStatus st = run_phase(true);
    result.infeasibility = std::max(0.0, -t.cost1[t.cols]);
    if (st != SimplexStatus::optimal) {
        result.status = st;
        return result;
    }
    const double feas_gate = opts.feas_tol * (1.0 + rhs_norm);
    if (result.infeasibility > feas_gate) {
        result.status = SimplexStatus::infeasible;
        // expose the closest attainable point for diagnostics
        result.x.assign(n, 0.0);
        for (int r = 0; r < t.rows; ++r)
            if (t.row_active[r] && t.basis[r] < n)
                result.x[t.basis[r]] = std::max(t.rhs(r), 0.0);
        return result;
    }

    // drive leftover basic artificials out, dropping redundant rows
    for (int r = 0; r < t.rows; ++r) {
        if (!t.row_active[r] || !t.artificial[t.basis[r]]) continue;
        int pc = -1;
        double best = opts.pivot_tol;
        const double* row = t.row(r);
        for (int j = 0; j < art0; ++j) {
            if (std::abs(row[j]) > best) {
                pc = j;
                best = std::abs(row[j]);
            }
        }
        if (pc >= 0) {
            pivot(t, r, pc);
            ++result.iterations;
        } else {
            t.row_active[r] = 0;  // row is implied by the others
        }
    }
    for (int j = art0; j < t.cols; ++j) allowed[j] = 0;

    if (!opts.phase1_only) {
        // ---- phase 2 ----
        st = run_phase(false);
        if (st != SimplexStatus::optimal) {
            result.status = st;
            return result;
        }
    }

    result.x.assign(n, 0.0);
    for (int r = 0; r < t.rows; ++r) {
        if (!t.row_active[r]) continue;
        const int b = t.basis[r];
        if (b < n) result.x[b] = std::max(t.rhs(r), 0.0);
    }
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += lp.objective[j] * result.x[j];
    result.objective = obj;
    result.status = SimplexStatus::optimal;
    return result;
}

}  // namespace lyap
