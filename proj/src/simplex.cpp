#include "dosesens/simplex.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

namespace dosesens {

namespace {

struct Tableau {
    std::size_t rows, cols;       // cols excludes the RHS column
    std::vector<double> data;     // rows x (cols + 1), row-major
    std::vector<int> basis;       // basic column per row

    double& at(std::size_t r, std::size_t c) { return data[r * (cols + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * (cols + 1) + c]; }
    double& rhs(std::size_t r) { return data[r * (cols + 1) + cols]; }
    double rhs(std::size_t r) const { return data[r * (cols + 1) + cols]; }

    void pivot(std::size_t pr, std::size_t pc) {
        const std::size_t width = cols + 1;
        double* prow = &data[pr * width];
        double inv = 1.0 / prow[pc];
        for (std::size_t c = 0; c < width; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == pr) continue;
            double* row = &data[r * width];
            double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < width; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        basis[pr] = static_cast<int>(pc);
    }
};

// Runs the simplex on `tab` with objective row `obj` (length cols+1, stores
// z_j - c_j; entry obj[cols] is -objective value). Minimizes implicitly by
// entering columns with obj[j] < -tol. `allowed` marks enterable columns.
// Returns false on unboundedness.
bool run_simplex(Tableau& tab, std::vector<double>& obj, const std::vector<char>& allowed,
                 double tol) {
    const std::size_t cols = tab.cols;
    long degenerate_streak = 0;
    const long bland_threshold = 200;
    bool bland = false;

    for (long iter = 0;; ++iter) {
        // Entering column.
        std::size_t pc = cols;
        if (!bland) {
            double best = -tol;
            for (std::size_t j = 0; j < cols; ++j) {
                if (allowed[j] && obj[j] < best) {
                    best = obj[j];
                    pc = j;
                }
            }
        } else {
            for (std::size_t j = 0; j < cols; ++j) {
                if (allowed[j] && obj[j] < -tol) {
                    pc = j;
                    break;
                }
            }
        }
        if (pc == cols) return true;  // optimal

        // Ratio test.
        std::size_t pr = tab.rows;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < tab.rows; ++r) {
            double a = tab.at(r, pc);
            if (a > tol) {
                double ratio = tab.rhs(r) / a;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && pr < tab.rows && tab.basis[r] < tab.basis[pr])) {
                    best_ratio = ratio;
                    pr = r;
                }
            }
        }
        if (pr == tab.rows) return false;  // unbounded

        if (best_ratio < tol) {
            if (++degenerate_streak > bland_threshold) bland = true;
        } else {
            degenerate_streak = 0;
        }

        // Pivot, updating the objective row alongside the tableau.
        double inv = 1.0 / tab.at(pr, pc);
        double f = obj[pc];
        if (f != 0.0) {
            const std::size_t width = cols + 1;
            const double* prow = &tab.data[pr * width];
            double scale = f * inv;
            for (std::size_t c = 0; c < width; ++c) obj[c] -= scale * prow[c];
            obj[pc] = 0.0;
        }
        tab.pivot(pr, pc);
    }
}

}  // namespace

SimplexResult simplex_solve(const LinearProgram& lp, double tol) {
    const std::size_t nv = lp.c.size();
    const std::size_t m_ub = lp.A_ub.size();
    const std::size_t m_eq = lp.A_eq.size();
    const std::size_t m = m_ub + m_eq;

    for (std::size_t r = 0; r < m_ub; ++r)
        if (lp.A_ub[r].size() != nv) throw Error(ErrorCode::BadConfig, "A_ub row width mismatch");
    for (std::size_t r = 0; r < m_eq; ++r)
        if (lp.A_eq[r].size() != nv) throw Error(ErrorCode::BadConfig, "A_eq row width mismatch");

    // Column layout: [structural | slacks for <= rows | artificials].
    // Rows with negative RHS are sign-flipped first; a flipped <= row becomes
    // >= and needs a surplus column plus an artificial.
    std::vector<char> flip_ub(m_ub, 0);
    std::size_t n_artificial = m_eq;
    for (std::size_t r = 0; r < m_ub; ++r) {
        if (lp.b_ub[r] < 0.0) {
            flip_ub[r] = 1;
            ++n_artificial;
        }
    }

    const std::size_t slack0 = nv;
    const std::size_t art0 = nv + m_ub;
    const std::size_t cols = nv + m_ub + n_artificial;

    Tableau tab;
    tab.rows = m;
    tab.cols = cols;
    tab.data.assign(m * (cols + 1), 0.0);
    tab.basis.assign(m, -1);

    std::size_t next_art = art0;
    for (std::size_t r = 0; r < m_ub; ++r) {
        double sign = flip_ub[r] ? -1.0 : 1.0;
        for (std::size_t j = 0; j < nv; ++j) tab.at(r, j) = sign * lp.A_ub[r][j];
        tab.rhs(r) = sign * lp.b_ub[r];
        tab.at(r, slack0 + r) = sign;  // slack (+1) or surplus (-1)
        if (flip_ub[r]) {
            tab.at(r, next_art) = 1.0;
            tab.basis[r] = static_cast<int>(next_art++);
        } else {
            tab.basis[r] = static_cast<int>(slack0 + r);
        }
    }
    for (std::size_t r = 0; r < m_eq; ++r) {
        std::size_t row = m_ub + r;
        double sign = lp.b_eq[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < nv; ++j) tab.at(row, j) = sign * lp.A_eq[r][j];
        tab.rhs(row) = sign * lp.b_eq[r];
        tab.at(row, next_art) = 1.0;
        tab.basis[row] = static_cast<int>(next_art++);
    }

    std::vector<char> allowed(cols, 1);

    // Phase 1: minimize the sum of artificials.
    if (n_artificial > 0) {
        std::vector<double> obj(cols + 1, 0.0);
        for (std::size_t j = art0; j < cols; ++j) obj[j] = 1.0;
        // Price out the artificial basis.
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis[r] >= static_cast<int>(art0)) {
                const std::size_t width = cols + 1;
                const double* row = &tab.data[r * width];
                for (std::size_t c = 0; c < width; ++c) obj[c] -= row[c];
            }
        }
        if (!run_simplex(tab, obj, allowed, tol))
            throw Error(ErrorCode::Unbounded, "phase-1 unbounded (internal error)");
        if (-obj[cols] > 1e-7)
            throw Error(ErrorCode::Infeasible, "no feasible point");
        // Pivot any artificial still in the basis out (or its row is redundant).
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis[r] >= static_cast<int>(art0)) {
                std::size_t pc = cols;
                for (std::size_t j = 0; j < art0; ++j) {
                    if (std::abs(tab.at(r, j)) > tol) {
                        pc = j;
                        break;
                    }
                }
                if (pc < cols) tab.pivot(r, pc);
            }
        }
        for (std::size_t j = art0; j < cols; ++j) allowed[j] = 0;
    }

    // Phase 2: maximize c.x == minimize -c.x.
    std::vector<double> obj(cols + 1, 0.0);
    for (std::size_t j = 0; j < nv; ++j) obj[j] = -lp.c[j];
    for (std::size_t r = 0; r < m; ++r) {
        int b = tab.basis[r];
        if (b >= 0 && b < static_cast<int>(nv) && lp.c[b] != 0.0) {
            const std::size_t width = cols + 1;
            const double* row = &tab.data[r * width];
            for (std::size_t c = 0; c < width; ++c) obj[c] += lp.c[b] * row[c];
        }
    }
    if (!run_simplex(tab, obj, allowed, tol))
        throw Error(ErrorCode::Unbounded, "objective unbounded on the feasible region");

    SimplexResult res;
    res.x.assign(nv, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        int b = tab.basis[r];
        if (b >= 0 && b < static_cast<int>(nv)) res.x[b] = tab.rhs(r);
    }
    res.value = 0.0;
    for (std::size_t j = 0; j < nv; ++j) res.value += lp.c[j] * res.x[j];
    res.reduced_costs.assign(obj.begin(), obj.begin() + nv);
    res.dual.assign(m, 0.0);
    for (std::size_t r = 0; r < m_ub; ++r) {
        double y = obj[slack0 + r];
        res.dual[r] = flip_ub[r] ? -y : y;
    }
    // Equality duals come from the artificial columns (cost 0 in phase 2).
    {
        std::size_t a = art0;
        for (std::size_t r = 0; r < m_ub; ++r)
            if (flip_ub[r]) ++a;
        for (std::size_t r = 0; r < m_eq; ++r) {
            double y = obj[a + r];
            res.dual[m_ub + r] = lp.b_eq[r] < 0.0 ? -y : y;
        }
    }
    return res;
}

}  // namespace dosesens
