#pragma once

#include "bitrade/scalar.hpp"

#include <optional>
#include <vector>

namespace bitrade::lp {

/// One inequality a . y <= rhs over nonnegative variables y. The tag is an
/// opaque caller-side identifier reported back for infeasible systems.
struct Constraint {
    std::vector<Rational> a;
    Rational rhs;
    int tag = -1;
};

/// Decides feasibility of { y >= 0 : A y <= b } with exact rational
/// arithmetic (phase-1 simplex, Bland's rule). Returns a feasible point, or
/// nullopt with the tags of constraints whose artificial variables stay
/// positive (a certificate of which rows could not be satisfied).
inline std::optional<std::vector<Rational>> feasible_point(
    std::size_t nvars, const std::vector<Constraint>& cons,
    std::vector<int>* infeasible_tags = nullptr) {
    const std::size_t m = cons.size();
    if (m == 0) return std::vector<Rational>(nvars, Rational(0));

    // Equality form: A y + s = b with s >= 0, rows with b < 0 negated and
    // given an artificial variable. Column layout: y | slacks | artificials.
    std::size_t n_art = 0;
    for (const auto& c : cons) {
        if (c.rhs < 0) ++n_art;
    }
    const std::size_t ncols = nvars + m + n_art;
    std::vector<std::vector<Rational>> T(m, std::vector<Rational>(ncols + 1, Rational(0)));
    std::vector<std::size_t> basis(m);
    std::vector<bool> is_art(ncols, false);
    {
        std::size_t art = nvars + m;
        for (std::size_t i = 0; i < m; ++i) {
            bool neg = cons[i].rhs < 0;
            for (std::size_t j = 0; j < nvars && j < cons[i].a.size(); ++j) {
                T[i][j] = neg ? -cons[i].a[j] : cons[i].a[j];
            }
            T[i][nvars + i] = neg ? Rational(-1) : Rational(1);
            T[i][ncols] = neg ? -cons[i].rhs : cons[i].rhs;
            if (neg) {
                T[i][art] = 1;
                is_art[art] = true;
                basis[i] = art++;
            } else {
                basis[i] = nvars + i;
            }
        }
    }

    auto pivot = [&](std::size_t row, std::size_t col) {
        Rational piv = T[row][col];
        for (auto& v : T[row]) v /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || T[i][col] == 0) continue;
            Rational f = T[i][col];
            for (std::size_t j = 0; j <= ncols; ++j) T[i][j] -= f * T[row][j];
        }
        basis[row] = col;
    };

    // Phase 1: minimize the sum of artificials. Reduced cost of column j is
    // c_j - sum over rows with artificial basis of T[i][j].
    for (long iter = 0;; ++iter) {
        if (iter > 200000) throw BitradeError("simplex iteration limit exceeded");
        std::optional<std::size_t> entering;
        for (std::size_t j = 0; j < ncols; ++j) {  // Bland: lowest index
            Rational z = is_art[j] ? Rational(1) : Rational(0);
            for (std::size_t i = 0; i < m; ++i) {
                if (is_art[basis[i]]) z -= T[i][j];
            }
            if (z < 0) {
                entering = j;
                break;
            }
        }
        if (!entering) break;
        std::optional<std::size_t> leaving;
        Rational best_ratio;
        for (std::size_t i = 0; i < m; ++i) {
            if (T[i][*entering] <= 0) continue;
            Rational ratio = T[i][ncols] / T[i][*entering];
            if (!leaving || ratio < best_ratio ||
                (ratio == best_ratio && basis[i] < basis[*leaving])) {
                leaving = i;
                best_ratio = ratio;
            }
        }
        if (!leaving) throw BitradeError("phase-1 objective unbounded");  // cannot happen
        pivot(*leaving, *entering);
    }

    Rational resid = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (is_art[basis[i]]) resid += T[i][ncols];
    }
    if (resid != 0) {
        if (infeasible_tags) {
            for (std::size_t i = 0; i < m; ++i) {
                if (is_art[basis[i]] && T[i][ncols] > 0) {
                    // recover the original row index from the artificial column
                    std::size_t art_col = basis[i];
                    std::size_t count = 0, row = 0;
                    for (std::size_t r = 0; r < m; ++r) {
                        if (cons[r].rhs < 0 && nvars + m + count++ == art_col) {
                            row = r;
                            break;
                        }
                    }
                    infeasible_tags->push_back(cons[row].tag);
                }
            }
        }
        return std::nullopt;
    }
    std::vector<Rational> y(nvars, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < nvars) y[basis[i]] = T[i][ncols];
    }
    return y;
}

}  // namespace bitrade::lp
