#pragma once

#include "bitrade/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace bitrade {

struct LShapedSpec;  // defined in constructions.hpp

/// One cell of a finite joint distribution: seller value, buyer value, mass.
struct Cell {
    Scalar s, b, prob;
};

/// Finite marginal distribution: atoms sorted ascending by value.
class Marginal {
public:
    Marginal() = default;

    struct Atom {
        Scalar v, prob;
    };

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const Atom& at(std::size_t i) const { return atoms_[i]; }

    /// Right-continuous CDF: total mass of atoms with value <= v.
    Scalar cdf(const Scalar& v) const {
        Scalar acc = 0;
        for (const auto& a : atoms_) {
            if (a.v <= v) acc += a.prob;
            else break;
        }
        return acc;
    }

    /// Tail mass Pr[value >= v] (complement of the left limit of the CDF).
    Scalar tail(const Scalar& v) const {
        Scalar acc = 0;
        for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
            if (it->v >= v) acc += it->prob;
            else break;
        }
        return acc;
    }

    Scalar expectation() const {
        Scalar acc = 0;
        for (const auto& a : atoms_) acc += a.v * a.prob;
        return acc;
    }

    Scalar min_value() const { return atoms_.front().v; }
    Scalar max_value() const { return atoms_.back().v; }

    bool contains(const Scalar& v) const {
        for (const auto& a : atoms_) {
            if (a.v == v) return true;
        }
        return false;
    }

    /// Builds a marginal from (value, prob) pairs: merges equal values, sorts,
    /// validates positivity and total mass. `mass_tol` < 0 means "use the
    /// scalars' own tolerance".
    static Marginal make(std::vector<Atom> atoms, double mass_tol = -1) {
        if (atoms.empty()) throw ProbabilityMassError("marginal has no atoms");
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& x, const Atom& y) { return x.v < y.v; });
        Marginal m;
        double tol = kDefaultTolerance;
        for (auto& a : atoms) {
            if (a.v < Scalar(0)) throw NegativeValueError("negative atom value");
            if (!(a.prob > Scalar(0))) throw NegativeValueError("atom probability must be positive");
            tol = std::max({tol, a.v.tolerance(), a.prob.tolerance()});
            if (!m.atoms_.empty() && m.atoms_.back().v == a.v) {
                m.atoms_.back().prob += a.prob;
            } else {
                m.atoms_.push_back(std::move(a));
            }
        }
        Scalar total = 0;
        bool exact = true;
        for (const auto& a : m.atoms_) {
            total += a.prob;
            exact = exact && a.prob.is_exact();
        }
        if (mass_tol < 0) mass_tol = tol;
        if (exact) {
            if (total.rat() != 1) throw ProbabilityMassError("marginal mass is " + total.str());
        } else if (std::abs(total.as_double() - 1.0) > mass_tol) {
            throw ProbabilityMassError("marginal mass deviates from 1 by " +
                                       std::to_string(total.as_double() - 1.0));
        }
        return m;
    }

private:
    std::vector<Atom> atoms_;
};

enum class Side { seller, buyer };

/// Structure tags attached to the one-sided lower-bound family so that its
/// allocation rules remain well defined after discretization.
struct OneSidedTags {
    int k = 0;
    double eps = 0;
    double grid = 0;
    Scalar top_b;  // the isolated buyer atom at k+1
};

/// Finite joint distribution over (seller value, buyer value) cells.
///
/// Cells are unique by (s, b) and sorted by (b, s) for reproducibility.
/// Constructors of special families may attach structure tags consumed by
/// family-specific rules (threshold enumeration, x_p rules).
struct DiscreteJoint {
    std::vector<Cell> cells;
    std::shared_ptr<const LShapedSpec> l_spec;
    std::optional<OneSidedTags> one_sided;

    bool all_exact() const {
        for (const auto& c : cells) {
            if (!c.s.is_exact() || !c.b.is_exact() || !c.prob.is_exact()) return false;
        }
        return true;
    }

    /// Demotes every scalar to approx mode.
    DiscreteJoint to_approx(double tol = kDefaultTolerance) const {
        DiscreteJoint d = *this;
        for (auto& c : d.cells) {
            c.s = c.s.to_approx(tol);
            c.b = c.b.to_approx(tol);
            c.prob = c.prob.to_approx(tol);
        }
        return d;
    }

    /// Index of the cell with the given values, or npos.
    std::size_t find(const Scalar& s, const Scalar& b) const {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].s == s && cells[i].b == b) return i;
        }
        return static_cast<std::size_t>(-1);
    }
};

/// Validates and normalizes a cell list into a DiscreteJoint.
/// Duplicate (s, b) cells are merged by summing probability.
inline DiscreteJoint build_joint(std::vector<Cell> cells) {
    if (cells.empty()) throw ProbabilityMassError("joint has no cells");
    double tol = kDefaultTolerance;
    for (const auto& c : cells) {
        if (c.s < Scalar(0) || c.b < Scalar(0)) throw NegativeValueError("negative value in cell");
        if (!(c.prob > Scalar(0))) throw NegativeValueError("cell probability must be positive");
        tol = std::max({tol, c.s.tolerance(), c.b.tolerance(), c.prob.tolerance()});
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
        if (x.b < y.b) return true;
        if (y.b < x.b) return false;
        return x.s < y.s;
    });
    DiscreteJoint d;
    for (auto& c : cells) {
        if (!d.cells.empty() && d.cells.back().b == c.b && d.cells.back().s == c.s) {
            d.cells.back().prob += c.prob;
        } else {
            d.cells.push_back(std::move(c));
        }
    }
    Scalar total = 0;
    bool exact = true;
    for (const auto& c : d.cells) {
        total += c.prob;
        exact = exact && c.prob.is_exact();
    }
    if (exact) {
        if (total.rat() != 1) throw ProbabilityMassError("joint mass is " + total.str());
    } else if (std::abs(total.as_double() - 1.0) > tol) {
        throw ProbabilityMassError("joint mass deviates from 1 by " +
                                   std::to_string(total.as_double() - 1.0));
    }
    return d;
}

/// Marginal of one side of a joint.
inline Marginal marginal(const DiscreteJoint& dist, Side side) {
    std::vector<Marginal::Atom> atoms;
    atoms.reserve(dist.cells.size());
    for (const auto& c : dist.cells) {
        atoms.push_back({side == Side::seller ? c.s : c.b, c.prob});
    }
    // make() merges equal values; allow any total that the joint allowed.
    return Marginal::make(std::move(atoms), 1e-6);
}

/// Conditional marginal of the opposite side given `value` on `side`.
inline Marginal condition(const DiscreteJoint& dist, Side side, const Scalar& value) {
    std::vector<Marginal::Atom> atoms;
    Scalar mass = 0;
    for (const auto& c : dist.cells) {
        const Scalar& own = (side == Side::seller) ? c.s : c.b;
        if (own == value) {
            atoms.push_back({side == Side::seller ? c.b : c.s, c.prob});
            mass += c.prob;
        }
    }
    if (atoms.empty() || mass.is_zero()) {
        throw OutOfSupportError("conditioning value has zero marginal mass");
    }
    for (auto& a : atoms) a.prob /= mass;
    return Marginal::make(std::move(atoms), 1e-6);
}

/// Right-continuous CDF of a marginal at v.
inline Scalar cdf(const Marginal& m, const Scalar& v) { return m.cdf(v); }

/// A continuous density (given by its running CDF) plus point atoms, to be
/// collapsed onto a grid.
struct DensitySpec {
    std::function<double(double)> cdf;  // mass of the continuous part in (-inf, x]
    double lo = 0, hi = 0;              // support of the continuous part
    std::vector<std::pair<double, double>> atoms;  // (location, mass)
    double tol = kDefaultTolerance;
};

/// Collapses a density onto multiples of `delta`, moving all mass upward:
/// the continuous mass in (g - delta, g] lands on grid point g, point atoms
/// move to the next multiple of delta at or above them. The upper endpoint of
/// the continuous support is kept as an atom at its exact location, so the
/// discrete CDF agrees with the continuous one at every grid point.
inline Marginal discretize(const DensitySpec& spec, double delta) {
    if (!(delta > 0)) throw DegenerateGridError("grid step must be positive");
    std::map<double, double> mass;
    if (spec.cdf && spec.hi > spec.lo) {
        double prev_x = spec.lo;
        double prev_f = spec.cdf(spec.lo);
        // first grid point strictly above lo
        long long j = static_cast<long long>(std::floor(spec.lo / delta + 1e-9)) + 1;
        for (; j * delta < spec.hi - 1e-12 * std::max(1.0, std::abs(spec.hi)); ++j) {
            double g = j * delta;
            double f = spec.cdf(g);
            if (f - prev_f > 0) mass[g] += f - prev_f;
            prev_x = g;
            prev_f = f;
        }
        (void)prev_x;
        double f_top = spec.cdf(spec.hi);
        if (f_top - prev_f > 0) mass[spec.hi] += f_top - prev_f;
    }
    for (const auto& [v, m] : spec.atoms) {
        if (m <= 0) throw NegativeValueError("atom mass must be positive");
        double g = std::ceil(v / delta - 1e-9) * delta;
        mass[g] += m;
    }
    std::vector<Marginal::Atom> atoms;
    atoms.reserve(mass.size());
    for (const auto& [v, m] : mass) {
        atoms.push_back({Scalar::approx(v, spec.tol), Scalar::approx(m, spec.tol)});
    }
    return Marginal::make(std::move(atoms), 1e-6);
}

}  // namespace bitrade
