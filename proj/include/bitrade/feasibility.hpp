#pragma once

#include "bitrade/constructions.hpp"
#include "bitrade/distribution.hpp"
#include "bitrade/lp.hpp"
#include "bitrade/mechanisms.hpp"
#include "bitrade/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace bitrade {

enum class ICMode { BIC, DSIC };

struct Violation {
    std::string kind;     // e.g. "seller-IR", "buyer-BIC"
    Scalar truthful;      // utility from truthful reporting (or the bound)
    Scalar deviating;     // utility from the deviation (or the violating value)
};

struct ICReport {
    bool pass = true;
    std::vector<Violation> violations;
};

namespace detail {

/// True when a exceeds b beyond the working tolerance (exact: strictly).
inline bool exceeds(const Scalar& a, const Scalar& b) {
    Scalar d = a - b;
    if (d.is_exact()) return d.rat() > 0;
    return d.as_double() > d.tolerance();
}

/// Outcome of reporting value `rep` against the opponent's cell row/column:
/// (x, t) of the reached cell, or no trade if the report is off-support.
inline std::pair<Scalar, Scalar> outcome_at(const Mechanism& mech, const DiscreteJoint& dist,
                                            const Scalar& s, const Scalar& b) {
    std::size_t i = dist.find(s, b);
    if (i == static_cast<std::size_t>(-1)) return {Scalar(0), Scalar(0)};
    return {mech.rule.x[i], mech.transfer[i]};
}

}  // namespace detail

/// Verifies ex-post individual rationality, no transfers without trade, and
/// incentive compatibility (interim for BIC, pointwise for DSIC). Approx
/// scalars tolerate violations up to their tolerance.
inline ICReport check_ic(const Mechanism& mech, const DiscreteJoint& dist, ICMode mode) {
    if (mech.rule.x.size() != dist.cells.size() || mech.transfer.size() != dist.cells.size()) {
        throw SupportMismatchError("mechanism is not defined on the distribution's support");
    }
    ICReport rep;
    auto flag = [&](const char* kind, const Scalar& truthful, const Scalar& deviating) {
        rep.pass = false;
        rep.violations.push_back({kind, truthful, deviating});
    };
    for (std::size_t i = 0; i < dist.cells.size(); ++i) {
        const Cell& c = dist.cells[i];
        const Scalar& x = mech.rule.x[i];
        const Scalar& t = mech.transfer[i];
        if (x.is_zero()) {
            if (!t.is_zero()) flag("transfer-on-no-trade", Scalar(0), t);
            continue;
        }
        Scalar seller_u = t + (Scalar(1) - x) * c.s;
        Scalar buyer_u = x * c.b - t;
        if (detail::exceeds(c.s, seller_u)) flag("seller-IR", seller_u, c.s);
        if (detail::exceeds(Scalar(0), buyer_u)) flag("buyer-IR", buyer_u, Scalar(0));
    }

    Marginal sellers = marginal(dist, Side::seller);
    Marginal buyers = marginal(dist, Side::buyer);
    if (mode == ICMode::BIC) {
        for (const auto& sa : sellers.atoms()) {
            // interim utilities are compared scaled by Pr(s), i.e. with joint
            // probabilities, which keeps exact inputs rational
            for (const auto& da : sellers.atoms()) {
                if (da.v == sa.v) continue;
                Scalar truthful = 0, deviating = 0;
                for (const auto& c : dist.cells) {
                    if (!(c.s == sa.v)) continue;
                    auto [xt, tt] = detail::outcome_at(mech, dist, sa.v, c.b);
                    auto [xd, td] = detail::outcome_at(mech, dist, da.v, c.b);
                    truthful += c.prob * (tt + (Scalar(1) - xt) * sa.v);
                    deviating += c.prob * (td + (Scalar(1) - xd) * sa.v);
                }
                if (detail::exceeds(deviating, truthful)) flag("seller-BIC", truthful, deviating);
            }
        }
        for (const auto& ba : buyers.atoms()) {
            for (const auto& da : buyers.atoms()) {
                if (da.v == ba.v) continue;
                Scalar truthful = 0, deviating = 0;
                for (const auto& c : dist.cells) {
                    if (!(c.b == ba.v)) continue;
                    auto [xt, tt] = detail::outcome_at(mech, dist, c.s, ba.v);
                    auto [xd, td] = detail::outcome_at(mech, dist, c.s, da.v);
                    truthful += c.prob * (xt * ba.v - tt);
                    deviating += c.prob * (xd * ba.v - td);
                }
                if (detail::exceeds(deviating, truthful)) flag("buyer-BIC", truthful, deviating);
            }
        }
    } else {
        for (const auto& c : dist.cells) {
            for (const auto& da : sellers.atoms()) {
                if (da.v == c.s) continue;
                auto [xt, tt] = detail::outcome_at(mech, dist, c.s, c.b);
                auto [xd, td] = detail::outcome_at(mech, dist, da.v, c.b);
                Scalar truthful = tt + (Scalar(1) - xt) * c.s;
                Scalar deviating = td + (Scalar(1) - xd) * c.s;
                if (detail::exceeds(deviating, truthful)) flag("seller-DSIC", truthful, deviating);
            }
            for (const auto& da : buyers.atoms()) {
                if (da.v == c.b) continue;
                auto [xt, tt] = detail::outcome_at(mech, dist, c.s, c.b);
                auto [xd, td] = detail::outcome_at(mech, dist, c.s, da.v);
                Scalar truthful = xt * c.b - tt;
                Scalar deviating = xd * c.b - td;
                if (detail::exceeds(deviating, truthful)) flag("buyer-DSIC", truthful, deviating);
            }
        }
    }
    return rep;
}

struct FeasibilityReport {
    bool feasible = false;
    std::map<std::size_t, Scalar> payments;  // trading cell index -> on-trade price
    std::vector<std::string> certificate;    // violated constraints when infeasible
};

/// Decides whether a deterministic allocation rule admits ex-post IR, BIC
/// payments, by exact rational linear feasibility over one price variable
/// per trading cell (substituted as y = p - s in [0, b - s]).
inline FeasibilityReport implementable(const AllocationRule& rule, const DiscreteJoint& dist) {
    if (rule.x.size() != dist.cells.size()) {
        throw SupportMismatchError("rule is not defined on the distribution's support");
    }
    auto rat = [](const Scalar& v) {
        return v.is_exact() ? v.rat() : Rational(v.as_double());
    };
    FeasibilityReport rep;
    std::vector<std::size_t> trading;        // cell index per variable
    std::vector<std::size_t> var_of(dist.cells.size(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < dist.cells.size(); ++i) {
        const Scalar& x = rule.x[i];
        if (x.is_zero()) continue;
        if (!(x == Scalar(1))) throw ParameterError("feasibility check needs a 0/1 rule");
        if (dist.cells[i].b < dist.cells[i].s) {
            rep.certificate.push_back("IR: trading cell has b < s");
            return rep;
        }
        var_of[i] = trading.size();
        trading.push_back(i);
    }
    const std::size_t n = trading.size();
    auto trades = [&](std::size_t i) { return i != static_cast<std::size_t>(-1) && var_of[i] != static_cast<std::size_t>(-1); };

    std::vector<lp::Constraint> cons;
    std::vector<std::string> label;
    auto add_row = [&](std::vector<Rational> a, Rational rhs, std::string what) {
        bool constant = std::all_of(a.begin(), a.end(), [](const Rational& v) { return v == 0; });
        if (constant) {
            if (rhs < 0) {
                rep.certificate.push_back(std::move(what));
            }
            return;
        }
        lp::Constraint c;
        c.a = std::move(a);
        c.rhs = std::move(rhs);
        c.tag = static_cast<int>(label.size());
        cons.push_back(std::move(c));
        label.push_back(std::move(what));
    };

    // bounds y_c <= b_c - s_c (y >= 0 is implicit in the solver)
    for (std::size_t v = 0; v < n; ++v) {
        const Cell& c = dist.cells[trading[v]];
        std::vector<Rational> a(n, Rational(0));
        a[v] = 1;
        add_row(std::move(a), rat(c.b) - rat(c.s),
                "IR: price above buyer value at cell " + std::to_string(trading[v]));
    }

    Marginal sellers = marginal(dist, Side::seller);
    Marginal buyers = marginal(dist, Side::buyer);
    // seller BIC: for true s and report s',
    //   sum_b Pr(s,b) [u(report s') - u(truth)] <= 0
    for (const auto& sa : sellers.atoms()) {
        for (const auto& da : sellers.atoms()) {
            if (da.v == sa.v) continue;
            std::vector<Rational> a(n, Rational(0));
            Rational rhs = 0;
            for (const auto& c : dist.cells) {
                if (!(c.s == sa.v)) continue;
                Rational pr = rat(c.prob);
                std::size_t own = dist.find(sa.v, c.b);
                std::size_t dev = dist.find(da.v, c.b);
                if (trades(own)) a[var_of[own]] -= pr;
                if (trades(dev)) {
                    a[var_of[dev]] += pr;
                    rhs -= pr * (rat(da.v) - rat(sa.v));
                }
            }
            add_row(std::move(a), std::move(rhs),
                    "seller-BIC: " + sa.v.str() + " -> " + da.v.str());
        }
    }
    // buyer BIC: for true b and report b',
    //   sum_s Pr(s,b) [u(report b') - u(truth)] <= 0
    for (const auto& ba : buyers.atoms()) {
        for (const auto& da : buyers.atoms()) {
            if (da.v == ba.v) continue;
            std::vector<Rational> a(n, Rational(0));
            Rational rhs = 0;
            for (const auto& c : dist.cells) {
                if (!(c.b == ba.v)) continue;
                Rational pr = rat(c.prob);
                std::size_t own = dist.find(c.s, ba.v);
                std::size_t dev = dist.find(c.s, da.v);
                if (trades(own)) {
                    a[var_of[own]] += pr;
                    rhs += pr * (rat(ba.v) - rat(c.s));
                }
                if (trades(dev)) {
                    a[var_of[dev]] -= pr;
                    rhs -= pr * (rat(ba.v) - rat(c.s));
                }
            }
            add_row(std::move(a), std::move(rhs),
                    "buyer-BIC: " + ba.v.str() + " -> " + da.v.str());
        }
    }
    if (!rep.certificate.empty()) return rep;  // a constant row already failed

    std::vector<int> bad;
    auto y = lp::feasible_point(n, cons, &bad);
    if (!y) {
        for (int tag : bad) rep.certificate.push_back(label[tag]);
        return rep;
    }
    rep.feasible = true;
    for (std::size_t v = 0; v < n; ++v) {
        const Cell& c = dist.cells[trading[v]];
        Scalar base = c.s.is_exact() ? c.s : Scalar(Rational(c.s.as_double()));
        rep.payments[trading[v]] = base + Scalar((*y)[v]);
    }
    return rep;
}

/// Builds the mechanism realizing a feasible report's payments.
inline Mechanism mechanism_from(const AllocationRule& rule, const FeasibilityReport& rep,
                                const DiscreteJoint& dist) {
    if (!rep.feasible) throw ParameterError("rule is not implementable");
    Mechanism m;
    m.rule = rule;
    m.transfer.assign(dist.cells.size(), Scalar(0));
    for (const auto& [i, p] : rep.payments) m.transfer[i] = p;
    return m;
}

/// One member of the canonical family of candidate rules on an L-shaped
/// distribution: a buyer threshold on the s=0 column, a seller threshold on
/// the b=b_k row, and an independent bit for the shared corner (0, b_k).
struct ThresholdRule {
    int buyer_index;   // 1..k maps to b_t = b_i; k+1 means "no column trade"
    int seller_index;  // 1 means s_t = 0 (no row trade beyond s=0); 2..k maps to s_t = s_j
    bool corner;
};

inline AllocationRule threshold_rule(const DiscreteJoint& dist, const ThresholdRule& r) {
    if (!dist.l_spec) throw FamilyError("threshold rules need an L-shaped distribution");
    const LShapedSpec& spec = *dist.l_spec;
    const int k = spec.k;
    const Scalar& bk = spec.b[k - 1];
    AllocationRule rule;
    rule.x.reserve(dist.cells.size());
    for (const auto& c : dist.cells) {
        bool trade = false;
        if (c.s == Scalar(0) && c.b == bk) {
            trade = r.corner;
        } else if (c.s == Scalar(0)) {
            trade = r.buyer_index <= k && !(c.b < spec.b[r.buyer_index - 1]);
        } else if (c.b == bk) {
            trade = r.seller_index >= 2 && !(spec.s[r.seller_index - 1] < c.s);
        }
        rule.x.push_back(Scalar(trade ? 1 : 0));
    }
    return rule;
}

/// All 2(k+1)k threshold rules of an L-shaped distribution.
inline std::vector<ThresholdRule> enumerate_thresholds(const DiscreteJoint& dist) {
    if (!dist.l_spec) throw FamilyError("threshold rules need an L-shaped distribution");
    const int k = dist.l_spec->k;
    std::vector<ThresholdRule> out;
    out.reserve(2 * (k + 1) * k);
    for (int bi = 1; bi <= k + 1; ++bi) {
        for (int sj = 1; sj <= k; ++sj) {
            for (bool corner : {false, true}) out.push_back({bi, sj, corner});
        }
    }
    return out;
}

enum class BestStrategy { exhaustive, threshold };

struct BestResult {
    AllocationRule rule;
    Scalar value;                  // best implementable objective value
    std::optional<Scalar> ratio;   // optimum / value, when value > 0
};

/// Best BIC-implementable deterministic allocation for the given objective.
/// `exhaustive` tries every subset of cells with b > s, best-first;
/// `threshold` scans the canonical L-shaped rule family.
inline BestResult best_implementable(const DiscreteJoint& dist, Objective objective,
                                     BestStrategy strategy) {
    Scalar opt = objective == Objective::welfare ? opt_welfare(dist) : opt_gft(dist);
    BestResult best;
    best.rule = no_trade_rule(dist);
    best.value = rule_value(best.rule, dist, objective);
    auto consider = [&](const AllocationRule& rule) -> bool {
        Scalar v = rule_value(rule, dist, objective);
        if (!detail::exceeds(v, best.value)) return false;
        if (!implementable(rule, dist).feasible) return false;
        best.rule = rule;
        best.value = v;
        return true;
    };
    if (strategy == BestStrategy::exhaustive) {
        std::vector<std::size_t> tradable;
        for (std::size_t i = 0; i < dist.cells.size(); ++i) {
            if (dist.cells[i].s < dist.cells[i].b) tradable.push_back(i);
        }
        if (tradable.size() > 20) {
            throw ScaleError("exhaustive search over " + std::to_string(tradable.size()) +
                             " tradable cells; use the threshold strategy");
        }
        std::vector<std::pair<Scalar, AllocationRule>> candidates;
        for (unsigned long mask = 0; mask < (1ul << tradable.size()); ++mask) {
            AllocationRule rule = no_trade_rule(dist);
            for (std::size_t t = 0; t < tradable.size(); ++t) {
                if (mask & (1ul << t)) rule.x[tradable[t]] = Scalar(1);
            }
            candidates.emplace_back(rule_value(rule, dist, objective), std::move(rule));
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) { return b.first < a.first; });
        for (auto& [v, rule] : candidates) {
            if (consider(rule)) break;  // best-first: the first feasible wins
        }
    } else {
        for (const auto& tr : enumerate_thresholds(dist)) {
            consider(threshold_rule(dist, tr));
        }
    }
    if (!best.value.is_zero()) best.ratio = opt / best.value;
    return best;
}

}  // namespace bitrade
