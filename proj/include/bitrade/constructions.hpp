#pragma once

#include "bitrade/distribution.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace bitrade {

/// Per-cell trade probability, parallel to DiscreteJoint::cells.
/// Deterministic rules use {0,1}.
struct AllocationRule {
    std::vector<Scalar> x;
};

inline AllocationRule all_trade_rule(const DiscreteJoint& dist) {
    return {std::vector<Scalar>(dist.cells.size(), Scalar(1))};
}

inline AllocationRule no_trade_rule(const DiscreteJoint& dist) {
    return {std::vector<Scalar>(dist.cells.size(), Scalar(0))};
}

// ---------------------------------------------------------------------------
// Continuous example families, emitted pre-discretized.
// ---------------------------------------------------------------------------

/// Equal-revenue buyer marginal: density 1/b^2 on [1,k] plus an atom of mass
/// 1/k at k, so that every offer p in [1,k] earns revenue p*Pr[b >= p] = 1.
/// With atom_at_top=false the top atom is dropped and the truncated density
/// is renormalized (the equal-revenue property is then lost).
inline Marginal equal_revenue_buyer(double k, bool atom_at_top = true, double delta = 1e-4) {
    if (!(k > 1)) throw ParameterError("equal-revenue support bound must exceed 1");
    DensitySpec spec;
    spec.lo = 1;
    spec.hi = k;
    if (atom_at_top) {
        spec.cdf = [](double x) { return 1.0 - 1.0 / x; };
        spec.atoms = {{k, 1.0 / k}};
    } else {
        double scale = 1.0 / (1.0 - 1.0 / k);
        spec.cdf = [scale](double x) { return scale * (1.0 - 1.0 / x); };
    }
    return discretize(spec, delta);
}

/// Equal-profit seller marginal scaled to a buyer value b: atom of mass 1/e
/// at 0 and density with CDF b/(e(b-s)) on [0, b(e-1)/e], so every offer p in
/// the support gives the buyer profit (b-p)*F(p) = b/e.
inline Marginal equal_profit_seller(double b, double delta = 1e-4) {
    if (!(b > 0)) throw ParameterError("buyer value must be positive");
    constexpr double e = std::numbers::e;
    DensitySpec spec;
    spec.lo = 0;
    spec.hi = b * (e - 1) / e;
    spec.cdf = [b](double x) { return b / (e * (b - x)) - 1.0 / e; };
    spec.atoms = {{0.0, 1.0 / e}};
    return discretize(spec, delta);
}

/// Worst case for the buyer-offering mechanism: buyer fixed at 1, seller
/// drawn from the equal-profit distribution. Every offer in [0, 1-1/e] gives
/// the buyer the same profit 1/e, and the lowest tie-break picks offer 0.
inline DiscreteJoint tightness_distribution(double delta = 1e-4) {
    Marginal seller = equal_profit_seller(1.0, delta);
    std::vector<Cell> cells;
    cells.reserve(seller.size());
    for (const auto& a : seller.atoms()) {
        cells.push_back({a.v, Scalar::approx(1.0), a.prob});
    }
    return build_joint(std::move(cells));
}

// ---------------------------------------------------------------------------
// Exact-rational impossibility families.
// ---------------------------------------------------------------------------

/// Independent 2x2 joint on buyer {1, b2} x seller {0, s2} with
///   b2 = 1/x2 + x1/(x2 q2) + eps/q1,   s2 = b2 q2 + q1/x2 + eps.
/// At (x1, q1) = (0.57, 0.716) this is the distribution whose welfare-optimal
/// allocation is BIC-infeasible while the best implementable rule only
/// reaches ratio ~1.1134.
inline DiscreteJoint simple_2x2(const Scalar& x1, const Scalar& q1, const Scalar& eps) {
    if (!(x1 > Scalar(0)) || !(x1 < Scalar(1))) throw ParameterError("x1 must lie in (0,1)");
    if (!(q1 > Scalar(0)) || !(q1 < Scalar(1))) throw ParameterError("q1 must lie in (0,1)");
    if (eps < Scalar(0)) throw ParameterError("eps must be nonnegative");
    Scalar x2 = Scalar(1) - x1;
    Scalar q2 = Scalar(1) - q1;
    Scalar b2 = Scalar(1) / x2 + x1 / (x2 * q2) + eps / q1;
    Scalar s2 = b2 * q2 + q1 / x2 + eps;
    if (!(b2 > s2 && s2 > Scalar(1))) {
        throw ParameterError("parameters violate the ordering b2 > s2 > 1");
    }
    return build_joint({{Scalar(0), Scalar(1), x1 * q1},
                        {s2, Scalar(1), x1 * q2},
                        {Scalar(0), b2, x2 * q1},
                        {s2, b2, x2 * q2}});
}

/// Parameters of an L-shaped distribution: trade is possible only in the
/// s=0 column and the b_k row. For the correlated welfare family, q_i is the
/// seller's probability conditional on b=b_k; for the independent GFT family
/// it is the unconditional seller marginal.
struct LShapedSpec {
    enum class Family { welfare_correlated, gft_independent };
    Family family;
    int k = 0;
    Scalar eps;
    std::vector<Scalar> b, s, x, q;  // index i holds the paper's subscript i+1
};

namespace detail {

inline void validate_l_shape(const LShapedSpec& spec) {
    const int k = spec.k;
    if (k < 2) throw ParameterError("L-shaped family needs k >= 2");
    if (spec.b[0] != Scalar(1)) throw OrderingError("b_1 must equal 1");
    if (spec.s[0] != Scalar(0)) throw OrderingError("s_1 must equal 0");
    for (int i = 0; i + 1 < k; ++i) {
        if (!(spec.b[i] < spec.b[i + 1])) throw OrderingError("buyer values must be strictly increasing");
        if (!(spec.s[i] < spec.s[i + 1])) throw OrderingError("seller values must be strictly increasing");
    }
    if (!(spec.s[k - 1] < spec.b[k - 1])) throw OrderingError("s_k must be below b_k");
    if (spec.family == LShapedSpec::Family::gft_independent && k >= 2) {
        if (!(spec.s[1] > spec.b[k - 2])) {
            throw OrderingError("independent family needs s_2 > b_{k-1}");
        }
    }
}

}  // namespace detail

/// Materializes the joint distribution described by an L-shaped spec and
/// attaches the spec for threshold-based enumeration.
inline DiscreteJoint l_shaped_joint(const LShapedSpec& spec) {
    detail::validate_l_shape(spec);
    const int k = spec.k;
    std::vector<Cell> cells;
    if (spec.family == LShapedSpec::Family::welfare_correlated) {
        for (int i = 0; i + 1 < k; ++i) cells.push_back({Scalar(0), spec.b[i], spec.x[i]});
        for (int j = 0; j < k; ++j) cells.push_back({spec.s[j], spec.b[k - 1], spec.x[k - 1] * spec.q[j]});
    } else {
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                cells.push_back({spec.s[j], spec.b[i], spec.x[i] * spec.q[j]});
            }
        }
    }
    DiscreteJoint d = build_joint(std::move(cells));
    d.l_spec = std::make_shared<const LShapedSpec>(spec);
    return d;
}

/// Correlated L-shaped family whose best implementable welfare falls short of
/// the optimum by the ratio 1 + (k/2)(H_{2k-2}-H_{k-1}) / (2(1-2^{-k}+k/2)).
inline DiscreteJoint l_shaped_welfare(int k, const Scalar& eps = Scalar::ratio(1, 1000000)) {
    if (k < 2) throw ParameterError("k must be at least 2");
    if (!(eps > Scalar(0))) throw ParameterError("eps must be positive");
    LShapedSpec spec;
    spec.family = LShapedSpec::Family::welfare_correlated;
    spec.k = k;
    spec.eps = eps;
    spec.x.resize(k);
    spec.q.resize(k);
    spec.b.resize(k);
    spec.s.resize(k);
    for (int i = 1; i <= k - 1; ++i) spec.x[i - 1] = Scalar(pow2(-i));
    spec.x[k - 1] = Scalar(pow2(-(k - 1)));
    spec.q[0] = Scalar::ratio(1, 2);
    for (int i = 2; i <= k; ++i) spec.q[i - 1] = Scalar(Rational(1, 2 * (k - 1)));
    for (int i = 1; i <= k - 1; ++i) {
        spec.b[i - 1] = Scalar(pow2(i - 1) * Rational(k, k - 1 + i));
    }
    const Scalar& x1 = spec.x[0];
    const Scalar& xk = spec.x[k - 1];
    const Scalar& q1 = spec.q[0];
    const Scalar& q2 = spec.q[1];
    spec.b[k - 1] =
        (Scalar(1) - xk + q1 * xk + x1 * ((q1 + q2) / q2)) / (q1 * xk) + eps;
    spec.s[0] = Scalar(0);
    for (int j = 2; j <= k; ++j) {
        spec.s[j - 1] = spec.b[k - 1] - spec.x[j - 2] * spec.b[j - 2] / (xk * spec.q[j - 1]);
    }
    return l_shaped_joint(spec);
}

/// Independent L-shaped family whose best implementable gains from trade
/// fall short of the optimum by the ratio 1 + (H_k - 1)/(H_k + 1).
inline DiscreteJoint l_shaped_gft(int k, const Scalar& eps = Scalar::ratio(1, 1000000)) {
    if (k < 2) throw ParameterError("k must be at least 2");
    if (!(eps > Scalar(0))) throw ParameterError("eps must be positive");
    LShapedSpec spec;
    spec.family = LShapedSpec::Family::gft_independent;
    spec.k = k;
    spec.eps = eps;
    spec.x.resize(k);
    spec.q.resize(k);
    spec.b.resize(k);
    spec.s.resize(k);
    for (int i = 1; i <= k - 1; ++i) spec.x[i - 1] = Scalar(pow2(-i));
    spec.x[k - 1] = Scalar(pow2(-(k - 1)));
    for (int i = 0; i < k; ++i) spec.q[i] = Scalar(Rational(1, k));
    for (int i = 1; i <= k - 1; ++i) spec.b[i - 1] = Scalar(pow2(i) * Rational(1, 1 + i));
    spec.b[k - 1] = Scalar(2) / spec.x[k - 1] + eps;
    spec.s[0] = Scalar(0);
    for (int j = 2; j <= k; ++j) {
        spec.s[j - 1] = spec.b[k - 1] - spec.x[j - 2] * spec.b[j - 2] / spec.x[k - 1];
    }
    return l_shaped_joint(spec);
}

/// Evaluation of the two standard-form conditions of an L-shaped spec:
/// Condition 1 (strict inequalities that make every >k-trade rule
/// BIC-infeasible) and Condition 2 (equal-welfare products).
struct StandardFormReport {
    struct Entry {
        int i = 0, j = 0;  // paper subscripts; j unused for condition 2
        Scalar lhs, rhs;
        bool pass = false;
    };
    std::vector<Entry> condition1;  // pass iff lhs < rhs
    std::vector<Entry> condition2;  // pass iff lhs == rhs
    bool pass = true;
};

inline StandardFormReport check_standard_form(const LShapedSpec& spec) {
    const int k = spec.k;
    // Conditional probabilities entering the conditions. Conditioning on
    // b=b_k gives the q vector for both families; conditioning on s=0 gives
    // the buyer marginal for the independent family and a reweighted column
    // for the correlated one.
    std::vector<Scalar> s_given_bk = spec.q;
    std::vector<Scalar> b_given_s0(k);
    if (spec.family == LShapedSpec::Family::welfare_correlated) {
        Scalar z = 0;
        for (int r = 0; r + 1 < k; ++r) z += spec.x[r];
        z += spec.x[k - 1] * spec.q[0];
        for (int r = 0; r + 1 < k; ++r) b_given_s0[r] = spec.x[r] / z;
        b_given_s0[k - 1] = spec.x[k - 1] * spec.q[0] / z;
    } else {
        b_given_s0 = spec.x;
    }

    StandardFormReport report;
    for (int i = 1; i <= k - 1; ++i) {
        for (int j = i + 1; j <= k - 1; ++j) {
            Scalar row_mass = 0;
            for (int r = 2; r <= j; ++r) row_mass += s_given_bk[r - 1];
            Scalar col_mass = 0;
            for (int r = i; r <= k - 1; ++r) col_mass += b_given_s0[r - 1];
            StandardFormReport::Entry e;
            e.i = i;
            e.j = j;
            e.lhs = row_mass * (spec.b[k - 1] - spec.s[j - 1]) / s_given_bk[0] + spec.b[i - 1];
            e.rhs = spec.s[j - 1] - spec.b[i - 1] * col_mass / b_given_s0[k - 1];
            e.pass = e.lhs < e.rhs;
            report.pass = report.pass && e.pass;
            report.condition1.push_back(std::move(e));
        }
    }
    for (int i = 1; i <= k - 1; ++i) {
        Scalar pr_col = (spec.family == LShapedSpec::Family::welfare_correlated)
                            ? spec.x[i - 1]
                            : spec.x[i - 1] * spec.q[0];
        Scalar pr_row = spec.x[k - 1] * spec.q[i];
        StandardFormReport::Entry e;
        e.i = i;
        e.lhs = pr_col * spec.b[i - 1];
        e.rhs = pr_row * (spec.b[k - 1] - spec.s[i]);
        e.pass = e.lhs == e.rhs;
        report.pass = report.pass && e.pass;
        report.condition2.push_back(std::move(e));
    }
    return report;
}

/// Joint on which every fixed price trades in at most two of the geometric
/// diagonal cells (b/k, b), b in {k, ..., k^k}, forcing every DSIC mechanism
/// to a welfare ratio worse than k/4.
inline DiscreteJoint dsic_unbounded(int k, Scalar eps = Scalar(0)) {
    if (k < 3) throw ParameterError("k must be at least 3");
    Rational kk_inv = 1;
    for (int i = 0; i < k; ++i) kk_inv /= k;
    if (eps.is_zero()) eps = Scalar(kk_inv / 2);
    if (!eps.is_exact()) throw ParameterError("eps must be an exact rational");
    if (!(eps > Scalar(0)) || !(eps.rat() < kk_inv)) {
        throw ParameterError("eps must lie in (0, k^-k)");
    }
    std::vector<Rational> buyer_vals = {0};
    std::vector<Rational> seller_vals = {0, 1};
    {
        Rational p = 1;
        for (int i = 1; i <= k; ++i) {
            p *= k;
            buyer_vals.push_back(p);
            if (i <= k - 1) seller_vals.push_back(p);
        }
    }
    std::vector<Cell> cells;
    Rational diag_total = 0;
    for (int i = 1; i <= k; ++i) {
        Rational b = buyer_vals[i];
        Rational mass = Rational(1) / b;
        cells.push_back({Scalar(b / k), Scalar(b), Scalar(mass)});
        diag_total += mass;
    }
    Rational bg = eps.rat() / (k * (k + 1));
    for (const Rational& b : buyer_vals) {
        for (const Rational& s : seller_vals) {
            if (b == 0 && s == 0) continue;
            if (b != 0 && s * k == b) continue;  // diagonal cell
            cells.push_back({Scalar(s), Scalar(b), Scalar(bg)});
        }
    }
    cells.push_back({Scalar(0), Scalar(0), Scalar(1 - diag_total - eps.rat())});
    return build_joint(std::move(cells));
}

/// The one-sided benchmark rule x_p: trade iff b is the isolated top atom,
/// or s=0 and k >= b >= p, or s>0 and s <= p.
inline AllocationRule xp_rule(const DiscreteJoint& dist, const Scalar& p) {
    if (!dist.one_sided) throw FamilyError("x_p rules need the one-sided family tags");
    if (p < Scalar(0)) throw ParameterError("price must be nonnegative");
    const Scalar& top = dist.one_sided->top_b;
    const Scalar k_val = Scalar::approx(static_cast<double>(dist.one_sided->k));
    AllocationRule rule;
    rule.x.reserve(dist.cells.size());
    for (const auto& c : dist.cells) {
        bool trade;
        // boundary comparisons go through tolerant equality so that grid
        // atoms sitting a rounding error away from p still count
        if (c.b == top) trade = true;
        else if (c.s.is_zero()) trade = (c.b < k_val || c.b == k_val) && (c.b > p || c.b == p);
        else trade = c.s < p || c.s == p;
        rule.x.push_back(Scalar(trade ? 1 : 0));
    }
    return rule;
}

}  // namespace bitrade
