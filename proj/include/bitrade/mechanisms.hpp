#pragma once

#include "bitrade/constructions.hpp"
#include "bitrade/distribution.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace bitrade {

enum class TieBreak { lowest, highest };

/// A priced allocation: per-cell trade probability and expected transfer,
/// both parallel to the distribution's cells. For deterministic mechanisms
/// the transfer on a trading cell is the on-trade price.
struct Mechanism {
    AllocationRule rule;
    std::vector<Scalar> transfer;
    bool randomized = false;

    const Scalar& x(std::size_t i) const { return rule.x[i]; }

    /// Implied per-trade price (t / x); zero on non-trading cells.
    Scalar price(std::size_t i) const {
        if (rule.x[i].is_zero()) return Scalar(0);
        return transfer[i] / rule.x[i];
    }
};

/// Profit of one agent from take-it-or-leave-it offers at a fixed own value.
struct OfferCurve {
    Side side;
    Scalar value;
    std::vector<std::pair<Scalar, Scalar>> points;  // (offer, expected profit)
};

/// Trade at price p whenever s <= p <= b. The only DSIC mechanism shape.
inline Mechanism fixed_price(const DiscreteJoint& dist, const Scalar& p) {
    if (p < Scalar(0)) throw ParameterError("price must be nonnegative");
    Mechanism m;
    m.rule.x.reserve(dist.cells.size());
    m.transfer.reserve(dist.cells.size());
    for (const auto& c : dist.cells) {
        bool trade = c.s <= p && p <= c.b;
        m.rule.x.push_back(Scalar(trade ? 1 : 0));
        m.transfer.push_back(trade ? p : Scalar(0));
    }
    return m;
}

namespace detail {

/// Argmax of profit over candidate offers; ties (tolerance-aware in approx
/// mode) resolved toward the lowest or highest offer.
inline Scalar pick_offer(std::vector<std::pair<Scalar, Scalar>>& cand, TieBreak tie) {
    // cand: (offer, profit), offers ascending
    std::size_t best = 0;
    for (std::size_t i = 1; i < cand.size(); ++i) {
        if (cand[i].second > cand[best].second) best = i;
    }
    if (tie == TieBreak::lowest) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (cand[i].second == cand[best].second) return cand[i].first;
        }
    } else {
        for (std::size_t i = cand.size(); i-- > 0;) {
            if (cand[i].second == cand[best].second) return cand[i].first;
        }
    }
    return cand[best].first;
}

inline Mechanism buyer_offering_impl(const DiscreteJoint& dist,
                                     const std::vector<Marginal::Atom>& buyers,
                                     TieBreak tie,
                                     const std::optional<std::vector<Scalar>>& forced_candidates) {
    // offer per distinct buyer value
    std::vector<std::pair<Scalar, Scalar>> offer_of;  // (buyer value, offer)
    for (const auto& ba : buyers) {
        Marginal cond = condition(dist, Side::buyer, ba.v);
        std::vector<Scalar> candidates;
        if (forced_candidates) {
            for (const auto& c : *forced_candidates) {
                if (c < ba.v || c == ba.v) candidates.push_back(c);
            }
        } else {
            candidates.push_back(Scalar(0));
            for (const auto& sa : cond.atoms()) {
                if (!sa.v.is_zero()) candidates.push_back(sa.v);
            }
        }
        std::sort(candidates.begin(), candidates.end());
        std::vector<std::pair<Scalar, Scalar>> profits;
        profits.reserve(candidates.size());
        // running prefix mass over the sorted conditional atoms gives cdf(p)
        // for ascending candidates in one merge pass
        Scalar mass = 0;
        std::size_t ai = 0;
        const auto& atoms = cond.atoms();
        for (const auto& p : candidates) {
            while (ai < atoms.size() && atoms[ai].v <= p) mass += atoms[ai++].prob;
            profits.emplace_back(p, (ba.v - p) * mass);
        }
        offer_of.emplace_back(ba.v, pick_offer(profits, tie));
    }
    Mechanism m;
    m.rule.x.reserve(dist.cells.size());
    m.transfer.reserve(dist.cells.size());
    for (const auto& c : dist.cells) {
        Scalar offer;
        for (const auto& [v, o] : offer_of) {
            if (v == c.b) { offer = o; break; }
        }
        bool trade = c.s <= offer;
        m.rule.x.push_back(Scalar(trade ? 1 : 0));
        m.transfer.push_back(trade ? offer : Scalar(0));
    }
    return m;
}

}  // namespace detail

/// The buyer makes the profit-maximizing take-it-or-leave-it offer
/// argmax_p (b - p) * F_{s|b}(p). Candidates are the seller's conditional
/// atoms plus 0 (the profit is piecewise constant between atoms and
/// right-maximized at them).
inline Mechanism buyer_offering(const DiscreteJoint& dist, TieBreak tie = TieBreak::lowest) {
    return detail::buyer_offering_impl(dist, marginal(dist, Side::buyer).atoms(), tie,
                                       std::nullopt);
}

/// Buyer-offering with candidate offers restricted to multiples of
/// delta = eps * OPT, the discretization that only needs the coarse CDF.
inline Mechanism eps_buyer_offering(const DiscreteJoint& dist, const Scalar& eps) {
    if (!(eps > Scalar(0))) throw ParameterError("eps must be positive");
    Scalar opt = 0;
    for (const auto& c : dist.cells) opt += c.prob * (c.b > c.s ? c.b : c.s);
    if (!(opt > Scalar(0))) throw ParameterError("optimal welfare must be positive");
    Scalar delta = eps * opt;
    Marginal buyers = marginal(dist, Side::buyer);
    std::vector<Scalar> grid;
    Scalar top = buyers.max_value();
    for (Scalar g = 0; g < top || g == top; g += delta) grid.push_back(g);
    return detail::buyer_offering_impl(dist, buyers.atoms(), TieBreak::lowest, grid);
}

/// The seller makes the revenue-maximizing offer argmax_p p * Pr[b >= p | s]
/// over the buyer's conditional atoms at or above the seller's own value.
inline Mechanism seller_offering(const DiscreteJoint& dist, TieBreak tie = TieBreak::highest) {
    Marginal sellers = marginal(dist, Side::seller);
    std::vector<std::pair<Scalar, std::optional<Scalar>>> offer_of;
    for (const auto& sa : sellers.atoms()) {
        Marginal cond = condition(dist, Side::seller, sa.v);
        std::vector<std::pair<Scalar, Scalar>> revenues;
        for (const auto& ba : cond.atoms()) {
            if (ba.v < sa.v) continue;  // offering below own value breaks IR
            revenues.emplace_back(ba.v, ba.v * cond.tail(ba.v));
        }
        if (revenues.empty()) {
            offer_of.emplace_back(sa.v, std::nullopt);
        } else {
            offer_of.emplace_back(sa.v, detail::pick_offer(revenues, tie));
        }
    }
    Mechanism m;
    m.rule.x.reserve(dist.cells.size());
    m.transfer.reserve(dist.cells.size());
    for (const auto& c : dist.cells) {
        std::optional<Scalar> offer;
        for (const auto& [v, o] : offer_of) {
            if (v == c.s) { offer = o; break; }
        }
        bool trade = offer && *offer <= c.b;
        m.rule.x.push_back(Scalar(trade ? 1 : 0));
        m.transfer.push_back(trade ? *offer : Scalar(0));
    }
    return m;
}

/// Expected profit of one agent from each requested take-it-or-leave-it
/// offer, on the conditional distribution of the opposite side.
inline OfferCurve offer_profit_curve(const DiscreteJoint& dist, Side side, const Scalar& value,
                                     std::vector<Scalar> offers) {
    Marginal cond = condition(dist, side, value);  // throws OutOfSupportError
    std::sort(offers.begin(), offers.end());
    OfferCurve curve;
    curve.side = side;
    curve.value = value;
    for (const auto& p : offers) {
        Scalar profit = (side == Side::buyer) ? (value - p) * cond.cdf(p)
                                              : p * cond.tail(p);
        curve.points.emplace_back(p, profit);
    }
    return curve;
}

/// The explicit randomized mechanism on the 2x2 gap distribution: trade with
/// probability r (transfer r) at (0,1), always at price t2 at (0,b2), never
/// at (s2,1), always at price s2 at (s2,b2). Defaults keep it BIC with a
/// welfare ratio below 1.00002.
inline Mechanism appendix_b_mechanism(const DiscreteJoint& dist,
                                      const Scalar& r = Scalar::ratio(19997, 20000),
                                      const Scalar& t2 = Scalar::ratio(23261, 10000)) {
    Marginal buyers = marginal(dist, Side::buyer);
    Marginal sellers = marginal(dist, Side::seller);
    bool shape_ok = dist.cells.size() == 4 && buyers.size() == 2 && sellers.size() == 2 &&
                    buyers.min_value() == Scalar(1) && sellers.min_value() == Scalar(0) &&
                    buyers.at(0).prob == Scalar::ratio(57, 100) &&
                    sellers.at(0).prob == Scalar::ratio(716, 1000);
    if (shape_ok) {
        const Scalar& s2 = sellers.max_value();
        const Scalar& b2 = buyers.max_value();
        shape_ok = Scalar(1) < s2 && s2 < b2;
    }
    if (!shape_ok) {
        throw FamilyError("distribution does not match the 2x2 gap parameters");
    }
    const Scalar& s2 = sellers.max_value();
    const Scalar& b2 = buyers.max_value();
    if (!(r > Scalar(0)) || !(r < Scalar(1))) throw ParameterError("r must lie in (0,1)");
    Mechanism m;
    m.randomized = true;
    m.rule.x.assign(dist.cells.size(), Scalar(0));
    m.transfer.assign(dist.cells.size(), Scalar(0));
    auto set = [&](const Scalar& s, const Scalar& b, const Scalar& x, const Scalar& t) {
        std::size_t i = dist.find(s, b);
        if (i == static_cast<std::size_t>(-1)) throw FamilyError("missing cell in 2x2 joint");
        m.rule.x[i] = x;
        m.transfer[i] = t;
    };
    set(Scalar(0), Scalar(1), r, r);
    set(Scalar(0), b2, Scalar(1), t2);
    set(s2, Scalar(1), Scalar(0), Scalar(0));
    set(s2, b2, Scalar(1), s2);
    return m;
}

}  // namespace bitrade
