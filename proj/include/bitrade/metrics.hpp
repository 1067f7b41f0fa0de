#pragma once

#include "bitrade/distribution.hpp"
#include "bitrade/mechanisms.hpp"

#include <optional>

namespace bitrade {

enum class Objective { welfare, gft };

struct Evaluation {
    Scalar welfare, gft, opt_welfare, opt_gft, ratio_welfare;
    std::optional<Scalar> ratio_gft;  // absent when opt_gft = 0 (or gft = 0)
};

inline Scalar opt_welfare(const DiscreteJoint& dist) {
    Scalar w = 0;
    for (const auto& c : dist.cells) w += c.prob * (c.b > c.s ? c.b : c.s);
    return w;
}

inline Scalar opt_gft(const DiscreteJoint& dist) {
    Scalar g = 0;
    for (const auto& c : dist.cells) {
        if (c.b > c.s) g += c.prob * (c.b - c.s);
    }
    return g;
}

/// Expected objective of a bare allocation rule: welfare counts x*b+(1-x)*s
/// per cell, gains from trade count x*(b-s).
inline Scalar rule_value(const AllocationRule& rule, const DiscreteJoint& dist,
                         Objective objective) {
    if (rule.x.size() != dist.cells.size()) {
        throw SupportMismatchError("rule is not defined on the distribution's support");
    }
    Scalar total = 0;
    for (std::size_t i = 0; i < dist.cells.size(); ++i) {
        const Cell& c = dist.cells[i];
        const Scalar& x = rule.x[i];
        if (objective == Objective::welfare) {
            total += c.prob * (x * c.b + (Scalar(1) - x) * c.s);
        } else {
            total += c.prob * x * (c.b - c.s);
        }
    }
    return total;
}

/// All welfare/GFT expectations and ratios of a mechanism on a distribution.
inline Evaluation evaluate(const Mechanism& mech, const DiscreteJoint& dist) {
    if (mech.rule.x.size() != dist.cells.size() || mech.transfer.size() != dist.cells.size()) {
        throw SupportMismatchError("mechanism is not defined on the distribution's support");
    }
    Evaluation ev;
    ev.welfare = rule_value(mech.rule, dist, Objective::welfare);
    ev.gft = rule_value(mech.rule, dist, Objective::gft);
    ev.opt_welfare = opt_welfare(dist);
    ev.opt_gft = opt_gft(dist);
    if (ev.welfare.is_zero()) throw ParameterError("mechanism welfare is zero");
    ev.ratio_welfare = ev.opt_welfare / ev.welfare;
    if (!ev.opt_gft.is_zero() && !ev.gft.is_zero()) {
        ev.ratio_gft = ev.opt_gft / ev.gft;
    }
    return ev;
}

}  // namespace bitrade
