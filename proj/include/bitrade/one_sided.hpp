#pragma once

#include "bitrade/constructions.hpp"
#include "bitrade/distribution.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace bitrade {

/// The one-sided lower-bound family: buyer density 1/(b+eps)^2 on [1,k] plus
/// an isolated atom at k+1; conditionally on b, the seller follows a slightly
/// skewed equal-profit distribution with CDF (b/e)/(b-s+eps) on
/// [0, b(e-1)/e + eps] (an atom of mass (b/e)/(b+eps) sits at s=0).
///
/// The family is kept in structured form: the buyer marginal is discretized
/// onto the grid once, but seller conditionals are evaluated through their
/// closed-form CDF. Welfare of the benchmark rules x_p is computed per buyer
/// atom with a digamma closed form for the grid sums, so sweeps stay cheap at
/// k=64 and grid 1e-3 where the materialized joint would have ~1e9 cells.
/// to_joint() materializes the full table for small parameters.
class OneSidedFamily {
public:
    OneSidedFamily(int k, double eps, double grid) : k_(k), eps_(eps), grid_(grid) {
        if (k < 2) throw ParameterError("k must be at least 2");
        if (!(eps > 0) || !(eps < 1)) throw ParameterError("eps must lie in (0,1)");
        if (!(grid > 0)) throw DegenerateGridError("grid step must be positive");
        // buyer atoms: multiples of the grid in (1, k), then k itself
        long long j = static_cast<long long>(std::floor(1.0 / grid + 1e-9)) + 1;
        double prev = 1.0;
        for (; j * grid < k - 1e-12 * k; ++j) {
            double g = j * grid;
            buyer_v_.push_back(g);
            buyer_m_.push_back(buyer_cdf(g) - buyer_cdf(prev));
            prev = g;
        }
        buyer_v_.push_back(k);
        buyer_m_.push_back(buyer_cdf(static_cast<double>(k)) - buyer_cdf(prev));
        top_mass_ = 1.0 / (k + eps) + eps / (1.0 + eps);
    }

    int k() const { return k_; }
    double eps() const { return eps_; }
    double grid() const { return grid_; }
    double top_buyer() const { return k_ + 1.0; }
    double top_mass() const { return top_mass_; }
    const std::vector<double>& buyer_values() const { return buyer_v_; }
    const std::vector<double>& buyer_masses() const { return buyer_m_; }

    /// CDF of the continuous buyer part on [1, k].
    double buyer_cdf(double b) const { return 1.0 / (1.0 + eps_) - 1.0 / (b + eps_); }

    /// Conditional seller CDF given buyer value b (analytic, right-continuous).
    double seller_cdf(double b, double s) const {
        if (s < 0) return 0;
        if (s > seller_top(b)) return 1;
        return (b / std::numbers::e) / (b - s + eps_);
    }

    /// Upper end of the seller support conditional on b.
    double seller_top(double b) const {
        constexpr double e = std::numbers::e;
        return b * (e - 1) / e + eps_;
    }

    /// E[b]; equals E[max(b,s)] since b exceeds s throughout the support.
    double opt_welfare() const {
        double w = top_buyer() * top_mass_;
        for (std::size_t i = 0; i < buyer_v_.size(); ++i) w += buyer_v_[i] * buyer_m_[i];
        return w;
    }

    /// Expected welfare of the allocation rule x_p on the grid-discretized
    /// joint (seller conditionals pushed up onto the grid, upper endpoint
    /// kept as an atom).
    double xp_welfare(double p) const {
        double w = top_buyer() * top_mass_;
        for (std::size_t i = 0; i < buyer_v_.size(); ++i) {
            w += buyer_m_[i] * xp_cell_welfare(buyer_v_[i], p);
        }
        return w;
    }

    /// Seller's expected profit at s=0 from offers to the buyer, computed on
    /// the analytic (continuous) conditional. Strictly increasing on [1, k].
    std::vector<std::pair<double, double>> seller_profit_curve(
        const std::vector<double>& offers) const {
        constexpr double e = std::numbers::e;
        // weight(b) db = buyer density * Pr(s=0 | b); tail integral of
        // b/(e(b+eps)^3) has antiderivative -(eps+2b)/(2e(b+eps)^2).
        auto tail_integral = [&](double p) {
            double lo = std::min(std::max(p, 1.0), static_cast<double>(k_));
            return (eps_ + 2 * lo) / (2 * e * (lo + eps_) * (lo + eps_)) -
                   (eps_ + 2 * k_) / (2 * e * (k_ + eps_) * (k_ + eps_));
        };
        double atom_w = top_mass_ * (top_buyer() / e) / (top_buyer() + eps_);
        double z = tail_integral(0) + atom_w;  // Pr(s = 0)
        std::vector<std::pair<double, double>> curve;
        curve.reserve(offers.size());
        for (double p : offers) {
            double accept = (p <= top_buyer() ? tail_integral(p) : 0.0) +
                            (p <= top_buyer() ? atom_w : 0.0);
            curve.emplace_back(p, p * accept / z);
        }
        return curve;
    }

    /// Buyer's expected profit at value b from offers to the seller, on the
    /// analytic conditional: (b-p) * (b/e)/(b-p+eps). Strictly decreasing.
    std::vector<std::pair<double, double>> buyer_profit_curve(
        double b, const std::vector<double>& offers) const {
        std::vector<std::pair<double, double>> curve;
        curve.reserve(offers.size());
        for (double p : offers) {
            double f = seller_cdf(b, p);
            curve.emplace_back(p, (b - p) * f);
        }
        return curve;
    }

    /// Grid-discretized conditional seller marginal given buyer value b.
    Marginal conditional_seller(double b) const {
        DensitySpec spec;
        double f0 = seller_cdf(b, 0);
        spec.lo = 0;
        spec.hi = seller_top(b);
        spec.cdf = [this, b, f0](double x) { return seller_cdf(b, x) - f0; };
        spec.atoms = {{0.0, f0}};
        return discretize(spec, grid_);
    }

    /// Materializes the full joint table (buyer atoms x conditional seller
    /// atoms). Throws ScaleError beyond max_cells.
    DiscreteJoint to_joint(std::size_t max_cells = 2000000) const {
        std::vector<Cell> cells;
        auto add_row = [&](double b, double m) {
            Marginal cond = conditional_seller(b);
            if (cells.size() + cond.size() > max_cells) {
                throw ScaleError("materialized one-sided joint exceeds cell limit; "
                                 "use a coarser grid or smaller k");
            }
            for (const auto& a : cond.atoms()) {
                cells.push_back({a.v, Scalar::approx(b), a.prob * Scalar::approx(m)});
            }
        };
        for (std::size_t i = 0; i < buyer_v_.size(); ++i) add_row(buyer_v_[i], buyer_m_[i]);
        add_row(top_buyer(), top_mass_);
        DiscreteJoint d = build_joint(std::move(cells));
        d.one_sided = OneSidedTags{k_, eps_, grid_, Scalar::approx(top_buyer())};
        return d;
    }

private:
    /// Welfare contribution of one buyer atom b (b <= k) under x_p, per unit
    /// of buyer mass: s=0 trades iff b >= p, positive seller atoms trade iff
    /// s <= p (counting b), otherwise the seller keeps s.
    double xp_cell_welfare(double b, double p) const {
        double f0 = seller_cdf(b, 0);
        double top = seller_top(b);
        double w = 0;
        if (p <= b) w += f0 * b;  // s=0 cell trades (b <= k here)
        // positive seller mass at grid atoms <= p trades at value b
        double pos_below;
        if (p >= top) {
            pos_below = 1.0 - f0;
        } else if (p < grid_) {
            pos_below = 0.0;
        } else {
            double mp = std::floor(p / grid_ + 1e-9) * grid_;
            pos_below = seller_cdf(b, mp) - f0;
        }
        w += b * pos_below;
        // remaining positive atoms keep their own value: sum of v * mass over
        // grid atoms v > p plus the endpoint atom
        w += tail_value_sum(b, p);
        return w;
    }

    /// Sum of v * mass over positive seller atoms v > p of the discretized
    /// conditional for buyer value b. Uses Abel summation; the run of CDF
    /// values c/(a - j*grid) telescopes into a digamma difference.
    double tail_value_sum(double b, double p) const {
        double top = seller_top(b);
        if (p >= top) return 0;
        constexpr double e = std::numbers::e;
        double c = b / e;
        double a = b + eps_;
        auto F = [&](double x) { return c / (a - x); };
        long long jmax = static_cast<long long>(std::floor((top - 1e-12 * top) / grid_));
        long long j0 = std::max<long long>(1, static_cast<long long>(std::floor(p / grid_ + 1e-9)) + 1);
        double sum = 0;
        if (j0 <= jmax) {
            double gj = jmax * grid_;
            double gprev = (j0 - 1) * grid_;
            // sum_{j=j0}^{jmax} F((j-1)grid) via psi(A-j0+2) - psi(A-jmax+1)
            double A = a / grid_;
            double run = (c / grid_) * (boost::math::digamma(A - j0 + 2) -
                                        boost::math::digamma(A - static_cast<double>(jmax) + 1));
            sum += gj * F(gj) - gprev * F(gprev) - grid_ * run;
        }
        double last = jmax >= 1 ? jmax * grid_ : 0.0;
        sum += top * (1.0 - F(last));
        return sum;
    }

    int k_;
    double eps_, grid_;
    std::vector<double> buyer_v_, buyer_m_;
    double top_mass_;
};

/// Constructor named after its role: the distribution showing no one-sided
/// dominant-strategy mechanism beats e/(e-1).
inline OneSidedFamily one_sided_lb(int k, double eps, double grid) {
    return OneSidedFamily(k, eps, grid);
}

}  // namespace bitrade
