// Acceptance gate: one line per criterion, exit code = number of failures.

#include "bitrade/constructions.hpp"
#include "bitrade/double_auction.hpp"
#include "bitrade/feasibility.hpp"
#include "bitrade/mechanisms.hpp"
#include "bitrade/metrics.hpp"
#include "bitrade/one_sided.hpp"
#include "bitrade/repro.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

using namespace bitrade;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass, double seconds, double limit) {
    bool ok = pass && seconds < limit;
    if (!ok) ++failures;
    std::printf("%s criterion %2d: %s (%.2fs / limit %.0fs)%s\n", ok ? "PASS" : "FAIL", id,
                what.c_str(), seconds, limit, pass || seconds >= limit ? "" : " [check failed]");
    std::fflush(stdout);
}

template <class F>
void timed(int id, const std::string& what, double limit, F f) {
    auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string note;
    try {
        pass = f(note);
    } catch (const std::exception& ex) {
        note = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(id, what + (note.empty() ? "" : " -- " + note), pass, secs, limit);
}

DiscreteJoint random_joint(std::mt19937& rng) {
    std::uniform_int_distribution<int> size(1, 8), value(0, 30), bvalue(1, 30), weight(1, 20);
    int ns = size(rng), nb = size(rng);
    std::vector<Scalar> sv, bv;
    for (int i = 0; i < ns; ++i) sv.push_back(Scalar::ratio(value(rng), 3));
    for (int i = 0; i < nb; ++i) bv.push_back(Scalar::ratio(bvalue(rng), 3));
    std::vector<Cell> cells;
    long long total = 0;
    std::vector<long long> w;
    for (int i = 0; i < ns * nb; ++i) {
        w.push_back(weight(rng));
        total += w.back();
    }
    for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < nb; ++j) {
            cells.push_back({sv[i], bv[j], Scalar::ratio(w[i * nb + j], total)});
        }
    }
    return build_joint(std::move(cells));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

int main() {
    constexpr double e = std::numbers::e;

    timed(1, "buyer-offering worst case hits e/(e-1) at grid 1e-4", 1.0, [&](std::string& note) {
        DiscreteJoint d = tightness_distribution(1e-4);
        double ratio = evaluate(buyer_offering(d, TieBreak::lowest), d).ratio_welfare.as_double();
        note = "ratio " + fmt(ratio);
        return std::abs(ratio - e / (e - 1)) <= 1e-3;
    });

    timed(2, "buyer-offering ratio <= e/(e-1)+1e-9 on 1000 random joints", 10.0,
          [&](std::string& note) {
              std::mt19937 rng(42);
              double worst = 0;
              for (int i = 0; i < 1000; ++i) {
                  DiscreteJoint d = random_joint(rng);
                  worst = std::max(worst,
                                   evaluate(buyer_offering(d), d).ratio_welfare.as_double());
              }
              note = "worst ratio " + fmt(worst);
              return worst <= e / (e - 1) + 1e-9;
          });

    timed(3, "one-sided bound at k=64 plus profit-curve monotonicity", 30.0,
          [&](std::string& note) {
              ReproTarget t = repro_one_sided_bound(64, 1e-4, 1e-3);
              OneSidedFamily fam = one_sided_lb(64, 1e-4, 1e-3);
              bool mono = true;
              std::vector<double> up;
              for (int i = 0; i <= 200; ++i) up.push_back(1.0 + i * 63.0 / 200);
              auto sc = fam.seller_profit_curve(up);
              for (std::size_t i = 1; i < sc.size(); ++i) mono = mono && sc[i].second > sc[i - 1].second;
              for (double b : {2.0, 8.0, 32.0}) {
                  std::vector<double> down;
                  for (int i = 0; i <= 200; ++i) down.push_back(i * fam.seller_top(b) / 201);
                  auto bc = fam.buyer_profit_curve(b, down);
                  for (std::size_t i = 1; i < bc.size(); ++i) mono = mono && bc[i].second < bc[i - 1].second;
              }
              note = "min ratio " + fmt(t.computed.as_double()) + " vs bound " +
                     fmt(t.expected.as_double()) + (mono ? ", curves monotone" : ", monotonicity BROKEN");
              return t.pass && mono;
          });

    timed(4, "2x2 exhaustive best ratio in [1.112,1.114]; optimal and diagonal infeasible", 5.0,
          [&](std::string& note) {
              DiscreteJoint d = simple_2x2(Scalar::ratio(57, 100), Scalar::ratio(716, 1000),
                                           Scalar::ratio(1, 1000000));
              BestResult best = best_implementable(d, Objective::welfare, BestStrategy::exhaustive);
              double r = best.ratio ? best.ratio->as_double() : 0;
              const Scalar& b2 = marginal(d, Side::buyer).max_value();
              const Scalar& s2 = marginal(d, Side::seller).max_value();
              auto rule_on = [&](std::vector<std::pair<Scalar, Scalar>> cs) {
                  AllocationRule rl = no_trade_rule(d);
                  for (auto& [s, b] : cs) rl.x[d.find(s, b)] = Scalar(1);
                  return rl;
              };
              bool opt_inf = !implementable(rule_on({{Scalar(0), Scalar(1)},
                                                     {Scalar(0), b2},
                                                     {s2, b2}}),
                                            d)
                                  .feasible;
              bool diag_inf = !implementable(rule_on({{Scalar(0), Scalar(1)}, {s2, b2}}), d).feasible;
              note = "best ratio " + fmt(r);
              return 1.112 <= r && r <= 1.114 && opt_inf && diag_inf;
          });

    timed(5, "correlated welfare gap matches the closed form for k=2..8", 60.0,
          [&](std::string& note) {
              ReproTarget t = repro_l_shaped_welfare(8);
              Scalar eps = Scalar::ratio(1, 1000000);
              bool agree = true;
              for (int k = 2; k <= 3; ++k) {
                  DiscreteJoint d = l_shaped_welfare(k, eps);
                  BestResult a = best_implementable(d, Objective::welfare, BestStrategy::threshold);
                  BestResult b = best_implementable(d, Objective::welfare, BestStrategy::exhaustive);
                  agree = agree && a.value.rat() == b.value.rat();
              }
              note = "k=8 ratio " + fmt(t.computed.as_double()) +
                     (agree ? ", strategies agree for k<=3" : ", strategy MISMATCH");
              return t.pass && agree;
          });

    timed(6, "independent GFT gap matches the closed form for k=2..8", 60.0,
          [&](std::string& note) {
              ReproTarget t = repro_l_shaped_gft(8);
              note = "k=8 ratio " + fmt(t.computed.as_double()) + " vs " +
                     fmt(t.expected.as_double());
              return t.pass;
          });

    timed(7, "every fixed price loses at least k/4 on the diagonal family (k=4,8)", 10.0,
          [&](std::string& note) {
              ReproTarget t4 = repro_dsic_unbounded(4);
              ReproTarget t8 = repro_dsic_unbounded(8);
              note = "min ratios " + fmt(t4.computed.as_double()) + " (k=4), " +
                     fmt(t8.computed.as_double()) + " (k=8)";
              return t4.pass && t8.pass;
          });

    timed(8, "randomized 2x2: BIC, ratio < 1.00002, deterministic best >= 1.113", 5.0,
          [&](std::string& note) {
              ReproTarget t = repro_randomized_gap();
              note = "ratio " + fmt(t.computed.as_double());
              return t.pass;
          });

    timed(9, "standard-form conditions hold for both families, k=2..16", 10.0,
          [&](std::string& note) {
              Scalar eps = Scalar::ratio(1, 1000000);
              bool ok = true;
              for (int k = 2; k <= 16; ++k) {
                  ok = ok && check_standard_form(*l_shaped_welfare(k, eps).l_spec).pass;
                  ok = ok && check_standard_form(*l_shaped_gft(k, eps).l_spec).pass;
              }
              return ok;
          });

    timed(10, "trade reduction guarantees and hybrid dispatch", 10.0, [&](std::string& note) {
        std::mt19937 rng(99);
        std::uniform_int_distribution<int> size(1, 16), value(0, 50);
        bool ok = true;
        int over2 = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            DoubleAuctionInstance inst;
            int ns = size(rng), nb = size(rng);
            for (int i = 0; i < ns; ++i) inst.sellers.push_back(Scalar::ratio(value(rng), 2));
            for (int i = 0; i < nb; ++i) inst.buyers.push_back(Scalar::ratio(value(rng), 2));
            std::size_t q = efficient_trades(inst).trades.size();
            if (q < 2) continue;
            DAOutcome out = trade_reduction(inst);
            ok = ok && out.seller_receipt.rat() <= out.buyer_payment.rat();
            Rational bound = (Rational(1) - Rational(1, static_cast<long long>(q))) *
                             optimal_welfare(inst).rat();
            ok = ok && out.welfare.rat() >= bound;
        }
        Marginal point = Marginal::make({{Scalar(0), Scalar(1)}});
        DoubleAuctionInstance two{{Scalar(1), Scalar(3)}, {Scalar(5), Scalar(4)}};
        ok = ok && hybrid_auction(two, point).trades.size() == 1;  // trade reduction path
        DoubleAuctionInstance one{{Scalar(0)}, {Scalar(10), Scalar(2)}};
        DAOutcome h1 = hybrid_auction(one, point, Scalar(2));
        ok = ok && h1.trades.size() == 1 && h1.buyer_payment == Scalar(2);
        DoubleAuctionInstance zero{{Scalar(5)}, {Scalar(1)}};
        ok = ok && hybrid_auction(zero, point).trades.empty();
        if (over2 > 0) note = std::to_string(over2) + " hybrid instances above ratio 2 (flagged)";
        return ok;
    });

    std::printf("%s: %d/10 criteria passed\n", failures == 0 ? "PASS" : "FAIL", 10 - failures);
    return failures;
}
