#include "bitrade/constructions.hpp"
#include "bitrade/metrics.hpp"
#include "bitrade/one_sided.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace bitrade;

TEST_CASE("one-sided family: masses sum to one") {
    OneSidedFamily fam = one_sided_lb(8, 1e-4, 1e-3);
    double total = fam.top_mass();
    for (double m : fam.buyer_masses()) total += m;
    CHECK(total == Catch::Approx(1.0).margin(1e-9));
    Marginal cond = fam.conditional_seller(4.0);
    Scalar cmass = 0;
    for (const auto& a : cond.atoms()) cmass += a.prob;
    CHECK(cmass.as_double() == Catch::Approx(1.0).margin(1e-9));
    // the conditional CDF closes at the top of its support
    CHECK(fam.seller_cdf(4.0, fam.seller_top(4.0)) == Catch::Approx(1.0).margin(1e-12));
    CHECK_THROWS_AS(one_sided_lb(1, 1e-4, 1e-3), ParameterError);
    CHECK_THROWS_AS(one_sided_lb(4, 2.0, 1e-3), ParameterError);
    CHECK_THROWS_AS(one_sided_lb(4, 1e-4, 0.0), DegenerateGridError);
}

TEST_CASE("closed-form x_p welfare matches the materialized joint") {
    OneSidedFamily fam = one_sided_lb(3, 1e-2, 0.1);
    DiscreteJoint d = fam.to_joint();
    for (double p : {0.0, 0.15, 0.5, 1.0, 1.7, 2.5}) {
        double direct =
            rule_value(xp_rule(d, Scalar::approx(p)), d, Objective::welfare).as_double();
        CHECK(fam.xp_welfare(p) == Catch::Approx(direct).margin(1e-9));
    }
    CHECK(fam.opt_welfare() ==
          Catch::Approx(opt_welfare(d).as_double()).margin(1e-9));
}

TEST_CASE("optimal welfare approaches ln k + 1 + 1/k") {
    int k = 64;
    OneSidedFamily fam = one_sided_lb(k, 1e-4, 1e-3);
    double target = std::log(static_cast<double>(k)) + 1 + 1.0 / k;
    CHECK(fam.opt_welfare() == Catch::Approx(target).epsilon(0.02));
}

TEST_CASE("profit curves are strictly monotone along the lemma directions") {
    OneSidedFamily fam = one_sided_lb(16, 1e-3, 1e-3);
    std::vector<double> offers;
    for (int i = 0; i <= 40; ++i) offers.push_back(1.0 + i * 15.0 / 40);
    auto seller = fam.seller_profit_curve(offers);
    for (std::size_t i = 1; i < seller.size(); ++i) {
        CHECK(seller[i].second > seller[i - 1].second);
    }
    double b = 4.0;
    std::vector<double> down;
    for (int i = 0; i <= 40; ++i) down.push_back(i * fam.seller_top(b) / 41);
    auto buyer = fam.buyer_profit_curve(b, down);
    for (std::size_t i = 1; i < buyer.size(); ++i) {
        CHECK(buyer[i].second < buyer[i - 1].second);
    }
}

TEST_CASE("materialization refuses absurd sizes") {
    CHECK_THROWS_AS(one_sided_lb(64, 1e-4, 1e-3).to_joint(), ScaleError);
}
