#include "bitrade/constructions.hpp"
#include "bitrade/one_sided.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace bitrade;

TEST_CASE("equal revenue buyer: every support offer earns about 1") {
    double k = 4;
    Marginal m = equal_revenue_buyer(k, true, 1e-4);
    CHECK_THROWS_AS(equal_revenue_buyer(0.5), ParameterError);
    // top atom mass 1/k, revenue k * 1/k = 1 exactly at the top
    CHECK(m.max_value().as_double() == Catch::Approx(k));
    CHECK(m.atoms().back().prob.as_double() == Catch::Approx(1.0 / k).margin(1e-3));
    for (std::size_t i = 0; i < m.size(); i += 97) {
        const auto& a = m.at(i);
        double revenue = a.v.as_double() * m.tail(a.v).as_double();
        CHECK(revenue == Catch::Approx(1.0).margin(5e-3));
    }
}

TEST_CASE("equal profit seller: every support offer leaves profit 1/e") {
    constexpr double e = std::numbers::e;
    Marginal m = equal_profit_seller(1.0, 1e-4);
    CHECK_THROWS_AS(equal_profit_seller(0.0), ParameterError);
    for (std::size_t i = 0; i < m.size(); i += 83) {
        const auto& a = m.at(i);
        double profit = (1 - a.v.as_double()) * m.cdf(a.v).as_double();
        CHECK(profit == Catch::Approx(1 / e).margin(5e-3));
    }
    // above the support the profit drops below 1/e
    CHECK((1 - 0.7) * m.cdf(Scalar::approx(0.7)).as_double() < 1 / e);
}

TEST_CASE("tightness distribution: unit buyer, equal-profit seller") {
    DiscreteJoint d = tightness_distribution(1e-3);
    for (const auto& c : d.cells) CHECK(c.b == Scalar::approx(1.0));
    Marginal s = marginal(d, Side::seller);
    CHECK(s.at(0).prob.as_double() == Catch::Approx(1 / std::numbers::e).margin(1e-9));
}

TEST_CASE("simple 2x2 gap distribution parameters") {
    Scalar eps = Scalar::ratio(1, 1000000);
    DiscreteJoint d = simple_2x2(Scalar::ratio(57, 100), Scalar::ratio(716, 1000), eps);
    REQUIRE(d.cells.size() == 4);
    Marginal buyers = marginal(d, Side::buyer);
    Marginal sellers = marginal(d, Side::seller);
    const Scalar& b2 = buyers.max_value();
    const Scalar& s2 = sellers.max_value();
    CHECK(b2.as_double() == Catch::Approx(6.9931229).margin(1e-4));
    CHECK(s2.as_double() == Catch::Approx(3.6511642).margin(1e-4));
    // the strict gap condition s2 - x1/x2 > (q2/q1)(b2 - s2) + 1 holds with
    // margin exactly eps * (1 + q2/q1)
    Scalar x1 = Scalar::ratio(57, 100), x2 = Scalar(1) - x1;
    Scalar q1 = Scalar::ratio(716, 1000), q2 = Scalar(1) - q1;
    Scalar lhs = s2 - x1 / x2;
    Scalar rhs = q2 / q1 * (b2 - s2) + Scalar(1);
    CHECK(lhs - rhs == eps * (Scalar(1) + q2 / q1));
    // both sides sit near 2.32558 at this eps; the margin shrinks with eps
    CHECK(lhs.as_double() == Catch::Approx(2.32558).margin(1e-4));
    CHECK(rhs.as_double() == Catch::Approx(2.32558).margin(1e-4));
    // out-of-range parameters -> ParameterError
    CHECK_THROWS_AS(simple_2x2(Scalar::ratio(3, 2), Scalar::ratio(1, 2), eps), ParameterError);
    CHECK_THROWS_AS(simple_2x2(Scalar::ratio(1, 2), Scalar(1), eps), ParameterError);
    CHECK_THROWS_AS(simple_2x2(Scalar::ratio(1, 2), Scalar::ratio(1, 2), Scalar(-1)),
                    ParameterError);
}

TEST_CASE("correlated L-shaped family at k=2") {
    Scalar eps = Scalar::ratio(1, 1000000);
    DiscreteJoint d = l_shaped_welfare(2, eps);
    REQUIRE(d.l_spec);
    const LShapedSpec& spec = *d.l_spec;
    CHECK(spec.b[0] == Scalar(1));
    CHECK(spec.b[1] == Scalar(7) + eps);
    CHECK(spec.s[1] == Scalar(5) + eps);
    CHECK(spec.x[0] == Scalar::ratio(1, 2));
    CHECK(spec.q[0] == Scalar::ratio(1, 2));
    REQUIRE(d.cells.size() == 3);  // (0,1), (0,b2), (s2,b2)
}

TEST_CASE("independent L-shaped family at k=2 and its gap ordering") {
    Scalar eps = Scalar::ratio(1, 1000000);
    DiscreteJoint d = l_shaped_gft(2, eps);
    REQUIRE(d.l_spec);
    CHECK(d.l_spec->b[1] == Scalar(4) + eps);
    CHECK(d.l_spec->s[1] == Scalar(3) + eps);
    REQUIRE(d.cells.size() == 4);  // full product
    for (int k = 2; k <= 16; ++k) {
        DiscreteJoint dk = l_shaped_gft(k, eps);
        CHECK(dk.l_spec->s[1].rat() > dk.l_spec->b[k - 2].rat());
    }
}

TEST_CASE("standard form report: both families pass, perturbations fail") {
    Scalar eps = Scalar::ratio(1, 1000000);
    for (int k = 2; k <= 6; ++k) {
        CHECK(check_standard_form(*l_shaped_welfare(k, eps).l_spec).pass);
        CHECK(check_standard_form(*l_shaped_gft(k, eps).l_spec).pass);
    }
    // perturbing one seller value breaks the equal-product condition
    LShapedSpec spec = *l_shaped_welfare(3, eps).l_spec;
    spec.s[1] += Scalar::ratio(1, 1000);
    StandardFormReport rep = check_standard_form(spec);
    CHECK_FALSE(rep.pass);
    bool cond2_broken = false;
    for (const auto& e : rep.condition2) cond2_broken = cond2_broken || !e.pass;
    CHECK(cond2_broken);
}

TEST_CASE("gft family condition 2 holds with equality") {
    StandardFormReport rep = check_standard_form(*l_shaped_gft(3, Scalar::ratio(1, 1000000)).l_spec);
    for (const auto& e : rep.condition2) {
        CHECK(e.pass);
        CHECK(e.lhs == e.rhs);
    }
}

TEST_CASE("scaled diagonal family: masses and bounds") {
    DiscreteJoint d = dsic_unbounded(3);
    // diagonal cells (b/3, b) for b = 3, 9, 27 with masses 1/3, 1/9, 1/27
    for (long long bv : {3, 9, 27}) {
        std::size_t idx = d.find(Scalar(bv / 3), Scalar(bv));
        REQUIRE(idx != static_cast<std::size_t>(-1));
        CHECK(d.cells[idx].prob == Scalar::ratio(1, bv));
    }
    CHECK(d.all_exact());
    CHECK_THROWS_AS(dsic_unbounded(2), ParameterError);
    CHECK_THROWS_AS(dsic_unbounded(3, Scalar::ratio(1, 27)), ParameterError);
}

TEST_CASE("x_p rule follows the case split of the one-sided family") {
    OneSidedFamily fam = one_sided_lb(3, 1e-2, 0.25);
    DiscreteJoint d = fam.to_joint();
    AllocationRule r0 = xp_rule(d, Scalar(0));
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        bool expect = d.cells[i].b == Scalar::approx(4.0) || d.cells[i].s.is_zero();
        CHECK(r0.x[i] == Scalar(expect ? 1 : 0));
    }
    // p = 2 is above every positive seller value (top < 2) but inside the
    // buyer range: s=0 cells need b >= p, positive-s cells all trade
    AllocationRule r2 = xp_rule(d, Scalar::approx(2.0));
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        const Cell& c = d.cells[i];
        bool expect = c.b == Scalar::approx(4.0) || !c.s.is_zero() ||
                      (c.s.is_zero() && c.b.as_double() >= 2.0 - 1e-12);
        CHECK(r2.x[i] == Scalar(expect ? 1 : 0));
    }
    DiscreteJoint bare = build_joint({{Scalar(0), Scalar(1), Scalar(1)}});
    CHECK_THROWS_AS(xp_rule(bare, Scalar(0)), FamilyError);
}
