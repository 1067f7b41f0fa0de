#include "bitrade/double_auction.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace bitrade;

TEST_CASE("efficient trade counting") {
    DoubleAuctionInstance inst{{Scalar(1), Scalar(3)}, {Scalar(5), Scalar(4)}};
    DAOutcome eff = efficient_trades(inst);
    REQUIRE(eff.trades.size() == 2);
    CHECK(eff.welfare == Scalar(9));
    CHECK(efficient_trades({{Scalar(2)}, {Scalar(1)}}).trades.empty());
    CHECK(efficient_trades({{Scalar(0)}, {Scalar(10)}}).trades.size() == 1);
}

TEST_CASE("trade reduction drops the weakest pair and quotes its prices") {
    DoubleAuctionInstance inst{{Scalar(1), Scalar(3)}, {Scalar(5), Scalar(4)}};
    DAOutcome out = trade_reduction(inst);
    REQUIRE(out.trades.size() == 1);
    CHECK(out.trades[0] == std::pair<std::size_t, std::size_t>{0, 0});  // 1 <-> 5
    CHECK(out.buyer_payment == Scalar(4));
    CHECK(out.seller_receipt == Scalar(3));
    CHECK(out.welfare == Scalar(8));  // buyer 5 + retained seller 3

    DoubleAuctionInstance flat{{Scalar(0), Scalar(0), Scalar(0)},
                               {Scalar(3), Scalar(3), Scalar(3)}};
    DAOutcome f = trade_reduction(flat);
    CHECK(f.trades.size() == 2);
    CHECK(f.buyer_payment == Scalar(3));
    CHECK(f.seller_receipt == Scalar(0));

    CHECK_THROWS_AS(trade_reduction({{Scalar(0)}, {Scalar(10)}}), TooFewTradesError);
}

TEST_CASE("hybrid dispatch follows the case split on q") {
    Marginal point = Marginal::make({{Scalar(0), Scalar(1)}});
    // q >= 2: identical to trade reduction
    DoubleAuctionInstance two{{Scalar(1), Scalar(3)}, {Scalar(5), Scalar(4)}};
    DAOutcome h2 = hybrid_auction(two, point);
    DAOutcome tr = trade_reduction(two);
    CHECK(h2.trades == tr.trades);
    CHECK(h2.buyer_payment == tr.buyer_payment);
    // q = 1: offer at the floor against a point-mass seller
    DoubleAuctionInstance one{{Scalar(0)}, {Scalar(10), Scalar(2)}};
    DAOutcome h1 = hybrid_auction(one, point, Scalar(2));
    REQUIRE(h1.trades.size() == 1);
    CHECK(h1.buyer_payment == Scalar(2));
    CHECK(h1.welfare == Scalar(10));
    // q = 0: nothing happens, sellers keep their items
    DoubleAuctionInstance zero{{Scalar(5)}, {Scalar(1)}};
    DAOutcome h0 = hybrid_auction(zero, point);
    CHECK(h0.trades.empty());
    CHECK(h0.welfare == Scalar(5));
}

TEST_CASE("random instances: budget surplus and the 1 - 1/q guarantee") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> size(1, 16), value(0, 50);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        DoubleAuctionInstance inst;
        int ns = size(rng), nb = size(rng);
        for (int i = 0; i < ns; ++i) inst.sellers.push_back(Scalar::ratio(value(rng), 2));
        for (int i = 0; i < nb; ++i) inst.buyers.push_back(Scalar::ratio(value(rng), 2));
        std::size_t q = efficient_trades(inst).trades.size();
        if (q < 2) continue;
        DAOutcome out = trade_reduction(inst);
        ++checked;
        CHECK(out.seller_receipt.rat() <= out.buyer_payment.rat());  // budget surplus per pair
        Rational bound = (Rational(1) - Rational(1, static_cast<long long>(q))) *
                         optimal_welfare(inst).rat();
        CHECK(out.welfare.rat() >= bound);
    }
    CHECK(checked > 300);
}
