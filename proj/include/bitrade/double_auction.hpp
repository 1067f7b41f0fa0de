#pragma once

#include "bitrade/distribution.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace bitrade {

/// One realized market: each agent holds (sellers) or wants (buyers) a single
/// unit. Multi-unit analogue of the two-agent setting.
struct DoubleAuctionInstance {
    std::vector<Scalar> sellers;
    std::vector<Scalar> buyers;
};

struct DAOutcome {
    std::vector<std::pair<std::size_t, std::size_t>> trades;  // (seller idx, buyer idx)
    Scalar buyer_payment;    // price paid by every trading buyer
    Scalar seller_receipt;   // price received by every trading seller
    Scalar welfare;          // realized total value
    bool truthful = true;    // false when prices depend on trading agents' bids
};

namespace detail {

/// Indices of sellers sorted ascending and buyers sorted descending by value
/// (ties by original index), and the efficient trade count q: the longest
/// prefix with b > s pairwise.
struct SortedMarket {
    std::vector<std::size_t> sellers_asc, buyers_desc;
    std::size_t q = 0;
};

inline SortedMarket sort_market(const DoubleAuctionInstance& inst) {
    SortedMarket m;
    m.sellers_asc.resize(inst.sellers.size());
    m.buyers_desc.resize(inst.buyers.size());
    std::iota(m.sellers_asc.begin(), m.sellers_asc.end(), 0u);
    std::iota(m.buyers_desc.begin(), m.buyers_desc.end(), 0u);
    std::stable_sort(m.sellers_asc.begin(), m.sellers_asc.end(),
                     [&](std::size_t a, std::size_t b) { return inst.sellers[a] < inst.sellers[b]; });
    std::stable_sort(m.buyers_desc.begin(), m.buyers_desc.end(),
                     [&](std::size_t a, std::size_t b) { return inst.buyers[b] < inst.buyers[a]; });
    std::size_t limit = std::min(m.sellers_asc.size(), m.buyers_desc.size());
    while (m.q < limit &&
           inst.sellers[m.sellers_asc[m.q]] < inst.buyers[m.buyers_desc[m.q]]) {
        ++m.q;
    }
    return m;
}

inline Scalar non_trading_value(const DoubleAuctionInstance& inst,
                                const std::vector<std::pair<std::size_t, std::size_t>>& trades) {
    std::vector<bool> sold(inst.sellers.size(), false);
    Scalar w = 0;
    for (const auto& [s, b] : trades) {
        sold[s] = true;
        w += inst.buyers[b];
    }
    for (std::size_t i = 0; i < inst.sellers.size(); ++i) {
        if (!sold[i]) w += inst.sellers[i];
    }
    return w;
}

}  // namespace detail

/// Maximum total value: the units go to the holders of the largest values
/// among all agents (capped at the number of units).
inline Scalar optimal_welfare(const DoubleAuctionInstance& inst) {
    std::vector<Scalar> all = inst.sellers;
    all.insert(all.end(), inst.buyers.begin(), inst.buyers.end());
    std::sort(all.begin(), all.end(), [](const Scalar& a, const Scalar& b) { return b < a; });
    Scalar w = 0;
    for (std::size_t i = 0; i < inst.sellers.size() && i < all.size(); ++i) w += all[i];
    return w;
}

/// The efficient (non-truthful) outcome: all q efficient pairs trade.
inline DAOutcome efficient_trades(const DoubleAuctionInstance& inst) {
    auto m = detail::sort_market(inst);
    DAOutcome out;
    for (std::size_t i = 0; i < m.q; ++i) {
        out.trades.emplace_back(m.sellers_asc[i], m.buyers_desc[i]);
    }
    out.truthful = false;
    out.buyer_payment = Scalar(0);
    out.seller_receipt = Scalar(0);
    out.welfare = detail::non_trading_value(inst, out.trades);
    return out;
}

/// McAfee-style trade reduction: the q-1 strongest pairs trade, buyers pay
/// the q-th buyer bid, sellers receive the q-th seller bid. Truthful and
/// budget-balanced surplus-side; needs q >= 2.
inline DAOutcome trade_reduction(const DoubleAuctionInstance& inst) {
    auto m = detail::sort_market(inst);
    if (m.q < 2) {
        throw TooFewTradesError("trade reduction needs at least two efficient trades");
    }
    DAOutcome out;
    for (std::size_t i = 0; i + 1 < m.q; ++i) {
        out.trades.emplace_back(m.sellers_asc[i], m.buyers_desc[i]);
    }
    out.buyer_payment = inst.buyers[m.buyers_desc[m.q - 1]];
    out.seller_receipt = inst.sellers[m.sellers_asc[m.q - 1]];
    out.welfare = detail::non_trading_value(inst, out.trades);
    return out;
}

/// Trade reduction when at least two trades are efficient; otherwise the top
/// buyer makes a profit-maximizing offer to the lowest seller, choosing among
/// the seller's conditional atoms at or above a price floor (plus the floor
/// itself). With one efficient trade the offer price does not depend on any
/// trading counterparty's bid, so truthfulness is preserved.
inline DAOutcome hybrid_auction(const DoubleAuctionInstance& inst, const Marginal& cond_seller,
                                const Scalar& floor = Scalar(0)) {
    auto m = detail::sort_market(inst);
    if (m.q >= 2) return trade_reduction(inst);
    DAOutcome out;
    out.buyer_payment = Scalar(0);
    out.seller_receipt = Scalar(0);
    if (m.q == 1) {
        std::size_t b_idx = m.buyers_desc[0];
        std::size_t s_idx = m.sellers_asc[0];
        const Scalar& b = inst.buyers[b_idx];
        std::vector<Scalar> candidates{floor};
        for (const auto& a : cond_seller.atoms()) {
            if (!(a.v < floor)) candidates.push_back(a.v);
        }
        std::sort(candidates.begin(), candidates.end());
        std::optional<Scalar> offer;
        Scalar best_profit = 0;
        for (const auto& p : candidates) {
            if (b < p) continue;
            Scalar profit = (b - p) * cond_seller.cdf(p);
            if (!offer || best_profit < profit) {  // ties keep the lowest offer
                offer = p;
                best_profit = profit;
            }
        }
        if (offer && !(inst.sellers[s_idx] > *offer)) {
            out.trades.emplace_back(s_idx, b_idx);
            out.buyer_payment = *offer;
            out.seller_receipt = *offer;
        }
    }
    out.welfare = detail::non_trading_value(inst, out.trades);
    return out;
}

}  // namespace bitrade
