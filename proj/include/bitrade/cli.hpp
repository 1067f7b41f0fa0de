#pragma once

#include "bitrade/constructions.hpp"
#include "bitrade/distribution.hpp"
#include "bitrade/double_auction.hpp"
#include "bitrade/feasibility.hpp"
#include "bitrade/json_io.hpp"
#include "bitrade/mechanisms.hpp"
#include "bitrade/metrics.hpp"
#include "bitrade/one_sided.hpp"
#include "bitrade/repro.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace bitrade::cli {

namespace detail {

inline Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open " + path);
    return Json::parse(in);
}

inline std::string scalar_csv(const Scalar& v) {
    if (v.is_exact()) return v.str();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v.as_double());
    return buf;
}

inline std::vector<Scalar> parse_scalar_list(const std::string& text) {
    std::vector<Scalar> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(scalar_from_string_exact(item));
    }
    if (out.empty()) throw ParameterError("empty value list: " + text);
    return out;
}

/// Applies the BITRADE_MODE override to a freshly built/loaded joint.
inline DiscreteJoint apply_mode(DiscreteJoint d) {
    const char* mode = std::getenv("BITRADE_MODE");
    if (mode && std::string(mode) == "approx") return d.to_approx();
    return d;
}

struct Output {
    std::string path;  // empty = stdout
    bool csv = false;

    void emit(std::ostream& fallback, const Json& j,
              const std::vector<std::vector<std::string>>& table) const {
        std::ofstream file;
        std::ostream* os = &fallback;
        if (!path.empty()) {
            file.open(path);
            if (!file) throw ParameterError("cannot open " + path + " for writing");
            os = &file;
        }
        if (csv) {
            write_csv(*os, table);
        } else {
            *os << j.dump(2) << "\n";
        }
    }
};

inline std::vector<std::vector<std::string>> cells_table(const Json& j,
                                                         const std::vector<std::string>& keys) {
    std::vector<std::vector<std::string>> rows{keys};
    for (const auto& c : j.at("cells")) {
        std::vector<std::string> row;
        for (const auto& k : keys) {
            const Json& v = c.at(k);
            row.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<std::vector<std::string>> kv_table(const Json& j) {
    std::vector<std::vector<std::string>> rows{{"field", "value"}};
    for (const auto& [k, v] : j.items()) {
        rows.push_back({k, v.is_string() ? v.get<std::string>() : v.dump()});
    }
    return rows;
}

}  // namespace detail

/// Full command surface; returns the process exit code (0 pass, 1 check
/// failure or library error, 2 usage error).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"bilateral trade mechanisms and impossibility constructions"};
    app.require_subcommand(1);
    detail::Output output;
    app.add_option("--out", output.path, "write the result to a file instead of stdout");
    app.add_flag("--csv", output.csv, "emit RFC-4180 CSV instead of JSON");

    // dist
    auto* dist_cmd = app.add_subcommand("dist", "construct a named distribution family");
    std::string family;
    dist_cmd->add_option("family", family,
                         "equal-revenue-buyer | equal-profit-seller | tightness | one-sided | "
                         "simple-2x2 | l-welfare | l-gft | dsic-unbounded")
        ->required();
    int d_k = -1;
    std::string d_eps, d_x1 = "57/100", d_q1 = "716/1000", d_scale = "1";
    double d_kd = -1, d_grid = -1;
    bool d_no_top = false;
    dist_cmd->add_option("--k", d_k, "family size parameter (integer families)");
    dist_cmd->add_option("--kd", d_kd, "upper support endpoint (continuous families)");
    dist_cmd->add_option("--eps", d_eps, "epsilon parameter (rational or decimal)");
    dist_cmd->add_option("--grid", d_grid, "discretization step for continuous families");
    dist_cmd->add_option("--x1", d_x1, "low buyer probability (simple-2x2)");
    dist_cmd->add_option("--q1", d_q1, "low seller probability (simple-2x2)");
    dist_cmd->add_option("--scale", d_scale, "buyer value scale (equal-profit-seller)");
    dist_cmd->add_flag("--no-top-atom", d_no_top, "drop the top atom (equal-revenue-buyer)");

    // mech
    auto* mech_cmd = app.add_subcommand("mech", "price a mechanism on a distribution");
    std::string mech_name, m_dist, m_price, m_eps, m_tie, m_r, m_t2;
    mech_cmd->add_option("name", mech_name, "fixed | buyer | eps-buyer | seller | appendix-b")
        ->required();
    mech_cmd->add_option("--dist", m_dist, "distribution JSON file")->required();
    mech_cmd->add_option("--price", m_price, "price for the fixed mechanism");
    mech_cmd->add_option("--eps", m_eps, "grid coarseness for eps-buyer");
    mech_cmd->add_option("--tie", m_tie, "low | high tie-break");
    mech_cmd->add_option("--r", m_r, "trade probability at (0,1) for appendix-b");
    mech_cmd->add_option("--t2", m_t2, "transfer at (0,b2) for appendix-b");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "welfare/GFT ratios of a mechanism");
    std::string e_dist, e_mech;
    eval_cmd->add_option("--dist", e_dist)->required();
    eval_cmd->add_option("--mech", e_mech)->required();

    // feas
    auto* feas_cmd = app.add_subcommand("feas", "BIC implementability of an allocation rule");
    std::string f_dist, f_rule;
    feas_cmd->add_option("--dist", f_dist)->required();
    feas_cmd->add_option("--rule", f_rule)->required();

    // best
    auto* best_cmd = app.add_subcommand("best", "best implementable rule for an objective");
    std::string b_dist, b_objective = "welfare", b_strategy = "exhaustive";
    best_cmd->add_option("--dist", b_dist)->required();
    best_cmd->add_option("--objective", b_objective, "welfare | gft");
    best_cmd->add_option("--strategy", b_strategy, "exhaustive | threshold");

    // da
    auto* da_cmd = app.add_subcommand("da", "multi-unit double auction");
    std::string da_sellers, da_buyers, da_cond, da_floor = "0";
    da_cmd->add_option("--sellers", da_sellers, "comma-separated seller values")->required();
    da_cmd->add_option("--buyers", da_buyers, "comma-separated buyer values")->required();
    da_cmd->add_option("--cond", da_cond, "lowest seller's conditional marginal (enables hybrid)");
    da_cmd->add_option("--floor", da_floor, "price floor for the hybrid single-trade case");

    // repro
    auto* repro_cmd = app.add_subcommand("repro", "recompute a headline number");
    std::string repro_id;
    int r_k = -1;
    double r_eps = -1, r_grid = -1;
    repro_cmd->add_option("id", repro_id,
                          "thm3.1 | thm4.1 | thm5.1 | thm5.2 | thm5.4 | thmA.1 | claimB.1")
        ->required();
    repro_cmd->add_option("--k", r_k);
    repro_cmd->add_option("--eps", r_eps);
    repro_cmd->add_option("--grid", r_grid);

    // --out/--csv live on the parent but may appear after the subcommand name
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough(true);

    std::vector<const char*> argv{"bitrade"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (dist_cmd->parsed()) {
            double grid = d_grid > 0 ? d_grid : 1e-4;
            if (family == "equal-revenue-buyer") {
                if (d_kd <= 0) d_kd = d_k > 0 ? d_k : 0;
                Marginal m = equal_revenue_buyer(d_kd, !d_no_top, grid);
                output.emit(out, to_json(m), detail::cells_table(Json{{"cells", to_json(m)["atoms"]}}, {"v", "p"}));
                return 0;
            }
            if (family == "equal-profit-seller") {
                Marginal m = equal_profit_seller(scalar_from_string_exact(d_scale).as_double(), grid);
                output.emit(out, to_json(m), detail::cells_table(Json{{"cells", to_json(m)["atoms"]}}, {"v", "p"}));
                return 0;
            }
            DiscreteJoint d;
            if (family == "tightness") {
                d = tightness_distribution(grid);
            } else if (family == "one-sided") {
                d = one_sided_lb(d_k > 0 ? d_k : 8,
                                 d_eps.empty() ? 1e-4 : scalar_from_string_exact(d_eps).as_double(),
                                 d_grid > 0 ? d_grid : 1e-3)
                        .to_joint();
            } else if (family == "simple-2x2") {
                Scalar eps = d_eps.empty() ? Scalar::ratio(1, 1000000)
                                           : scalar_from_string_exact(d_eps);
                d = simple_2x2(scalar_from_string_exact(d_x1), scalar_from_string_exact(d_q1), eps);
            } else if (family == "l-welfare" || family == "l-gft") {
                Scalar eps = d_eps.empty() ? Scalar::ratio(1, 1000000)
                                           : scalar_from_string_exact(d_eps);
                int k = d_k > 0 ? d_k : 2;
                d = family == "l-welfare" ? l_shaped_welfare(k, eps) : l_shaped_gft(k, eps);
            } else if (family == "dsic-unbounded") {
                Scalar eps = d_eps.empty() ? Scalar(0) : scalar_from_string_exact(d_eps);
                d = dsic_unbounded(d_k > 0 ? d_k : 3, eps);
            } else {
                err << "unknown family: " << family << "\n";
                return 2;
            }
            d = detail::apply_mode(std::move(d));
            Json j = to_json(d);
            output.emit(out, j, detail::cells_table(j, {"s", "b", "p"}));
            return 0;
        }
        if (mech_cmd->parsed()) {
            DiscreteJoint d = detail::apply_mode(joint_from_json(detail::load_json(m_dist)));
            TieBreak tie_low = m_tie == "high" ? TieBreak::highest : TieBreak::lowest;
            TieBreak tie_high = m_tie == "low" ? TieBreak::lowest : TieBreak::highest;
            Mechanism m;
            if (mech_name == "fixed") {
                if (m_price.empty()) {
                    err << "fixed mechanism needs --price\n";
                    return 2;
                }
                m = fixed_price(d, scalar_from_string_exact(m_price));
            } else if (mech_name == "buyer") {
                m = buyer_offering(d, tie_low);
            } else if (mech_name == "eps-buyer") {
                if (m_eps.empty()) {
                    err << "eps-buyer needs --eps\n";
                    return 2;
                }
                m = eps_buyer_offering(d, scalar_from_string_exact(m_eps));
            } else if (mech_name == "seller") {
                m = seller_offering(d, tie_high);
            } else if (mech_name == "appendix-b") {
                Scalar r = m_r.empty() ? Scalar::ratio(19997, 20000)
                                       : scalar_from_string_exact(m_r);
                Scalar t2 = m_t2.empty() ? Scalar::ratio(23261, 10000)
                                         : scalar_from_string_exact(m_t2);
                m = appendix_b_mechanism(d, r, t2);
            } else {
                err << "unknown mechanism: " << mech_name << "\n";
                return 2;
            }
            Json j = to_json(m, d);
            output.emit(out, j, detail::cells_table(j, {"s", "b", "x", "t"}));
            return 0;
        }
        if (eval_cmd->parsed()) {
            DiscreteJoint d = detail::apply_mode(joint_from_json(detail::load_json(e_dist)));
            Mechanism m = mechanism_from_json(detail::load_json(e_mech), d);
            Json j = to_json(evaluate(m, d));
            output.emit(out, j, detail::kv_table(j));
            return 0;
        }
        if (feas_cmd->parsed()) {
            DiscreteJoint d = detail::apply_mode(joint_from_json(detail::load_json(f_dist)));
            AllocationRule rule = rule_from_json(detail::load_json(f_rule), d);
            FeasibilityReport rep = implementable(rule, d);
            Json j = to_json(rep, d);
            output.emit(out, j, detail::cells_table(Json{{"cells", j["payments"]}}, {"s", "b", "price"}));
            return rep.feasible ? 0 : 1;
        }
        if (best_cmd->parsed()) {
            DiscreteJoint d = detail::apply_mode(joint_from_json(detail::load_json(b_dist)));
            Objective obj = b_objective == "gft" ? Objective::gft : Objective::welfare;
            if (b_objective != "gft" && b_objective != "welfare") {
                err << "unknown objective: " << b_objective << "\n";
                return 2;
            }
            BestStrategy strat;
            if (b_strategy == "exhaustive") {
                strat = BestStrategy::exhaustive;
            } else if (b_strategy == "threshold") {
                strat = BestStrategy::threshold;
            } else {
                err << "unknown strategy: " << b_strategy << "\n";
                return 2;
            }
            BestResult best = best_implementable(d, obj, strat);
            Json j = to_json(best, d);
            output.emit(out, j, detail::cells_table(j.at("rule"), {"s", "b", "x"}));
            return 0;
        }
        if (da_cmd->parsed()) {
            DoubleAuctionInstance inst{detail::parse_scalar_list(da_sellers),
                                       detail::parse_scalar_list(da_buyers)};
            DAOutcome outcome;
            if (!da_cond.empty()) {
                Marginal cond = marginal_from_json(detail::load_json(da_cond));
                outcome = hybrid_auction(inst, cond, scalar_from_string_exact(da_floor));
            } else {
                outcome = trade_reduction(inst);
            }
            Json j = to_json(outcome);
            output.emit(out, j, detail::kv_table(j));
            return 0;
        }
        if (repro_cmd->parsed()) {
            ReproTarget t = repro(repro_id, r_k, r_eps, r_grid);
            output.emit(out, to_json(t), t.table);
            return t.pass ? 0 : 1;
        }
    } catch (const UnknownTargetError& ex) {
        err << ex.what() << "\n";
        return 2;
    } catch (const BitradeError& ex) {
        err << ex.what() << "\n";
        return 1;
    } catch (const Json::exception& ex) {
        err << ex.what() << "\n";
        return 1;
    }
    err << "no subcommand given\n";
    return 2;
}

}  // namespace bitrade::cli
