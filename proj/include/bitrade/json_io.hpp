#pragma once

#include "bitrade/constructions.hpp"
#include "bitrade/distribution.hpp"
#include "bitrade/double_auction.hpp"
#include "bitrade/feasibility.hpp"
#include "bitrade/mechanisms.hpp"
#include "bitrade/metrics.hpp"

#include <json.hpp>

#include <cctype>
#include <ostream>
#include <string>
#include <vector>

namespace bitrade {

using Json = nlohmann::ordered_json;  // insertion order keeps output deterministic

/// Exact scalars serialize as "num/den" strings, approx scalars as numbers.
inline Json scalar_to_json(const Scalar& v) {
    if (v.is_exact()) return v.str();
    return v.as_double();
}

namespace detail {

/// Decimal literal (sign, digits, fraction, exponent) to an exact rational.
inline Rational decimal_to_rational(const std::string& text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
    Rational num = 0;
    Rational den = 1;
    bool any = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
        num = num * 10 + (text[i] - '0');
        any = true;
    }
    if (i < text.size() && text[i] == '.') {
        for (++i; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            num = num * 10 + (text[i] - '0');
            den *= 10;
            any = true;
        }
    }
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
        long ex = 0;
        bool eany = false;
        for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
            ex = ex * 10 + (text[i] - '0');
            eany = true;
        }
        if (!eany) throw ParameterError("malformed exponent in number: " + text);
        for (long j = 0; j < ex; ++j) {
            if (eneg) den *= 10; else num *= 10;
        }
    }
    if (!any || i != text.size()) throw ParameterError("malformed number: " + text);
    Rational r = num / den;
    return neg ? -r : r;
}

}  // namespace detail

/// Parses "num/den", an integer string, or a decimal/scientific literal into
/// an exact rational scalar.
inline Scalar scalar_from_string_exact(const std::string& text) {
    if (text.find('/') != std::string::npos) return Scalar::parse_exact(text);
    return Scalar(detail::decimal_to_rational(text));
}

/// JSON value -> Scalar. Strings are always exact; numbers are exact (via
/// their shortest decimal rendering) when exact_mode, approx otherwise.
inline Scalar scalar_from_json(const Json& j, bool exact_mode) {
    if (j.is_string()) return scalar_from_string_exact(j.get<std::string>());
    if (!j.is_number()) throw ParameterError("expected a number or rational string");
    if (exact_mode) {
        if (j.is_number_integer()) return Scalar(Rational(j.get<long long>()));
        return Scalar(detail::decimal_to_rational(Json(j.get<double>()).dump()));
    }
    return Scalar::approx(j.get<double>());
}

inline Json to_json(const DiscreteJoint& dist) {
    Json j;
    j["mode"] = dist.all_exact() ? "exact" : "approx";
    j["cells"] = Json::array();
    for (const auto& c : dist.cells) {
        j["cells"].push_back({{"s", scalar_to_json(c.s)},
                              {"b", scalar_to_json(c.b)},
                              {"p", scalar_to_json(c.prob)}});
    }
    return j;
}

inline DiscreteJoint joint_from_json(const Json& j) {
    if (!j.contains("mode") || !j.contains("cells")) {
        throw ParameterError("distribution JSON needs 'mode' and 'cells'");
    }
    bool exact = j.at("mode").get<std::string>() == "exact";
    std::vector<Cell> cells;
    for (const auto& c : j.at("cells")) {
        cells.push_back({scalar_from_json(c.at("s"), exact),
                         scalar_from_json(c.at("b"), exact),
                         scalar_from_json(c.at("p"), exact)});
    }
    return build_joint(std::move(cells));
}

inline Json to_json(const Marginal& m) {
    Json j;
    bool exact = true;
    for (const auto& a : m.atoms()) exact = exact && a.v.is_exact() && a.prob.is_exact();
    j["mode"] = exact ? "exact" : "approx";
    j["atoms"] = Json::array();
    for (const auto& a : m.atoms()) {
        j["atoms"].push_back({{"v", scalar_to_json(a.v)}, {"p", scalar_to_json(a.prob)}});
    }
    return j;
}

inline Marginal marginal_from_json(const Json& j) {
    bool exact = j.at("mode").get<std::string>() == "exact";
    std::vector<Marginal::Atom> atoms;
    for (const auto& a : j.at("atoms")) {
        atoms.push_back({scalar_from_json(a.at("v"), exact),
                         scalar_from_json(a.at("p"), exact)});
    }
    return Marginal::make(std::move(atoms));
}

inline Json to_json(const Mechanism& mech, const DiscreteJoint& dist) {
    Json j;
    j["cells"] = Json::array();
    for (std::size_t i = 0; i < dist.cells.size(); ++i) {
        j["cells"].push_back({{"s", scalar_to_json(dist.cells[i].s)},
                              {"b", scalar_to_json(dist.cells[i].b)},
                              {"x", scalar_to_json(mech.rule.x[i])},
                              {"t", scalar_to_json(mech.transfer[i])}});
    }
    return j;
}

/// Mechanism JSON against a distribution: cells matched by (s, b).
inline Mechanism mechanism_from_json(const Json& j, const DiscreteJoint& dist) {
    Mechanism m;
    m.rule.x.assign(dist.cells.size(), Scalar(0));
    m.transfer.assign(dist.cells.size(), Scalar(0));
    for (const auto& c : j.at("cells")) {
        Scalar s = scalar_from_json(c.at("s"), c.at("s").is_string());
        Scalar b = scalar_from_json(c.at("b"), c.at("b").is_string());
        std::size_t i = dist.find(s, b);
        if (i == static_cast<std::size_t>(-1)) {
            throw SupportMismatchError("mechanism cell (" + s.str() + ", " + b.str() +
                                       ") is not in the distribution's support");
        }
        m.rule.x[i] = scalar_from_json(c.at("x"), c.at("x").is_string());
        m.transfer[i] = scalar_from_json(c.at("t"), c.at("t").is_string());
        if (!(m.rule.x[i] == Scalar(0)) && !(m.rule.x[i] == Scalar(1))) m.randomized = true;
    }
    return m;
}

inline Json to_json(const AllocationRule& rule, const DiscreteJoint& dist) {
    Json j;
    j["cells"] = Json::array();
    for (std::size_t i = 0; i < dist.cells.size(); ++i) {
        j["cells"].push_back({{"s", scalar_to_json(dist.cells[i].s)},
                              {"b", scalar_to_json(dist.cells[i].b)},
                              {"x", scalar_to_json(rule.x[i])}});
    }
    return j;
}

inline AllocationRule rule_from_json(const Json& j, const DiscreteJoint& dist) {
    AllocationRule rule;
    rule.x.assign(dist.cells.size(), Scalar(0));
    for (const auto& c : j.at("cells")) {
        Scalar s = scalar_from_json(c.at("s"), c.at("s").is_string());
        Scalar b = scalar_from_json(c.at("b"), c.at("b").is_string());
        std::size_t i = dist.find(s, b);
        if (i == static_cast<std::size_t>(-1)) {
            throw SupportMismatchError("rule cell (" + s.str() + ", " + b.str() +
                                       ") is not in the distribution's support");
        }
        rule.x[i] = scalar_from_json(c.at("x"), c.at("x").is_string());
    }
    return rule;
}

inline Json to_json(const Evaluation& ev) {
    Json j;
    j["welfare"] = scalar_to_json(ev.welfare);
    j["gft"] = scalar_to_json(ev.gft);
    j["opt_welfare"] = scalar_to_json(ev.opt_welfare);
    j["opt_gft"] = scalar_to_json(ev.opt_gft);
    j["ratio_welfare"] = scalar_to_json(ev.ratio_welfare);
    if (ev.ratio_gft) j["ratio_gft"] = scalar_to_json(*ev.ratio_gft);
    return j;
}

inline Json to_json(const FeasibilityReport& rep, const DiscreteJoint& dist) {
    Json j;
    j["feasible"] = rep.feasible;
    j["payments"] = Json::array();
    for (const auto& [i, p] : rep.payments) {
        j["payments"].push_back({{"s", scalar_to_json(dist.cells[i].s)},
                                 {"b", scalar_to_json(dist.cells[i].b)},
                                 {"price", scalar_to_json(p)}});
    }
    j["certificate"] = rep.certificate;
    return j;
}

inline Json to_json(const ICReport& rep) {
    Json j;
    j["pass"] = rep.pass;
    j["violations"] = Json::array();
    for (const auto& v : rep.violations) {
        j["violations"].push_back({{"kind", v.kind},
                                   {"truthful", scalar_to_json(v.truthful)},
                                   {"deviating", scalar_to_json(v.deviating)}});
    }
    return j;
}

inline Json to_json(const BestResult& best, const DiscreteJoint& dist) {
    Json j;
    j["value"] = scalar_to_json(best.value);
    if (best.ratio) j["ratio"] = scalar_to_json(*best.ratio);
    j["rule"] = to_json(best.rule, dist);
    return j;
}

inline Json to_json(const DAOutcome& out) {
    Json j;
    j["trades"] = Json::array();
    for (const auto& [s, b] : out.trades) {
        j["trades"].push_back({{"seller", s}, {"buyer", b}});
    }
    j["buyer_payment"] = scalar_to_json(out.buyer_payment);
    j["seller_receipt"] = scalar_to_json(out.seller_receipt);
    j["welfare"] = scalar_to_json(out.welfare);
    return j;
}

/// RFC-4180: fields with commas, quotes, or newlines get quoted; quotes
/// double. Rows end in CRLF.
inline void write_csv(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::string& f = row[i];
            bool quote = f.find_first_of(",\"\r\n") != std::string::npos;
            if (i) os << ',';
            if (quote) {
                os << '"';
                for (char ch : f) {
                    if (ch == '"') os << '"';
                    os << ch;
                }
                os << '"';
            } else {
                os << f;
            }
        }
        os << "\r\n";
    }
}

}  // namespace bitrade
