#include "bitrade/cli.hpp"
#include "bitrade/json_io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bitrade;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream(path) << content;
    return path;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("scalar string parsing covers rationals and decimals") {
    CHECK(scalar_from_string_exact("3/4").rat() == Rational(3, 4));
    CHECK(scalar_from_string_exact("0.25").rat() == Rational(1, 4));
    CHECK(scalar_from_string_exact("-1.5e-3").rat() == Rational(-3, 2000));
    CHECK(scalar_from_string_exact("1e3").rat() == Rational(1000));
    CHECK_THROWS_AS(scalar_from_string_exact("nope"), ParameterError);
}

TEST_CASE("joint JSON round trip preserves exact values") {
    DiscreteJoint d = l_shaped_gft(2, Scalar::ratio(1, 1000000));
    Json j = to_json(d);
    CHECK(j["mode"] == "exact");
    DiscreteJoint back = joint_from_json(j);
    REQUIRE(back.cells.size() == d.cells.size());
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        CHECK(back.cells[i].s.rat() == d.cells[i].s.rat());
        CHECK(back.cells[i].b.rat() == d.cells[i].b.rat());
        CHECK(back.cells[i].prob.rat() == d.cells[i].prob.rat());
    }
}

TEST_CASE("approx joints serialize as numbers") {
    DiscreteJoint d = tightness_distribution(0.05);
    Json j = to_json(d);
    CHECK(j["mode"] == "approx");
    CHECK(j["cells"][0]["p"].is_number());
    DiscreteJoint back = joint_from_json(j);
    CHECK(back.cells.size() == d.cells.size());
}

TEST_CASE("mechanism JSON round trip") {
    DiscreteJoint d = l_shaped_welfare(2, Scalar::ratio(1, 1000000));
    Mechanism m = fixed_price(d, Scalar(6));
    Json j = to_json(m, d);
    Mechanism back = mechanism_from_json(j, d);
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        CHECK(back.rule.x[i].rat() == m.rule.x[i].rat());
        CHECK(back.transfer[i].rat() == m.transfer[i].rat());
    }
}

TEST_CASE("csv writer follows RFC 4180 quoting") {
    std::ostringstream os;
    write_csv(os, {{"a", "b,c"}, {"say \"hi\"", "x"}});
    CHECK(os.str() == "a,\"b,c\"\r\n\"say \"\"hi\"\"\",x\r\n");
}

TEST_CASE("cli exit codes: usage, pass, and check failure") {
    CHECK(run_cli({"repro", "bogus"}) == 2);
    CHECK(run_cli({"nonsense"}) == 2);
    CHECK(run_cli({}) == 2);
    std::string text;
    CHECK(run_cli({"repro", "thm5.1"}, &text) == 0);
    CHECK(Json::parse(text)["pass"] == true);
}

TEST_CASE("cli pipeline: dist -> mech -> eval") {
    std::string dist_path = (std::filesystem::temp_directory_path() / "d.json").string();
    CHECK(run_cli({"dist", "simple-2x2", "--out", dist_path}) == 0);
    std::string mech_path = (std::filesystem::temp_directory_path() / "m.json").string();
    CHECK(run_cli({"mech", "fixed", "--dist", dist_path, "--price", "4", "--out", mech_path}) == 0);
    std::string text;
    CHECK(run_cli({"eval", "--dist", dist_path, "--mech", mech_path}, &text) == 0);
    Json ev = Json::parse(text);
    CHECK(ev.contains("ratio_welfare"));
    CHECK(scalar_from_string_exact(ev["ratio_welfare"].get<std::string>()).as_double() > 1.0);
}

TEST_CASE("cli feasibility: feasible exits 0, infeasible exits 1") {
    std::string dist_path = (std::filesystem::temp_directory_path() / "d2.json").string();
    REQUIRE(run_cli({"dist", "simple-2x2", "--out", dist_path}) == 0);
    std::ifstream in(dist_path);
    DiscreteJoint d = joint_from_json(Json::parse(in));

    AllocationRule all = all_trade_rule(d);
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        if (d.cells[i].b.rat() < d.cells[i].s.rat()) all.x[i] = Scalar(0);
    }
    std::string opt_rule = write_temp("r_opt.json", to_json(all, d).dump());
    CHECK(run_cli({"feas", "--dist", dist_path, "--rule", opt_rule}) == 1);

    AllocationRule row = no_trade_rule(d);
    const Scalar b2 = marginal(d, Side::buyer).max_value();
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        if (d.cells[i].b == b2) row.x[i] = Scalar(1);
    }
    std::string row_rule = write_temp("r_row.json", to_json(row, d).dump());
    CHECK(run_cli({"feas", "--dist", dist_path, "--rule", row_rule}) == 0);

    std::string text;
    CHECK(run_cli({"best", "--dist", dist_path, "--objective", "welfare"}, &text) == 0);
    CHECK(Json::parse(text).contains("ratio"));
}

TEST_CASE("cli double auction") {
    std::string text;
    CHECK(run_cli({"da", "--sellers", "1,3", "--buyers", "5,4"}, &text) == 0);
    Json j = Json::parse(text);
    CHECK(j["trades"].size() == 1);
    CHECK(j["buyer_payment"] == "4/1");
}

TEST_CASE("BITRADE_MODE=approx demotes constructed joints") {
    setenv("BITRADE_MODE", "approx", 1);
    std::string text;
    CHECK(run_cli({"dist", "simple-2x2"}, &text) == 0);
    unsetenv("BITRADE_MODE");
    CHECK(Json::parse(text)["mode"] == "approx");
}

TEST_CASE("deterministic output for identical invocations") {
    std::string a, b;
    run_cli({"dist", "l-welfare", "--k", "4"}, &a);
    run_cli({"dist", "l-welfare", "--k", "4"}, &b);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
}
