#include "mdq/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mdq;

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& csv)
{
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing")
{
    const RunConfig c = parse_config(R"(
# comment
b2 = 0.2
N = [8, 12, 20]
suites = "clifford, core"
[quadrature]
tol = 1e-11
[rmatrix]
braid_threshold_N12 = 0.3
kappa = 0.5
)");
    CHECK(c.b_squared == 0.2);
    CHECK(c.N_list == std::vector<int>{8, 12, 20});
    CHECK(c.suites == std::vector<std::string>{"clifford", "core"});
    CHECK(c.quadrature.tol == 1e-11);
    CHECK(c.braid_threshold.at(12) == 0.3);
    CHECK(c.braid_threshold.at(32) == 0.8);
    validate(c);

    CHECK_THROWS_AS(parse_config("colour = red"), ConfigError);
    CHECK_THROWS_AS(parse_config("b2 = abc"), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("N = 16, 8")), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("b2 = 0.5")), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("triple_N = 20")), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("suite = rmatrix, nope")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/mdq.toml"), ConfigError);
}

TEST_CASE("monotone records")
{
    const CheckRecord down = monotone_record("s", "x", "plumbing", {8, 16, 32}, {1.0, 0.5, 0.4});
    CHECK(down.id == "x decreasing");
    CHECK(down.residual == doctest::Approx(0.8));
    CHECK(down.pass);
    const CheckRecord up = monotone_record("s", "x", "plumbing", {8, 16, 32}, {1.0, 0.5, 0.6});
    CHECK_FALSE(up.pass);
    const CheckRecord floored = monotone_record("s", "x", "plumbing", {8, 16, 32}, {1e-14, 3e-14, 2e-14}, 1e-10);
    CHECK(floored.pass);
    CHECK(floored.residual == 0.0);
}

TEST_CASE("record bounds")
{
    CHECK(make_record("s", "a", "plumbing", {}, 1e-12, 1e-10).pass);
    CHECK_FALSE(make_record("s", "a", "plumbing", {}, 1e-9, 1e-10).pass);
    CHECK(make_record("s", "a", "plumbing", {}, 0.5, 0.1, Bound::above).pass);
    CHECK(make_record("s", "a", "plumbing", {}, 7.0, INFINITY, Bound::tracked).pass);
    CHECK_FALSE(make_record("s", "a", "plumbing", {}, NAN, 1.0).pass);
}

TEST_CASE("atomic write replaces the file")
{
    const std::string path = (std::filesystem::temp_directory_path() / "mdq_atomic_test.txt").string();
    write_atomic(path, "first");
    write_atomic(path, "second");
    CHECK(slurp(path) == "second");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
    std::filesystem::remove(path);
}

TEST_CASE("table command")
{
    RunConfig cfg;
    const std::string header = "re_z,im_z,re_G,im_G,abs_G,est_err,flag\n";
    CHECK(cmd_table(cfg, "Gb", TableGrid{0.1, 1.0, 0, 0.0, 0.0, 0}) == header);

    const double b = std::sqrt(cfg.b_squared), Q = b + 1.0 / b;
    const auto crit = csv_rows(cmd_table(cfg, "Gb", TableGrid{Q / 2.0, Q / 2.0, 1, -1.0, 1.0, 5}));
    REQUIRE(crit.size() == 5);
    for (const auto& r : crit) {
        CHECK(r[6] == "ok");
        CHECK(std::abs(std::stod(r[4]) - 1.0) < 1e-8);
    }

    RunConfig alt = cfg;
    alt.quadrature.r = 0.3 * std::min(b, 1.0 / b);
    const TableGrid g{0.2, 1.2, 4, -0.5, 0.5, 2};
    const auto ra = csv_rows(cmd_table(cfg, "Gb", g)), rb = csv_rows(cmd_table(alt, "Gb", g));
    REQUIRE(ra.size() == rb.size());
    for (std::size_t k = 0; k < ra.size(); ++k) {
        const double d = std::hypot(std::stod(ra[k][2]) - std::stod(rb[k][2]), std::stod(ra[k][3]) - std::stod(rb[k][3]));
        CHECK(d < 10.0 * cfg.tol);
    }

    const double pole = -2.0 * b - 1.0 / b;
    const auto pr = csv_rows(cmd_table(cfg, "Gb", TableGrid{pole, pole, 1, 0.0, 0.0, 1}));
    REQUIRE(pr.size() == 1);
    CHECK(pr[0][6] == "pole(2;1)");

    const auto gb = csv_rows(cmd_table(cfg, "gb", TableGrid{0.5, 2.0, 3, 0.0, 0.0, 0}));
    REQUIRE(gb.size() == 3);
    for (const auto& r : gb) CHECK(std::abs(std::stod(r[4]) - 1.0) < 1e-8);
    CHECK_THROWS_AS(cmd_table(cfg, "zeta", g), ConfigError);

    double lo, hi;
    int n;
    parse_axis("0:1:5", lo, hi, n);
    CHECK(n == 5);
    CHECK_THROWS_AS(parse_axis("0:1", lo, hi, n), ConfigError);
}

TEST_CASE("report JSON and diff")
{
    RunConfig cfg;
    cfg.suites = {"clifford"};
    const VerificationReport rep = run_verify(cfg);
    CHECK(rep.all_pass());
    const nlohmann::json j = to_json(rep);
    CHECK(j["schema"] == report_schema);
    CHECK(j["summary"]["total"] == rep.records.size());

    const VerificationReport back = report_from_json(j);
    REQUIRE(back.records.size() == rep.records.size());
    CHECK(to_json(back).dump() == j.dump());
    CHECK(to_json(run_verify(cfg)).dump() == j.dump());

    nlohmann::json bad = j;
    bad["schema"] = 99;
    CHECK_THROWS_AS(report_from_json(bad), ConfigError);

    const DiffResult same = report_diff(rep, rep);
    CHECK(same.removed == 0);
    CHECK(same.added == 0);
    CHECK(same.text.find("REMOVED") == std::string::npos);

    VerificationReport fewer = rep;
    fewer.records.pop_back();
    const DiffResult d = report_diff(rep, fewer);
    CHECK(d.removed == 1);
    CHECK(d.text.find("REMOVED") != std::string::npos);
    CHECK(report_diff(fewer, rep).added == 1);
}
