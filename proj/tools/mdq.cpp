#include "mdq/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Overrides {
    std::string config, b2, Z, tol, N, suite, out;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "TOML-style key = value file");
    cmd->add_option("--b2", o.b2, "b^2 in (0, 1/2)");
    cmd->add_option("--Z", o.Z, "representation parameter Z > 0");
    cmd->add_option("--tol", o.tol, "identity tolerance");
}

mdq::RunConfig resolve(const Overrides& o)
{
    mdq::RunConfig cfg;
    if (!o.config.empty()) cfg = mdq::load_config(o.config, cfg);
    const std::pair<const char*, const std::string*> flags[] = {
        {"b2", &o.b2}, {"Z", &o.Z}, {"tol", &o.tol}, {"N", &o.N}, {"suite", &o.suite}, {"out", &o.out}};
    for (const auto& [key, val] : flags)
        if (!val->empty()) mdq::set_config_value(cfg, key, *val);
    mdq::validate(cfg);
    return cfg;
}

mdq::VerificationReport read_report(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw mdq::ConfigError("cannot read report '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw mdq::ConfigError("report '" + path + "' is not valid JSON");
    }
    return mdq::report_from_json(j);
}

std::string records_csv(const mdq::VerificationReport& r)
{
    std::string s = "suite,id,N,residual,threshold,pass\n";
    for (const mdq::CheckRecord& c : r.records) {
        const std::string N = c.params.contains("N") && c.params["N"].is_number() ? c.params["N"].dump() : "";
        s += c.suite + ",\"" + c.id + "\"," + N + "," + mdq::format_g17(c.residual) + "," + mdq::format_g17(c.threshold) + "," +
             (c.pass ? "1" : "0") + "\n";
    }
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Verification engine for the modular double of U_q(osp(1|2))"};
    app.require_subcommand(1);

    Overrides vo;
    std::string csv_path, conv_path;
    auto* verify = app.add_subcommand("verify", "run verification suites and write a JSON report");
    add_common(verify, vo);
    verify->add_option("--N", vo.N, "pair-space truncation sizes, e.g. 8,16,32");
    verify->add_option("--suite", vo.suite, "special-fn, clifford, core, rmatrix (comma separated)");
    verify->add_option("--out", vo.out, "JSON report path");
    verify->add_option("--csv", csv_path, "also write the records as CSV");
    verify->add_option("--convergence", conv_path, "R-matrix N-sequence with wall times (.json or .csv)");

    Overrides to;
    std::string function = "Gb", re_axis = "0.1:1.0:10", im_axis = "0:0:1";
    auto* table = app.add_subcommand("table", "tabulate Gb, gb or gb_phase on a grid as CSV");
    add_common(table, to);
    table->add_option("--function", function, "Gb, gb or gb_phase");
    table->add_option("--re", re_axis, "real axis (x for gb, gb_phase) as lo:hi:n");
    table->add_option("--im", im_axis, "imaginary axis (t for gb_phase) as lo:hi:n");
    table->add_option("--out", to.out, "CSV path (stdout when omitted)");

    std::string r1, r2;
    auto* diff = app.add_subcommand("diff", "compare residuals of two reports");
    diff->add_option("report1", r1)->required();
    diff->add_option("report2", r2)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify) {
            const mdq::RunConfig cfg = resolve(vo);
            std::vector<mdq::ConvergenceRecord> conv;
            const mdq::VerificationReport rep = mdq::run_verify(cfg, &conv);
            for (const mdq::CheckRecord& c : rep.records) {
                std::string N = c.params.contains("N") && c.params["N"].is_number() ? " N=" + c.params["N"].dump() : "";
                std::printf("%-4s %-10s %-52s%-7s %.3e\n", c.pass ? "ok" : "FAIL", c.suite.c_str(), c.id.c_str(), N.c_str(),
                            c.residual);
            }
            std::printf("%d checks, %d passed, %d failed\n", static_cast<int>(rep.records.size()), rep.passed(), rep.failed());
            mdq::write_atomic(cfg.output, mdq::to_json(rep).dump(2) + "\n");
            if (!csv_path.empty()) mdq::write_atomic(csv_path, records_csv(rep));
            if (!conv_path.empty()) {
                const bool csv = conv_path.size() > 4 && conv_path.substr(conv_path.size() - 4) == ".csv";
                mdq::write_atomic(conv_path, csv ? mdq::to_csv(conv) : mdq::to_json(conv).dump(2) + "\n");
            }
            return rep.all_pass() ? 0 : 1;
        }
        if (*table) {
            const std::string out = to.out;
            to.out.clear();
            const mdq::RunConfig cfg = resolve(to);
            mdq::TableGrid g;
            mdq::parse_axis(re_axis, g.re_lo, g.re_hi, g.re_n);
            mdq::parse_axis(im_axis, g.im_lo, g.im_hi, g.im_n);
            const std::string csv = mdq::cmd_table(cfg, function, g);
            if (out.empty()) std::cout << csv;
            else mdq::write_atomic(out, csv);
            return 0;
        }
        if (*diff) {
            const mdq::DiffResult d = mdq::report_diff(read_report(r1), read_report(r2));
            std::cout << d.text;
            return 0;
        }
    } catch (const mdq::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
