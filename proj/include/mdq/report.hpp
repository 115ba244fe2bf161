#pragma once

#include "mdq/params.hpp"
#include "mdq/quadrature.hpp"
#include "mdq/spectral_harness.hpp"

#include <json.hpp>

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace mdq {

inline constexpr const char* tool_version = "0.1.0";
inline constexpr int report_schema = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double b_squared = 0.3;
    double Z = 1.0;
    double tol = 1e-8;
    QuadratureSpec quadrature;
    std::vector<int> N_list{8, 16, 32};
    std::vector<int> triple_N{8, 12};
    std::vector<std::string> suites{"special-fn", "clifford", "core", "rmatrix"};
    std::string output = "report.json";
    int seed = 1;

    // R-matrix suite
    double rmatrix_b_squared = 0.05;
    double kappa = 0.5;
    int block = 2;
    // Calibrated absolute braiding thresholds, keyed by N; other N are tracked only.
    std::map<int, double> braid_threshold{{32, 0.8}, {48, 0.05}, {64, 1e-3}};
    double inverse_threshold = 1e-2;
    double inverse_floor = 1e-10;
    double nonunitarity_min = 0.1;
    double prefactor_threshold = 1e-10;
    double control_min = 0.1;
};

inline const std::vector<std::string>& known_suites()
{
    static const std::vector<std::string> s{"special-fn", "clifford", "core", "rmatrix"};
    return s;
}

// key = value lines; '#' comments; lists as [a, b] or a,b; strings optionally quoted.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// Applies one key/value pair, as from a config line or a flag.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
void validate(const RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

enum class Bound { below, above, tracked };

struct CheckRecord {
    std::string suite;
    std::string id;
    std::string anchor;  // formula quote or "plumbing"
    nlohmann::json params = nlohmann::json::object();
    double residual = 0.0;
    double threshold = std::numeric_limits<double>::infinity();
    Bound bound = Bound::below;
    bool pass = false;
};

CheckRecord make_record(const std::string& suite, const std::string& id, const std::string& anchor,
                        nlohmann::json params, double residual, double threshold, Bound bound = Bound::below);

// Ratio test for a residual sequence: residual = max r[k+1]/r[k] over consecutive
// pairs (pairs with both entries below floor count as ratio 0); passes when < 1.
CheckRecord monotone_record(const std::string& suite, const std::string& id, const std::string& anchor,
                            const std::vector<int>& N, const std::vector<double>& r, double floor = 0.0);

struct VerificationReport {
    std::vector<CheckRecord> records;
    nlohmann::json config;

    int passed() const;
    int failed() const;
    bool all_pass() const { return failed() == 0; }
};

nlohmann::json to_json(const CheckRecord& r);
nlohmann::json to_json(const VerificationReport& r);
VerificationReport report_from_json(const nlohmann::json& j);

std::vector<CheckRecord> run_special_fn_suite(const RunConfig& cfg);
std::vector<CheckRecord> run_clifford_suite(const RunConfig& cfg);
std::vector<CheckRecord> run_core_suite(const RunConfig& cfg);
// conv, when given, receives the N-sequence points with wall times.
std::vector<CheckRecord> run_rmatrix_suite(const RunConfig& cfg, std::vector<ConvergenceRecord>* conv = nullptr);

VerificationReport run_verify(const RunConfig& cfg, std::vector<ConvergenceRecord>* conv = nullptr);

// Writes to path + ".tmp" and renames over path.
void write_atomic(const std::string& path, const std::string& content);

std::string format_g17(double v);

struct TableGrid {
    double re_lo = 0.0, re_hi = 0.0;
    int re_n = 0;
    double im_lo = 0.0, im_hi = 0.0;
    int im_n = 0;
};

// "lo:hi:n"
void parse_axis(const std::string& s, double& lo, double& hi, int& n);

// function in {Gb, gb, gb_phase}. For Gb the grid is z = re + i im; for gb the
// re axis is x; for gb_phase the re axis is x and the im axis is t.
// Columns re_z, im_z, re_G, im_G, abs_G, est_err, flag.
std::string cmd_table(const RunConfig& cfg, const std::string& function, const TableGrid& grid);

struct DiffResult {
    std::string text;
    int removed = 0;
    int added = 0;
};

DiffResult report_diff(const VerificationReport& r1, const VerificationReport& r2);

}  // namespace mdq
