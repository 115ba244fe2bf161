#include "mdq/report.hpp"
#include "mdq/spectral_harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace mdq;

namespace {

using clock_t_ = std::chrono::steady_clock;

double seconds_since(clock_t_::time_point t0)
{
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

bool has(const std::string& s, const char* needle) { return s.find(needle) != std::string::npos; }

struct Tally {
    int total = 0, failed = 0;
    double worst = 0.0, least_above = INFINITY;
    std::vector<std::string> failures;

    void add(const CheckRecord& r, double cap = INFINITY)
    {
        ++total;
        const bool ok = r.pass && (r.bound != Bound::below || r.residual < cap);
        if (r.bound == Bound::below && std::isfinite(r.threshold)) worst = std::max(worst, r.residual);
        if (r.bound == Bound::above) least_above = std::min(least_above, r.residual);
        if (!ok) {
            ++failed;
            std::string n = r.params.contains("N") && r.params["N"].is_number() ? " N=" + r.params["N"].dump() : "";
            failures.push_back(r.id + n);
        }
    }
};

bool report_line(int k, const char* name, const Tally& t, double secs, double limit)
{
    const bool ok = t.failed == 0 && t.total > 0 && secs < limit;
    std::printf("criterion %d %-24s %s  %d/%d checks, ", k, name, ok ? "PASS" : "FAIL", t.total - t.failed, t.total);
    if (t.worst > 0.0 || !std::isfinite(t.least_above)) std::printf("worst bounded residual %.3e, ", t.worst);
    else std::printf("smallest control residual %.3e, ", t.least_above);
    std::printf("%.2f s (limit %g s)\n", secs, limit);
    for (const std::string& f : t.failures) std::printf("    failed: %s\n", f.c_str());
    return ok;
}

}  // namespace

int main()
{
    RunConfig cfg = load_config(MDQ_ACCEPTANCE_CONFIG);
    validate(cfg);
    bool all = true;

    {
        Tally t;
        const auto t0 = clock_t_::now();
        for (double b2 : {0.3, 0.41}) {
            RunConfig c = cfg;
            c.b_squared = b2;
            for (const CheckRecord& r : run_special_fn_suite(c))
                if (!has(r.id, "Fourier")) t.add(r);
        }
        all &= report_line(1, "special functions", t, seconds_since(t0), 60.0);
    }

    {
        Tally t;
        const auto t0 = clock_t_::now();
        for (const CheckRecord& r : run_clifford_suite(cfg)) t.add(r, 1e-14);
        all &= report_line(2, "exact matrices", t, seconds_since(t0), 1.0);
    }

    std::vector<CheckRecord> core;
    const auto tc = clock_t_::now();
    core = run_core_suite(cfg);
    const double core_secs = seconds_since(tc);
    {
        Tally t;
        for (const CheckRecord& r : core)
            if (!has(r.id, "quantum exponential") && !has(r.id, "pentagon")) t.add(r, 1e-10);
        all &= report_line(3, "core-calculus algebra", t, core_secs, 10.0);
    }

    {
        Tally t;
        const auto t0 = clock_t_::now();
        for (const CheckRecord& r : run_special_fn_suite(cfg))
            if (has(r.id, "Fourier")) t.add(r, 1e-6);
        const double fourier_secs = seconds_since(t0);
        for (const CheckRecord& r : core)
            if (has(r.id, "quantum exponential") || has(r.id, "pentagon")) t.add(r);
        all &= report_line(4, "quantum exponentials", t, core_secs + fourier_secs, 120.0);
    }

    std::vector<CheckRecord> rm;
    const auto tr = clock_t_::now();
    rm = run_rmatrix_suite(cfg);
    const double rm_secs = seconds_since(tr);
    {
        Tally t;
        for (const CheckRecord& r : rm)
            if (!has(r.id, "(control)")) t.add(r);
        all &= report_line(5, "R-matrix", t, rm_secs, 600.0);

        const ParameterContext ctx = make_context(cfg.rmatrix_b_squared, cfg.Z);
        double at32 = NAN;
        for (const CheckRecord& r : rm)
            if (has(r.id, "braiding ") && !has(r.id, "decreasing") && !has(r.id, "control") && r.params.value("N", 0) == 32)
                at32 = std::isnan(at32) ? r.residual : std::max(at32, r.residual);
        std::printf("    info: braiding max at N=32 is %.3e; the uncalibrated bound 1e-2 %s\n", at32,
                    at32 < 1e-2 ? "holds" : "does not hold");
        for (int N : {48, 64}) {
            const TruncatedRep rep = build_truncated_rep(ctx, N);
            const BraidingResult b = residual_braiding(build_R(rep, {cfg.kappa, GFactor::standard}), cfg.block);
            std::printf("    info: braiding at N=%d: E %.3e, F %.3e, K %.3e\n", N, b.E, b.F, b.K);
        }
    }

    {
        Tally t;
        for (const CheckRecord& r : rm)
            if (has(r.id, "(control)")) t.add(r);
        all &= report_line(6, "negative controls", t, rm_secs, 600.0);
    }

    std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : 1;
}
