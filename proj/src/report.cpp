#include "mdq/report.hpp"

#include "mdq/core_calculus.hpp"
#include "mdq/qdilog.hpp"
#include "mdq/spectral_harness.hpp"
#include "mdq/superlin.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mdq {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string unquote(std::string s)
{
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_list(std::string s)
{
    s = unquote(s);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ConfigError("unterminated list: " + s);
        s = s.substr(1, s.size() - 2);
    }
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double d = std::stod(unquote(v), &pos);
        if (pos != unquote(v).size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

std::vector<int> to_ints(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    for (const std::string& s : split_list(v)) out.push_back(to_int(key, s));
    return out;
}

nlohmann::json num(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

const char* bound_name(Bound b)
{
    switch (b) {
    case Bound::below: return "below";
    case Bound::above: return "above";
    case Bound::tracked: return "tracked";
    }
    return "below";
}

Bound bound_from(const std::string& s)
{
    if (s == "above") return Bound::above;
    if (s == "tracked") return Bound::tracked;
    return Bound::below;
}

// Deterministic low-discrepancy points in the strip, away from its edges.
std::vector<cplx> strip_samples(double Q, int count)
{
    const double phi = 0.6180339887498949, s2 = 0.4142135623730951;
    std::vector<cplx> z;
    for (int k = 1; k <= count; ++k) {
        const double u = std::fmod(k * phi, 1.0), v = std::fmod(k * s2, 1.0);
        z.emplace_back(Q * (0.15 + 0.7 * u), -3.0 + 6.0 * v);
    }
    return z;
}

template <class F>
double max_over(const std::vector<cplx>& zs, F&& f)
{
    double m = 0.0;
    for (cplx z : zs) m = std::max(m, f(z));
    return m;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key_in, const std::string& value)
{
    const std::string key = trim(key_in);
    const std::string v = trim(value);
    if (key == "b2" || key == "b_squared") cfg.b_squared = to_double(key, v);
    else if (key == "Z") cfg.Z = to_double(key, v);
    else if (key == "tol") cfg.tol = to_double(key, v);
    else if (key == "quadrature.r") cfg.quadrature.r = to_double(key, v);
    else if (key == "quadrature.theta") cfg.quadrature.theta = to_double(key, v);
    else if (key == "quadrature.T") cfg.quadrature.T = to_double(key, v);
    else if (key == "quadrature.tol") cfg.quadrature.tol = to_double(key, v);
    else if (key == "quadrature.max_subdiv") cfg.quadrature.max_subdiv = to_int(key, v);
    else if (key == "N" || key == "N_list") cfg.N_list = to_ints(key, v);
    else if (key == "triple_N") cfg.triple_N = to_ints(key, v);
    else if (key == "suite" || key == "suites") cfg.suites = split_list(v);
    else if (key == "out" || key == "output") cfg.output = unquote(v);
    else if (key == "seed") cfg.seed = to_int(key, v);
    else if (key == "rmatrix.b2" || key == "rmatrix_b2") cfg.rmatrix_b_squared = to_double(key, v);
    else if (key == "rmatrix.kappa" || key == "kappa") cfg.kappa = to_double(key, v);
    else if (key == "rmatrix.block" || key == "block") cfg.block = to_int(key, v);
    else if (key == "rmatrix.inverse_threshold") cfg.inverse_threshold = to_double(key, v);
    else if (key == "rmatrix.inverse_floor") cfg.inverse_floor = to_double(key, v);
    else if (key == "rmatrix.nonunitarity_min") cfg.nonunitarity_min = to_double(key, v);
    else if (key == "rmatrix.prefactor_threshold") cfg.prefactor_threshold = to_double(key, v);
    else if (key == "rmatrix.control_min") cfg.control_min = to_double(key, v);
    else if (key.rfind("rmatrix.braid_threshold_N", 0) == 0) {
        const int N = to_int(key, key.substr(std::string("rmatrix.braid_threshold_N").size()));
        cfg.braid_threshold[N] = to_double(key, v);
    } else
        throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig cfg)
{
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        try {
            set_config_value(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

void validate(const RunConfig& cfg)
{
    if (!(cfg.b_squared > 0.0 && cfg.b_squared < 0.5)) throw ConfigError("b2 must lie in (0, 1/2)");
    if (!(cfg.rmatrix_b_squared > 0.0 && cfg.rmatrix_b_squared < 0.5)) throw ConfigError("rmatrix.b2 must lie in (0, 1/2)");
    if (!(cfg.Z > 0.0)) throw ConfigError("Z must be positive");
    if (!(cfg.tol > 0.0) || !(cfg.quadrature.tol > 0.0)) throw ConfigError("tolerances must be positive");
    for (const auto* list : {&cfg.N_list, &cfg.triple_N}) {
        for (std::size_t k = 0; k < list->size(); ++k) {
            if ((*list)[k] < 2) throw ConfigError("N values must be at least 2");
            if (k > 0 && (*list)[k] <= (*list)[k - 1]) throw ConfigError("N lists must be strictly ascending");
        }
    }
    for (int N : cfg.triple_N)
        if (N > max_triple_N) throw ConfigError("triple_N above " + std::to_string(max_triple_N));
    if (cfg.block < 1) throw ConfigError("rmatrix.block must be positive");
    for (const std::string& s : cfg.suites)
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw ConfigError("unknown suite '" + s + "'");
}

nlohmann::json to_json(const RunConfig& cfg)
{
    nlohmann::json thr = nlohmann::json::object();
    for (const auto& [N, t] : cfg.braid_threshold) thr[std::to_string(N)] = t;
    return {{"b2", cfg.b_squared},
            {"Z", cfg.Z},
            {"tol", cfg.tol},
            {"quadrature",
             {{"r", cfg.quadrature.r},
              {"theta", cfg.quadrature.theta},
              {"T", cfg.quadrature.T},
              {"tol", cfg.quadrature.tol},
              {"max_subdiv", cfg.quadrature.max_subdiv}}},
            {"N", cfg.N_list},
            {"triple_N", cfg.triple_N},
            {"suites", cfg.suites},
            {"seed", cfg.seed},
            {"rmatrix",
             {{"b2", cfg.rmatrix_b_squared},
              {"kappa", cfg.kappa},
              {"block", cfg.block},
              {"braid_threshold", thr},
              {"inverse_threshold", cfg.inverse_threshold},
              {"inverse_floor", cfg.inverse_floor},
              {"nonunitarity_min", cfg.nonunitarity_min},
              {"prefactor_threshold", cfg.prefactor_threshold},
              {"control_min", cfg.control_min}}}};
}

CheckRecord make_record(const std::string& suite, const std::string& id, const std::string& anchor,
                        nlohmann::json params, double residual, double threshold, Bound bound)
{
    CheckRecord r;
    r.suite = suite;
    r.id = id;
    r.anchor = anchor;
    r.params = std::move(params);
    r.residual = residual;
    r.threshold = threshold;
    r.bound = bound;
    switch (bound) {
    case Bound::below: r.pass = residual < threshold; break;
    case Bound::above: r.pass = residual > threshold; break;
    case Bound::tracked: r.pass = std::isfinite(residual); break;
    }
    return r;
}

CheckRecord monotone_record(const std::string& suite, const std::string& id, const std::string& anchor,
                            const std::vector<int>& N, const std::vector<double>& r, double floor)
{
    double worst = 0.0;
    for (std::size_t k = 1; k < r.size(); ++k) {
        if (r[k] < floor && r[k - 1] < floor) continue;
        worst = std::max(worst, r[k - 1] > 0.0 ? r[k] / r[k - 1] : std::numeric_limits<double>::infinity());
    }
    nlohmann::json p = {{"N", N}, {"sequence", r}};
    if (floor > 0.0) p["floor"] = floor;
    return make_record(suite, id + " decreasing", anchor, p, worst, 1.0);
}

int VerificationReport::passed() const
{
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; }));
}

int VerificationReport::failed() const
{
    return static_cast<int>(records.size()) - passed();
}

nlohmann::json to_json(const CheckRecord& r)
{
    return {{"suite", r.suite},
            {"id", r.id},
            {"paper_anchor", r.anchor},
            {"params", r.params},
            {"residual", num(r.residual)},
            {"threshold", num(r.threshold)},
            {"bound", bound_name(r.bound)},
            {"pass", r.pass}};
}

nlohmann::json to_json(const VerificationReport& r)
{
    nlohmann::json recs = nlohmann::json::array();
    for (const CheckRecord& c : r.records) recs.push_back(to_json(c));
    return {{"schema", report_schema},
            {"version", tool_version},
            {"config", r.config},
            {"records", recs},
            {"summary", {{"total", r.records.size()}, {"passed", r.passed()}, {"failed", r.failed()}}}};
}

VerificationReport report_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("schema") || j["schema"] != report_schema)
        throw ConfigError("report schema mismatch (expected schema " + std::to_string(report_schema) + ")");
    VerificationReport out;
    out.config = j.value("config", nlohmann::json::object());
    for (const auto& c : j.at("records")) {
        CheckRecord r;
        r.suite = c.value("suite", "");
        r.id = c.at("id").get<std::string>();
        r.anchor = c.at("paper_anchor").get<std::string>();
        r.params = c.value("params", nlohmann::json::object());
        const auto& res = c.at("residual");
        r.residual = res.is_null() ? std::numeric_limits<double>::infinity() : res.get<double>();
        const auto& thr = c.at("threshold");
        r.threshold = thr.is_null() ? std::numeric_limits<double>::infinity() : thr.get<double>();
        r.bound = bound_from(c.value("bound", "below"));
        r.pass = c.at("pass").get<bool>();
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<CheckRecord> run_special_fn_suite(const RunConfig& cfg)
{
    const std::string S = "special-fn";
    const ParameterContext ctx = make_context(cfg.b_squared, cfg.Z);
    const double b = ctx.b, Q = ctx.Q_sum, tol = cfg.tol;
    const QuadratureSpec& qs = cfg.quadrature;
    const nlohmann::json P = {{"b2", cfg.b_squared}, {"samples", 20}};
    auto G = [&](double bc, cplx z) { return G_b_eval(bc, z, qs).value; };
    const std::vector<cplx> zs = strip_samples(Q, 20);
    std::vector<CheckRecord> out;

    out.push_back(make_record(S, "G_b functional equation (b)", R"(G_b(x+b^{\pm 1})=(1-e^{2\pi i b^{\pm 1}x})G_b(x))", P,
                              max_over(zs, [&](cplx z) {
                                  const cplx l = G(b, z + b);
                                  return std::abs(l - (1.0 - std::exp(2.0 * pi * I * b * z)) * G(b, z)) / std::abs(l);
                              }),
                              tol));
    out.push_back(make_record(S, "G_b functional equation (1/b)", R"(G_b(x+b^{\pm 1})=(1-e^{2\pi i b^{\pm 1}x})G_b(x))", P,
                              max_over(zs, [&](cplx z) {
                                  const cplx l = G(b, z + 1.0 / b);
                                  return std::abs(l - (1.0 - std::exp(2.0 * pi * I * z / b)) * G(b, z)) / std::abs(l);
                              }),
                              tol));
    out.push_back(make_record(S, "G_b reflection", R"(G_b(x)G_b(Q-x)=e^{\pi i x(x-Q)})", P, max_over(zs, [&](cplx z) {
                                  const cplx r = std::exp(pi * I * z * (z - Q));
                                  return std::abs(G(b, z) * G(b, Q - z) - r) / std::abs(r);
                              }),
                              tol));
    out.push_back(make_record(S, "G_b complex conjugation", R"(\overline{G_b(x)}=\frac{1}{G_b(Q-\bar{x})})", P,
                              max_over(zs, [&](cplx z) { return std::abs(std::conj(G(b, z)) * G(b, Q - std::conj(z)) - 1.0); }),
                              tol));
    out.push_back(make_record(S, "G_b self-duality", R"(G_b(x)=G_{b^{-1}}(x))", P, max_over(zs, [&](cplx z) {
                                  const cplx l = G(b, z);
                                  return std::abs(l - G(1.0 / b, z)) / std::abs(l);
                              }),
                              tol));

    std::vector<cplx> crit;
    for (int k = 0; k < 20; ++k) crit.emplace_back(Q / 2.0, -5.0 + 10.0 * k / 19.0);
    out.push_back(make_record(S, "|G_b| = 1 on the critical line", R"(\left|G_b(\frac{Q}{2}+i x)\right|=1)", P,
                              max_over(crit, [&](cplx z) { return std::abs(std::abs(G(b, z)) - 1.0); }), tol));

    std::vector<cplx> xs;
    for (int k = 0; k < 20; ++k) xs.emplace_back(std::pow(10.0, -3.0 + 6.0 * k / 19.0), 0.0);
    out.push_back(make_record(S, "|g_b| = 1 on (0, inf)", R"(|g_b(x)|=1)", P,
                              max_over(xs, [&](cplx x) { return std::abs(std::abs(g_b(ctx, b, x.real(), qs)) - 1.0); }),
                              tol));
    out.push_back(make_record(S, "g_b self-duality", R"(g_b(x)=g_{b^{-1}}(x^{\frac{1}{b^2}}))", P, max_over(xs, [&](cplx x) {
                                  if (x.real() < 0.05 || x.real() > 20.0) return 0.0;
                                  return std::abs(g_b(ctx, b, x.real(), qs) - g_b(ctx, 1.0 / b, std::pow(x.real(), 1.0 / (b * b)), qs));
                              }),
                              tol));

    std::vector<cplx> up, down;
    for (int k = 0; k < 5; ++k) {
        up.emplace_back(Q * (0.1 + 0.2 * k), 20.0);
        down.emplace_back(Q * (0.1 + 0.2 * k), -20.0);
    }
    out.push_back(make_record(S, "G_b asymptotics Im z = +20", R"(G_b(x)\sim\left\{\begin{array}{cc}\bar{\zeta_b}&Im(x)\longrightarrow+\infty)",
                              P, max_over(up, [&](cplx z) { return std::abs(G(b, z) / std::conj(ctx.zeta_b) - 1.0); }), 1e-3));
    out.push_back(make_record(S, "G_b asymptotics Im z = -20", R"(\zeta_b e^{\pi i x(x-Q)}&Im(x)\longrightarrow-\infty)", P,
                              max_over(down, [&](cplx z) {
                                  return std::abs(G(b, z) / (ctx.zeta_b * std::exp(pi * I * z * (z - Q))) - 1.0);
                              }),
                              1e-3));

    QuadratureSpec alt = qs;
    alt.r = 0.3 * std::min(b, 1.0 / b);
    alt.tol = qs.tol * 0.1;
    out.push_back(make_record(S, "G_b quadrature independence", "plumbing", P, max_over(zs, [&](cplx z) {
                                  const cplx l = G(b, z);
                                  return std::abs(l - G_b_eval(b, z, alt).value) / std::abs(l);
                              }),
                              10.0 * tol));

    const std::vector<cplx> fx{0.25, 0.5, 1.0, 2.0, 4.0};
    out.push_back(make_record(S, "g_b Fourier route vs G_b route", R"(g_b(x)=\frac{\over[\zeta_b]}{G_b(\frac{Q}{2}+\frac{\log x}{2\pi i b})})",
                              P, max_over(fx, [&](cplx x) {
                                  return std::abs(g_b_fourier(ctx, b, x.real(), false, qs) - g_b(ctx, b, x.real(), qs));
                              }),
                              1e-6));
    out.push_back(make_record(S, "starred Fourier route has modulus 1", R"(\overline{G_b(x)}=\frac{1}{G_b(Q-\bar{x})})", P,
                              max_over(fx, [&](cplx x) { return std::abs(std::abs(g_b_fourier(ctx, b, x.real(), true, qs)) - 1.0); }),
                              1e-6));
    out.push_back(make_record(S, "phase continuation t = 1 vs Fourier route", "plumbing", P, max_over(fx, [&](cplx x) {
                                  const cplx l = g_b_phase(ctx, b, x.real(), 1.0, qs);
                                  return std::abs(l - g_b_fourier(ctx, b, x.real(), false, qs, 1.0)) / std::abs(l);
                              }),
                              1e-6));
    {
        const double t = 0.5;
        const double slope = std::log10(std::abs(g_b_phase(ctx, b, 1e4, t, qs)) / std::abs(g_b_phase(ctx, b, 1e3, t, qs)));
        const double expect = -t / (2.0 * b * b);
        out.push_back(make_record(S, "|g_b(e^{pi i t} x)| decay slope", R"(x^{-\frac{t}{2b^2}}&x\longrightarrow+\infty)",
                                  {{"b2", cfg.b_squared}, {"t", t}}, std::abs(slope / expect - 1.0), 0.02));
    }
    out.push_back(make_record(S, "|g_b(x)| -> 1 as x -> 0", R"(1&x\to0)", P,
                              std::abs(std::abs(g_b_fourier(ctx, b, 1e-4, false, qs)) - 1.0), 0.01));
    return out;
}

std::vector<CheckRecord> run_clifford_suite(const RunConfig&)
{
    std::vector<CheckRecord> out;
    for (const auto& group : {tensor_identities(), eight_dim_identities(), braiding_lemma_identities()})
        for (const IdentityCheck& c : group) {
            CheckRecord r = make_record("clifford", c.id, c.anchor, nlohmann::json::object(), c.residual, exact_tol);
            r.pass = c.pass;
            out.push_back(r);
        }
    return out;
}

std::vector<CheckRecord> run_core_suite(const RunConfig& cfg)
{
    const std::string S = "core";
    const ParameterContext ctx = make_context(cfg.b_squared, cfg.Z);
    const nlohmann::json P = {{"b2", cfg.b_squared}, {"Z", cfg.Z}, {"samples", 10}};
    const CoreFunction f = CoreFunction::gaussian(1.0, 0.2);
    const SuperWavefunction psi{CoreFunction::gaussian(1.0, 0.2), CoreFunction::gaussian(0.8, -0.1, 1)};
    const SuperWavefunction psi2{CoreFunction::gaussian(0.7, cplx(0.1, 0.05)), CoreFunction::gaussian(1.2, 0.3, 2)};
    const std::vector<cplx> zs = default_samples(10);
    constexpr double closed_tol = 1e-10;

    std::vector<CheckRecord> out;
    auto add = [&](const std::vector<ResidualReport>& v) {
        for (const ResidualReport& r : v) out.push_back(make_record(S, r.relation_id, r.anchor, P, r.max_residual, closed_tol));
    };
    add(uv_residuals(ctx, f, zs));
    add(sl2_residuals(ctx, f, zs));
    add(osp_residuals(ctx, psi, zs));
    add(modular_dual_residuals(ctx, psi, zs));
    add(coproduct_residuals(ctx, psi, psi2, zs));
    add(phi_residuals(ctx, f, zs));
    out.push_back(make_record(S, "e Hermitian on the core", "plumbing", {{"b2", cfg.b_squared}},
                              hermiticity_residual(ctx, f, CoreFunction::gaussian(0.6, cplx(-0.3, 0.0), 1)), closed_tol));

    const QuadratureSpec oq = operator_quadrature();
    const std::vector<cplx> rs = real_samples(5);
    const CoreFunction h = CoreFunction::gaussian(1.0);
    const nlohmann::json PQ = {{"b2", cfg.b_squared}, {"samples", 5}};
    out.push_back(make_record(S, "quantum exponential g(U)^* V g(U)", R"(g_b(U)^*Vg_b(U) &=& q^{-1} UV+V)", PQ,
                              qsum1_residual(ctx, h, oq, rs), 1e-6));
    out.push_back(make_record(S, "quantum exponential g(V) U g(V)^*", R"(g_b(V)Ug_b(V)^*&=&U+q^{-1} UV)", PQ,
                              qsum2_residual(ctx, h, oq, rs), 1e-6));
    out.push_back(make_record(S, "pentagon", R"(g_b(V)g_b(U)=g_b(U)g_b(q^{-1} UV)g_b(V))", PQ,
                              pentagon_residual(ctx, h, oq, rs), 1e-5));
    out.push_back(make_record(S, "pentagon without the middle factor (control)", "plumbing", PQ,
                              pentagon_residual(ctx, h, oq, rs, PentagonMode::drop_middle), 1e-1, Bound::above));
    return out;
}

std::vector<CheckRecord> run_rmatrix_suite(const RunConfig& cfg, std::vector<ConvergenceRecord>* conv)
{
    const std::string S = "rmatrix";
    const ParameterContext ctx = make_context(cfg.rmatrix_b_squared, cfg.Z);
    const int M = cfg.block;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<CheckRecord> out;
    std::vector<double> bE, bF, bK, red_p, red_m, inv, gdiff, normR;

    using clock = std::chrono::steady_clock;
    auto emit = [&](clock::time_point t0, int N, std::initializer_list<std::pair<const char*, double>> vals) {
        if (!conv) return;
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        for (const auto& [id, v] : vals) conv->push_back({id, N, v, ms});
    };

    const char* braid_anchor = R"(\Delta'(X)R:=(\sigma \circ \Delta)(X)R=R\Delta(X))";
    for (int N : cfg.N_list) {
        const auto t0 = clock::now();
        const nlohmann::json P = {{"b2", cfg.rmatrix_b_squared}, {"N", N}, {"block", M}, {"kappa", cfg.kappa}};
        const TruncatedRep rep = build_truncated_rep(ctx, N);
        const PairR R = build_R(rep, {cfg.kappa, GFactor::standard});
        const PairR R1 = build_R(rep, {cfg.kappa, GFactor::trivial});
        const PairR Rm = build_R(rep, {cfg.kappa, GFactor::mixed_branch});
        const PairR Rt = build_R(rep, {cfg.kappa, GFactor::tilde});

        const double herm = std::max((rep.E - rep.E.adjoint()).norm() / rep.E.norm(), (rep.F - rep.F.adjoint()).norm() / rep.F.norm());
        out.push_back(make_record(S, "E, F Hermitian", "plumbing", P, herm, 1e-12));
        out.push_back(make_record(S, "min eigenvalue of U, V", R"(U=e^{2\pi bx},\quad V=e^{2\pi b p})", P,
                                  std::min(hermitian_eig(rep.U).w.minCoeff(), hermitian_eig(rep.V).w.minCoeff()),
                                  0.0, Bound::above));
        out.push_back(make_record(S, "min eigenvalue of e (x) f", R"(g_{b_*}(-e\otimes f):=g_{b_*}(e^{\pi i}e\otimes f))", P,
                                  rep.se.w.minCoeff() * rep.sf.w.minCoeff(), 0.0, Bound::above));
        out.push_back(make_record(S, "commutator defect UV - q*^2 VU", "plumbing", P, commutator_defect(rep), inf, Bound::tracked));

        const BraidingResult br = residual_braiding(R, M);
        const auto t = cfg.braid_threshold.find(N);
        const double thr = t == cfg.braid_threshold.end() ? inf : t->second;
        const Bound bb = t == cfg.braid_threshold.end() ? Bound::tracked : Bound::below;
        out.push_back(make_record(S, "braiding E", braid_anchor, P, br.E, thr, bb));
        out.push_back(make_record(S, "braiding F", braid_anchor, P, br.F, thr, bb));
        out.push_back(make_record(S, "braiding K", braid_anchor, P, br.K, thr, bb));
        out.push_back(make_record(S, "reduction identity (+)", R"((1\otimes E\pm E\otimes K^{-1})g_{b_*}(\pm e\otimes f)=g_{b_*}(\pm e\otimes f)(1\otimes E\pm E\otimes K))",
                                  P, br.plus_reduction, inf, Bound::tracked));
        out.push_back(make_record(S, "reduction identity (-)", R"((1\otimes E\pm E\otimes K^{-1})g_{b_*}(\pm e\otimes f)=g_{b_*}(\pm e\otimes f)(1\otimes E\pm E\otimes K))",
                                  P, br.minus_reduction, inf, Bound::tracked));
        bE.push_back(br.E);
        bF.push_back(br.F);
        bK.push_back(br.K);
        red_p.push_back(br.plus_reduction);
        red_m.push_back(br.minus_reduction);

        out.push_back(make_record(S, "braiding with g = 1 (control)", "plumbing", P, residual_braiding(R1, M).max(),
                                  cfg.control_min, Bound::above));
        out.push_back(make_record(S, "braiding with mixed phase branches (control)", "plumbing", P,
                                  residual_braiding(Rm, M).max(), cfg.control_min, Bound::above));

        out.push_back(make_record(S, "prefactor unitarity", "plumbing", P, prefactor_unitarity(R), cfg.prefactor_threshold));
        out.push_back(make_record(S, "R non-unitarity", "We note here that operator $R$ is bounded but not unitary.", P,
                                  nonunitarity(R), cfg.nonunitarity_min, Bound::above));
        const double nR = norm_R(R);
        normR.push_back(nR);
        out.push_back(make_record(S, "norm of R", "Moreover, by \\eqref{bound}, $R$ is a bounded operator.", P, nR, inf, Bound::tracked));

        const double ri = residual_inverse(R, Rt, M);
        inv.push_back(ri);
        out.push_back(make_record(S, "R^* R~ = 1", R"(R^*\tilde{R}=1)", P, ri, cfg.inverse_threshold));
        out.push_back(make_record(S, "R^* R~ = 1 (full space)", R"(R^*\tilde{R}=1)", P, residual_inverse_full(R, Rt), inf, Bound::tracked));

        const double gd = gb_difference_residual(rep);
        gdiff.push_back(gd);
        out.push_back(make_record(S, "g(U) g(e^{pi i} V) vs g(U - V)", R"(g_{b_*}(U-V):=g_{b_*}(U)g_{b_*}(e^{\pi i}V)=g_{b_*}(U)g_{b_*}(-V))",
                                  P, gd, inf, Bound::tracked));
        emit(t0, N, {{"braiding E", br.E}, {"braiding F", br.F}, {"braiding K", br.K}, {"reduction identity (+)", br.plus_reduction},
                     {"reduction identity (-)", br.minus_reduction}, {"R^* R~ = 1", ri}, {"g(U) g(e^{pi i} V) vs g(U - V)", gd}});
    }
    const auto& Ns = cfg.N_list;
    if (Ns.size() > 1) {
        out.push_back(monotone_record(S, "braiding E", braid_anchor, Ns, bE));
        out.push_back(monotone_record(S, "braiding F", braid_anchor, Ns, bF));
        out.push_back(monotone_record(S, "braiding K", braid_anchor, Ns, bK));
        out.push_back(monotone_record(S, "R^* R~ = 1", R"(R^*\tilde{R}=1)", Ns, inv, cfg.inverse_floor));
        out.push_back(monotone_record(S, "reduction identity (+)", "plumbing", Ns, red_p));
        out.push_back(monotone_record(S, "g(U) g(e^{pi i} V) vs g(U - V)", "plumbing", Ns, gdiff));
        for (std::size_t k = 1; k < Ns.size(); ++k)
            if (Ns[k] == 2 * Ns[k - 1])
                out.push_back(make_record(S, "norm of R stable under doubling", "Moreover, by \\eqref{bound}, $R$ is a bounded operator.",
                                          {{"b2", cfg.rmatrix_b_squared}, {"N", Ns[k]}}, std::abs(normR[k] / normR[k - 1] - 1.0), 0.1));
    }

    std::vector<double> d1, d2, yb;
    for (int N : cfg.triple_N) {
        const auto t0 = clock::now();
        const nlohmann::json P = {{"b2", cfg.rmatrix_b_squared}, {"N", N}, {"block", M}, {"kappa", cfg.kappa}};
        const TruncatedRep rep = build_truncated_rep(ctx, N);
        const QuasiTriangularResult q = residual_quasitriangular(rep, cfg.kappa, M);
        out.push_back(make_record(S, "quasi-triangularity (Delta x id)", R"((\Delta \otimes id)(R)=&R_{13}R_{23})", P, q.delta_id, inf, Bound::tracked));
        out.push_back(make_record(S, "quasi-triangularity (id x Delta)", R"((id\otimes\Delta)(R)=&R_{13}R_{12})", P, q.id_delta, inf, Bound::tracked));
        out.push_back(make_record(S, "Yang-Baxter", R"(R_{12}R_{13}R_{23}=R_{23}R_{13}R_{12})", P, q.yang_baxter, inf, Bound::tracked));
        out.push_back(make_record(S, "Delta(Q) = Q13 Q23", R"(Q_{13}Q_{23}=\Delta(Q))", P, q.coproduct_Q, 1e-10));
        const char* names[4] = {"(+,+)", "(+,-)", "(-,+)", "(-,-)"};
        for (int s = 0; s < 4; ++s)
            out.push_back(make_record(S, std::string("g consistency ") + names[s],
                                      R"(g_{\pm,\pm}=g_{b_*}(\pm e\otimes K\otimes f)g_{b_*}(\pm 1\otimes e\otimes f))", P,
                                      q.g_consistency[s], inf, Bound::tracked));
        emit(t0, N, {{"quasi-triangularity (Delta x id)", q.delta_id}, {"quasi-triangularity (id x Delta)", q.id_delta},
                     {"Yang-Baxter", q.yang_baxter}});
        d1.push_back(q.delta_id);
        d2.push_back(q.id_delta);
        yb.push_back(q.yang_baxter);
    }
    if (cfg.triple_N.size() > 1) {
        out.push_back(monotone_record(S, "quasi-triangularity (Delta x id)", R"((\Delta \otimes id)(R)=&R_{13}R_{23})", cfg.triple_N, d1));
        out.push_back(monotone_record(S, "quasi-triangularity (id x Delta)", R"((id\otimes\Delta)(R)=&R_{13}R_{12})", cfg.triple_N, d2));
        out.push_back(monotone_record(S, "Yang-Baxter", R"(R_{12}R_{13}R_{23}=R_{23}R_{13}R_{12})", cfg.triple_N, yb));
    }
    return out;
}

VerificationReport run_verify(const RunConfig& cfg, std::vector<ConvergenceRecord>* conv)
{
    validate(cfg);
    VerificationReport rep;
    rep.config = to_json(cfg);
    for (const std::string& s : known_suites()) {
        if (std::find(cfg.suites.begin(), cfg.suites.end(), s) == cfg.suites.end()) continue;
        std::vector<CheckRecord> r;
        if (s == "special-fn") r = run_special_fn_suite(cfg);
        else if (s == "clifford") r = run_clifford_suite(cfg);
        else if (s == "core") r = run_core_suite(cfg);
        else r = run_rmatrix_suite(cfg, conv);
        rep.records.insert(rep.records.end(), r.begin(), r.end());
    }
    return rep;
}

void write_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
        if (!o) throw std::runtime_error("cannot write '" + tmp + "'");
        o << content;
        o.flush();
        if (!o) throw std::runtime_error("write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void parse_axis(const std::string& s, double& lo, double& hi, int& n)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("grid axis must be lo:hi:n, got '" + s + "'");
    lo = to_double("grid", parts[0]);
    hi = to_double("grid", parts[1]);
    n = to_int("grid", parts[2]);
    if (n < 0) throw ConfigError("grid point count must be non-negative");
}

std::string cmd_table(const RunConfig& cfg, const std::string& function, const TableGrid& grid)
{
    if (function != "Gb" && function != "gb" && function != "gb_phase")
        throw ConfigError("table function must be Gb, gb or gb_phase");
    const ParameterContext ctx = make_context(cfg.b_squared, cfg.Z);
    const double b = ctx.b;
    auto axis = [](double lo, double hi, int n) {
        std::vector<double> v;
        for (int k = 0; k < n; ++k) v.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
        return v;
    };
    const std::vector<double> re = axis(grid.re_lo, grid.re_hi, grid.re_n);
    std::vector<double> im = axis(grid.im_lo, grid.im_hi, grid.im_n);
    if (function == "gb" && grid.im_n == 0 && grid.re_n > 0) im = {0.0};

    std::string out = "re_z,im_z,re_G,im_G,abs_G,est_err,flag\n";
    for (double y : im)
        for (double x : re) {
            cplx v{NAN, NAN};
            double err = NAN;
            std::string flag = "ok";
            try {
                if (function == "Gb") {
                    const GbValue g = G_b_eval(b, cplx(x, y), cfg.quadrature);
                    v = g.value;
                    err = g.est_err;
                } else {
                    const double t = function == "gb" ? 0.0 : y;
                    if (function == "gb" && y != 0.0) throw DomainError("gb takes real x only");
                    v = g_b_phase(ctx, b, x, t, cfg.quadrature);
                    const cplx arg = ctx.Q_sum / 2.0 + t / (2.0 * b) + std::log(x) / (2.0 * pi * I * b);
                    err = G_b_eval(b, arg, cfg.quadrature).est_err;
                }
            } catch (const PoleProximityError& e) {
                flag = "pole(" + std::to_string(e.n) + ";" + std::to_string(e.m) + ")";
            } catch (const std::exception& e) {
                flag = "error";
            }
            out += format_g17(x) + "," + format_g17(y) + "," + format_g17(v.real()) + "," + format_g17(v.imag()) + "," +
                   format_g17(std::abs(v)) + "," + format_g17(err) + "," + flag + "\n";
        }
    return out;
}

DiffResult report_diff(const VerificationReport& r1, const VerificationReport& r2)
{
    // Records match on (suite, id, params without N); repeated keys pair up in order,
    // so reports at different N compare like for like.
    auto key = [](const CheckRecord& r) {
        nlohmann::json p = r.params;
        if (p.is_object()) p.erase("N");
        return r.suite + "|" + r.id + "|" + p.dump();
    };
    std::map<std::string, std::vector<const CheckRecord*>> m2;
    for (const CheckRecord& r : r2.records) m2[key(r)].push_back(&r);
    std::map<std::string, std::size_t> used;

    DiffResult out;
    std::string& t = out.text;
    char line[512];
    std::snprintf(line, sizeof line, "%-10s %-48s %-6s %-6s %-24s %-24s %s\n", "suite", "id", "N1", "N2", "residual1",
                  "residual2", "ratio");
    t += line;
    auto nstr = [](const CheckRecord& r) { return r.params.contains("N") && r.params["N"].is_number() ? r.params["N"].dump() : std::string("-"); };
    for (const CheckRecord& a : r1.records) {
        const std::string k = key(a);
        auto it = m2.find(k);
        std::size_t& u = used[k];
        if (it == m2.end() || u >= it->second.size()) {
            std::snprintf(line, sizeof line, "%-10s %-48s %-6s %-6s %-24s %-24s %s\n", a.suite.c_str(), a.id.c_str(),
                          nstr(a).c_str(), "-", format_g17(a.residual).c_str(), "-", "REMOVED");
            t += line;
            ++out.removed;
            continue;
        }
        const CheckRecord& b = *it->second[u++];
        double ratio;
        if (a.residual == b.residual) ratio = 1.0;
        else if (a.residual == 0.0) ratio = std::numeric_limits<double>::infinity();
        else ratio = b.residual / a.residual;
        std::snprintf(line, sizeof line, "%-10s %-48s %-6s %-6s %-24s %-24s %.6g\n", a.suite.c_str(), a.id.c_str(),
                      nstr(a).c_str(), nstr(b).c_str(), format_g17(a.residual).c_str(), format_g17(b.residual).c_str(), ratio);
        t += line;
    }
    for (const auto& [k, v] : m2) {
        const std::size_t u = used.count(k) ? used[k] : 0;
        for (std::size_t i = u; i < v.size(); ++i) {
            std::snprintf(line, sizeof line, "%-10s %-48s %-6s %-6s %-24s %-24s %s\n", v[i]->suite.c_str(), v[i]->id.c_str(),
                          "-", nstr(*v[i]).c_str(), "-", format_g17(v[i]->residual).c_str(), "ADDED");
            t += line;
            ++out.added;
        }
    }
    return out;
}

}  // namespace mdq
