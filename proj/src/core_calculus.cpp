#include "mdq/core_calculus.hpp"

#include "mdq/superlin.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace mdq {

namespace {

bool term_less(const GaussTerm& a, const GaussTerm& b)
{
    return std::make_tuple(a.alpha, a.beta.real(), a.beta.imag(), a.n) <
           std::make_tuple(b.alpha, b.beta.real(), b.beta.imag(), b.n);
}

bool same_key(const GaussTerm& a, const GaussTerm& b)
{
    return a.alpha == b.alpha && a.beta == b.beta && a.n == b.n;
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

CoreFunction::CoreFunction(std::vector<GaussTerm> terms) : terms_(std::move(terms))
{
    canonicalize();
}

CoreFunction CoreFunction::gaussian(double alpha, cplx beta, int n, cplx c)
{
    return CoreFunction({GaussTerm{c, alpha, beta, n}});
}

void CoreFunction::canonicalize()
{
    for (const GaussTerm& t : terms_) {
        if (!(t.alpha > 0.0)) throw std::invalid_argument("core function terms need alpha > 0");
        if (t.n < 0) throw std::invalid_argument("core function terms need n >= 0");
    }
    std::stable_sort(terms_.begin(), terms_.end(), term_less);
    std::vector<GaussTerm> out;
    out.reserve(terms_.size());
    for (const GaussTerm& t : terms_) {
        if (!out.empty() && same_key(out.back(), t))
            out.back().c += t.c;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const GaussTerm& t) { return t.c == 0.0; });
    terms_ = std::move(out);
}

bool CoreFunction::in_core() const
{
    return std::all_of(terms_.begin(), terms_.end(), [](const GaussTerm& t) { return t.alpha > 0.0; });
}

cplx CoreFunction::operator()(cplx z) const
{
    std::vector<cplx> v(terms_.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const GaussTerm& t = terms_[k];
        cplx p = 1.0;
        for (int i = 0; i < t.n; ++i) p *= z;
        v[k] = t.c * std::exp(-t.alpha * z * z + t.beta * z) * p;
    }
    return pairwise_sum(v);
}

cplx eval(const CoreFunction& f, cplx z)
{
    return f(z);
}

CoreFunction CoreFunction::operator+(const CoreFunction& o) const
{
    std::vector<GaussTerm> t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return CoreFunction(std::move(t));
}

CoreFunction CoreFunction::operator-(const CoreFunction& o) const
{
    return *this + o * -1.0;
}

CoreFunction CoreFunction::operator*(cplx s) const
{
    std::vector<GaussTerm> t = terms_;
    for (GaussTerm& g : t) g.c *= s;
    return CoreFunction(std::move(t));
}

CoreFunction CoreFunction::times_exp(cplx gamma) const
{
    std::vector<GaussTerm> t = terms_;
    for (GaussTerm& g : t) g.beta += gamma;
    return CoreFunction(std::move(t));
}

CoreFunction CoreFunction::shifted(cplx s) const
{
    if (s == 0.0) return *this;
    std::vector<GaussTerm> out;
    for (const GaussTerm& g : terms_) {
        // e^{-a(x+s)^2 + b(x+s)} (x+s)^n = e^{-a s^2 + b s} e^{-a x^2 + (b - 2 a s) x} sum_k C(n,k) s^{n-k} x^k
        const cplx c0 = g.c * std::exp(-g.alpha * s * s + g.beta * s);
        const cplx beta = g.beta - 2.0 * g.alpha * s;
        for (int k = 0; k <= g.n; ++k)
            out.push_back({c0 * binomial(g.n, k) * std::pow(s, g.n - k), g.alpha, beta, k});
    }
    return CoreFunction(std::move(out));
}

CoreFunction CoreFunction::times_x() const
{
    std::vector<GaussTerm> t = terms_;
    for (GaussTerm& g : t) ++g.n;
    return CoreFunction(std::move(t));
}

CoreFunction Affine::apply(const CoreFunction& f) const
{
    return f.shifted(shift).times_exp(mult) * scalar;
}

cplx Affine::apply_at(const std::function<cplx(cplx)>& f, cplx z) const
{
    return scalar * std::exp(mult * z) * f(z + shift);
}

Affine Affine::then(const Affine& outer) const
{
    return {outer.scalar * scalar * std::exp(mult * outer.shift), outer.mult + mult, outer.shift + shift};
}

CoreOp CoreOp::identity()
{
    return from(Affine{});
}

CoreOp CoreOp::from(const Affine& a)
{
    return CoreOp{{a}};
}

CoreFunction CoreOp::apply(const CoreFunction& f) const
{
    std::vector<GaussTerm> all;
    for (const Affine& a : terms) {
        const CoreFunction g = a.apply(f);
        all.insert(all.end(), g.terms().begin(), g.terms().end());
    }
    return CoreFunction(std::move(all));
}

CoreOp CoreOp::operator*(const CoreOp& rhs) const
{
    CoreOp out;
    for (const Affine& outer : terms)
        for (const Affine& inner : rhs.terms) out.terms.push_back(inner.then(outer));
    out.merge();
    return out;
}

CoreOp CoreOp::operator+(const CoreOp& o) const
{
    CoreOp out = *this;
    out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
    out.merge();
    return out;
}

CoreOp CoreOp::operator-(const CoreOp& o) const
{
    return *this + o * -1.0;
}

CoreOp CoreOp::operator*(cplx s) const
{
    CoreOp out = *this;
    for (Affine& a : out.terms) a.scalar *= s;
    return out;
}

void CoreOp::merge()
{
    std::vector<Affine> out;
    for (const Affine& a : terms) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Affine& b) { return b.mult == a.mult && b.shift == a.shift; });
        if (it != out.end())
            it->scalar += a.scalar;
        else
            out.push_back(a);
    }
    terms = std::move(out);
}

Affine WeylOp::affine() const
{
    const double b = b_used;
    return {prefactor * std::exp(-pi * I * b * b * a * ccoef), 2.0 * pi * b * a, -I * b * ccoef};
}

Affine WeylOp::imaginary_power(cplx t) const
{
    if (!(prefactor.imag() == 0.0 && prefactor.real() > 0.0))
        throw DomainError("imaginary powers need a positive prefactor");
    const cplx pre = std::exp(I * t * std::log(prefactor.real()) / b_used);
    return {pre * std::exp(pi * I * t * t * a * ccoef), 2.0 * pi * I * t * a, t * ccoef};
}

CoreFunction apply_weyl(const WeylOp& op, const CoreFunction& f)
{
    return op.affine().apply(f);
}

Affine WeylPair::U() const
{
    return {1.0, 2.0 * pi * b, 0.0};
}

Affine WeylPair::V() const
{
    return {1.0, 0.0, -I * b};
}

Affine WeylPair::Uinv() const
{
    return {1.0, -2.0 * pi * b, 0.0};
}

Affine WeylPair::Vinv() const
{
    return {1.0, 0.0, I * b};
}

SuperOp SuperOp::tensor(const Mat2& m, const CoreOp& op)
{
    SuperOp out;
    for (const Affine& a : op.terms) out.terms.emplace_back(m, a);
    return out;
}

SuperWavefunction SuperOp::apply(const SuperWavefunction& psi) const
{
    std::vector<GaussTerm> comp[2];
    const CoreFunction* in[2] = {&psi.even, &psi.odd};
    for (const auto& [m, a] : terms) {
        for (int j = 0; j < 2; ++j) {
            if (in[j]->empty()) continue;
            const CoreFunction g = a.apply(*in[j]);
            for (int i = 0; i < 2; ++i) {
                if (m(i, j) == 0.0) continue;
                for (GaussTerm t : g.terms()) {
                    t.c *= m(i, j);
                    comp[i].push_back(t);
                }
            }
        }
    }
    return {CoreFunction(std::move(comp[0])), CoreFunction(std::move(comp[1]))};
}

SuperOp SuperOp::operator*(const SuperOp& rhs) const
{
    SuperOp out;
    for (const auto& [m1, a1] : terms)
        for (const auto& [m2, a2] : rhs.terms) out.terms.emplace_back(m1 * m2, a2.then(a1));
    return out;
}

SuperOp SuperOp::operator+(const SuperOp& o) const
{
    SuperOp out = *this;
    out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
    return out;
}

SuperOp SuperOp::operator-(const SuperOp& o) const
{
    return *this + o * -1.0;
}

SuperOp SuperOp::operator*(cplx s) const
{
    SuperOp out = *this;
    for (auto& t : out.terms) t.second.scalar *= s;
    return out;
}

SuperOp super_identity()
{
    return SuperOp::tensor(Mat2::Identity(), CoreOp::identity());
}

Sl2Generators build_sl2_generators(const ParameterContext& ctx, Modulus mod)
{
    Sl2Generators g;
    switch (mod) {
    case Modulus::plain:
        g.b = ctx.b;
        g.q = ctx.q;
        g.Z = ctx.Z;
        break;
    case Modulus::super:
        g.b = ctx.b_star;
        g.q = ctx.q_star;
        g.Z = ctx.Z;
        break;
    case Modulus::dual:
        g.b = ctx.b_dual();
        g.q = ctx.q_dual();
        g.Z = std::pow(ctx.Z, 1.0 / ctx.b_star_squared());
        break;
    }
    const WeylPair w{g.b};
    const CoreOp U = CoreOp::from(w.U()), V = CoreOp::from(w.V());
    const CoreOp Ui = CoreOp::from(w.Uinv()), Vi = CoreOp::from(w.Vinv());
    g.e = V + Ui * g.Z;
    g.f = U + Vi * (1.0 / g.Z);
    const cplx d = g.q - 1.0 / g.q;
    g.E = g.e * (I / d);
    g.F = g.f * (I / d);
    g.K = (U * V) * (1.0 / g.q);
    g.Kinv = (Vi * Ui) * g.q;
    return g;
}

OspGenerators build_osp_generators(const ParameterContext& ctx, bool dual)
{
    OspGenerators g;
    g.sl2 = build_sl2_generators(ctx, dual ? Modulus::dual : Modulus::super);
    g.q = dual ? ctx.tau_q : ctx.q;
    g.alpha = dual ? ctx.alpha_dual() : ctx.alpha;
    const CliffordGenerators cl = clifford_generators();
    const Mat2 xi = cl.xi.m, eta = cl.eta.m, invol = cl.invol.m;
    g.E = SuperOp::tensor(xi, g.sl2.E * g.alpha);
    g.F = SuperOp::tensor(eta, g.sl2.F);
    g.K = SuperOp::tensor(invol, g.sl2.K);
    g.Kinv = SuperOp::tensor(invol, g.sl2.Kinv);
    g.ehat = g.E * (-I * (g.q - 1.0 / g.q));
    g.fhat = g.F * (g.q + 1.0 / g.q);
    return g;
}

Eigen::Vector4cd PairState::operator()(cplx z1, cplx z2) const
{
    Eigen::Vector4cd v;
    for (int i = 0; i < 4; ++i) {
        std::vector<cplx> parts;
        parts.reserve(comp[i].size());
        for (const auto& [f, g] : comp[i]) parts.push_back(f(z1) * g(z2));
        v(i) = pairwise_sum(parts);
    }
    return v;
}

PairState tensor_state(const SuperWavefunction& a, const SuperWavefunction& b)
{
    PairState s;
    const CoreFunction* fa[2] = {&a.even, &a.odd};
    const CoreFunction* fb[2] = {&b.even, &b.odd};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (!fa[i]->empty() && !fb[j]->empty()) s.comp[2 * i + j].emplace_back(*fa[i], *fb[j]);
    return s;
}

PairState PairOp::apply(const PairState& s) const
{
    PairState out;
    for (const PairOpTerm& t : terms) {
        for (int j = 0; j < 4; ++j) {
            for (const auto& [f, g] : s.comp[j]) {
                const CoreFunction xf = t.x.apply(f), yg = t.y.apply(g);
                for (int i = 0; i < 4; ++i)
                    if (t.cliff(i, j) != 0.0) out.comp[i].emplace_back(xf * t.cliff(i, j), yg);
            }
        }
    }
    return out;
}

PairOp PairOp::operator*(const PairOp& rhs) const
{
    PairOp out;
    for (const PairOpTerm& a : terms)
        for (const PairOpTerm& b : rhs.terms) out.terms.push_back({a.cliff * b.cliff, b.x.then(a.x), b.y.then(a.y)});
    out.merge();
    return out;
}

PairOp PairOp::operator+(const PairOp& o) const
{
    PairOp out = *this;
    out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
    out.merge();
    return out;
}

void PairOp::merge()
{
    std::vector<PairOpTerm> out;
    for (PairOpTerm t : terms) {
        t.cliff *= t.x.scalar * t.y.scalar;
        t.x.scalar = t.y.scalar = 1.0;
        auto it = std::find_if(out.begin(), out.end(), [&](const PairOpTerm& u) {
            return u.x.mult == t.x.mult && u.x.shift == t.x.shift && u.y.mult == t.y.mult && u.y.shift == t.y.shift;
        });
        if (it != out.end())
            it->cliff += t.cliff;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const PairOpTerm& t) { return t.cliff.isZero(0.0); });
    terms = std::move(out);
}

PairOp PairOp::operator-(const PairOp& o) const
{
    return *this + o * -1.0;
}

PairOp PairOp::operator*(cplx s) const
{
    PairOp out = *this;
    for (PairOpTerm& t : out.terms) t.x.scalar *= s;
    return out;
}

PairOp pair_tensor(const SuperOp& a, const SuperOp& b)
{
    PairOp out;
    for (const auto& [ma, aa] : a.terms)
        for (const auto& [mb, ab] : b.terms)
            out.terms.push_back({super_tensor(graded(ma), graded(mb)).m, aa, ab});
    return out;
}

nlohmann::json to_json(const ResidualReport& r)
{
    return {{"relation_id", r.relation_id},
            {"paper_anchor", r.anchor},
            {"max_residual", r.max_residual},
            {"samples", r.samples},
            {"params", r.params}};
}

std::vector<cplx> default_samples(int count)
{
    // Golden-angle spiral inside |z| <= 1.5.
    std::vector<cplx> out;
    for (int k = 0; k < count; ++k) {
        const double r = 0.3 + 1.2 * k / std::max(1, count - 1);
        out.push_back(std::polar(r, 2.399963229728653 * k + 0.3));
    }
    return out;
}

std::vector<cplx> real_samples(int count)
{
    std::vector<cplx> out;
    for (int k = 0; k < count; ++k) out.emplace_back(-0.6 + 1.4 * k / std::max(1, count - 1), 0.0);
    return out;
}

double relative_residual(const std::function<cplx(cplx)>& lhs, const std::function<cplx(cplx)>& rhs,
                         const std::vector<cplx>& samples)
{
    double worst = 0.0;
    for (cplx z : samples) {
        const cplx l = lhs(z), r = rhs(z);
        worst = std::max(worst, std::abs(l - r) / std::max({std::abs(l), std::abs(r), 1e-30}));
    }
    return worst;
}

double relative_residual(const SuperWavefunction& lhs, const SuperWavefunction& rhs, const std::vector<cplx>& samples)
{
    double worst = 0.0;
    for (cplx z : samples) {
        const Eigen::Vector2cd l(lhs.even(z), lhs.odd(z)), r(rhs.even(z), rhs.odd(z));
        worst = std::max(worst, (l - r).norm() / std::max({l.norm(), r.norm(), 1e-30}));
    }
    return worst;
}

double relative_residual(const PairState& lhs, const PairState& rhs, const std::vector<cplx>& samples)
{
    double worst = 0.0;
    const std::size_t n = samples.size();
    for (std::size_t k = 0; k < n; ++k) {
        const cplx z1 = samples[k], z2 = samples[(k + 3) % n];
        const Eigen::Vector4cd l = lhs(z1, z2), r = rhs(z1, z2);
        worst = std::max(worst, (l - r).norm() / std::max({l.norm(), r.norm(), 1e-30}));
    }
    return worst;
}

double uv_commutation_residual(double b, cplx q, const CoreFunction& f, const std::vector<cplx>& samples)
{
    const WeylPair w{b};
    const CoreOp U = CoreOp::from(w.U()), V = CoreOp::from(w.V());
    const CoreFunction uv = (U * V).apply(f);
    const CoreFunction diff = (U * V - V * U * (q * q)).apply(f);
    double num = 0.0, scale = 0.0;
    for (cplx z : samples) {
        num = std::max(num, std::abs(diff(z)));
        scale = std::max(scale, std::abs(uv(z)));
    }
    if (scale == 0.0) throw DegenerateInputError("UV f vanishes at every sample point");
    return num / scale;
}

namespace {

nlohmann::json ctx_params(const ParameterContext& ctx)
{
    return {{"b2", ctx.b_squared}, {"Z", ctx.Z}};
}

ResidualReport report(const ParameterContext& ctx, std::string id, std::string anchor, double res, std::size_t n)
{
    return {std::move(id), std::move(anchor), res, static_cast<int>(n), ctx_params(ctx)};
}

double core_residual(const CoreOp& lhs, const CoreOp& rhs, const CoreFunction& f, const std::vector<cplx>& samples)
{
    const CoreFunction l = lhs.apply(f), r = rhs.apply(f);
    return relative_residual([&](cplx z) { return l(z); }, [&](cplx z) { return r(z); }, samples);
}

double super_residual(const SuperOp& lhs, const SuperOp& rhs, const SuperWavefunction& psi,
                      const std::vector<cplx>& samples)
{
    return relative_residual(lhs.apply(psi), rhs.apply(psi), samples);
}

}  // namespace

std::vector<ResidualReport> uv_residuals(const ParameterContext& ctx, const CoreFunction& f,
                                         const std::vector<cplx>& samples)
{
    std::vector<ResidualReport> out;
    const auto n = samples.size();
    out.push_back(report(ctx, "UV=q^2VU", "UV=q^2VU", uv_commutation_residual(ctx.b, ctx.q, f, samples), n));
    out.push_back(report(ctx, "UV=q*^2VU", "UV=q_*^2VU",
                         uv_commutation_residual(ctx.b_star, ctx.q_star, f, samples), n));
    out.push_back(report(ctx, "dual UV=q~^2VU", "\\tilde U\\tilde V=\\tilde q^2\\tilde V\\tilde U",
                         uv_commutation_residual(ctx.b_dual(), ctx.q_dual(), f, samples), n));

    const WeylPair w{ctx.b_star}, wd{ctx.b_dual()};
    const CoreOp U = CoreOp::from(w.U()), V = CoreOp::from(w.V());
    const CoreOp Ud = CoreOp::from(wd.U()), Vd = CoreOp::from(wd.V());
    out.push_back(report(ctx, "[U,V~]=0", "plumbing", core_residual(U * Vd, Vd * U, f, samples), n));
    out.push_back(report(ctx, "[U~,V]=0", "plumbing", core_residual(Ud * V, V * Ud, f, samples), n));

    const Affine K_words = w.V().then(w.U());
    const WeylOp K{1.0, 1.0, 1.0, ctx.b_star};
    out.push_back(report(ctx, "K=q*^{-1}UV", "K=q_*^{-1} UV",
                         core_residual(CoreOp::from(K_words) * (1.0 / ctx.q_star), CoreOp::from(K.affine()), f, samples),
                         n));
    return out;
}

std::vector<ResidualReport> sl2_residuals(const ParameterContext& ctx, const CoreFunction& f,
                                          const std::vector<cplx>& samples)
{
    std::vector<ResidualReport> out;
    const auto n = samples.size();
    for (Modulus mod : {Modulus::super, Modulus::dual}) {
        const Sl2Generators g = build_sl2_generators(ctx, mod);
        const std::string tag = mod == Modulus::super ? "" : "dual ";
        const cplx d = g.q - 1.0 / g.q;
        out.push_back(report(ctx, tag + "[E,F]=(K-K^-1)/(q*-q*^-1)", "EF-FE=\\frac{K-K^{-1}}{q_*-q_*^{-1}}",
                             core_residual(g.E * g.F - g.F * g.E, (g.K - g.Kinv) * (1.0 / d), f, samples), n));
        out.push_back(report(ctx, tag + "KE=q*^2EK", "KE=q_*^2EK=-q^2EK",
                             core_residual(g.K * g.E, g.E * g.K * (g.q * g.q), f, samples), n));
        out.push_back(report(ctx, tag + "KF=q*^-2FK", "KF=q_*^{-2}FK=-q^{-2}FK",
                             core_residual(g.K * g.F, g.F * g.K * (1.0 / (g.q * g.q)), f, samples), n));
        out.push_back(report(ctx, tag + "KK^-1=1", "plumbing", core_residual(g.K * g.Kinv, CoreOp::identity(), f, samples),
                             n));
        const double s = 2.0 * std::sin(pi * g.b * g.b);
        out.push_back(report(ctx, tag + "e=2sin(pi b^2)E", "plumbing", core_residual(g.e, g.E * s, f, samples), n));
        out.push_back(report(ctx, tag + "f=2sin(pi b^2)F", "plumbing", core_residual(g.f, g.F * s, f, samples), n));
    }
    return out;
}

std::vector<ResidualReport> osp_residuals(const ParameterContext& ctx, const SuperWavefunction& psi,
                                          const std::vector<cplx>& samples)
{
    std::vector<ResidualReport> out;
    const auto n = samples.size();
    for (bool dual : {false, true}) {
        const OspGenerators g = build_osp_generators(ctx, dual);
        const std::string tag = dual ? "dual " : "";
        const cplx q = g.q;
        out.push_back(report(ctx, tag + "KE=q^2EK", "\\mathcal{K}\\mathcal{E}=q^2\\mathcal{E}\\mathcal{K}",
                             super_residual(g.K * g.E, g.E * g.K * (q * q), psi, samples), n));
        out.push_back(report(ctx, tag + "KF=q^-2FK", "\\mathcal{K}\\mathcal{F}=q^{-2}\\mathcal{F}\\mathcal{K}",
                             super_residual(g.K * g.F, g.F * g.K * (1.0 / (q * q)), psi, samples), n));
        out.push_back(report(ctx, tag + "[E,F]+=i(K-K^-1)/(q-q^-1)",
                             "[\\mathcal{E},\\mathcal{F}]_+:=\\mathcal{E}\\mathcal{F}+\\mathcal{F}\\mathcal{E}=i\\frac{\\mathcal{K}-"
                             "\\mathcal{K}^{-1}}{q-q^{-1}}",
                             super_residual(g.E * g.F + g.F * g.E, (g.K - g.Kinv) * (I / (q - 1.0 / q)), psi, samples), n));
        out.push_back(report(ctx, tag + "KK^-1=1", "plumbing",
                             super_residual(g.K * g.Kinv, super_identity(), psi, samples), n));

        // Explicit forms with U_+ = U xi, V_+ = V xi, U_- = U eta, V_- = V eta.
        const CliffordGenerators cl = clifford_generators();
        const WeylPair w{g.sl2.b};
        const double Z = g.sl2.Z;
        const CoreOp U = CoreOp::from(w.U()), V = CoreOp::from(w.V());
        const CoreOp Ui = CoreOp::from(w.Uinv()), Vi = CoreOp::from(w.Vinv());
        const SuperOp Up = SuperOp::tensor(cl.xi.m, U), Vp = SuperOp::tensor(cl.xi.m, V);
        const SuperOp Upi = SuperOp::tensor(cl.xi.m, Ui);
        const SuperOp Um = SuperOp::tensor(cl.eta.m, U), Vm = SuperOp::tensor(cl.eta.m, V);
        const SuperOp Vmi = SuperOp::tensor(cl.eta.m, Vi);
        out.push_back(report(ctx, tag + "E explicit", "\\mathcal{E}=i\\frac{V_++ZU_+^{-1}}{q-q^{-1}}",
                             super_residual(g.E, (Vp + Upi * Z) * (I / (q - 1.0 / q)), psi, samples), n));
        out.push_back(report(ctx, tag + "F explicit", "\\mathcal{F}=\\frac{U_-+Z^{-1}V_-^{-1}}{q+q^{-1}}",
                             super_residual(g.F, (Um + Vmi * (1.0 / Z)) * (1.0 / (q + 1.0 / q)), psi, samples), n));
        out.push_back(report(ctx, tag + "K explicit (printed sign)", "\\mathcal{K}=q^{-1}U_+V_-",
                             super_residual(g.K, Up * Vm * (1.0 / q), psi, samples), n));
        out.push_back(report(ctx, tag + "K explicit (corrected sign)", "plumbing",
                             super_residual(g.K, Up * Vm * (-1.0 / q), psi, samples), n));
    }
    return out;
}

std::vector<ResidualReport> modular_dual_residuals(const ParameterContext& ctx, const SuperWavefunction& psi,
                                                   const std::vector<cplx>& samples)
{
    const OspGenerators g = build_osp_generators(ctx, false);
    const OspGenerators d = build_osp_generators(ctx, true);
    struct Rel {
        const char* id;
        const char* anchor;
        const SuperOp* x;
        const SuperOp* y;
        int sign;  // -1 commutator, +1 anticommutator
        bool k_type;
    };
    const Rel rels[8] = {
        {"[E,E~]-=0", "[\\mathcal{E}, \\tilde{\\mathcal{E}}]_-=0", &g.E, &d.E, -1, false},
        {"[F,F~]-=0", "[\\mathcal{F}, \\tilde{\\mathcal{F}}]_-=0", &g.F, &d.F, -1, false},
        {"[E,F~]+=0", "[\\mathcal{E}, \\tilde{\\mathcal{F}}]_+=0", &g.E, &d.F, +1, false},
        {"[F,E~]+=0", "[\\mathcal{F}, \\tilde{\\mathcal{E}}]_+=0", &g.F, &d.E, +1, false},
        {"[E,K~]-=0", "[\\mathcal{E}, \\tilde{\\mathcal{K}}]_-=0", &g.E, &d.K, -1, true},
        {"[F,K~]-=0", "[\\mathcal{F}, \\tilde{\\mathcal{K}}]_-=0", &g.F, &d.K, -1, true},
        {"[K,E~]-=0", "[\\mathcal{K}, \\tilde{\\mathcal{E}}]_-=0", &g.K, &d.E, -1, true},
        {"[K,F~]-=0", "[\\mathcal{K}, \\tilde{\\mathcal{F}}]_-=0", &g.K, &d.F, -1, true},
    };
    std::vector<ResidualReport> out;
    auto run = [&](const Rel& r, int sign, std::string id) {
        const SuperOp xy = *r.x * *r.y, yx = *r.y * *r.x;
        out.push_back(report(ctx, std::move(id), r.anchor, super_residual(xy, yx * (-sign), psi, samples),
                             samples.size()));
    };
    for (const Rel& r : rels) run(r, r.sign, r.id);
    for (const Rel& r : rels)
        if (r.k_type) run(r, -r.sign, std::string(r.id) + "_anticommutator");
    return out;
}

std::vector<ResidualReport> coproduct_residuals(const ParameterContext& ctx, const SuperWavefunction& psi1,
                                                const SuperWavefunction& psi2, const std::vector<cplx>& samples)
{
    std::vector<ResidualReport> out;
    const PairState s = tensor_state(psi1, psi2);
    const auto n = samples.size();
    auto res = [&](const PairOp& l, const PairOp& r) { return relative_residual(l.apply(s), r.apply(s), samples); };
    const SuperOp one = super_identity();

    const OspGenerators g = build_osp_generators(ctx, false);
    const PairOp DE = pair_tensor(g.E, g.K) + pair_tensor(one, g.E);
    const PairOp DF = pair_tensor(g.F, one) + pair_tensor(g.Kinv, g.F);
    const PairOp DK = pair_tensor(g.K, g.K), DKi = pair_tensor(g.Kinv, g.Kinv);
    const PairOp id = pair_tensor(one, one);
    const cplx q = g.q;
    out.push_back(report(ctx, "Delta(K)Delta(K^-1)=1", "\\Delta(\\mathcal{K})=\\mathcal{K}\\otimes \\mathcal{K}",
                         res(DK * DKi, id), n));
    out.push_back(report(ctx, "Delta: KE=q^2EK", "\\Delta(\\mathcal{E})=\\mathcal{E}\\otimes \\mathcal{K}+1\\otimes \\mathcal{E}",
                         res(DK * DE, DE * DK * (q * q)), n));
    out.push_back(report(ctx, "Delta: KF=q^-2FK",
                         "\\Delta(\\mathcal{F})=\\mathcal{F}\\otimes 1+\\mathcal{K}^{-1}\\otimes \\mathcal{F}",
                         res(DK * DF, DF * DK * (1.0 / (q * q))), n));
    out.push_back(report(ctx, "Delta: [E,F]+=i(K-K^-1)/(q-q^-1)",
                         "[\\mathcal{E},\\mathcal{F}]_+=i\\frac{\\mathcal{K}-\\mathcal{K}^{-1}}{q-q^{-1}}",
                         res(DE * DF + DF * DE, (DK - DKi) * (I / (q - 1.0 / q))), n));

    // sl(2) coproduct on the even subspace, Clifford parts trivial.
    const Sl2Generators h = build_sl2_generators(ctx, Modulus::super);
    const Mat2 I2 = Mat2::Identity();
    auto lift = [&](const CoreOp& op) { return SuperOp::tensor(I2, op); };
    const SuperOp E = lift(h.E), F = lift(h.F), K = lift(h.K), Ki = lift(h.Kinv);
    const PairOp dE = pair_tensor(E, K) + pair_tensor(one, E);
    const PairOp dF = pair_tensor(F, one) + pair_tensor(Ki, F);
    const PairOp dK = pair_tensor(K, K), dKi = pair_tensor(Ki, Ki);
    out.push_back(report(ctx, "sl2 Delta: [E,F]=(K-K^-1)/(q*-q*^-1)", "\\Delta(e)=e\\otimes K+ 1\\otimes e",
                         res(dE * dF - dF * dE, (dK - dKi) * (1.0 / (h.q - 1.0 / h.q))), n));
    out.push_back(report(ctx, "sl2 Delta: KE=q*^2EK", "plumbing", res(dK * dE, dE * dK * (h.q * h.q)), n));
    return out;
}

Affine phi_map(const ParameterContext& ctx, bool inverse)
{
    const double bs = ctx.b_star;
    const cplx scalar = std::exp(-pi * I / (4.0 * bs * bs));
    if (inverse) return {scalar, pi / bs, -I / (2.0 * bs)};
    return {scalar, -pi / bs, I / (2.0 * bs)};
}

CoreFunction apply_Phi(const ParameterContext& ctx, const CoreFunction& f, bool inverse)
{
    return phi_map(ctx, inverse).apply(f);
}

std::vector<ResidualReport> phi_residuals(const ParameterContext& ctx, const CoreFunction& f,
                                          const std::vector<cplx>& samples)
{
    std::vector<ResidualReport> out;
    const auto n = samples.size();
    const CoreOp P = CoreOp::from(phi_map(ctx, false)), Pi = CoreOp::from(phi_map(ctx, true));
    const Sl2Generators g = build_sl2_generators(ctx, Modulus::super);
    const CoreOp U = CoreOp::from(WeylPair{ctx.b_star}.U());
    out.push_back(report(ctx, "Phi^-1 U Phi=-U", "=e^{-\\pi i}U f(x)=-Uf(x)", core_residual(Pi * U * P, U * -1.0, f, samples),
                         n));
    out.push_back(report(ctx, "Phi^-1 E Phi=-E", "\\Phi^{-1} \\circ E \\circ \\Phi = e^{\\pi i}E",
                         core_residual(Pi * g.E * P, g.E * -1.0, f, samples), n));
    out.push_back(report(ctx, "Phi^-1 F Phi=-F", "E\\mapsto -E, \\;\\; F\\mapsto -F, \\;\\; K\\mapsto K",
                         core_residual(Pi * g.F * P, g.F * -1.0, f, samples), n));
    out.push_back(report(ctx, "Phi^-1 K Phi=K", "E\\mapsto -E, \\;\\; F\\mapsto -F, \\;\\; K\\mapsto K",
                         core_residual(Pi * g.K * P, g.K, f, samples), n));
    out.push_back(report(ctx, "Phi Phi^-1=1", "plumbing", core_residual(P * Pi, CoreOp::identity(), f, samples), n));
    return out;
}

double hermiticity_residual(const ParameterContext& ctx, const CoreFunction& f, const CoreFunction& g)
{
    const Sl2Generators s = build_sl2_generators(ctx, Modulus::super);
    const CoreFunction ef = s.e.apply(f), eg = s.e.apply(g);
    // Every term decays like e^{-alpha (x - Re beta / (2 alpha))^2}; cover 40 e-folds around each centre.
    double L = 1.0;
    for (const CoreFunction* h : {&ef, &eg, &f, &g})
        for (const GaussTerm& t : h->terms())
            L = std::max(L, std::abs(t.beta.real()) / (2.0 * t.alpha) + std::sqrt((40.0 + 2.0 * t.n) / t.alpha));
    auto inner = [&](const CoreFunction& a, const CoreFunction& b) {
        auto h = [&](double x) { return std::conj(a(x)) * b(x); };
        const int n0 = static_cast<int>(std::ceil(2.0 * L));
        const double scale = std::abs(integrate(h, -L, L, 1e-6, 20000, n0).value);
        const QuadResult r = integrate(h, -L, L, 1e-13 * std::max(scale, 1e-30), 20000, n0);
        if (!r.converged) throw AccuracyError("inner product quadrature did not converge", r.abs_err);
        return r.value;
    };
    const cplx lhs = inner(ef, g), rhs = inner(f, eg);
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30});
}

QuadratureSpec operator_quadrature()
{
    QuadratureSpec q;
    q.r = 0.3;
    q.tol = 1e-9;
    q.T = 7.0;
    return q;
}

GbOperator make_gb_operator(const WeylOp& op, double phase_t, bool starred, const QuadratureSpec& quad)
{
    return {op, make_fourier_kernel(op.b_used, starred, phase_t, quad)};
}

CoreFunction apply_gb_core(const GbOperator& g, const CoreFunction& f)
{
    std::vector<GaussTerm> all;
    for (std::size_t j = 0; j < g.kernel.t.size(); ++j) {
        Affine a = g.op.imaginary_power(g.kernel.t[j]);
        a.scalar *= g.kernel.c[j];
        const CoreFunction h = a.apply(f);
        all.insert(all.end(), h.terms().begin(), h.terms().end());
    }
    return CoreFunction(std::move(all));
}

cplx apply_gb_at(const GbOperator& g, const std::function<cplx(cplx)>& h, cplx z)
{
    const std::size_t n = g.kernel.t.size();
    std::vector<cplx> v(n);
    if (g.op.ccoef == 0.0) {
        // Pure multiplication: the function value factors out of the node sum.
        for (std::size_t j = 0; j < n; ++j) {
            const Affine a = g.op.imaginary_power(g.kernel.t[j]);
            v[j] = g.kernel.c[j] * a.scalar * std::exp(a.mult * z);
        }
        return pairwise_sum(v) * h(z);
    }
    for (std::size_t j = 0; j < n; ++j) v[j] = g.kernel.c[j] * g.op.imaginary_power(g.kernel.t[j]).apply_at(h, z);
    const cplx out = pairwise_sum(v);
    if (!std::isfinite(std::abs(out))) throw AccuracyError("operator quadrature overflowed; reduce T", 0.0);
    return out;
}

cplx apply_gb_weyl(const ParameterContext&, const WeylOp& op, double phase_t, const CoreFunction& f,
                   const QuadratureSpec& quad, cplx z)
{
    const GbOperator g = make_gb_operator(op, phase_t, false, quad);
    return apply_gb_at(g, [&](cplx w) { return f(w); }, z);
}

double qsum1_residual(const ParameterContext& ctx, const CoreFunction& f, const QuadratureSpec& quad,
                      const std::vector<cplx>& samples)
{
    const double b = ctx.b_star;
    const WeylOp U{1.0, 1.0, 0.0, b};
    const GbOperator gU = make_gb_operator(U, 0.0, false, quad);
    const GbOperator gUs = make_gb_operator(U, 0.0, true, quad);
    const WeylPair w{b};
    const CoreFunction h = w.V().apply(apply_gb_core(gU, f));
    const CoreOp rhs = CoreOp::from(w.V().then(w.U())) * (1.0 / ctx.q_star) + CoreOp::from(w.V());
    const CoreFunction r = rhs.apply(f);
    return relative_residual([&](cplx z) { return apply_gb_at(gUs, [&](cplx x) { return h(x); }, z); },
                             [&](cplx z) { return r(z); }, samples);
}

double qsum2_residual(const ParameterContext& ctx, const CoreFunction& f, const QuadratureSpec& quad,
                      const std::vector<cplx>& samples)
{
    const double b = ctx.b_star;
    const WeylOp V{1.0, 0.0, 1.0, b};
    const GbOperator gV = make_gb_operator(V, 0.0, false, quad);
    const GbOperator gVs = make_gb_operator(V, 0.0, true, quad);
    const WeylPair w{b};
    const CoreFunction h = w.U().apply(apply_gb_core(gVs, f));
    const CoreOp rhs = CoreOp::from(w.U()) + CoreOp::from(w.V().then(w.U())) * (1.0 / ctx.q_star);
    const CoreFunction r = rhs.apply(f);
    return relative_residual([&](cplx z) { return apply_gb_at(gV, [&](cplx x) { return h(x); }, z); },
                             [&](cplx z) { return r(z); }, samples);
}

double pentagon_residual(const ParameterContext& ctx, const CoreFunction& f, const QuadratureSpec& quad,
                         const std::vector<cplx>& samples, PentagonMode mode)
{
    if (mode == PentagonMode::unit_g)
        return relative_residual([&](cplx z) { return f(z); }, [&](cplx z) { return f(z); }, samples);
    const double b = ctx.b_star;
    const GbOperator gU = make_gb_operator(WeylOp{1.0, 1.0, 0.0, b}, 0.0, false, quad);
    const GbOperator gV = make_gb_operator(WeylOp{1.0, 0.0, 1.0, b}, 0.0, false, quad);
    const GbOperator gW = make_gb_operator(WeylOp{1.0, 1.0, 1.0, b}, 0.0, false, quad);
    const CoreFunction hl = apply_gb_core(gU, f);
    const CoreFunction hr = apply_gb_core(gV, f);
    auto lhs = [&](cplx z) { return apply_gb_at(gV, [&](cplx x) { return hl(x); }, z); };
    auto rhs = [&](cplx z) {
        if (mode == PentagonMode::drop_middle) return apply_gb_at(gU, [&](cplx x) { return hr(x); }, z);
        auto inner = [&](cplx y) { return apply_gb_at(gW, [&](cplx x) { return hr(x); }, y); };
        return apply_gb_at(gU, inner, z);
    };
    return relative_residual(lhs, rhs, samples);
}

}  // namespace mdq
