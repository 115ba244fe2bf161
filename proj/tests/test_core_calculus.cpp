#include "mdq/core_calculus.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace mdq;

namespace {

const std::vector<cplx> pts{cplx(0.0, 0.0), cplx(0.7, -0.2), cplx(-1.1, 0.4), cplx(0.3, 1.2)};

double max_diff(const std::function<cplx(cplx)>& a, const std::function<cplx(cplx)>& b)
{
    double m = 0.0;
    for (cplx z : pts) m = std::max(m, std::abs(a(z) - b(z)) / std::max(1.0, std::abs(b(z))));
    return m;
}

}  // namespace

TEST_CASE("core function evaluation and canonical form")
{
    const CoreFunction g = CoreFunction::gaussian(1.0);
    CHECK(eval(g, 0.0) == cplx(1.0));
    CHECK(std::abs(eval(CoreFunction::gaussian(1.0, 1.0, 1), 1.0) - 1.0) < 1e-15);

    const CoreFunction h = CoreFunction::gaussian(0.5, cplx(0.2, 0.1), 2, 3.0);
    for (cplx z : pts) CHECK(std::abs(eval(g + h, z) - eval(g, z) - eval(h, z)) < 1e-14);

    const CoreFunction merged = g + g * 2.0;
    REQUIRE(merged.terms().size() == 1);
    CHECK(merged.terms()[0].c == cplx(3.0));
    CHECK((g - g).empty());
    CHECK((h + g).terms()[0].alpha == 0.5);
    CHECK_THROWS(CoreFunction::gaussian(0.0));
    CHECK(h.in_core());
}

TEST_CASE("shift, exponential and monomial factors match pointwise evaluation")
{
    const CoreFunction f = CoreFunction::gaussian(0.8, cplx(0.3, -0.2), 3, cplx(1.0, 2.0)) + CoreFunction::gaussian(1.3, 0.0, 1);
    const cplx s(0.25, -0.4), gam(0.5, 1.5);
    CHECK(max_diff([&](cplx z) { return f.shifted(s)(z); }, [&](cplx z) { return f(z + s); }) < 1e-13);
    CHECK(max_diff([&](cplx z) { return f.times_exp(gam)(z); }, [&](cplx z) { return std::exp(gam * z) * f(z); }) < 1e-13);
    CHECK(max_diff([&](cplx z) { return f.times_x()(z); }, [&](cplx z) { return z * f(z); }) < 1e-13);
}

TEST_CASE("affine maps compose like nested application")
{
    const CoreFunction f = CoreFunction::gaussian(1.0, 0.4, 1);
    const Affine in{cplx(0.5, 0.1), cplx(0.3, 0.2), cplx(-0.1, 0.6)}, out{cplx(2.0, -1.0), cplx(-0.7, 0.0), cplx(0.2, -0.3)};
    auto nested = [&](cplx z) { return out.apply_at([&](cplx w) { return in.apply_at([&](cplx u) { return f(u); }, w); }, z); };
    CHECK(max_diff([&](cplx z) { return in.then(out).apply(f)(z); }, nested) < 1e-13);
}

TEST_CASE("Weyl exponentials on the core")
{
    const double b = std::sqrt(0.3);
    const CoreFunction g = CoreFunction::gaussian(1.0);
    const WeylPair w{b};
    // V e^{-x^2} = e^{b^2} e^{-x^2 + 2 i b x}
    CHECK(max_diff([&](cplx z) { return w.V().apply(g)(z); },
                   [&](cplx z) { return std::exp(b * b) * std::exp(-z * z + 2.0 * I * b * z); }) < 1e-14);
    const CoreFunction xg = g.times_x();
    CHECK(max_diff([&](cplx z) { return w.U().apply(xg)(z); }, [&](cplx z) { return z * std::exp(-z * z + 2.0 * pi * b * z); }) <
          1e-14);

    const ParameterContext ctx = make_context(0.3);
    const WeylPair s{ctx.b_star};
    const CoreFunction viaUV = (CoreOp::from(s.U()) * CoreOp::from(s.V()) * (1.0 / ctx.q_star)).apply(g);
    const CoreFunction viaW = apply_weyl(WeylOp{1.0, 1.0, 1.0, ctx.b_star}, g);
    CHECK(max_diff([&](cplx z) { return viaUV(z); }, [&](cplx z) { return viaW(z); }) < 1e-14);
}

TEST_CASE("closed-form relation suites")
{
    const ParameterContext ctx = make_context(0.3);
    const CoreFunction f = CoreFunction::gaussian(1.0);
    const SuperWavefunction psi{CoreFunction::gaussian(1.0), CoreFunction::gaussian(1.0, 0.0, 1)};
    const std::vector<cplx> s = default_samples(10);
    CHECK(s.size() == 10);
    for (const auto& v : {uv_residuals(ctx, f, s), sl2_residuals(ctx, f, s), phi_residuals(ctx, f, s)})
        for (const ResidualReport& r : v) {
            INFO(r.relation_id);
            CHECK(r.max_residual < 1e-12);
        }
    for (const auto& v : {osp_residuals(ctx, psi, s), coproduct_residuals(ctx, psi, psi, s)})
        for (const ResidualReport& r : v) {
            INFO(r.relation_id);
            if (r.relation_id.find("printed sign") != std::string::npos)
                CHECK(r.max_residual == doctest::Approx(2.0));
            else
                CHECK(r.max_residual < 1e-10);
        }
}

TEST_CASE("dual-pair brackets")
{
    const ParameterContext ctx = make_context(0.3);
    const SuperWavefunction psi{CoreFunction::gaussian(1.0), CoreFunction::gaussian(1.0, 0.0, 1)};
    const auto r = modular_dual_residuals(ctx, psi, default_samples(10));
    REQUIRE(r.size() == 12);
    int odd_pairs = 0, k_type = 0;
    for (const ResidualReport& x : r) {
        INFO(x.relation_id);
        const bool k = x.relation_id.find('K') != std::string::npos;
        const bool anti = x.relation_id.find("_anticommutator") != std::string::npos;
        if (!k) {
            ++odd_pairs;
            CHECK(x.max_residual < 1e-12);
        } else if (anti) {
            CHECK(x.max_residual < 1e-12);
        } else {
            ++k_type;
            // X Y = -Y X for these pairs, so the stated commutator has residual 2
            CHECK(x.max_residual == doctest::Approx(2.0));
        }
    }
    CHECK(odd_pairs == 4);
    CHECK(k_type == 4);
}

TEST_CASE("degenerate input and report serialization")
{
    CHECK_THROWS_AS(uv_commutation_residual(0.5, 1.0, CoreFunction{}, default_samples()), DegenerateInputError);
    ResidualReport r{"UV=q^2VU", "UV=q^2VU", 1e-16, 10, {{"b2", 0.3}}};
    const nlohmann::json j = to_json(r);
    CHECK(j["paper_anchor"] == "UV=q^2VU");
    CHECK(j["samples"] == 10);
}

TEST_CASE("Phi maps and their inverse")
{
    const ParameterContext ctx = make_context(0.3);
    const CoreFunction f = CoreFunction::gaussian(0.9, 0.1, 1);
    const CoreFunction back = apply_Phi(ctx, apply_Phi(ctx, f, false), true);
    CHECK(max_diff([&](cplx z) { return back(z); }, [&](cplx z) { return f(z); }) < 1e-14);
    const Affine p = phi_map(ctx, false);
    CHECK(std::abs(p.shift - I / (2.0 * ctx.b_star)) < 1e-15);
}

TEST_CASE("e is Hermitian on the real line")
{
    const ParameterContext ctx = make_context(0.3);
    CHECK(hermiticity_residual(ctx, CoreFunction::gaussian(1.0, 0.2), CoreFunction::gaussian(0.6, -0.3, 1)) < 1e-8);
}

TEST_CASE("g(U) acts diagonally")
{
    const ParameterContext ctx = make_context(0.3);
    const double b = ctx.b_star;
    const CoreFunction f = CoreFunction::gaussian(1.0);
    const double z = 0.3;
    const cplx got = apply_gb_weyl(ctx, WeylOp{1.0, 1.0, 0.0, b}, 0.0, f, operator_quadrature(), z);
    const cplx ref = oracle::g_b(b, std::exp(2.0 * pi * b * z)) * f(z);
    CHECK(std::abs(got - ref) < 1e-8);
}

TEST_CASE("g(V) against the Gaussian Fourier transform")
{
    // e^{-x^2} = int sqrt(pi) e^{-pi^2 k^2} e^{2 pi i k x} dk and V e^{2 pi i k x} = e^{2 pi b k} e^{2 pi i k x}
    const ParameterContext ctx = make_context(0.3);
    const double b = ctx.b_star;
    const CoreFunction f = CoreFunction::gaussian(1.0);
    for (double x : {0.0, 0.4}) {
        const cplx ref = oracle::trapezoid(
            [&](double k) {
                return std::sqrt(pi) * std::exp(-pi * pi * k * k) * g_b(ctx, b, std::exp(2.0 * pi * b * k)) *
                       std::exp(2.0 * pi * I * k * x);
            },
            -2.5, 2.5, 1000);
        const cplx got = apply_gb_weyl(ctx, WeylOp{1.0, 0.0, 1.0, b}, 0.0, f, operator_quadrature(), x);
        CHECK(std::abs(got - ref) < 1e-7);
    }
}

TEST_CASE("quantum exponential relations and pentagon")
{
    const ParameterContext ctx = make_context(0.3);
    const CoreFunction f = CoreFunction::gaussian(1.0);
    const QuadratureSpec q = operator_quadrature();
    const std::vector<cplx> s = real_samples(5);
    CHECK(qsum1_residual(ctx, f, q, s) < 1e-6);
    CHECK(qsum2_residual(ctx, f, q, s) < 1e-6);
    CHECK(pentagon_residual(ctx, f, q, s) < 1e-5);
    CHECK(pentagon_residual(ctx, f, q, s, PentagonMode::unit_g) == 0.0);
    CHECK(pentagon_residual(ctx, f, q, s, PentagonMode::drop_middle) > 0.1);
}

TEST_CASE("two-leg operators merge equal maps")
{
    const ParameterContext ctx = make_context(0.3);
    const OspGenerators g = build_osp_generators(ctx);
    PairOp a = pair_tensor(g.E, super_identity());
    PairOp sum = a + a;
    sum.merge();
    CHECK(sum.terms.size() == a.terms.size());
    const SuperWavefunction psi{CoreFunction::gaussian(1.0), CoreFunction::gaussian(1.0, 0.0, 1)};
    const PairState st = tensor_state(psi, psi);
    const PairState l = sum.apply(st), r = a.apply(st);
    for (cplx z : pts) CHECK((l(z, 0.3) - 2.0 * r(z, 0.3)).norm() < 1e-12 * std::max(1.0, r(z, 0.3).norm()));
}
