#include "mdq/qdilog.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace mdq;

TEST_CASE("context at b^2 = 1/4")
{
    const ParameterContext c = make_context(0.25);
    CHECK(std::abs(c.q - std::polar(1.0, pi / 4.0)) < 1e-15);
    CHECK(std::abs(c.q_star - std::polar(1.0, 3.0 * pi / 4.0)) < 1e-15);
    CHECK(c.q_star == I * c.q);
    CHECK(c.alpha == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(c.zeta_b - std::polar(1.0, 29.0 * pi / 48.0)) < 1e-15);
    CHECK(c.b_star_squared() > 0.5);
    CHECK(c.b_star_squared() < 1.0);
    CHECK(std::abs(std::abs(c.tau_q) - 1.0) < 1e-15);
}

TEST_CASE("context rejects out-of-range parameters")
{
    CHECK_THROWS_AS(make_context(0.5), ParameterDomainError);
    CHECK_THROWS_AS(make_context(0.0), ParameterDomainError);
    CHECK_THROWS_AS(make_context(0.3, -1.0), ParameterDomainError);
}

TEST_CASE("G_b in the strip matches the trapezoid oracle")
{
    for (double b2 : {0.3, 0.41}) {
        const double b = std::sqrt(b2), Q = b + 1.0 / b;
        for (cplx z : {cplx(0.3 * Q, 0.4), cplx(0.5 * Q, -1.1), cplx(0.7 * Q, 2.0), cplx(0.45 * Q, 0.0)}) {
            const cplx ref = oracle::G_b(b, z);
            CHECK(std::abs(G_b_eval(b, z).value - ref) / std::abs(ref) < 1e-10);
        }
    }
}

TEST_CASE("G_b outside the strip through the functional equations")
{
    const double b = std::sqrt(0.3), Q = b + 1.0 / b;
    const cplx z(0.4 * Q, 0.3);
    const cplx ref = oracle::G_b(b, z);
    // two b-steps and one 1/b-step away from the oracle point
    const cplx w = z + 2.0 * b + 1.0 / b;
    cplx expect = ref;
    expect *= 1.0 - std::exp(2.0 * pi * I * b * z);
    expect *= 1.0 - std::exp(2.0 * pi * I * b * (z + b));
    expect *= 1.0 - std::exp(2.0 * pi * I * (z + 2.0 * b) / b);
    CHECK(std::abs(G_b_eval(b, w).value - expect) / std::abs(expect) < 1e-9);
}

TEST_CASE("G_b special values")
{
    const ParameterContext c = make_context(0.3);
    const double b = c.b, Q = c.Q_sum;
    CHECK(std::abs(G_b(c, b, Q)) < 1e-8);
    CHECK(std::abs(std::abs(G_b(c, b, Q / 2.0 + 0.7 * I)) - 1.0) < 1e-8);
    const cplx h = G_b(c, b, Q / 2.0);
    CHECK(std::abs(h * h - std::exp(-pi * I * Q * Q / 4.0)) < 1e-8);
}

TEST_CASE("G_b under two quadrature settings")
{
    const double b = std::sqrt(0.3);
    QuadratureSpec a, alt;
    alt.r = 0.3 * std::min(b, 1.0 / b);
    alt.tol = 1e-12;
    const cplx z(0.3, 0.2);
    CHECK(std::abs(G_b_eval(b, z, a).value - G_b_eval(b, z, alt).value) < 1e-9);
}

TEST_CASE("G_b poles and domain")
{
    const double b = std::sqrt(0.3);
    try {
        G_b_eval(b, cplx(-2.0 * b - 1.0 / b, 0.0));
        FAIL("expected a pole error");
    } catch (const PoleProximityError& e) {
        CHECK(e.n == 2);
        CHECK(e.m == 1);
    }
    CHECK_THROWS_AS(G_b_eval(b, cplx(0.5, 60.0)), DomainError);
}

TEST_CASE("g_b against the oracle and its properties")
{
    const ParameterContext c = make_context(0.25);
    const double b = c.b;
    for (double x : {0.1, 1.0, 10.0}) {
        const cplx g = g_b(c, b, x);
        CHECK(std::abs(std::abs(g) - 1.0) < 1e-10);
        CHECK(std::abs(g - oracle::g_b(b, x)) < 1e-9);
    }
    CHECK(std::abs(g_b(c, b, 2.0) - g_b(c, 1.0 / b, std::pow(2.0, 1.0 / (b * b)))) < 1e-9);
    CHECK(std::abs(g_b(c, b, 1.0) - std::conj(c.zeta_b) / G_b(c, b, c.Q_sum / 2.0)) < 1e-14);
    CHECK_THROWS_AS(g_b(c, b, 0.0), DomainError);
}

TEST_CASE("phase continuation")
{
    const ParameterContext c = make_context(0.3);
    const double b = c.b;
    CHECK(g_b_phase(c, b, 3.0, 0.0) == g_b(c, b, 3.0));
    for (double t : {0.5, 1.0}) {
        const double slope = std::log10(std::abs(g_b_phase(c, b, 1e4, t)) / std::abs(g_b_phase(c, b, 1e3, t)));
        CHECK(std::abs(slope / (-t / (2.0 * b * b)) - 1.0) < 0.02);
    }
    // reflection and conjugation give conj(g(e^{pi i} x)) g(e^{-pi i} x) = 1
    for (double x : {0.01, 1.0, 50.0})
        CHECK(std::abs(std::conj(g_b_phase(c, b, x, 1.0)) * g_b_phase(c, b, x, -1.0) - 1.0) < 1e-9);
    CHECK_THROWS_AS(g_b_phase(c, b, 1.0, 1.5), DomainError);
}

TEST_CASE("Fourier route")
{
    const ParameterContext c = make_context(0.3);
    const double b = c.b;
    CHECK(std::abs(g_b_fourier(c, b, 1.0, false) - oracle::g_b(b, 1.0)) < 1e-8);
    for (double x : {0.5, 2.0}) CHECK(std::abs(std::abs(g_b_fourier(c, b, x, true)) - 1.0) < 1e-8);
    CHECK(std::abs(std::abs(g_b_fourier(c, b, 1e-4, false)) - 1.0) < 0.01);
    CHECK(std::abs(g_b_fourier(c, b, 1.0, false, {}, 1.0) - g_b_phase(c, b, 1.0, 1.0)) < 1e-8);
}
