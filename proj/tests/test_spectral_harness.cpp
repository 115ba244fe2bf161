#include "mdq/qdilog.hpp"
#include "mdq/spectral_harness.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace mdq;

namespace {

bool decreasing(const std::vector<double>& r)
{
    for (std::size_t k = 1; k < r.size(); ++k)
        if (!(r[k] < r[k - 1])) return false;
    return true;
}

}  // namespace

TEST_CASE("oscillator truncation at N = 2")
{
    const TruncatedRep rep = build_truncated_rep(make_context(0.3), 2);
    const double c = 1.0 / (2.0 * std::sqrt(pi));
    MatC x(2, 2);
    x << 0, c, c, 0;
    CHECK((rep.x - x).norm() < 1e-15);
    CHECK(!rep.warnings.empty());
    CHECK_THROWS_AS(build_truncated_rep(make_context(0.3), 1), std::invalid_argument);
}

TEST_CASE("canonical commutator fails only in the last corner")
{
    const TruncatedRep rep = build_truncated_rep(make_context(0.3), 12);
    CHECK(rep.warnings.empty());
    MatC d = rep.x * rep.p - rep.p * rep.x;
    d.diagonal().array() -= I / (2.0 * pi);
    const int N = rep.N;
    CHECK(std::abs(d(N - 1, N - 1) + I * static_cast<double>(N) / (2.0 * pi)) < 1e-12);
    d(N - 1, N - 1) = 0.0;
    CHECK(d.norm() < 1e-12);
}

TEST_CASE("U is positive definite and Weyl-commutes up to truncation")
{
    const TruncatedRep rep = build_truncated_rep(make_context(0.05), 64);
    CHECK(hermitian_eig(rep.U).w.minCoeff() > 0.0);
    CHECK(hermitian_eig(rep.V).w.minCoeff() > 0.0);
    CHECK(std::isfinite(commutator_defect(rep)));
    const TruncatedRep small = build_truncated_rep(make_context(0.05), 12);
    CHECK((small.U * small.Uinv - MatC::Identity(12, 12)).norm() < 1e-8);
}

TEST_CASE("matrix functional calculus for g")
{
    const ParameterContext ctx = make_context(0.3);
    const double bs = ctx.b_star;
    const MatC one = MatC::Identity(1, 1);
    CHECK(std::abs(matrix_gb(ctx, one)(0, 0) - oracle::g_b(bs, 1.0)) < 1e-9);

    MatC neg(1, 1);
    neg << -2.0;
    const ParameterContext c2 = make_context(0.3);
    CHECK(std::abs(matrix_gb(ctx, neg)(0, 0) - g_b_phase(c2, bs, 2.0, 1.0)) < 1e-12);
    CHECK(std::abs(matrix_gb(ctx, neg, Branch::minus)(0, 0) - g_b_phase(c2, bs, 2.0, -1.0)) < 1e-12);

    // [[a, c], [c, a]] has eigenvectors (1, +-1)/sqrt 2 with eigenvalues a +- c
    MatC m(2, 2);
    m << 1.5, 0.5, 0.5, 1.5;
    const cplx g2 = oracle::g_b(bs, 2.0), g1 = oracle::g_b(bs, 1.0);
    MatC ref(2, 2);
    ref << (g2 + g1) / 2.0, (g2 - g1) / 2.0, (g2 - g1) / 2.0, (g2 + g1) / 2.0;
    CHECK((matrix_gb(ctx, m) - ref).norm() < 1e-9);

    const TruncatedRep rep = build_truncated_rep(ctx, 16);
    const MatC gU = matrix_gb(ctx, rep.U);
    CHECK((gU.adjoint() * gU - MatC::Identity(16, 16)).norm() < 1e-9);

    MatC bad(2, 2);
    bad << 1, 1, 0, 1;
    CHECK_THROWS_AS(matrix_gb(ctx, bad), std::invalid_argument);
}

TEST_CASE("scalar shadow of the inverse relation")
{
    const double b = std::sqrt(0.05);
    for (double lam : {0.1, 1.0, 7.0})
        CHECK(std::abs(std::conj(gb_scalar(b, -lam, Branch::plus, 0.0)) * gb_scalar(b, -lam, Branch::minus, 0.0) - 1.0) < 1e-9);
    CHECK(gb_scalar(b, 0.0, Branch::plus, 1e-12) == cplx(1.0));
}

TEST_CASE("kron")
{
    MatC a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 0, 1, 1, 0;
    const MatC k = kron(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s) CHECK(k(2 * i + r, 2 * j + s) == a(i, j) * b(r, s));
}

TEST_CASE("pair-space R at N = 32")
{
    const TruncatedRep rep = build_truncated_rep(make_context(0.05), 32);
    CHECK((rep.E - rep.E.adjoint()).norm() < 1e-10 * rep.E.norm());
    CHECK((rep.F - rep.F.adjoint()).norm() < 1e-10 * rep.F.norm());
    CHECK(hermitian_eig(kron(rep.e, rep.f)).w.minCoeff() > 0.0);

    const PairR R = build_R(rep);
    CHECK(prefactor_unitarity(R) < 1e-10);
    CHECK(nonunitarity(R) > 0.1);
    CHECK(residual_inverse(R, build_R(rep, {0.5, GFactor::tilde})) < 1e-10);

    const BraidingResult std_ = residual_braiding(R);
    const BraidingResult triv = residual_braiding(build_R(rep, {0.5, GFactor::trivial}));
    const BraidingResult mixed = residual_braiding(build_R(rep, {0.5, GFactor::mixed_branch}));
    CHECK(triv.max() > 0.1);
    CHECK(mixed.max() > 0.1);
    CHECK(std_.max() < triv.max());
}

TEST_CASE("braiding and g difference decrease with N")
{
    std::vector<double> e, f, k, gd;
    for (int N : {8, 16, 32}) {
        const TruncatedRep rep = build_truncated_rep(make_context(0.05), N);
        const BraidingResult r = residual_braiding(build_R(rep));
        e.push_back(r.E);
        f.push_back(r.F);
        k.push_back(r.K);
        gd.push_back(gb_difference_residual(rep));
    }
    CHECK(decreasing(e));
    CHECK(decreasing(f));
    CHECK(decreasing(k));
    CHECK(decreasing(gd));
}

TEST_CASE("coproduct of the prefactor on the triple space")
{
    const TruncatedRep rep = build_truncated_rep(make_context(0.05), 8);
    const QuasiTriangularResult q = residual_quasitriangular(rep);
    CHECK(q.coproduct_Q < 1e-10);
    CHECK(std::isfinite(q.yang_baxter));
}

TEST_CASE("memory guards")
{
    const TruncatedRep big = build_truncated_rep(make_context(0.05), 257);
    CHECK_THROWS_AS(build_R(big), MemoryGuardError);
    const TruncatedRep mid = build_truncated_rep(make_context(0.05), 17);
    CHECK_THROWS_AS(TripleHarness{mid}, MemoryGuardError);
}

TEST_CASE("convergence records export sorted by relation and N")
{
    const std::vector<ConvergenceRecord> recs{{"b", 16, 0.1, 2.0}, {"a", 32, 1.0 / 3.0, 5.0}, {"a", 8, 0.5, 1.0}};
    const nlohmann::json j = to_json(recs);
    REQUIRE(j.size() == 3);
    CHECK(j[0]["relation_id"] == "a");
    CHECK(j[0]["N"] == 8);
    CHECK(j[1]["N"] == 32);
    CHECK(j[2]["relation_id"] == "b");
    const std::string csv = to_csv(recs);
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
    CHECK(csv.find("\"a\",8,") < csv.find("\"a\",32,"));
    CHECK(csv.find("\"a\",32,") < csv.find("\"b\",16,"));
}
