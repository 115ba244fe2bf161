#include "mdq/superlin.hpp"

#include <doctest.h>

#include <random>

using namespace mdq;

namespace {

// The displayed 4x4 layout for [[a, b], [c, d]] (x) [[w, x], [y, z]].
MatC displayed_tensor(const MatC& A, const MatC& B)
{
    const cplx a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
    const cplx w = B(0, 0), x = B(0, 1), y = B(1, 0), z = B(1, 1);
    MatC m(4, 4);
    m << a * w, a * x, b * w, b * x,
         a * y, a * z, b * y, b * z,
         c * w, -c * x, d * w, -d * x,
         -c * y, c * z, -d * y, d * z;
    return m;
}

MatC random2(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    MatC m(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

}  // namespace

TEST_CASE("Clifford generators")
{
    const CliffordGenerators g = clifford_generators();
    const MatC one = MatC::Identity(2, 2);
    CHECK((g.xi.m * g.xi.m - one).norm() == 0.0);
    CHECK((g.eta.m * g.eta.m - one).norm() == 0.0);
    CHECK((g.xi.m * g.eta.m + g.eta.m * g.xi.m).norm() == 0.0);
    MatC inv(2, 2);
    inv << -1, 0, 0, 1;
    CHECK((g.invol.m - inv).norm() == 0.0);
    CHECK((I * g.eta.m * g.xi.m - inv).norm() == 0.0);
    CHECK(g.xi.parity() == 1);
    CHECK(g.eta.parity() == 1);
    CHECK(g.invol.parity() == 0);
}

TEST_CASE("super_tensor reproduces the displayed 4x4 rule")
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const MatC A = random2(rng), B = random2(rng);
        CHECK((super_tensor(graded(A), graded(B)).m - displayed_tensor(A, B)).norm() == 0.0);
    }
}

TEST_CASE("xi (x) eta and its diagonalizer")
{
    const CliffordGenerators g = clifford_generators();
    const MatC xe = super_tensor(g.xi, g.eta).m;
    MatC shown(4, 4);
    shown << 0, 0, 0, I, 0, 0, -I, 0, 0, -I, 0, 0, I, 0, 0, 0;
    CHECK((xe - shown).norm() == 0.0);
    CHECK((xe * xe + MatC::Identity(4, 4)).norm() == 0.0);
    CHECK((super_tensor(graded_identity(2), graded_identity(2)).m - MatC::Identity(4, 4)).norm() == 0.0);

    const MatC P = diagonalizer_P().m;
    MatC P_shown(4, 4);
    P_shown << -1, 0, 1, 0, 0, 1, 0, -1, 0, 1, 0, 1, 1, 0, 1, 0;
    P_shown /= std::sqrt(2.0);
    CHECK((P - P_shown).norm() < 1e-15);
    CHECK((P.adjoint() * P - MatC::Identity(4, 4)).norm() < 1e-14);
    MatC D = MatC::Zero(4, 4);
    D.diagonal() << -I, -I, I, I;
    CHECK((P.adjoint() * xe * P - D).norm() < 1e-14);
}

TEST_CASE("tensor, eight-dimensional and braiding-lemma identities")
{
    for (const auto& group : {tensor_identities(), eight_dim_identities(), braiding_lemma_identities()})
        for (const IdentityCheck& c : group) {
            INFO(c.id << " " << c.detail);
            CHECK(c.pass);
            CHECK(c.residual < 1e-14);
            CHECK(!c.anchor.empty());
        }
}

TEST_CASE("prefactor Clifford part")
{
    MatC d = MatC::Zero(4, 4);
    d.diagonal() << -1, 1, 1, 1;
    CHECK((prefactor_clifford() - d).norm() == 0.0);
}

TEST_CASE("embeddings and parity bookkeeping")
{
    const CliffordGenerators g = clifford_generators();
    const GradedMatrix e0 = embed(g.xi, 0, 2);
    CHECK((e0.m - super_tensor(g.xi, graded_identity(2)).m).norm() == 0.0);
    const GradedMatrix e1 = embed(g.eta, 1, 3);
    CHECK(e1.dim() == 8);
    CHECK(e1.parity() == 1);
    CHECK(graded(e0.m * embed(g.xi, 1, 2).m).parity() == 0);
    CHECK_THROWS_AS(embed(g.xi, 3, 3), std::out_of_range);
    CHECK_THROWS_AS(super_tensor(graded_identity(1 << 7), graded_identity(1 << 6)), std::length_error);
}

TEST_CASE("check_equal reports the first mismatch")
{
    MatC a = MatC::Identity(2, 2), b = a;
    b(1, 0) = 0.5;
    const IdentityCheck c = check_equal("x", "plumbing", a, b);
    CHECK_FALSE(c.pass);
    CHECK(c.residual == doctest::Approx(0.5));
    CHECK(!c.detail.empty());
}

TEST_CASE("JSON dump as [re, im] pairs")
{
    const nlohmann::json j = to_json(clifford_generators().eta);
    CHECK(j.dump().find("[0.0,1.0]") != std::string::npos);
}
