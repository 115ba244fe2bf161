#include "mdq/superlin.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

namespace mdq {

int GradedMatrix::parity(double tol) const
{
    bool even = false, odd = false;
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j)
            if (std::abs(m(i, j)) > tol) ((grading[i] + grading[j]) % 2 ? odd : even) = true;
    if (even && odd) return -1;
    return odd ? 1 : 0;
}

std::vector<int> standard_grading(int dim)
{
    std::vector<int> g(dim);
    for (int i = 0; i < dim; ++i) g[i] = std::popcount(static_cast<unsigned>(i)) % 2;
    return g;
}

GradedMatrix graded(const MatC& m)
{
    return {m, standard_grading(static_cast<int>(m.rows()))};
}

GradedMatrix graded_identity(int dim)
{
    return graded(MatC::Identity(dim, dim));
}

CliffordGenerators clifford_generators()
{
    MatC xi(2, 2), eta(2, 2), inv(2, 2);
    xi << 0, 1, 1, 0;
    eta << 0, I, -I, 0;
    inv << -1, 0, 0, 1;
    return {graded(xi), graded(eta), graded(inv)};
}

GradedMatrix super_tensor(const GradedMatrix& a, const GradedMatrix& b)
{
    const int na = a.dim(), nb = b.dim();
    if (static_cast<long>(na) * nb > max_graded_dim)
        throw std::length_error("super_tensor: dimension exceeds 2^12");
    GradedMatrix out;
    out.m = MatC::Zero(na * nb, na * nb);
    out.grading.resize(na * nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) out.grading[i * nb + j] = (a.grading[i] + b.grading[j]) % 2;
    for (int i = 0; i < na; ++i)
        for (int k = 0; k < na; ++k) {
            if (a.m(i, k) == cplx(0.0)) continue;
            for (int j = 0; j < nb; ++j)
                for (int l = 0; l < nb; ++l) {
                    const int sgn = (a.grading[i] * (b.grading[j] + b.grading[l])) % 2 ? -1 : 1;
                    out.m(i * nb + j, k * nb + l) = static_cast<double>(sgn) * a.m(i, k) * b.m(j, l);
                }
        }
    return out;
}

GradedMatrix diagonalizer_P()
{
    MatC p(4, 4);
    p << -1, 0, 1, 0,
          0, 1, 0, -1,
          0, 1, 0, 1,
          1, 0, 1, 0;
    return graded(p / std::sqrt(2.0));
}

GradedMatrix diagonalizer_P_from_generators()
{
    const auto [xi, eta, inv] = clifford_generators();
    const GradedMatrix one = graded_identity(2);
    auto t = [](const GradedMatrix& a, const GradedMatrix& b) { return super_tensor(a, b).m; };
    const MatC first = t(xi, xi) - I * t(eta, xi) + t(one, inv) - t(inv, inv);
    const MatC second = t(one, xi) + t(xi, inv) + I * t(eta, inv) + t(inv, xi);
    return graded((first - second) / (2.0 * std::sqrt(2.0)));
}

GradedMatrix embed(const GradedMatrix& op, int leg, int n)
{
    if (leg < 0 || leg >= n) throw std::out_of_range("embed: leg index out of range");
    const GradedMatrix one = graded_identity(op.dim());
    GradedMatrix out = leg == 0 ? op : one;
    for (int k = 1; k < n; ++k) out = super_tensor(out, k == leg ? op : one);
    return out;
}

IdentityCheck check_equal(const std::string& id, const std::string& anchor, const MatC& lhs, const MatC& rhs,
                          double tol)
{
    IdentityCheck c{id, anchor, 0.0, false, ""};
    if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
        c.residual = INFINITY;
        c.detail = "shape mismatch";
        return c;
    }
    int bi = -1, bj = -1;
    for (int i = 0; i < lhs.rows(); ++i)
        for (int j = 0; j < lhs.cols(); ++j) {
            const double d = std::abs(lhs(i, j) - rhs(i, j));
            if (d > c.residual) c.residual = d;
            if (d > tol && bi < 0) {
                bi = i;
                bj = j;
            }
        }
    c.pass = c.residual <= tol;
    if (bi >= 0) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "first mismatch at (%d,%d): lhs %g%+gi, rhs %g%+gi", bi, bj,
                      lhs(bi, bj).real(), lhs(bi, bj).imag(), rhs(bi, bj).real(), rhs(bi, bj).imag());
        c.detail = buf;
    }
    return c;
}

MatC P13_matrix()
{
    MatC p(8, 8);
    p << -1, 0, 0, 0, 1, 0, 0, 0,
          0, 1, 0, 0, 0, -1, 0, 0,
          0, 0, -1, 0, 0, 0, 1, 0,
          0, 0, 0, 1, 0, 0, 0, -1,
          0, 1, 0, 0, 0, 1, 0, 0,
          1, 0, 0, 0, 1, 0, 0, 0,
          0, 0, 0, 1, 0, 0, 0, 1,
          0, 0, 1, 0, 0, 0, 1, 0;
    return p / std::sqrt(2.0);
}

MatC P23_matrix()
{
    MatC p(8, 8);
    p << -1, 0, 1, 0, 0, 0, 0, 0,
          0, 1, 0, -1, 0, 0, 0, 0,
          0, 1, 0, 1, 0, 0, 0, 0,
          1, 0, 1, 0, 0, 0, 0, 0,
          0, 0, 0, 0, -1, 0, 1, 0,
          0, 0, 0, 0, 0, 1, 0, -1,
          0, 0, 0, 0, 0, 1, 0, 1,
          0, 0, 0, 0, 1, 0, 1, 0;
    return p / std::sqrt(2.0);
}

MatC c_matrix()
{
    MatC c = MatC::Zero(8, 8);
    c(0, 4) = -1;
    c(1, 5) = -1;
    c(2, 6) = 1;
    c(3, 7) = 1;
    c(4, 0) = -1;
    c(5, 1) = -1;
    c(6, 2) = 1;
    c(7, 3) = 1;
    return c;
}

namespace {

MatC diag(std::initializer_list<double> d)
{
    VecC v(static_cast<int>(d.size()));
    int i = 0;
    for (double x : d) v(i++) = x;
    return v.asDiagonal();
}

}  // namespace

std::vector<IdentityCheck> eight_dim_identities()
{
    const MatC P13 = P13_matrix(), P23 = P23_matrix(), c = c_matrix();
    const MatC s1 = diag({-1, -1, -1, -1, 1, 1, 1, 1});
    const MatC s2 = diag({1, 1, 1, 1, -1, -1, -1, -1});
    const MatC s3 = diag({1, 1, -1, -1, 1, 1, -1, -1});
    const MatC P13a = P13.adjoint();
    std::vector<IdentityCheck> out;
    out.push_back(check_equal("P13_unitary", "P_{13}=\\frac{1}{\\sqrt{2}}", P13a * P13, MatC::Identity(8, 8)));
    out.push_back(check_equal("P23_unitary", "P_{23}=\\frac{1}{\\sqrt{2}}", P23.adjoint() * P23, MatC::Identity(8, 8)));
    out.push_back(check_equal("P13*P23=cP23P13*", "P_{13}^*P_{23}=cP_{23}P_{13}^*", P13a * P23, c * P23 * P13a));
    out.push_back(check_equal("diag(-)c=c diag(+)", "diag(-1,-1,-1,-1,1,1,1,1)\\cdot c=c \\cdot diag(1,1,1,1,-1,-1,-1,-1)",
                              s1 * c, c * s2));
    out.push_back(check_equal("diag P23=P23 diag", "diag(1,1,1,1,-1,-1,-1,-1)\\cdot P_{23}=P_{23}\\cdot diag(1,1,1,1,-1,-1,-1,-1)",
                              s2 * P23, P23 * s2));
    out.push_back(check_equal("P13cP23=P23P13", "P_{13} cP_{23}=P_{23}P_{13}", P13 * c * P23, P23 * P13));
    out.push_back(check_equal("P13* diag=diag P13*", "P_{13}^*\\cdot diag(1,1,-1,-1,1,1,-1,-1)=diag(1,1,-1,-1,1,1,-1,-1)\\cdot P_{13}^*",
                              P13a * s3, s3 * P13a));
    out.push_back(check_equal("coproduct_prefactor_signs",
                              "diag(1,1,-1,1,-1,1,1,1)=diag(-1,1,-1,1,1,1,1,1)diag(-1,1,1,1,-1,1,1,1)",
                              diag({1, 1, -1, 1, -1, 1, 1, 1}),
                              diag({-1, 1, -1, 1, 1, 1, 1, 1}) * diag({-1, 1, 1, 1, -1, 1, 1, 1})));

    // The same lemma assembled from leg embeddings of the group-like involution.
    const auto [xi, eta, inv] = clifford_generators();
    const MatC L1 = embed(inv, 0, 3).m, L2 = embed(inv, 1, 3).m, L3 = embed(inv, 2, 3).m;
    const MatC one = MatC::Identity(8, 8);
    const MatC Q13 = 0.5 * (one + L1 + L3 - L1 * L3);
    const MatC Q23 = 0.5 * (one + L2 + L3 - L2 * L3);
    const MatC L12 = L1 * L2;
    const MatC DQ = 0.5 * (one + L12 + L3 - L12 * L3);
    out.push_back(check_equal("Q13Q23=Delta(Q)", "Q_{13}Q_{23}=\\Delta(Q)", Q13 * Q23, DQ));
    return out;
}

MatC prefactor_clifford()
{
    const auto [xi, eta, inv] = clifford_generators();
    const GradedMatrix one = graded_identity(2);
    const GradedMatrix ex = graded(eta.m * xi.m);
    return 0.5 * (MatC::Identity(4, 4) + super_tensor(inv, one).m + super_tensor(one, inv).m + super_tensor(ex, ex).m);
}

std::vector<IdentityCheck> tensor_identities()
{
    const auto [xi, eta, inv] = clifford_generators();
    const GradedMatrix one = graded_identity(2);
    const MatC I2 = MatC::Identity(2, 2), I4 = MatC::Identity(4, 4);
    std::vector<IdentityCheck> out;
    out.push_back(check_equal("xi^2=1", "\\xi^2=1", xi.m * xi.m, I2));
    out.push_back(check_equal("eta^2=1", "\\eta^2=1", eta.m * eta.m, I2));
    out.push_back(check_equal("xi eta+eta xi=0", "plumbing", xi.m * eta.m + eta.m * xi.m, MatC::Zero(2, 2)));
    out.push_back(check_equal("i eta xi=diag(-1,1)", "i\\eta\\xi=\\veca{-1&0\\\\0&1}", I * eta.m * xi.m, inv.m));

    MatC xe(4, 4);
    xe << 0, 0, 0, I,
          0, 0, -I, 0,
          0, -I, 0, 0,
          I, 0, 0, 0;
    const MatC st = super_tensor(xi, eta).m;
    out.push_back(check_equal("xi(x)eta displayed", "\\xi\\otimes\\eta=\\veca{0&0&0&i\\\\...}", st, xe));
    out.push_back(check_equal("(xi(x)eta)^2=-1", "so that $(\\xi\\otimes\\eta)^2=-1$", st * st, -I4));
    out.push_back(check_equal("1(x)1=1", "plumbing", super_tensor(one, one).m, I4));

    const MatC P = diagonalizer_P().m;
    VecC d(4);
    d << -I, -I, I, I;
    out.push_back(check_equal("P*(xi(x)eta)P diagonal", "P^*(\\xi\\otimes\\eta)P=\\veca{-i&0&0&0\\\\...}",
                              P.adjoint() * st * P, MatC(d.asDiagonal())));
    out.push_back(check_equal("P unitary", "P=\\frac{1}{\\sqrt{2}}\\veca{-1&0&1&0\\\\...}", P.adjoint() * P, I4));
    // The generator expansion evaluates to the adjoint of the displayed matrix.
    out.push_back(check_equal("P generator expansion (adjoint)",
                              "P=\\frac{1}{2\\sqrt{2}}((\\xi\\otimes\\xi-i\\eta\\otimes \\xi+1\\otimes i\\eta\\xi-...",
                              diagonalizer_P_from_generators().m, P.adjoint()));

    // Displayed 4x4 rule on a generic pair of 2x2 matrices.
    MatC A(2, 2), B(2, 2);
    A << 1.0, 2.0, 3.0, 5.0;
    B << 7.0, 11.0, 13.0, 17.0;
    const cplx a = A(0, 0), b = A(0, 1), c = A(1, 0), dd = A(1, 1);
    const cplx w = B(0, 0), x = B(0, 1), y = B(1, 0), z = B(1, 1);
    MatC rule(4, 4);
    rule << a * w, a * x, b * w, b * x,
            a * y, a * z, b * y, b * z,
            c * w, -c * x, dd * w, -dd * x,
            -c * y, c * z, -dd * y, dd * z;
    out.push_back(check_equal("4x4 tensor rule", "\\veca{aw&ax&bw&bx\\\\ay&az&by&bz\\\\cw&-cx&dw&-dx\\\\-cy&cz&-dy&dz}",
                              super_tensor(graded(A), graded(B)).m, rule));

    const GradedMatrix gens[3] = {xi, eta, inv};
    double assoc = 0.0;
    for (const auto& p : gens)
        for (const auto& q : gens)
            for (const auto& r : gens)
                assoc = std::max(assoc, (super_tensor(super_tensor(p, q), r).m - super_tensor(p, super_tensor(q, r)).m)
                                            .cwiseAbs().maxCoeff());
    out.push_back({"super_tensor associativity", "plumbing", assoc, assoc <= exact_tol, ""});

    bool parity_ok = true;
    for (const auto& p : gens)
        for (const auto& q : gens) {
            const int pp = p.parity(), pq = q.parity();
            if (graded(p.m * q.m).parity() != (pp + pq) % 2) parity_ok = false;
            if (super_tensor(p, q).parity() != (pp + pq) % 2) parity_ok = false;
        }
    out.push_back({"parity bookkeeping", "plumbing", parity_ok ? 0.0 : 1.0, parity_ok, ""});
    return out;
}

std::vector<IdentityCheck> braiding_lemma_identities()
{
    const auto [xi, eta, inv] = clifford_generators();
    const GradedMatrix one = graded_identity(2);
    const MatC S = 2.0 * prefactor_clifford();
    std::vector<IdentityCheck> out;
    out.push_back(check_equal("(i eta xi(x)xi)S=S(1(x)xi)", "(\\mathcal{K}\\otimes \\mathcal{E})Q=Q(1 \\otimes \\mathcal{E})",
                              super_tensor(inv, xi).m * S, S * super_tensor(one, xi).m));
    out.push_back(check_equal("(xi(x)1)S=S(xi(x)i eta xi)", "(\\mathcal{E}\\otimes 1)Q=Q(\\mathcal{E}\\otimes \\mathcal{K})",
                              super_tensor(xi, one).m * S, S * super_tensor(xi, inv).m));
    out.push_back(check_equal("(i eta xi(x)eta)S=S(1(x)eta)", "plumbing",
                              super_tensor(inv, eta).m * S, S * super_tensor(one, eta).m));
    out.push_back(check_equal("(eta(x)1)S=S(eta(x)i eta xi)", "plumbing",
                              super_tensor(eta, one).m * S, S * super_tensor(eta, inv).m));
    VecC d(4);
    d << -1, 1, 1, 1;
    out.push_back(check_equal("S/2=diag(-1,1,1,1)", "plumbing", prefactor_clifford(), MatC(d.asDiagonal())));
    return out;
}

nlohmann::json to_json(const MatC& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json to_json(const GradedMatrix& g)
{
    return {{"dim", g.dim()}, {"grading", g.grading}, {"entries", to_json(g.m)}};
}

}  // namespace mdq
