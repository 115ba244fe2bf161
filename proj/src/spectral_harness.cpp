#include "mdq/spectral_harness.hpp"

#include "mdq/qdilog.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace mdq {

namespace {

using Mat8 = Eigen::Matrix<cplx, 8, 8>;

MatC symmetrize(const MatC& m)
{
    return 0.5 * (m + m.adjoint());
}

double low_norm2(const MatC& m, int M)
{
    return m.topLeftCorner(M, M).squaredNorm();
}

// Lowest M levels of a triple-space component.
double low_norm2(const Eigen::VectorXcd& v, int N, int M)
{
    double s = 0.0;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) s += std::norm(v((i * N + j) * N + k));
    return s;
}

PairVec zero_pair(int N)
{
    PairVec v;
    for (MatC& m : v) m = MatC::Zero(N, N);
    return v;
}

PairVec clifford_mix(const Eigen::Matrix4cd& C, const PairVec& v)
{
    PairVec out = zero_pair(static_cast<int>(v[0].rows()));
    for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
            if (C(c, d) != 0.0) out[c] += C(c, d) * v[d];
    return out;
}

TripleVec clifford_mix(const Mat8& C, const TripleVec& v)
{
    TripleVec out;
    for (int c = 0; c < 8; ++c) {
        out[c] = Eigen::VectorXcd::Zero(v[0].size());
        for (int d = 0; d < 8; ++d)
            if (std::abs(C(c, d)) > 0.0) out[c] += C(c, d) * v[d];
    }
    return out;
}

// A acting on one leg of a vector laid out as (i N + j) N + k.
void apply_leg(Eigen::VectorXcd& v, const MatC& A, int leg, int N)
{
    const int N2 = N * N;
    if (leg == 2) {
        Eigen::Map<MatC> m(v.data(), N, N2);
        m = (A * m).eval();
    } else if (leg == 0) {
        Eigen::Map<MatC> m(v.data(), N2, N);
        m = (m * A.transpose()).eval();
    } else {
        for (int i = 0; i < N; ++i) {
            Eigen::Map<MatC> s(v.data() + static_cast<std::ptrdiff_t>(i) * N2, N, N);
            s = (s * A.transpose()).eval();
        }
    }
}

int leg_index(int i, int j, int k, int leg)
{
    return leg == 0 ? i : (leg == 1 ? j : k);
}

Mat8 to8(const MatC& m)
{
    return Mat8(m);
}

MatC emb(const GradedMatrix& op, int leg, int n)
{
    return embed(op, leg, n).m;
}

// Coefficients of a 4x4 Clifford matrix in the products embed(b_i, 0) embed(b_j, 1).
std::array<std::array<cplx, 4>, 4> leg_decomposition(const Eigen::Matrix4cd& C, const std::array<GradedMatrix, 4>& basis)
{
    Eigen::Matrix<cplx, 16, 16> A;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const MatC m = emb(basis[i], 0, 2) * emb(basis[j], 1, 2);
            A.col(4 * i + j) = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(m.data());
        }
    const Eigen::Matrix<cplx, 16, 1> rhs = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(C.data());
    const Eigen::Matrix<cplx, 16, 1> x = A.fullPivLu().solve(rhs);
    if ((A * x - rhs).norm() > 1e-12) throw EigensolverError("Clifford leg decomposition failed");
    std::array<std::array<cplx, 4>, 4> out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i][j] = x(4 * i + j);
    return out;
}

Mat8 lift_pair(const Eigen::Matrix4cd& C, int a, int b)
{
    const CliffordGenerators cl = clifford_generators();
    const std::array<GradedMatrix, 4> basis = {graded_identity(2), cl.invol, cl.xi, cl.eta};
    const auto co = leg_decomposition(C, basis);
    Mat8 out = Mat8::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (co[i][j] != 0.0) out += co[i][j] * to8(emb(basis[i], a, 3) * emb(basis[j], b, 3));
    return out;
}

Eigen::Matrix4cd clifford_prefactor4()
{
    return Eigen::Matrix4cd(prefactor_clifford());
}

template <class F>
double pair_block_residual(int N, int M, F&& pair)
{
    double num = 0.0, den = 0.0;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                PairVec v = zero_pair(N);
                v[c](i, j) = 1.0;
                const auto [l, r] = pair(v);
                for (int d = 0; d < 4; ++d) {
                    num += low_norm2(l[d] - r[d], M);
                    den += low_norm2(r[d], M);
                }
            }
    return std::sqrt(num / den);
}

template <class F>
double triple_block_residual(int N, int M, F&& triple)
{
    double num = 0.0, den = 0.0;
    const int n3 = N * N * N;
    for (int c = 0; c < 8; ++c)
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int k = 0; k < M; ++k) {
                    TripleVec v;
                    for (auto& x : v) x = Eigen::VectorXcd::Zero(n3);
                    v[c]((i * N + j) * N + k) = 1.0;
                    const auto [l, r] = triple(v);
                    for (int d = 0; d < 8; ++d) {
                        num += low_norm2(l[d] - r[d], N, M);
                        den += low_norm2(r[d], N, M);
                    }
                }
    return std::sqrt(num / den);
}

double pair_norm(const PairVec& v)
{
    double s = 0.0;
    for (const MatC& m : v) s += m.squaredNorm();
    return std::sqrt(s);
}

PairVec random_pair(int N, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    PairVec v;
    for (MatC& m : v) {
        m.resize(N, N);
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) m(i, j) = cplx(nd(rng), nd(rng));
    }
    return v;
}

template <class F>
double power_norm(int N, int iters, F&& op)
{
    std::mt19937_64 rng(20240611);
    PairVec v = random_pair(N, rng);
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
        const double n = pair_norm(v);
        if (n == 0.0) return 0.0;
        for (MatC& m : v) m /= n;
        v = op(v);
        lam = pair_norm(v);
    }
    return lam;
}

}  // namespace

Spectral hermitian_eig(const MatC& m)
{
    Eigen::SelfAdjointEigenSolver<MatC> es(m);
    if (es.info() != Eigen::Success) throw EigensolverError("Hermitian eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

MatC from_spectral(const Spectral& s, const std::function<cplx(double)>& fn)
{
    Eigen::VectorXcd d(s.w.size());
    for (Eigen::Index i = 0; i < s.w.size(); ++i) d(i) = fn(s.w(i));
    return s.V * d.asDiagonal() * s.V.adjoint();
}

MatC kron(const MatC& a, const MatC& b)
{
    MatC out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

TruncatedRep build_truncated_rep(const ParameterContext& ctx, int N)
{
    if (N < 2) throw std::invalid_argument("truncation size must be at least 2");
    TruncatedRep r;
    r.N = N;
    r.ctx = ctx;
    r.b = ctx.b_star;
    r.Z = ctx.Z;
    if (N < 8) r.warnings.push_back("N < 8: truncation is ill-conditioned");

    MatC a = MatC::Zero(N, N);
    for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const double s = 2.0 * std::sqrt(pi);
    r.x = (a + a.adjoint()) / s;
    r.p = (a - a.adjoint()) / (I * s);

    const double tb = 2.0 * pi * r.b;
    r.sx = hermitian_eig(r.x);
    r.sp = hermitian_eig(r.p);
    r.logK = tb * (r.x + r.p);
    r.slogK = hermitian_eig(r.logK);
    auto ex = [](double c) { return [c](double l) { return cplx(std::exp(c * l)); }; };
    r.U = from_spectral(r.sx, ex(tb));
    r.Uinv = from_spectral(r.sx, ex(-tb));
    r.V = from_spectral(r.sp, ex(tb));
    r.Vinv = from_spectral(r.sp, ex(-tb));
    r.K = from_spectral(r.slogK, ex(1.0));
    r.Kinv = from_spectral(r.slogK, ex(-1.0));

    r.e = symmetrize(r.V + r.Z * r.Uinv);
    r.f = symmetrize(r.U + r.Vinv / r.Z);
    const double sn = 2.0 * std::sin(pi * r.b * r.b);
    r.E = r.e / sn;
    r.F = r.f / sn;
    r.se = hermitian_eig(r.e);
    r.sf = hermitian_eig(r.f);
    return r;
}

double commutator_defect(const TruncatedRep& rep)
{
    const cplx q2 = rep.ctx.q_star * rep.ctx.q_star;
    const MatC uv = rep.U * rep.V;
    return (uv - q2 * rep.V * rep.U).norm() / uv.norm();
}

SuperRep build_super_rep(const TruncatedRep& rep)
{
    const CliffordGenerators cl = clifford_generators();
    const cplx q = rep.ctx.q;
    SuperRep s;
    s.rep = &rep;
    s.E = rep.ctx.alpha * kron(cl.xi.m, rep.E);
    s.F = kron(cl.eta.m, rep.F);
    s.K = kron(cl.invol.m, rep.K);
    s.Kinv = kron(cl.invol.m, rep.Kinv);
    s.ehat = -I * (q - 1.0 / q) * s.E;
    s.fhat = (q + 1.0 / q) * s.F;
    return s;
}

cplx gb_scalar(double b, double lambda, Branch branch, double eps)
{
    static const ParameterContext unused = make_context(0.25);
    if (lambda > eps) return g_b_phase(unused, b, lambda, 0.0);
    if (lambda < -eps) return g_b_phase(unused, b, -lambda, static_cast<double>(static_cast<int>(branch)));
    return 1.0;
}

MatC matrix_gb(const ParameterContext& ctx, const MatC& M, Branch branch)
{
    if ((M - M.adjoint()).norm() > 1e-10 * std::max(1.0, M.norm()))
        throw std::invalid_argument("matrix_gb needs a Hermitian argument");
    const Spectral s = hermitian_eig(symmetrize(M));
    const double eps = zero_cutoff * s.w.cwiseAbs().maxCoeff();
    return from_spectral(s, [&](double l) { return gb_scalar(ctx.b_star, l, branch, eps); });
}

PairR::PairR(const TruncatedRep& rep, RMatrixOptions opt) : rep_(&rep), opt_(opt)
{
    const int N = rep.N;
    const double b = rep.b;
    Gp_.resize(N, N);
    Gm_.resize(N, N);
    Gmm_.resize(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double lam = rep.se.w(i) * rep.sf.w(j);
            Gp_(i, j) = gb_scalar(b, lam, Branch::plus, 0.0);
            Gm_(i, j) = gb_scalar(b, -lam, Branch::plus, 0.0);
            Gmm_(i, j) = gb_scalar(b, -lam, Branch::minus, 0.0);
        }
    ones_ = MatC::Ones(N, N);
    Qd_.resize(N, N);
    const VecD& lk = rep.slogK.w;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) Qd_(i, j) = std::exp(opt.kappa * lk(i) * lk(j) / (I * pi * b * b));
    switch (opt.g) {
    case GFactor::standard: blocks_ = {&Gm_, &Gm_, &Gp_, &Gp_}; break;
    case GFactor::trivial: blocks_ = {&ones_, &ones_, &ones_, &ones_}; break;
    case GFactor::mixed_branch: blocks_ = {&Gm_, &Gmm_, &Gp_, &Gp_}; break;
    case GFactor::tilde: blocks_ = {&Gmm_, &Gmm_, &Gp_, &Gp_}; break;
    }
    P_ = Eigen::Matrix4cd(diagonalizer_P().m);
}

MatC PairR::apply_g(const MatC& v, const MatC& G) const
{
    const MatC& We = rep_->se.V;
    const MatC& Wf = rep_->sf.V;
    MatC y = We.adjoint() * v * Wf.conjugate();
    y = y.cwiseProduct(G);
    return We * y * Wf.transpose();
}

MatC PairR::apply_q(const MatC& v) const
{
    const MatC& Wk = rep_->slogK.V;
    MatC y = Wk.adjoint() * v * Wk.conjugate();
    y = y.cwiseProduct(Qd_);
    return Wk * y * Wk.transpose();
}

PairVec PairR::apply(const PairVec& v) const
{
    PairVec w = clifford_mix(P_.adjoint(), v);
    for (int c = 0; c < 4; ++c) w[c] = apply_g(w[c], *blocks_[c]);
    return apply_prefactor(clifford_mix(P_, w));
}

PairVec PairR::apply_adjoint(const PairVec& v) const
{
    PairVec w = clifford_mix(P_.adjoint(), apply_prefactor_adjoint(v));
    for (int c = 0; c < 4; ++c) w[c] = apply_g(w[c], blocks_[c]->conjugate());
    return clifford_mix(P_, w);
}

PairVec PairR::apply_prefactor(const PairVec& v) const
{
    PairVec w = clifford_mix(clifford_prefactor4(), v);
    for (MatC& m : w) m = apply_q(m);
    return w;
}

PairVec PairR::apply_prefactor_adjoint(const PairVec& v) const
{
    const MatC& Wk = rep_->slogK.V;
    PairVec w = v;
    for (MatC& m : w) {
        MatC y = Wk.adjoint() * m * Wk.conjugate();
        y = y.cwiseProduct(Qd_.conjugate());
        m = Wk * y * Wk.transpose();
    }
    return clifford_mix(clifford_prefactor4().adjoint(), w);
}

PairR build_R(const TruncatedRep& rep, RMatrixOptions opt)
{
    if (rep.N > 256) throw MemoryGuardError("pair space beyond the supported truncation");
    return PairR(rep, opt);
}

PairVec apply(const PairOperator& op, const PairVec& v)
{
    PairVec out = zero_pair(static_cast<int>(v[0].rows()));
    for (const PairTerm& t : op)
        for (int c = 0; c < 4; ++c)
            for (int d = 0; d < 4; ++d)
                if (t.cliff(c, d) != 0.0) out[c] += t.cliff(c, d) * (t.A * v[d] * t.B.transpose());
    return out;
}

PairCoproducts pair_coproducts(const TruncatedRep& rep)
{
    const CliffordGenerators cl = clifford_generators();
    const GradedMatrix one = graded_identity(2);
    auto st = [](const GradedMatrix& a, const GradedMatrix& b) { return Eigen::Matrix4cd(super_tensor(a, b).m); };
    const double al = rep.ctx.alpha;
    const MatC Id = MatC::Identity(rep.N, rep.N);
    PairCoproducts c;
    c.dE = {{al * st(cl.xi, cl.invol), rep.E, rep.K}, {al * st(one, cl.xi), Id, rep.E}};
    c.opE = {{al * st(cl.invol, cl.xi), rep.K, rep.E}, {al * st(cl.xi, one), rep.E, Id}};
    c.dF = {{st(cl.invol, cl.eta), rep.Kinv, rep.F}, {st(cl.eta, one), rep.F, Id}};
    c.opF = {{st(cl.eta, cl.invol), rep.F, rep.Kinv}, {st(one, cl.eta), Id, rep.F}};
    c.dK = {{st(cl.invol, cl.invol), rep.K, rep.K}};
    c.opK = c.dK;
    return c;
}

BraidingResult residual_braiding(const PairR& R, int M)
{
    const TruncatedRep& rep = R.rep();
    const int N = rep.N;
    const PairCoproducts c = pair_coproducts(rep);
    auto braid = [&](const PairOperator& d, const PairOperator& op) {
        return pair_block_residual(N, M, [&](const PairVec& v) {
            return std::pair{mdq::apply(op, R.apply(v)), R.apply(mdq::apply(d, v))};
        });
    };
    BraidingResult out;
    out.E = braid(c.dE, c.opE);
    out.F = braid(c.dF, c.opF);
    out.K = braid(c.dK, c.opK);

    // (1 (x) E + s E (x) K^{-1}) g(s e (x) f) = g(s e (x) f) (1 (x) E + s E (x) K)
    const MatC Id = MatC::Identity(N, N);
    auto reduction = [&](double s, const MatC& G) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                MatC v = MatC::Zero(N, N);
                v(i, j) = 1.0;
                const MatC gv = R.apply_g(v, G);
                const MatC l = gv * rep.E.transpose() + s * rep.E * gv * rep.Kinv.transpose();
                const MatC w = v * rep.E.transpose() + s * rep.E * v * rep.K.transpose();
                const MatC r = R.apply_g(w, G);
                num += low_norm2(l - r, M);
                den += low_norm2(r, M);
            }
        return std::sqrt(num / den);
    };
    out.plus_reduction = reduction(1.0, R.g_plus());
    out.minus_reduction = reduction(-1.0, R.g_phase_plus());
    return out;
}

double residual_inverse(const PairR& R, const PairR& Rt, int M)
{
    return pair_block_residual(R.rep().N, M, [&](const PairVec& v) { return std::pair{R.apply_adjoint(Rt.apply(v)), v}; });
}

double residual_inverse_full(const PairR& R, const PairR& Rt, int probes)
{
    const int N = R.rep().N;
    std::mt19937_64 rng(7331);
    double acc = 0.0;
    for (int k = 0; k < probes; ++k) {
        const PairVec z = random_pair(N, rng);
        const PairVec y = R.apply_adjoint(Rt.apply(z));
        double s = 0.0;
        for (int c = 0; c < 4; ++c) s += (y[c] - z[c]).squaredNorm();
        acc += s;
    }
    return std::sqrt(acc / (probes * 4.0 * N * N));
}

double nonunitarity(const PairR& R, int iters)
{
    return power_norm(R.rep().N, iters, [&](const PairVec& v) {
        PairVec y = R.apply_adjoint(R.apply(v));
        for (int c = 0; c < 4; ++c) y[c] -= v[c];
        return y;
    });
}

double prefactor_unitarity(const PairR& R, int iters)
{
    return power_norm(R.rep().N, iters, [&](const PairVec& v) {
        PairVec y = R.apply_prefactor_adjoint(R.apply_prefactor(v));
        for (int c = 0; c < 4; ++c) y[c] -= v[c];
        return y;
    });
}

double norm_R(const PairR& R, int iters)
{
    return std::sqrt(power_norm(R.rep().N, iters, [&](const PairVec& v) { return R.apply_adjoint(R.apply(v)); }));
}

double gb_difference_residual(const TruncatedRep& rep, int M)
{
    const double b = rep.b;
    const double tb = 2.0 * pi * b;
    const MatC gU = from_spectral(rep.sx, [&](double l) { return gb_scalar(b, std::exp(tb * l), Branch::plus, 0.0); });
    const MatC gV = from_spectral(rep.sp, [&](double l) { return gb_scalar(b, -std::exp(tb * l), Branch::plus, 0.0); });
    const MatC gUV = matrix_gb(rep.ctx, symmetrize(rep.U - rep.V), Branch::plus);
    const MatC lhs = gU * gV;
    return (lhs - gUV).topLeftCorner(M, M).norm() / gUV.topLeftCorner(M, M).norm();
}

TripleHarness::TripleHarness(const TruncatedRep& rep, double kappa)
    : rep_(&rep), N_(rep.N), kappa_(kappa), R_(rep, RMatrixOptions{kappa, GFactor::standard})
{
    if (N_ > max_triple_N) throw MemoryGuardError("triple space limited to N <= 16");
    const Eigen::Matrix4cd P(diagonalizer_P().m);
    const Eigen::Matrix4cd S = clifford_prefactor4();
    Eigen::Matrix4cd lo = Eigen::Matrix4cd::Zero(), hi = Eigen::Matrix4cd::Zero();
    lo(0, 0) = lo(1, 1) = 1.0;
    hi(2, 2) = hi(3, 3) = 1.0;
    const Eigen::Matrix4cd C[2] = {S * P * lo * P.adjoint(), S * P * hi * P.adjoint()};
    const int legs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int p = 0; p < 3; ++p) {
        for (int blk = 0; blk < 2; ++blk) cliffR_[p][blk] = lift_pair(C[blk], legs[p][0], legs[p][1]);
        cliffQ_[p] = lift_pair(S, legs[p][0], legs[p][1]);
    }
    build_twin(Twin::delta_id);
    build_twin(Twin::id_delta);
}

void TripleHarness::build_twin(Twin t)
{
    const CliffordGenerators cl = clifford_generators();
    const TruncatedRep& r = *rep_;
    const int N = N_;
    TwinData& d = twins_[t == Twin::delta_id ? 0 : 1];
    const MatC Id = MatC::Identity(N, N);
    MatC CA, CB, L1, L2;
    MatC A0, B0;  // N^2 x N^2 factors multiplying the spectator spectrum
    const MatC I8 = MatC::Identity(8, 8);
    CA = I * emb(cl.xi, 0, 3) * emb(cl.invol, 1, 3) * emb(cl.eta, 2, 3);
    if (t == Twin::delta_id) {
        CB = I * emb(cl.xi, 1, 3) * emb(cl.eta, 2, 3);
        L1 = emb(cl.invol, 0, 3) * emb(cl.invol, 1, 3);
        L2 = emb(cl.invol, 2, 3);
        A0 = kron(r.e, r.K);
        B0 = kron(Id, r.e);
        d.pairs[0][0] = 0, d.pairs[0][1] = 2, d.pairs[1][0] = 1, d.pairs[1][1] = 2;
    } else {
        CB = I * emb(cl.xi, 0, 3) * emb(cl.eta, 1, 3);
        L1 = emb(cl.invol, 0, 3);
        L2 = emb(cl.invol, 1, 3) * emb(cl.invol, 2, 3);
        A0 = kron(r.Kinv, r.f);
        B0 = kron(r.f, Id);
        d.pairs[0][0] = 0, d.pairs[0][1] = 1, d.pairs[1][0] = 0, d.pairs[1][1] = 2;
    }
    d.S = to8(0.5 * (I8 + L1 + L2 - L1 * L2));

    const Spectral js = hermitian_eig(symmetrize(1.3 * CA + 2.9 * CB));
    d.W = to8(js.V);
    const Mat8 dA = d.W.adjoint() * to8(CA) * d.W, dB = d.W.adjoint() * to8(CB) * d.W;
    const double off = (dA - Mat8(dA.diagonal().asDiagonal())).norm() + (dB - Mat8(dB.diagonal().asDiagonal())).norm();
    if (off > 1e-12) throw EigensolverError("Clifford parts of the coproduct are not jointly diagonal");
    for (int k = 0; k < 8; ++k) {
        const int sA = dA(k, k).real() > 0 ? 1 : -1, sB = dB(k, k).real() > 0 ? 1 : -1;
        d.key[k] = (sA < 0 ? 2 : 0) + (sB < 0 ? 1 : 0);
    }

    const VecD& spect = t == Twin::delta_id ? r.sf.w : r.se.w;
    for (int key = 0; key < 4; ++key) {
        const double sA = key & 2 ? -1.0 : 1.0, sB = key & 1 ? -1.0 : 1.0;
        const Spectral cs = hermitian_eig(symmetrize(sA * A0 + sB * B0));
        d.Vc[key] = cs.V;
        MatC G(N * N, N);
        double mx = 0.0;
        for (int a = 0; a < N * N; ++a)
            for (int k = 0; k < N; ++k) mx = std::max(mx, std::abs(cs.w(a) * spect(k)));
        const double eps = zero_cutoff * mx;
        for (int a = 0; a < N * N; ++a)
            for (int k = 0; k < N; ++k) G(a, k) = gb_scalar(r.b, cs.w(a) * spect(k), Branch::plus, eps);
        d.G[key] = G;
    }
}

Eigen::VectorXcd TripleHarness::boson_R(const Eigen::VectorXcd& v, int a, int b, const MatC& G) const
{
    const int N = N_;
    Eigen::VectorXcd w = v;
    apply_leg(w, rep_->se.V.adjoint(), a, N);
    apply_leg(w, rep_->sf.V.adjoint(), b, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) w((i * N + j) * N + k) *= G(leg_index(i, j, k, a), leg_index(i, j, k, b));
    apply_leg(w, rep_->se.V, a, N);
    apply_leg(w, rep_->sf.V, b, N);
    return boson_phase(w, {{a, b}});
}

Eigen::VectorXcd TripleHarness::boson_phase(const Eigen::VectorXcd& v, const std::vector<std::pair<int, int>>& pairs) const
{
    const int N = N_;
    const double b = rep_->b;
    const VecD& lk = rep_->slogK.w;
    Eigen::VectorXcd w = v;
    for (int leg = 0; leg < 3; ++leg) apply_leg(w, rep_->slogK.V.adjoint(), leg, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                double ph = 0.0;
                for (const auto& [x, y] : pairs) ph += lk(leg_index(i, j, k, x)) * lk(leg_index(i, j, k, y));
                w((i * N + j) * N + k) *= std::exp(kappa_ * ph / (I * pi * b * b));
            }
    for (int leg = 0; leg < 3; ++leg) apply_leg(w, rep_->slogK.V, leg, N);
    return w;
}

TripleVec TripleHarness::apply_R(const TripleVec& v, int a, int b) const
{
    const int p = (a == 0 && b == 1) ? 0 : (a == 0 && b == 2) ? 1 : 2;
    TripleVec out;
    for (auto& x : out) x = Eigen::VectorXcd::Zero(v[0].size());
    for (int blk = 0; blk < 2; ++blk) {
        const MatC& G = R_.block(blk == 0 ? 0 : 2);
        const TripleVec u = clifford_mix(cliffR_[p][blk], v);
        for (int c = 0; c < 8; ++c)
            if (u[c].squaredNorm() > 0.0) out[c] += boson_R(u[c], a, b, G);
    }
    return out;
}

TripleVec TripleHarness::apply_Q(const TripleVec& v, int a, int b) const
{
    const int p = (a == 0 && b == 1) ? 0 : (a == 0 && b == 2) ? 1 : 2;
    TripleVec u = clifford_mix(cliffQ_[p], v);
    for (auto& x : u) x = boson_phase(x, {{a, b}});
    return u;
}

TripleVec TripleHarness::apply_coproduct_Q(const TripleVec& v, Twin twin) const
{
    const TwinData& d = twins_[twin == Twin::delta_id ? 0 : 1];
    TripleVec u = clifford_mix(d.S, v);
    for (auto& x : u) x = boson_phase(x, {{d.pairs[0][0], d.pairs[0][1]}, {d.pairs[1][0], d.pairs[1][1]}});
    return u;
}

TripleVec TripleHarness::apply_coproduct_R(const TripleVec& v, Twin twin) const
{
    const TwinData& d = twins_[twin == Twin::delta_id ? 0 : 1];
    const int N = N_;
    const int N2 = N * N;
    const MatC& We = rep_->se.V;
    const MatC& Wf = rep_->sf.V;
    TripleVec w = clifford_mix(d.W.adjoint(), v);
    for (int k = 0; k < 8; ++k) {
        const MatC& Vc = d.Vc[d.key[k]];
        const MatC& G = d.G[d.key[k]];
        if (twin == Twin::delta_id) {
            // rows: leg 2, columns: legs (0, 1)
            Eigen::Map<MatC> m(w[k].data(), N, N2);
            MatC y = Wf.adjoint() * m * Vc.conjugate();
            y = y.cwiseProduct(G.transpose());
            m = Wf * y * Vc.transpose();
        } else {
            // rows: legs (1, 2), columns: leg 0
            Eigen::Map<MatC> m(w[k].data(), N2, N);
            MatC y = Vc.adjoint() * m * We.conjugate();
            y = y.cwiseProduct(G);
            m = Vc * y * We.transpose();
        }
    }
    return apply_coproduct_Q(clifford_mix(d.W, w), twin);
}

double TripleHarness::g_consistency(int sA, int sB, int M) const
{
    const TruncatedRep& r = *rep_;
    const int N = N_;
    const double b = r.b;
    const TwinData& d = twins_[0];
    const int key = (sA < 0 ? 2 : 0) + (sB < 0 ? 1 : 0);
    const VecD &le = r.se.w, &lf = r.sf.w, &lk = r.slogK.w;
    double mx = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) mx = std::max(mx, le(i) * std::exp(lk(j)) * lf(k));
    const double eps = zero_cutoff * mx;

    const int n3 = N * N * N;
    Eigen::VectorXcd ga(n3), gb(n3);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                ga((i * N + j) * N + k) = gb_scalar(b, sA * le(i) * std::exp(lk(j)) * lf(k), Branch::plus, eps);
                gb((i * N + j) * N + k) = gb_scalar(b, sB * le(j) * lf(k), Branch::plus, eps);
            }

    auto gA = [&](Eigen::VectorXcd v) {
        apply_leg(v, r.se.V.adjoint(), 0, N);
        apply_leg(v, r.slogK.V.adjoint(), 1, N);
        apply_leg(v, r.sf.V.adjoint(), 2, N);
        v = v.cwiseProduct(ga);
        apply_leg(v, r.se.V, 0, N);
        apply_leg(v, r.slogK.V, 1, N);
        apply_leg(v, r.sf.V, 2, N);
        return v;
    };
    auto gB = [&](Eigen::VectorXcd v) {
        apply_leg(v, r.se.V.adjoint(), 1, N);
        apply_leg(v, r.sf.V.adjoint(), 2, N);
        v = v.cwiseProduct(gb);
        apply_leg(v, r.se.V, 1, N);
        apply_leg(v, r.sf.V, 2, N);
        return v;
    };
    auto gC = [&](Eigen::VectorXcd v) {
        const MatC& Vc = d.Vc[key];
        Eigen::Map<MatC> m(v.data(), N, N * N);
        MatC y = r.sf.V.adjoint() * m * Vc.conjugate();
        y = y.cwiseProduct(d.G[key].transpose());
        m = r.sf.V * y * Vc.transpose();
        return v;
    };
    double num = 0.0, den = 0.0;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < M; ++k) {
                Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n3);
                v((i * N + j) * N + k) = 1.0;
                const Eigen::VectorXcd l = gA(gB(v)), rr = gC(v);
                num += low_norm2(l - rr, N, M);
                den += low_norm2(rr, N, M);
            }
    return std::sqrt(num / den);
}

QuasiTriangularResult residual_quasitriangular(const TruncatedRep& rep, double kappa, int M)
{
    const TripleHarness T(rep, kappa);
    const int N = rep.N;
    QuasiTriangularResult out;
    out.delta_id = triple_block_residual(N, M, [&](const TripleVec& v) {
        return std::pair{T.apply_coproduct_R(v, Twin::delta_id), T.apply_R(T.apply_R(v, 1, 2), 0, 2)};
    });
    out.id_delta = triple_block_residual(N, M, [&](const TripleVec& v) {
        return std::pair{T.apply_coproduct_R(v, Twin::id_delta), T.apply_R(T.apply_R(v, 0, 1), 0, 2)};
    });
    out.yang_baxter = triple_block_residual(N, M, [&](const TripleVec& v) {
        return std::pair{T.apply_R(T.apply_R(T.apply_R(v, 1, 2), 0, 2), 0, 1),
                         T.apply_R(T.apply_R(T.apply_R(v, 0, 1), 0, 2), 1, 2)};
    });
    const double q1 = triple_block_residual(N, M, [&](const TripleVec& v) {
        return std::pair{T.apply_coproduct_Q(v, Twin::delta_id), T.apply_Q(T.apply_Q(v, 1, 2), 0, 2)};
    });
    const double q2 = triple_block_residual(N, M, [&](const TripleVec& v) {
        return std::pair{T.apply_coproduct_Q(v, Twin::id_delta), T.apply_Q(T.apply_Q(v, 0, 1), 0, 2)};
    });
    out.coproduct_Q = std::max(q1, q2);
    const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int s = 0; s < 4; ++s) out.g_consistency[s] = T.g_consistency(signs[s][0], signs[s][1], M);
    return out;
}

namespace {

std::vector<ConvergenceRecord> ordered(std::vector<ConvergenceRecord> recs)
{
    std::stable_sort(recs.begin(), recs.end(), [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
        return std::tie(a.relation_id, a.N) < std::tie(b.relation_id, b.N);
    });
    return recs;
}

}  // namespace

nlohmann::json to_json(const std::vector<ConvergenceRecord>& recs)
{
    nlohmann::json a = nlohmann::json::array();
    for (const ConvergenceRecord& r : ordered(recs))
        a.push_back({{"relation_id", r.relation_id}, {"N", r.N}, {"residual", r.residual}, {"wall_time_ms", r.wall_time_ms}});
    return a;
}

std::string to_csv(const std::vector<ConvergenceRecord>& recs)
{
    std::ostringstream os;
    os << "relation_id,N,residual,wall_time_ms\n";
    char buf[64];
    for (const ConvergenceRecord& r : ordered(recs)) {
        std::snprintf(buf, sizeof buf, "%.17g", r.residual);
        os << '"' << r.relation_id << "\"," << r.N << ',' << buf << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_ms);
        os << buf << '\n';
    }
    return os.str();
}

}  // namespace mdq
