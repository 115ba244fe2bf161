#pragma once

#include "mdq/params.hpp"
#include "mdq/quadrature.hpp"
#include "mdq/superlin.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <string>
#include <vector>

namespace mdq {

using VecD = Eigen::VectorXd;

struct EigensolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MemoryGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Spectral {
    VecD w;
    MatC V;
};

Spectral hermitian_eig(const MatC& m);
// V diag(fn(w)) V^*
MatC from_spectral(const Spectral& s, const std::function<cplx(double)>& fn);
MatC kron(const MatC& a, const MatC& b);

// Oscillator-basis truncation at modulus b_star. Every function of U, V, K is
// taken from the spectral decomposition of its exponent.
struct TruncatedRep {
    int N = 0;
    ParameterContext ctx;
    double b = 0.0;
    double Z = 1.0;
    MatC x, p;
    MatC U, V, Uinv, Vinv, K, Kinv, logK;
    MatC e, f, E, F;
    Spectral sx, sp, slogK, se, sf;
    std::vector<std::string> warnings;
};

TruncatedRep build_truncated_rep(const ParameterContext& ctx, int N);

// ||UV - q*^2 VU|| / ||UV|| (Frobenius).
double commutator_defect(const TruncatedRep& rep);

struct SuperRep {
    const TruncatedRep* rep = nullptr;
    MatC E, F, K, Kinv, ehat, fhat;  // 2N x 2N, Clifford factor first
};

SuperRep build_super_rep(const TruncatedRep& rep);

// Branch applied to negative spectral values: g(e^{pi i branch} |lambda|).
enum class Branch { plus = 1, minus = -1 };

inline constexpr double zero_cutoff = 1e-10;

cplx gb_scalar(double b, double lambda, Branch branch, double eps);
MatC matrix_gb(const ParameterContext& ctx, const MatC& M, Branch branch = Branch::plus);

// Pair-space states: four Clifford components, each an N x N array v(i, j) for legs (1, 2).
using PairVec = std::array<MatC, 4>;

enum class GFactor { standard, trivial, mixed_branch, tilde };

struct RMatrixOptions {
    double kappa = 0.5;
    GFactor g = GFactor::standard;
};

// R = Q g(i e^ (x) f^) applied matrix-free. The Clifford prefactor is diag(-1, 1, 1, 1);
// the g factor is diagonal in P-conjugated components with the e^{pi i} branch
// (components 0, 1) and the plain branch (components 2, 3) on the spectrum of e (x) f.
class PairR {
public:
    PairR(const TruncatedRep& rep, RMatrixOptions opt = {});

    PairVec apply(const PairVec& v) const;
    PairVec apply_adjoint(const PairVec& v) const;
    PairVec apply_prefactor(const PairVec& v) const;
    PairVec apply_prefactor_adjoint(const PairVec& v) const;

    const TruncatedRep& rep() const { return *rep_; }
    // g values on the e (x) f spectrum for component c.
    const MatC& block(int c) const { return *blocks_[c]; }
    const MatC& g_plus() const { return Gp_; }
    const MatC& g_phase_plus() const { return Gm_; }
    const MatC& g_phase_minus() const { return Gmm_; }
    // N x N boson operator of g(s e (x) f) on a pair state matrix.
    MatC apply_g(const MatC& v, const MatC& G) const;
    MatC apply_q(const MatC& v) const;

private:
    const TruncatedRep* rep_;
    RMatrixOptions opt_;
    MatC Gp_, Gm_, Gmm_, ones_, Qd_;
    std::array<const MatC*, 4> blocks_{};
    Eigen::Matrix4cd P_;
};

PairR build_R(const TruncatedRep& rep, RMatrixOptions opt = {});

// Operator sum of (4x4 Clifford) (x) A (x) B on pair states.
struct PairTerm {
    Eigen::Matrix4cd cliff;
    MatC A, B;
};
using PairOperator = std::vector<PairTerm>;
PairVec apply(const PairOperator& op, const PairVec& v);

struct PairCoproducts {
    PairOperator dE, dF, dK, opE, opF, opK;  // Delta and the opposite coproduct
};
PairCoproducts pair_coproducts(const TruncatedRep& rep);

// Residuals restricted to the lowest M oscillator levels on every leg, where
// truncation edges do not reach.
inline constexpr int default_block = 2;

struct BraidingResult {
    double E = 0.0, F = 0.0, K = 0.0;
    double plus_reduction = 0.0, minus_reduction = 0.0;
    double max() const { return std::max({E, F, K}); }
};

BraidingResult residual_braiding(const PairR& R, int M = default_block);

// ||R^* Rt - Id||_F / sqrt(dim) on the lowest M levels of both legs.
double residual_inverse(const PairR& R, const PairR& Rt, int M = default_block);
// Same over the full truncated space, estimated with seeded Gaussian probes.
double residual_inverse_full(const PairR& R, const PairR& Rt, int probes = 8);
// ||R^* R - Id||_2 by power iteration.
double nonunitarity(const PairR& R, int iters = 40);
double prefactor_unitarity(const PairR& R, int iters = 20);
double norm_R(const PairR& R, int iters = 40);

// g(U) g(e^{pi i} V) against g(U - V), on the lowest M levels.
double gb_difference_residual(const TruncatedRep& rep, int M = 4);

// Triple space (2N)^3, leg layout (i N + j) N + k.
using TripleVec = std::array<Eigen::VectorXcd, 8>;

inline constexpr int max_triple_N = 16;

enum class Twin { delta_id, id_delta };

class TripleHarness {
public:
    TripleHarness(const TruncatedRep& rep, double kappa = 0.5);

    TripleVec apply_R(const TripleVec& v, int a, int b) const;
    // (Delta (x) id)(R) or (id (x) Delta)(R) built from the coproduct of e^ and K.
    TripleVec apply_coproduct_R(const TripleVec& v, Twin twin) const;
    TripleVec apply_coproduct_Q(const TripleVec& v, Twin twin) const;
    TripleVec apply_Q(const TripleVec& v, int a, int b) const;
    // g(sA A) g(sB B) against g(sA A + sB B) for the (Delta (x) id) pair A = e K f, B = 1 e f.
    double g_consistency(int sA, int sB, int M = default_block) const;

    int N() const { return N_; }

private:
    const TruncatedRep* rep_;
    int N_;
    double kappa_;
    PairR R_;
    std::array<Eigen::Matrix<cplx, 8, 8>, 2> cliffR_[3];  // per leg pair, per g block
    std::array<Eigen::Matrix<cplx, 8, 8>, 3> cliffQ_;

    struct TwinData {
        Eigen::Matrix<cplx, 8, 8> W, S;
        std::array<int, 8> key;
        std::array<MatC, 4> G;  // g on the factorized spectrum, keyed by (sA, sB)
        std::array<MatC, 4> Vc;
        int pairs[2][2];
    };
    TwinData twins_[2];

    void build_twin(Twin t);
    Eigen::VectorXcd boson_R(const Eigen::VectorXcd& v, int a, int b, const MatC& G) const;
    Eigen::VectorXcd boson_phase(const Eigen::VectorXcd& v, const std::vector<std::pair<int, int>>& pairs) const;
};

struct QuasiTriangularResult {
    double delta_id = 0.0;
    double id_delta = 0.0;
    double yang_baxter = 0.0;
    double coproduct_Q = 0.0;
    std::array<double, 4> g_consistency{};  // (+,+), (+,-), (-,+), (-,-)
};

QuasiTriangularResult residual_quasitriangular(const TruncatedRep& rep, double kappa = 0.5, int M = default_block);

struct ConvergenceRecord {
    std::string relation_id;
    int N = 0;
    double residual = 0.0;
    double wall_time_ms = 0.0;
};

// Both exports order records by (relation_id, N).
nlohmann::json to_json(const std::vector<ConvergenceRecord>& recs);
std::string to_csv(const std::vector<ConvergenceRecord>& recs);

}  // namespace mdq
