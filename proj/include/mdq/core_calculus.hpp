#pragma once

#include "mdq/params.hpp"
#include "mdq/qdilog.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace mdq {

// c e^{-alpha x^2 + beta x} x^n
struct GaussTerm {
    cplx c;
    double alpha;
    cplx beta;
    int n;
};

// Finite sums of Gaussian-times-monomial terms: the dense core. Values are
// kept canonical (sorted by (alpha, beta, n), like terms merged, zeros dropped).
class CoreFunction {
public:
    CoreFunction() = default;
    explicit CoreFunction(std::vector<GaussTerm> terms);
    static CoreFunction gaussian(double alpha, cplx beta = 0.0, int n = 0, cplx c = 1.0);

    const std::vector<GaussTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    bool in_core() const;

    cplx operator()(cplx z) const;

    CoreFunction operator+(const CoreFunction& o) const;
    CoreFunction operator-(const CoreFunction& o) const;
    CoreFunction operator*(cplx s) const;
    // e^{gamma x} f(x)
    CoreFunction times_exp(cplx gamma) const;
    // f(x + s)
    CoreFunction shifted(cplx s) const;
    CoreFunction times_x() const;

private:
    std::vector<GaussTerm> terms_;
    void canonicalize();
};

cplx eval(const CoreFunction& f, cplx z);

// f(x) -> scalar e^{mult x} f(x + shift). Every word in U, V and their complex
// powers reduces to one such map.
struct Affine {
    cplx scalar = 1.0;
    cplx mult = 0.0;
    cplx shift = 0.0;

    CoreFunction apply(const CoreFunction& f) const;
    cplx apply_at(const std::function<cplx(cplx)>& f, cplx z) const;
    Affine then(const Affine& outer) const;  // outer o this
};

// Linear combination of Affine maps.
struct CoreOp {
    std::vector<Affine> terms;

    static CoreOp identity();
    static CoreOp from(const Affine& a);
    CoreFunction apply(const CoreFunction& f) const;
    CoreOp operator*(const CoreOp& rhs) const;  // composition, rhs acts first
    CoreOp operator+(const CoreOp& o) const;
    CoreOp operator-(const CoreOp& o) const;
    CoreOp operator*(cplx s) const;
    void merge();
};

// prefactor e^{2 pi b_used (a x + ccoef p)}, [x, p] = i/(2 pi).
struct WeylOp {
    cplx prefactor = 1.0;
    double a = 0.0;
    double ccoef = 0.0;
    double b_used = 1.0;

    Affine affine() const;
    // op^{i t / b_used}, entire in t on the core; prefactor must be positive.
    Affine imaginary_power(cplx t) const;
};

CoreFunction apply_weyl(const WeylOp& op, const CoreFunction& f);

// Weyl pair at modulus b: U = e^{2 pi b x}, V = e^{2 pi b p}.
struct WeylPair {
    double b;
    Affine U() const;
    Affine V() const;
    Affine Uinv() const;
    Affine Vinv() const;
};

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

struct SuperWavefunction {
    CoreFunction even, odd;
};

// Sum of (2x2 Clifford matrix) (x) (Affine map).
struct SuperOp {
    std::vector<std::pair<Mat2, Affine>> terms;

    static SuperOp tensor(const Mat2& m, const CoreOp& op);
    SuperWavefunction apply(const SuperWavefunction& psi) const;
    SuperOp operator*(const SuperOp& rhs) const;
    SuperOp operator+(const SuperOp& o) const;
    SuperOp operator-(const SuperOp& o) const;
    SuperOp operator*(cplx s) const;
};

enum class Modulus { plain, super, dual };

struct Sl2Generators {
    double b;
    cplx q;
    double Z;
    CoreOp E, F, K, Kinv, e, f;
};

// Plain: modulus b with q; super: b_star with q_star; dual: 1/b_star with
// q~ = e^{pi i / b_star^2} and Z~ = Z^{1/b_star^2}.
Sl2Generators build_sl2_generators(const ParameterContext& ctx, Modulus mod = Modulus::super);

struct OspGenerators {
    cplx q;       // e^{pi i b^2}, or tau(q) on the dual side
    double alpha;
    SuperOp E, F, K, Kinv, ehat, fhat;
    Sl2Generators sl2;
};

OspGenerators build_osp_generators(const ParameterContext& ctx, bool dual = false);

// Two-variable super states: four Clifford components, each a sum of products f(x) g(y).
struct PairState {
    std::vector<std::pair<CoreFunction, CoreFunction>> comp[4];
    Eigen::Vector4cd operator()(cplx z1, cplx z2) const;
};

PairState tensor_state(const SuperWavefunction& a, const SuperWavefunction& b);

struct PairOpTerm {
    Mat4 cliff;
    Affine x, y;
};

struct PairOp {
    std::vector<PairOpTerm> terms;
    PairState apply(const PairState& s) const;
    PairOp operator*(const PairOp& rhs) const;
    PairOp operator+(const PairOp& o) const;
    PairOp operator-(const PairOp& o) const;
    PairOp operator*(cplx s) const;
    // Folds scalars into the Clifford part and combines terms with equal maps.
    void merge();
};

// a (x) b for super operators, Clifford part through super_tensor.
PairOp pair_tensor(const SuperOp& a, const SuperOp& b);
SuperOp super_identity();

struct ResidualReport {
    std::string relation_id;
    std::string anchor;
    double max_residual = 0.0;
    int samples = 0;
    nlohmann::json params;
};

nlohmann::json to_json(const ResidualReport& r);

std::vector<cplx> default_samples(int count = 10);

// max_z |lhs(z) - rhs(z)| / max(|lhs(z)|, |rhs(z)|, 1e-30)
double relative_residual(const std::function<cplx(cplx)>& lhs, const std::function<cplx(cplx)>& rhs,
                         const std::vector<cplx>& samples);
double relative_residual(const SuperWavefunction& lhs, const SuperWavefunction& rhs, const std::vector<cplx>& samples);
double relative_residual(const PairState& lhs, const PairState& rhs, const std::vector<cplx>& samples);

struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// max |((U V - q^2 V U) f)(z)| / max |(U V f)(z)|
double uv_commutation_residual(double b, cplx q, const CoreFunction& f, const std::vector<cplx>& samples);

std::vector<ResidualReport> uv_residuals(const ParameterContext& ctx, const CoreFunction& f,
                                         const std::vector<cplx>& samples);
std::vector<ResidualReport> sl2_residuals(const ParameterContext& ctx, const CoreFunction& f,
                                          const std::vector<cplx>& samples);
std::vector<ResidualReport> osp_residuals(const ParameterContext& ctx, const SuperWavefunction& psi,
                                          const std::vector<cplx>& samples);

// The eight stated (anti)commutators between generators and their modular
// duals, followed by the same pairs with the opposite bracket for the four
// K-type entries (reported separately, ids suffixed "_anticommutator").
std::vector<ResidualReport> modular_dual_residuals(const ParameterContext& ctx, const SuperWavefunction& psi,
                                                   const std::vector<cplx>& samples);

std::vector<ResidualReport> coproduct_residuals(const ParameterContext& ctx, const SuperWavefunction& psi1,
                                                const SuperWavefunction& psi2, const std::vector<cplx>& samples);

// Phi = q~^{-1/4} U~^{-1/2} V~^{-1/2}: e^{-pi i/(4 b*^2)} e^{-pi x/b*} f(x + i/(2 b*)).
Affine phi_map(const ParameterContext& ctx, bool inverse);
CoreFunction apply_Phi(const ParameterContext& ctx, const CoreFunction& f, bool inverse);
std::vector<ResidualReport> phi_residuals(const ParameterContext& ctx, const CoreFunction& f,
                                          const std::vector<cplx>& samples);

// <e f, g> - <f, e g> over the real line, relative to |<e f, g>|.
double hermiticity_residual(const ParameterContext& ctx, const CoreFunction& f, const CoreFunction& g);

// Functional calculus g_b(e^{pi i t} op) through the Fourier representation.
struct GbOperator {
    WeylOp op;
    FourierKernel kernel;
};

GbOperator make_gb_operator(const WeylOp& op, double phase_t, bool starred, const QuadratureSpec& quad);
// Closed on the core: sum over quadrature nodes of kernel weight times op^{i t_j / b} f.
CoreFunction apply_gb_core(const GbOperator& g, const CoreFunction& f);
// Point evaluation of (g(op) h)(z) for h given pointwise.
cplx apply_gb_at(const GbOperator& g, const std::function<cplx(cplx)>& h, cplx z);

cplx apply_gb_weyl(const ParameterContext& ctx, const WeylOp& op, double phase_t, const CoreFunction& f,
                   const QuadratureSpec& quad, cplx z);

// Quadrature settings used for operator-valued quantum dilogarithms.
QuadratureSpec operator_quadrature();

std::vector<cplx> real_samples(int count = 5);

double qsum1_residual(const ParameterContext& ctx, const CoreFunction& f, const QuadratureSpec& quad,
                      const std::vector<cplx>& samples);
double qsum2_residual(const ParameterContext& ctx, const CoreFunction& f, const QuadratureSpec& quad,
                      const std::vector<cplx>& samples);
// unit_g replaces every g by 1; drop_middle omits g(q*^{-1} U V).
enum class PentagonMode { full, unit_g, drop_middle };

// g(V) g(U) f = g(U) g(q*^{-1} U V) g(V) f
double pentagon_residual(const ParameterContext& ctx, const CoreFunction& f, const QuadratureSpec& quad,
                         const std::vector<cplx>& samples, PentagonMode mode = PentagonMode::full);

}  // namespace mdq
