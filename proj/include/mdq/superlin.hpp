#pragma once

#include "mdq/params.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

namespace mdq {

using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

// Complex matrix with a Z2 grading of its basis indices.
struct GradedMatrix {
    MatC m;
    std::vector<int> grading;

    int dim() const { return static_cast<int>(grading.size()); }
    // 0 even, 1 odd, -1 for an inhomogeneous matrix.
    int parity(double tol = 0.0) const;
};

// Standard grading of C^{1|1} tensor powers: parity of an index is the parity of its bit count.
std::vector<int> standard_grading(int dim);
GradedMatrix graded(const MatC& m);
GradedMatrix graded_identity(int dim);

struct CliffordGenerators {
    GradedMatrix xi, eta, invol;  // invol = i eta xi = diag(-1, 1)
};
CliffordGenerators clifford_generators();

inline constexpr int max_graded_dim = 1 << 12;

// Signed Kronecker product: entry (i j, k l) of A (x) B is
// (-1)^{p(i)(p(j)+p(l))} A_ik B_jl, the rule displayed for 2x2 blocks.
GradedMatrix super_tensor(const GradedMatrix& a, const GradedMatrix& b);

GradedMatrix diagonalizer_P();
// P rebuilt from its expansion in Clifford generators.
GradedMatrix diagonalizer_P_from_generators();

// op placed on leg k of n copies of C^{1|1}, identities elsewhere, via super_tensor.
GradedMatrix embed(const GradedMatrix& op, int leg, int n);

struct IdentityCheck {
    std::string id;
    std::string anchor;
    double residual = 0.0;
    bool pass = false;
    std::string detail;
};

inline constexpr double exact_tol = 1e-14;

IdentityCheck check_equal(const std::string& id, const std::string& anchor, const MatC& lhs, const MatC& rhs,
                          double tol = exact_tol);

// The displayed 8x8 matrices.
MatC P13_matrix();
MatC P23_matrix();
MatC c_matrix();

std::vector<IdentityCheck> eight_dim_identities();
std::vector<IdentityCheck> tensor_identities();
std::vector<IdentityCheck> braiding_lemma_identities();

// Clifford part of the R-matrix prefactor: (1(x)1 + invol(x)1 + 1(x)invol + eta xi (x) eta xi)/2.
MatC prefactor_clifford();

nlohmann::json to_json(const MatC& m);
nlohmann::json to_json(const GradedMatrix& g);

}  // namespace mdq
