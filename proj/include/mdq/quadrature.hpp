#pragma once

#include "mdq/params.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mdq {

struct AccuracyError : std::runtime_error {
    double achieved;
    AccuracyError(const std::string& what, double achieved_estimate)
        : std::runtime_error(what), achieved(achieved_estimate) {}
};

// r: contour offset from the real axis; theta: tilt of the oscillatory rays
// (Fourier route only); T: truncation length, 0 selects the tail-bound formula;
// tol: absolute target on the exponent integral (a relative error on G_b).
struct QuadratureSpec {
    double r = 0.0;  // 0 selects min(b, 1/b)/2
    double theta = pi / 8.0;
    double T = 0.0;
    double tol = 1e-11;
    int max_subdiv = 20000;
};

struct QuadResult {
    cplx value;
    double abs_err = 0.0;
    int panels = 0;
    bool converged = true;
};

struct Panel {
    double a, b;
    cplx value;
    double err;
};

cplx pairwise_sum(std::span<const cplx> v);
double pairwise_sum(std::span<const double> v);

// Single Gauss-Kronrod 7/15 panel with the QUADPACK error heuristic.
Panel gk15_panel(const std::function<cplx(double)>& f, double a, double b);

// Globally adaptive GK15 on [a, b]; the interval is first cut into
// `initial_panels` equal pieces. Final sum is pairwise over panels ordered by
// position, so the result does not depend on the refinement history order.
QuadResult integrate(const std::function<cplx(double)>& f, double a, double b,
                     double abs_tol, int max_subdiv, int initial_panels = 1);

// Panel layout after adaptive refinement, reusable as a fixed node set.
std::vector<Panel> adaptive_panels(const std::function<cplx(double)>& f, double a, double b,
                                   double abs_tol, int max_subdiv, int initial_panels,
                                   bool* converged = nullptr);

struct Node {
    double s;
    double w;
};

// The 15 Kronrod nodes of each panel.
std::vector<Node> kronrod_nodes(std::span<const Panel> panels);

}  // namespace mdq
