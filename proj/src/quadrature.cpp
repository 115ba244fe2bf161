#include "mdq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace mdq {

namespace {

const double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
const double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
const double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
T pairwise(std::span<const T> v)
{
    if (v.size() <= 8) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise(v.subspan(0, h)) + pairwise(v.subspan(h));
}

struct ByErr {
    bool operator()(const Panel& l, const Panel& r) const { return l.err < r.err; }
};

}  // namespace

cplx pairwise_sum(std::span<const cplx> v) { return pairwise(v); }
double pairwise_sum(std::span<const double> v) { return pairwise(v); }

Panel gk15_panel(const std::function<cplx(double)>& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    cplx fv[15];
    fv[7] = f(c);
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * xgk[j]);
        fv[14 - j] = f(c + h * xgk[j]);
    }
    cplx k = wgk[7] * fv[7];
    cplx g = wg[3] * fv[7];
    double kabs = wgk[7] * std::abs(fv[7]);
    for (int j = 0; j < 7; ++j) {
        const cplx pair = fv[j] + fv[14 - j];
        k += wgk[j] * pair;
        kabs += wgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
        if (j % 2 == 1) g += wg[j / 2] * pair;
    }
    const cplx mean = 0.5 * k;
    double asc = wgk[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j) asc += wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));

    k *= h;
    g *= h;
    kabs *= std::abs(h);
    asc *= std::abs(h);
    double err = std::abs(k - g);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (kabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(eps * kabs, err);
    return {a, b, k, err};
}

std::vector<Panel> adaptive_panels(const std::function<cplx(double)>& f, double a, double b,
                                   double abs_tol, int max_subdiv, int initial_panels,
                                   bool* converged)
{
    std::priority_queue<Panel, std::vector<Panel>, ByErr> heap;
    double total_err = 0.0;
    const int n0 = std::max(1, initial_panels);
    for (int i = 0; i < n0; ++i) {
        const double l = a + (b - a) * i / n0;
        const double r = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
        Panel p = gk15_panel(f, l, r);
        total_err += p.err;
        heap.push(p);
    }
    int count = n0;
    while (total_err > abs_tol && count < max_subdiv) {
        Panel worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) {
            heap.push(worst);
            break;
        }
        Panel l = gk15_panel(f, worst.a, m);
        Panel r = gk15_panel(f, m, worst.b);
        total_err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // Recompute the total from scratch: the running value drifts by rounding.
    std::vector<Panel> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back(heap.top());
        heap.pop();
    }
    std::sort(out.begin(), out.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    std::vector<double> errs;
    errs.reserve(out.size());
    for (const Panel& p : out) errs.push_back(p.err);
    if (converged) *converged = pairwise_sum(errs) <= abs_tol;
    return out;
}

QuadResult integrate(const std::function<cplx(double)>& f, double a, double b,
                     double abs_tol, int max_subdiv, int initial_panels)
{
    bool ok = true;
    auto panels = adaptive_panels(f, a, b, abs_tol, max_subdiv, initial_panels, &ok);
    std::vector<cplx> vals;
    std::vector<double> errs;
    vals.reserve(panels.size());
    errs.reserve(panels.size());
    for (const Panel& p : panels) {
        vals.push_back(p.value);
        errs.push_back(p.err);
    }
    return {pairwise_sum(vals), pairwise_sum(errs), static_cast<int>(panels.size()), ok};
}

std::vector<Node> kronrod_nodes(std::span<const Panel> panels)
{
    std::vector<Node> nodes;
    nodes.reserve(15 * panels.size());
    for (const Panel& p : panels) {
        const double c = 0.5 * (p.a + p.b);
        const double h = 0.5 * (p.b - p.a);
        for (int j = 0; j < 7; ++j) nodes.push_back({c - h * xgk[j], h * wgk[j]});
        nodes.push_back({c, h * wgk[7]});
        for (int j = 6; j >= 0; --j) nodes.push_back({c + h * xgk[j], h * wgk[j]});
    }
    return nodes;
}

}  // namespace mdq
