#include "mdq/qdilog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mdq {

namespace {

std::string fmt(const char* f, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

void check_pole(double b, cplx z)
{
    const double lo = std::min(b, 1.0 / b);
    const double reach = -z.real() + 1.0;
    if (reach < 0.0) return;
    const int nmax = static_cast<int>(reach / b) + 1;
    for (int n = 0; n <= nmax; ++n) {
        const int mmax = static_cast<int>((reach - n * b) * b) + 1;
        for (int m = 0; m <= std::max(0, mmax); ++m) {
            const cplx pole = -n * b - m / b;
            if (std::abs(z - pole) < pole_eps * std::max(1.0, lo * std::abs(z)))
                throw PoleProximityError("G_b evaluated at a pole -n b - m/b", n, m);
        }
    }
}

// Shift counts (j, k) with x + j b + k / b inside [lo, hi], minimal |j| + |k|,
// ties resolved towards more b-steps. Both counts carry the direction sign.
std::pair<int, int> strip_steps(double b, double x, double lo, double hi)
{
    if (x >= lo && x <= hi) return {0, 0};
    const int dir = x < lo ? 1 : -1;
    const double dist = x < lo ? lo - x : x - hi;
    const double width = hi - lo;
    const int jmax = static_cast<int>((dist + width) / b) + 2;
    const int kmax = static_cast<int>((dist + width) * b) + 2;
    int best_j = -1, best_k = -1;
    for (int total = 1; best_j < 0; ++total) {
        for (int j = std::min(total, jmax); j >= 0; --j) {
            const int k = total - j;
            if (k > kmax) break;
            const double xs = x + dir * (j * b + k / b);
            if (xs >= lo && xs <= hi) {
                best_j = j;
                best_k = k;
                break;
            }
        }
        if (total > jmax + kmax) throw ContinuationError("no functional-equation path into the strip");
    }
    return {dir * best_j, dir * best_k};
}

struct StripIntegral {
    cplx log_value;  // log(G / conj(zeta))
    double err;
};

// -int e^{pi t z} / ((e^{pi b t} - 1)(e^{pi t / b} - 1)) dt / t over Im t = +-delta.
StripIntegral strip_integral(double b, cplx z, const QuadratureSpec& quad)
{
    const double Q = b + 1.0 / b;
    const double lo = std::min(b, 1.0 / b);
    double delta = quad.r > 0.0 ? quad.r : 0.5 * lo;
    if (delta >= 2.0 * lo) throw DomainError("contour offset r must stay below the first pole 2 i min(b, 1/b)");
    const bool below = z.imag() < 0.0;
    if (below) delta = -delta;

    auto integrand = [=](double s) -> cplx {
        const cplx t(s, delta);
        if (s >= 0.0) {
            const cplx num = std::exp(pi * t * (z - Q));
            return num / ((1.0 - std::exp(-pi * b * t)) * (1.0 - std::exp(-pi * t / b)) * t);
        }
        const cplx num = std::exp(pi * t * z);
        return num / ((std::exp(pi * b * t) - 1.0) * (std::exp(pi * t / b) - 1.0) * t);
    };

    // Tail bound: |integrand| <~ e^{-c s}/s beyond s, so the tail past T is below
    // e^{-c T}/(c T); T solves e^{-c T}/c = tol/10 (with T >= 1).
    auto tail = [&](double c) {
        if (quad.T > 0.0) return quad.T;
        return std::max(1.0, std::log(10.0 / (quad.tol * c)) / c);
    };
    const double TL = tail(pi * z.real());
    const double TR = tail(pi * (Q - z.real()));
    const double width = std::min(1.0, 4.0 / (1.0 + std::abs(z.imag())));
    const int n0 = static_cast<int>(std::ceil((TL + TR) / width));

    QuadResult r = integrate(integrand, -TL, TR, quad.tol, quad.max_subdiv, n0);
    if (!r.converged)
        throw AccuracyError(fmt("G_b strip quadrature did not converge (estimate %.3e)", r.abs_err), r.abs_err);
    cplx J = r.value;
    if (below) {
        // Moving the line below t = 0 crosses the third-order pole there.
        const cplx res = (z * z - Q * z) / 2.0 + (Q * Q + 1.0) / 12.0;
        J -= 2.0 * pi * I * res;
    }
    return {-J, r.abs_err};
}

}  // namespace

GbValue G_b_eval(double b, cplx z, const QuadratureSpec& quad)
{
    if (!(b > 0.0)) throw DomainError("modulus b must be positive");
    if (!(std::abs(z.imag()) <= max_abs_imag)) throw DomainError("|Im z| beyond the supported range");
    if (!std::isfinite(z.real())) throw DomainError("non-finite argument");
    check_pole(b, z);

    const double Q = b + 1.0 / b;
    const double m = 0.5 * std::min(b, 1.0 / b);
    const auto [j, k] = strip_steps(b, z.real(), m, Q - m);

    // Walk from the lower end of the path upwards, collecting the functional-equation factors.
    cplx w = (j >= 0 && k >= 0) ? z : z + j * b + k / b;
    const cplx zs = z + j * b + k / b;
    cplx factor = 1.0;
    double min_factor = 1.0;
    for (int s = 0; s < std::abs(j); ++s) {
        const cplx f = 1.0 - std::exp(2.0 * pi * I * b * w);
        factor *= f;
        min_factor = std::min(min_factor, std::abs(f));
        w += b;
    }
    for (int s = 0; s < std::abs(k); ++s) {
        const cplx f = 1.0 - std::exp(2.0 * pi * I * w / b);
        factor *= f;
        min_factor = std::min(min_factor, std::abs(f));
        w += 1.0 / b;
    }

    StripIntegral si = strip_integral(b, zs, quad);
    const cplx core = std::conj(zeta(b)) * std::exp(si.log_value);
    GbValue out;
    out.b_steps = j;
    out.binv_steps = k;
    out.est_err = si.err + 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(j) + std::abs(k) + 1);
    if (j > 0 || k > 0) {
        if (min_factor == 0.0) throw PoleProximityError("G_b continuation hit an exact pole", 0, 0);
        out.value = core / factor;
    } else {
        out.value = core * factor;
    }
    return out;
}

cplx G_b(const ParameterContext&, double b_choice, cplx z, const QuadratureSpec& quad)
{
    return G_b_eval(b_choice, z, quad).value;
}

cplx g_b(const ParameterContext& ctx, double b_choice, double x, const QuadratureSpec& quad)
{
    if (!(x > 0.0)) throw DomainError("g_b requires x > 0; use g_b_phase for rotated arguments");
    return g_b_phase(ctx, b_choice, x, 0.0, quad);
}

cplx g_b_phase(const ParameterContext&, double b, double x, double t, const QuadratureSpec& quad)
{
    if (!(x > 0.0)) throw DomainError("g_b_phase requires x > 0");
    if (!(std::abs(t) <= 1.0)) throw DomainError("phase t must satisfy |t| <= 1");
    const double Q = b + 1.0 / b;
    const cplx z = Q / 2.0 + t / (2.0 * b) - I * std::log(x) / (2.0 * pi * b);
    cplx G;
    try {
        G = G_b_eval(b, z, quad).value;
    } catch (const PoleProximityError&) {
        throw ContinuationError(fmt("g_b_phase: continuation lands on a pole of G_b (t = %g, x = %g)", t, x));
    }
    if (std::abs(G) == 0.0 || !std::isfinite(std::abs(G)))
        throw ContinuationError(fmt("g_b_phase: continuation lands on a zero of G_b (t = %g, x = %g)", t, x));
    return std::conj(zeta(b)) / G;
}

cplx FourierKernel::evaluate(double x) const
{
    const double lx = std::log(x);
    std::vector<cplx> terms(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) terms[j] = c[j] * std::exp(I * t[j] * lx / b);
    return pairwise_sum(terms);
}

FourierKernel make_fourier_kernel(double b, bool starred, double phase, const QuadratureSpec& quad,
                                  double log_range)
{
    const double Q = b + 1.0 / b;
    const double r = quad.r > 0.0 ? quad.r : 0.3;
    const double th = quad.theta;
    if (!(th > 0.0 && th < pi / 4.0)) throw DomainError("tilt angle must lie in (0, pi/4)");

    QuadratureSpec inner = quad;
    inner.r = 0.0;
    inner.T = 0.0;
    inner.tol = std::max(1e-12, 0.1 * quad.tol);

    auto kernel = [=](cplx t) -> cplx {
        const cplx pre = starred ? std::exp(-pi * Q * t) : std::exp(-pi * I * t * t);
        return pre * std::exp(-pi * phase * t / b) / G_b_eval(b, Q + I * t, inner).value;
    };

    struct Piece {
        cplx origin, dir, weight;
    };
    const cplx ir(0.0, r);
    const cplx down = std::polar(1.0, -th), up = std::polar(1.0, th);
    // Left piece runs from -infinity into i r, right piece leaves i r towards +infinity.
    const Piece pieces[2] = {
        starred ? Piece{ir, -up, up} : Piece{ir, -1.0, 1.0},
        starred ? Piece{ir, 1.0, 1.0} : Piece{ir, down, down},
    };

    const double probes[5] = {-log_range, -0.5 * log_range, 0.0, 0.5 * log_range, log_range};
    const cplx mix[5] = {1.0, I, -1.0, -I, 0.5};

    FourierKernel out;
    out.b = b;
    out.starred = starred;
    out.phase = phase;
    for (const Piece& pc : pieces) {
        auto probe_abs = [&](double s) {
            const cplx t = pc.origin + s * pc.dir;
            const cplx k = kernel(t);
            double m = 0.0;
            for (double lx : probes) m = std::max(m, std::abs(k * std::exp(I * t * lx / b)));
            return m;
        };
        double T = quad.T;
        if (T <= 0.0) {
            int below = 0;
            for (T = 0.5; T < 60.0 && below < 2; T += 0.5) below = probe_abs(T) < 1e-3 * quad.tol ? below + 1 : 0;
        }
        auto integrand = [&](double s) -> cplx {
            const cplx t = pc.origin + s * pc.dir;
            const cplx k = kernel(t) * pc.weight;
            cplx acc = 0.0;
            for (int p = 0; p < 5; ++p) acc += mix[p] * k * std::exp(I * t * probes[p] / b);
            return acc;
        };
        bool ok = true;
        auto panels = adaptive_panels(integrand, 0.0, T, quad.tol, quad.max_subdiv,
                                      static_cast<int>(std::ceil(2.0 * T)), &ok);
        if (!ok) throw AccuracyError("Fourier kernel quadrature did not converge", quad.tol);
        for (const Node& n : kronrod_nodes(panels)) {
            const cplx t = pc.origin + n.s * pc.dir;
            out.t.push_back(t);
            out.c.push_back(n.w * pc.weight * kernel(t));
        }
    }
    return out;
}

cplx g_b_fourier(const ParameterContext&, double b, double x, bool starred, const QuadratureSpec& quad,
                 double phase)
{
    if (!(x > 0.0)) throw DomainError("g_b_fourier requires x > 0");
    const double lr = std::max(1.0, std::abs(std::log(x)));
    return make_fourier_kernel(b, starred, phase, quad, lr).evaluate(x);
}

}  // namespace mdq
