#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace nbsym {

// Adaptive Gauss-Kronrod 7-15 on finite intervals.
namespace gk {

// 15-point Kronrod nodes on [-1,1] (symmetric; only the nonnegative half stored)
inline constexpr double xk[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};
inline constexpr double wk[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};
// embedded 7-point Gauss weights (nodes are xk[0], xk[2], xk[4], xk[6])
inline constexpr double wg[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

template <class F>
inline std::pair<double, double> rule(F&& f, double a, double b) {
    double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double fc = f(c);
    double kron = wk[0] * fc;
    double gauss = wg[0] * fc;
    for (int i = 1; i < 8; ++i) {
        double v = f(c - h * xk[i]) + f(c + h * xk[i]);
        kron += wk[i] * v;
        if (i % 2 == 0) gauss += wg[i / 2] * v;
    }
    kron *= h;
    gauss *= h;
    double err = std::abs(kron - gauss);
    // standard QUADPACK-style sharpening of the crude difference
    double scale = std::pow(200.0 * err / std::max(std::abs(kron), 1e-300), 1.5);
    if (scale < 1.0) err = std::abs(kron) * scale;
    return {kron, err};
}

} // namespace gk

struct QuadResult {
    double value = 0;
    double error = 0;
    int intervals = 0;
};

template <class F>
QuadResult integrate(F&& f, double a, double b, double abstol = 1e-10,
                     double reltol = 0.0, int max_intervals = 4000) {
    struct Seg { double a, b, v, e; };
    auto [v0, e0] = gk::rule(f, a, b);
    std::vector<Seg> segs = {{a, b, v0, e0}};
    QuadResult out;
    out.intervals = 1;
    while (out.intervals < max_intervals) {
        double total = 0, err = 0;
        size_t worst = 0;
        for (size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].v;
            err += segs[i].e;
            if (segs[i].e > segs[worst].e) worst = i;
        }
        if (err <= std::max(abstol, reltol * std::abs(total))) {
            out.value = total;
            out.error = err;
            return out;
        }
        Seg s = segs[worst];
        double m = 0.5 * (s.a + s.b);
        auto [v1, er1] = gk::rule(f, s.a, m);
        auto [v2, er2] = gk::rule(f, m, s.b);
        segs[worst] = {s.a, m, v1, er1};
        segs.push_back({m, s.b, v2, er2});
        ++out.intervals;
    }
    double total = 0, err = 0;
    for (auto& s : segs) { total += s.v; err += s.e; }
    out.value = total;
    out.error = err;
    return out;
}

} // namespace nbsym
