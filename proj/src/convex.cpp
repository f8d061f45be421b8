#include "vbl/convex.hpp"

#include <cmath>
#include <cstdio>

namespace vbl {

namespace {

std::string format_label(const char* fmt, double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, x);
    return buf;
}

}  // namespace

ConvexTestFunction phi_linear() {
    ConvexTestFunction p;
    p.label = "linear";
    p.value = [](double y) { return y; };
    p.d1 = [](double) { return 1.0; };
    p.d2 = [](double) { return 0.0; };
    p.d1_over_y = [](double y) { return y != 0.0 ? 1.0 / y : 0.0; };
    return p;
}

ConvexTestFunction phi_square() {
    ConvexTestFunction p;
    p.label = "square";
    p.value = [](double y) { return y * y; };
    p.d1 = [](double y) { return 2.0 * y; };
    p.d2 = [](double) { return 2.0; };
    p.d1_over_y = [](double) { return 2.0; };
    return p;
}

ConvexTestFunction phi_truncation(double C) {
    ConvexTestFunction p;
    p.label = format_label("trunc_C=%.6g", C);
    p.value = [C](double y) {
        const double z = y - C;
        return z > 0.0 ? 0.5 * z * z : 0.0;
    };
    p.d1 = [C](double y) {
        const double z = y - C;
        return z > 0.0 ? z : 0.0;
    };
    p.d2 = [C](double y) { return y >= C ? 1.0 : 0.0; };
    p.d1_over_y = [C](double y) {
        if (C == 0.0) return 1.0;  // limit of (y)_+ / y as y -> 0+
        const double z = y - C;
        return z > 0.0 ? z / y : 0.0;
    };
    return p;
}

ConvexTestFunction phi_smooth_abs(double delta) {
    ConvexTestFunction p;
    p.label = format_label("smooth_abs_d=%.6g", delta);
    const double d2v = delta * delta;
    p.value = [d2v, delta](double y) { return std::sqrt(y * y + d2v) - delta; };
    p.d1 = [d2v](double y) { return y / std::sqrt(y * y + d2v); };
    p.d2 = [d2v](double y) {
        const double s = y * y + d2v;
        return d2v / (s * std::sqrt(s));
    };
    p.d1_over_y = [d2v](double y) { return 1.0 / std::sqrt(y * y + d2v); };
    return p;
}

namespace {

constexpr int kSamples = 2001;
constexpr double kSlack = 1e-12;

void check_growth(const ConvexTestFunction& phi, AdmissibilityReport& rep) {
    for (double y : {1e3, 1e6}) {
        if (phi.value(y) > y * y * (1.0 + 1e-9))
            rep.failures.push_back("phi(y)/y^2 exceeds 1 at y=" + std::to_string(y));
        if (phi.value(-y) > y * y * (1.0 + 1e-9))
            rep.failures.push_back("phi(y)/y^2 exceeds 1 at y=-" + std::to_string(y));
    }
}

}  // namespace

AdmissibilityReport check_admissible_scalar(const ConvexTestFunction& phi, double ymax) {
    AdmissibilityReport rep;
    const double span = ymax > 0.0 ? ymax : 1.0;
    double floor = 0.0;
    for (int i = 0; i < kSamples; ++i) {
        const double y = -span + 2.0 * span * i / (kSamples - 1);
        const double dd = phi.d2(y);
        floor = dd < floor ? dd : floor;
    }
    if (floor < -kSlack) rep.failures.push_back("phi'' < 0 somewhere: convexity fails");
    check_growth(phi, rep);
    rep.ok = rep.failures.empty();
    return rep;
}

AdmissibilityReport check_admissible_system(const ConvexTestFunction& phi, double ymax) {
    AdmissibilityReport rep;
    const double span = ymax > 0.0 ? ymax : 1.0;
    double d2_floor = 0.0, cross_floor = 0.0, d1_floor = 0.0;
    for (int i = 1; i <= kSamples; ++i) {
        const double y = span * i / kSamples;
        const double d1 = phi.d1(y);
        const double d2 = phi.d2(y);
        d2_floor = d2 < d2_floor ? d2 : d2_floor;
        d1_floor = d1 < d1_floor ? d1 : d1_floor;
        const double cross = d2 - d1 / y;
        cross_floor = cross < cross_floor ? cross : cross_floor;
    }
    if (d2_floor < -kSlack) rep.failures.push_back("phi'' < 0 somewhere: convexity fails");
    if (d1_floor < -kSlack)
        rep.failures.push_back("phi' < 0 somewhere: phi(|u|) needs nondecreasing phi");
    if (cross_floor < -kSlack)
        rep.failures.push_back("phi''(y) - phi'(y)/y < 0 somewhere: vector admissibility fails");
    check_growth(phi, rep);
    rep.ok = rep.failures.empty();
    return rep;
}

std::vector<ConvexTestFunction> scalar_battery(double scale) {
    const double s = scale > 0.0 ? scale : 1.0;
    std::vector<ConvexTestFunction> out;
    out.push_back(phi_linear());
    out.push_back(phi_square());
    for (double c : {0.25, 0.5, 1.0, 2.0}) out.push_back(phi_truncation(c * s));
    out.push_back(phi_smooth_abs(0.1 * s));
    return out;
}

std::vector<ConvexTestFunction> system_battery(double scale) {
    const double s = scale > 0.0 ? scale : 1.0;
    std::vector<ConvexTestFunction> out;
    out.push_back(phi_square());
    for (double c : {0.25, 0.5, 1.0, 2.0}) out.push_back(phi_truncation(c * s));
    return out;
}

}  // namespace vbl
