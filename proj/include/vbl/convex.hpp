#pragma once
// Convex test functions for the suitable-solution energy inequalities.
//
// The scalar certificate admits any convex phi with phi(y)/y^2 bounded by 1
// at infinity. The vector certificate works on phi(|u|) and additionally
// needs phi''(y) - phi'(y)/y >= 0 and phi' >= 0 on (0, inf), which is what
// makes phi(|x|) convex and nondecreasing as a function of the vector x.

#include <functional>
#include <string>
#include <vector>

namespace vbl {

struct ConvexTestFunction {
    std::string label;
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    // phi'(y)/y with its finite limit at y = 0; used cellwise where |u| ~ 0.
    std::function<double(double)> d1_over_y;
};

ConvexTestFunction phi_linear();                 // y
ConvexTestFunction phi_square();                 // y^2
ConvexTestFunction phi_truncation(double C);     // (1/2) (y - C)_+^2
ConvexTestFunction phi_smooth_abs(double delta); // sqrt(y^2 + delta^2) - delta

struct AdmissibilityReport {
    bool ok = true;
    std::vector<std::string> failures;
};

// Samples phi'' >= 0 on a dense grid of [-ymax, ymax] and checks the
// quadratic growth cap phi(y)/y^2 <= 1 at y = 1e3 and 1e6.
AdmissibilityReport check_admissible_scalar(const ConvexTestFunction& phi, double ymax);

// Scalar checks plus phi' >= 0 and phi''(y) - phi'(y)/y >= 0 sampled on (0, ymax].
AdmissibilityReport check_admissible_system(const ConvexTestFunction& phi, double ymax);

// Default batteries. `scale` sets the truncation ladder C in
// {0.25, 0.5, 1, 2} * scale and the smoothing width.
std::vector<ConvexTestFunction> scalar_battery(double scale);
std::vector<ConvexTestFunction> system_battery(double scale);

}  // namespace vbl
