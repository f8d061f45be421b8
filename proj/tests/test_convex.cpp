#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "vbl/convex.hpp"

using namespace vbl;

TEST_CASE("scalar battery is admissible") {
    for (const auto& phi : scalar_battery(1.0)) {
        const AdmissibilityReport rep = check_admissible_scalar(phi, 10.0);
        CHECK_MESSAGE(rep.ok, phi.label);
    }
}

TEST_CASE("system battery is admissible for the vector inequality") {
    for (const auto& phi : system_battery(1.0)) {
        const AdmissibilityReport rep = check_admissible_system(phi, 10.0);
        CHECK_MESSAGE(rep.ok, phi.label);
    }
}

TEST_CASE("linear phi fails the vector admissibility (phi'' - phi'/y < 0)") {
    const AdmissibilityReport rep = check_admissible_system(phi_linear(), 10.0);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("smoothed absolute value fails the vector admissibility") {
    const AdmissibilityReport rep = check_admissible_system(phi_smooth_abs(0.1), 10.0);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("concave function rejected") {
    ConvexTestFunction bad;
    bad.label = "concave";
    bad.value = [](double y) { return -y * y; };
    bad.d1 = [](double y) { return -2.0 * y; };
    bad.d2 = [](double) { return -2.0; };
    bad.d1_over_y = [](double) { return -2.0; };
    CHECK_FALSE(check_admissible_scalar(bad, 1.0).ok);
}

TEST_CASE("growth cap enforced") {
    ConvexTestFunction fast;
    fast.label = "too_fast";
    fast.value = [](double y) { return 2.0 * y * y; };
    fast.d1 = [](double y) { return 4.0 * y; };
    fast.d2 = [](double) { return 4.0; };
    fast.d1_over_y = [](double) { return 4.0; };
    CHECK_FALSE(check_admissible_scalar(fast, 1.0).ok);
}

TEST_CASE("truncation derivatives are consistent") {
    const auto phi = phi_truncation(0.5);
    CHECK(phi.value(0.4) == 0.0);
    CHECK(phi.value(1.5) == doctest::Approx(0.5));
    CHECK(phi.d1(1.5) == doctest::Approx(1.0));
    CHECK(phi.d2(1.5) == 1.0);
    CHECK(phi.d2(0.4) == 0.0);
    CHECK(phi.d1_over_y(0.25) == 0.0);
    // phi''(y) - phi'(y)/y = C 1_{y>=C} / y, the cross-term weight.
    const double y = 2.0;
    CHECK(phi.d2(y) - phi.d1(y) / y == doctest::Approx(0.5 / y));
}

TEST_CASE("square phi has vanishing cross-term weight") {
    const auto phi = phi_square();
    for (double y : {0.1, 1.0, 7.0}) CHECK(phi.d2(y) - phi.d1(y) / y == doctest::Approx(0.0));
}
