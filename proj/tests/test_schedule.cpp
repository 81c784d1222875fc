#include <doctest.h>

#include "cvarssp/schedule.hpp"

using namespace cvarssp;

TEST_CASE("power schedule evaluates coeff times n to the minus exponent") {
    const PowerSchedule s{2.0, 0.55};
    CHECK(s(1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s(4) == doctest::Approx(2.0 * 0.4665164957684037).epsilon(1e-14));
}

TEST_CASE("default schedules use the standard exponent ladder") {
    const StepSizeSchedule d = StepSizeSchedule::defaults();
    CHECK(d.zeta1_schedule().exponent == doctest::Approx(0.55));
    CHECK(d.zeta2_schedule().exponent == doctest::Approx(0.7));
    CHECK(d.gamma_schedule().exponent == doctest::Approx(0.85));
    CHECK(d.beta_schedule().exponent == doctest::Approx(1.0));
    CHECK(d.zeta1(1) == doctest::Approx(1.0));
    CHECK(d.zeta1(4) == doctest::Approx(0.4665164957684037).epsilon(1e-14));
    CHECK(d.zeta2(4) == doctest::Approx(0.37892914162759955).epsilon(1e-14));
    CHECK(d.gamma(4) == doctest::Approx(0.3077861033362291).epsilon(1e-14));
    CHECK(d.beta(4) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("exponent windows are enforced") {
    // each of the first three must lie strictly inside (0.5, 1)
    CHECK_THROWS(StepSizeSchedule({1, 0.5}, {1, 0.7}, {1, 0.85}, {1, 1.0}));
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {1, 1.0}, {1, 0.85}, {1, 1.0}));
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {1, 0.7}, {1, 1.0}, {1, 1.0}));
    // beta may touch 1 but not exceed it
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {1, 0.7}, {1, 0.85}, {1, 1.01}));
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {1, 0.7}, {1, 0.85}, {1, 0.5}));
    CHECK_NOTHROW(StepSizeSchedule({1, 0.55}, {1, 0.7}, {1, 0.85}, {1, 1.0}));
    CHECK_NOTHROW(StepSizeSchedule({1, 0.51}, {1, 0.6}, {1, 0.99}, {1, 0.995}));
}

TEST_CASE("timescales must be strictly ordered fastest to slowest") {
    CHECK_THROWS(StepSizeSchedule({1, 0.7}, {1, 0.7}, {1, 0.85}, {1, 1.0}));
    CHECK_THROWS(StepSizeSchedule({1, 0.75}, {1, 0.7}, {1, 0.85}, {1, 1.0}));
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {1, 0.85}, {1, 0.85}, {1, 1.0}));
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {1, 0.7}, {1, 0.99}, {1, 0.99}));
}

TEST_CASE("coefficients must be positive") {
    CHECK_THROWS(StepSizeSchedule({0, 0.55}, {1, 0.7}, {1, 0.85}, {1, 1.0}));
    CHECK_THROWS(StepSizeSchedule({1, 0.55}, {-2, 0.7}, {1, 0.85}, {1, 1.0}));
}
