#include "ddsim/validation.hpp"

#include <doctest.h>

using namespace ddsim;

TEST_CASE("validation suite passes on a small grid") {
    ValidationOptions o;
    o.config = FrameConfig{4, 8, 15e3, 2.4e9};
    o.thumbtack_trials = 300;
    o.random_cases = 5;
    o.max_roots_n = 16;
    for (const auto& r : run_validation(o)) {
        CAPTURE(r.name);
        CAPTURE(r.detail);
        CHECK(r.pass);
    }
}

TEST_CASE("roots of unity") { CHECK(check_roots_of_unity(64).pass); }

TEST_CASE("corrupted basis reports its location") {
    const auto r = check_corrupted_basis(FrameConfig{13, 16, 30e3, 2.4e9});
    CHECK(r.pass);
    CHECK(r.detail.find("110") != std::string::npos);
}
