#include "doctest.h"
#include "properties.hpp"

namespace {

void require(const props::Result& r) {
    INFO(r.detail);
    CHECK(r.ok);
}

}  // namespace

TEST_CASE("quaternion invariants") { require(props::quaternion_invariants()); }
TEST_CASE("notch center identity") { require(props::notch_center_identity()); }
TEST_CASE("tustin fidelity") { require(props::tustin_fidelity()); }
TEST_CASE("rk4 order") { require(props::rk4_order()); }
TEST_CASE("torque-free conservation") { require(props::torque_free_conservation()); }
TEST_CASE("hover balance") { require(props::hover_balance()); }
TEST_CASE("frf unbiased") { require(props::frf_unbiased()); }
TEST_CASE("determinism") { require(props::determinism()); }
