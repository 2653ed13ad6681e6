#pragma once

// Invariant checks shared by the property test suite and the acceptance runner.

#include <string>
#include <vector>

namespace props {

struct Result {
    std::string name;
    bool ok = false;
    std::string detail;
};

Result quaternion_invariants();
Result notch_center_identity();
Result tustin_fidelity();
Result rk4_order();
Result torque_free_conservation();
Result hover_balance();
Result frf_unbiased();
Result determinism();

std::vector<Result> all();

}  // namespace props
