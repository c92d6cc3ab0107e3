#pragma once

// Seeded self-verification suites: message passing against exhaustive
// enumeration on trees, the analytic gradient against central finite
// differences, and the entropy-reduction scores against the joint-table
// reference. Used by the `verify` CLI command and by the acceptance tests.

#include <cstdint>
#include <string>
#include <vector>

namespace eeral {

struct SuiteResult {
    std::string name;     // e.g. "bp_tree_max_l1"
    int trials = 0;
    double value = 0.0;   // observed worst case
    double tolerance = 0.0;
    bool lower_bound = false;  // pass means value >= tolerance instead of <=
    bool pass = false;
    double seconds = 0.0;
};

struct VerifyOptions {
    std::uint64_t seed = 20260811;
    int trials = 0;          // 0 = per-suite default
    bool inject_fault = false;  // perturb one comparison to prove failures are caught
};

// Sum-product on effectively tree-structured graphs (zero person-person
// coupling) against exact enumeration; S=4 rounds, N<=6, alphabets <=4.
SuiteResult verify_bp_tree(const VerifyOptions& opt);

// loss_gradient against central finite differences (h=1e-4) for both
// backends; reports the worst relative error (absolute floor 1e-7).
SuiteResult verify_gradient(const VerifyOptions& opt);

// score_eer under ExactEnumeration against the joint-table reference, the
// nonnegativity of every exact-backend score, and the decoupled closed form
// H_i/(N+1).
std::vector<SuiteResult> verify_eer(const VerifyOptions& opt);

// which: "all", "bp", "grad" or "eer".
std::vector<SuiteResult> run_verify_suites(const std::string& which, const VerifyOptions& opt);

}  // namespace eeral
