#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hbif/continuation.hpp"
#include "hbif/lambda1.hpp"

namespace hbif {

enum class CheckStatus { pass, fail, flagged };

struct CheckResult {
    std::string id; // theorem/section tag
    CheckStatus status = CheckStatus::fail;
    std::string measured;
    std::string tolerance;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    int grid_n = 0;
    std::string config_digest;

    bool all_passed() const {
        for (const CheckResult& c : checks)
            if (c.status == CheckStatus::fail)
                return false;
        return true;
    }
};

struct SuiteConfig {
    std::string level = "full"; // smoke | full
    unsigned seed = 12345;
    SolverConfig solver;
    StepConfig step;
    std::string config_digest;
};

// Theorem-by-theorem verification: grid spectral checks, model hypotheses,
// the lambda1 geometry, uniqueness and convergence below lambda1, the loop
// and fold structure between the eigenvalues, and the structure at and
// above lambda2. Failures are recorded, not thrown.
VerificationReport run_suite(const Problem& problem, const SuiteConfig& suite);

std::string format_report(const VerificationReport& report);

// Maximal runs of same-sign nodes separated by zero crossings or entries
// within the threshold of zero; boundary zeros excluded.
int count_nodal_domains(const GridFunction& u, double threshold);

struct NodalWitness {
    Solution solution;
    int domains = 0;
};

// Scans the stable arcs of traced branches for an index-0 solution with at
// least two nodal domains.
std::optional<NodalWitness> stable_two_nodal_search(const Problem& problem,
                                                    std::pair<double, double> a_window,
                                                    std::pair<double, double> c_window,
                                                    const StepConfig& step = {});

// Stable solution at (a, c) reached by walking the stable branch in c from
// u_dagger(a). The direct limit-profile guess sits in the index-1 basin
// close to lambda1, so the branch is walked instead.
Solution stable_solution_at(const Problem& problem, double a, double c_target,
                            const SolverConfig& config = {});

} // namespace hbif
