#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace lmg {

/// One release-gate criterion: a physics claim checked at a pinned scale with
/// pinned tolerances. `detail` records observed vs expected values.
struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double wall_seconds = 0.0;
};

struct AcceptanceReport {
    std::vector<CriterionResult> results;
    bool all_passed() const;
};

int criterion_count();
const char* criterion_title(int id);

/// Run the selected criteria (empty = all), printing one pass/fail line per
/// criterion to `out` as results arrive. Never throws: an exception inside a
/// criterion marks it failed with the message in `detail`.
AcceptanceReport run_acceptance(const std::vector<int>& only, std::ostream& out);

} // namespace lmg
