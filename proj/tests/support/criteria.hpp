#pragma once

#include <string>

namespace relay::testing {

struct CriterionResult {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

CriterionResult check_golden_suite();
CriterionResult check_image_isolation(std::size_t dialogues = 1000, unsigned seed = 20251019);
CriterionResult check_turn_budget();
CriterionResult check_extraction_suite();
CriterionResult check_synthesis_filter_oracle(std::size_t records = 200, unsigned seed = 7);
CriterionResult check_breakdown_oracle();
CriterionResult check_determinism_resume();
/// Runs only when RELAY_SMOKE_CONFIG names a config file with endpoints
/// `perceiver` and `reasoner`; skipped otherwise.
CriterionResult check_live_smoke();

}  // namespace relay::testing
