#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "plotline/llm.hpp"
#include "plotline/summarize.hpp"

namespace plotline::eval {

struct CriterionResult {
  std::string criterion;
  double score = 0.0;  // 1 yes, 0 no or unparseable
  std::string raw_response;
  bool flagged = false;
};

struct ChecklistResult {
  std::vector<CriterionResult> criteria;
  double mean = 0.0;
};

std::string_view default_checklist_template();

// Leading "yes"/"no" (or 是/否), case-insensitive, after trimming.
std::optional<bool> parse_yes_no(std::string_view response);

// One yes/no prompt per criterion about the rendered outline.
// Throws std::invalid_argument on an empty checklist.
ChecklistResult checkeval_readability(const summarize::Outline& outline, llm::Completer& completer,
                                      const std::vector<std::string>& checklist,
                                      std::string_view tmpl = default_checklist_template());

}  // namespace plotline::eval
