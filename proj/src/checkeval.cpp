#include "plotline/checkeval.hpp"

#include <cctype>
#include <stdexcept>

#include "plotline/text_util.hpp"
#include "prompt_templates.hpp"

namespace plotline::eval {

std::string_view default_checklist_template() { return prompts::checklist_item; }

std::optional<bool> parse_yes_no(std::string_view response) {
  const std::string_view t = text::trim(response);
  auto starts_word = [&](std::string_view word) {
    if (t.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(t[i])) != word[i]) return false;
    }
    return t.size() == word.size() || !std::isalpha(static_cast<unsigned char>(t[word.size()]));
  };
  if (starts_word("yes") || t.substr(0, 3) == "是") return true;
  if (starts_word("no") || t.substr(0, 3) == "否") return false;
  return std::nullopt;
}

ChecklistResult checkeval_readability(const summarize::Outline& outline, llm::Completer& completer,
                                      const std::vector<std::string>& checklist, std::string_view tmpl) {
  if (checklist.empty()) throw std::invalid_argument("checklist is empty");
  const std::string rendered = summarize::to_markdown({outline});
  ChecklistResult result;
  double total = 0.0;
  for (const auto& criterion : checklist) {
    // {criterion} is filled first so the generic renderer handles the rest.
    std::string prompt(tmpl);
    if (const auto pos = prompt.find("{criterion}"); pos != std::string::npos) prompt.replace(pos, 11, criterion);
    prompt = summarize::render_template(prompt, outline.book_id, "", rendered);

    CriterionResult r;
    r.criterion = criterion;
    r.raw_response = completer.complete(prompt);
    const auto answer = parse_yes_no(r.raw_response);
    r.flagged = !answer.has_value();
    r.score = answer.value_or(false) ? 1.0 : 0.0;
    total += r.score;
    result.criteria.push_back(std::move(r));
  }
  result.mean = total / static_cast<double>(checklist.size());
  return result;
}

}  // namespace plotline::eval
