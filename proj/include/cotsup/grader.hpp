#pragma once

// Trace parsing, answer extraction, grading and template classification.

#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotsup/instance.hpp"
#include "cotsup/prompt.hpp"
#include "cotsup/templates.hpp"

namespace cotsup {

inline constexpr double kClassificationThreshold = 0.6;

struct Trace {
  std::vector<StepState> steps;
  std::optional<std::string> final_answer;
  std::vector<std::string> parse_warnings;
};

struct Grade {
  bool correct = false;
  std::string normalized_expected;
  std::string normalized_got;
};

inline std::optional<std::string> extract_final_answer(std::string_view raw) {
  const auto pos = raw.rfind(kAnswerMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  auto rest = raw.substr(pos + kAnswerMarker.size());
  const auto eol = rest.find('\n');
  if (eol != std::string_view::npos) rest = rest.substr(0, eol);
  return detail::trim(rest);
}

namespace detail {

inline std::string safe_normalize(TaskId id, const std::string& text) {
  try {
    return normalize_answer_text(id, text);
  } catch (const Error&) {
    return trim(text);
  }
}

inline std::vector<std::string> split_lines(std::string_view raw) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in{std::string(raw)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// "Step 3: x", "3. x", "3) x", "- Step 3: x", "**Step 3:** x"
inline const std::regex& step_label_regex() {
  static const std::regex re(R"(^(?:[-*]\s*)?(?:\*\*)?(?:step\s*\d+\s*:|\d+\s*[.)])(?:\*\*)?\s*(.*)$)",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

// Body of a step-labelled line, or nullopt for unlabelled lines.
inline std::optional<std::string> step_body(const std::string& line) {
  std::smatch m;
  if (std::regex_match(line, m, step_label_regex())) return trim(m[1].str());
  return std::nullopt;
}

inline bool is_marker_line(const std::string& line) { return line.find(kAnswerMarker) != std::string::npos; }

inline std::string strip_bullet(std::string line) {
  if (line.size() > 1 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') line = trim(line.substr(2));
  return line;
}

}  // namespace detail

inline Grade grade(const TaskInstance& inst, const std::optional<std::string>& got) {
  Grade g;
  g.normalized_expected = detail::safe_normalize(inst.task_id, inst.canonical_answer);
  if (!got) return g;
  g.normalized_got = detail::safe_normalize(inst.task_id, *got);
  g.correct = g.normalized_got == g.normalized_expected;
  return g;
}

inline Trace parse_trace(std::string_view raw, const StepTemplate& t) {
  Trace trace;
  trace.final_answer = extract_final_answer(raw);
  if (!has_schema(t)) {
    trace.parse_warnings.emplace_back("template has no state schema; steps not parsed");
    return trace;
  }
  const auto lines = detail::split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = detail::trim(lines[i]);
    if (line.empty() || detail::is_marker_line(line)) continue;
    const std::string body = detail::step_body(line).value_or(detail::strip_bullet(line));
    if (auto s = parse_state(t, body)) {
      trace.steps.push_back(std::move(*s));
    } else {
      trace.parse_warnings.push_back("line " + std::to_string(i + 1) + " does not match the template: " + line);
    }
  }
  return trace;
}

// Which registered template the trace followed; nullopt means Unknown.
inline std::optional<SupervisionKind> classify_template(std::string_view raw, TaskId id) {
  std::vector<std::string> labelled;
  std::vector<std::string> other;
  for (const auto& l : detail::split_lines(raw)) {
    const std::string line = detail::trim(l);
    if (line.empty() || detail::is_marker_line(line)) continue;
    if (auto body = detail::step_body(line)) {
      labelled.push_back(*body);
    } else {
      other.push_back(detail::strip_bullet(line));
    }
  }
  const auto& lines = labelled.empty() ? other : labelled;
  if (lines.empty()) return std::nullopt;
  std::optional<SupervisionKind> best;
  double best_fraction = 0.0;
  for (auto kind : {SupervisionKind::Correct, SupervisionKind::Incorrect}) {
    const auto& t = get_template(id, kind);
    std::size_t hits = 0;
    for (const auto& line : lines) hits += parse_state(t, line).has_value() ? 1 : 0;
    const double fraction = static_cast<double>(hits) / static_cast<double>(lines.size());
    if (fraction >= kClassificationThreshold && fraction > best_fraction) {
      best = kind;
      best_fraction = fraction;
    }
  }
  return best;
}

inline std::string classification_text(const std::optional<SupervisionKind>& k) {
  return k ? std::string(to_string(*k)) : std::string("Unknown");
}

inline nlohmann::ordered_json grade_to_json(const Grade& g) {
  return {{"correct", g.correct}, {"normalized_expected", g.normalized_expected}, {"normalized_got", g.normalized_got}};
}

// One line of the human-review export.
inline nlohmann::ordered_json review_record(const TaskInstance& inst, std::string_view raw, const StepTemplate& t) {
  const Trace trace = parse_trace(raw, t);
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : trace.steps) steps.push_back(s.rendered_text);
  return {{"instance_ref", instance_ref(inst)},
          {"raw", std::string(raw)},
          {"parsed_steps", steps},
          {"classification", classification_text(classify_template(raw, inst.task_id))},
          {"grade", grade_to_json(grade(inst, trace.final_answer))}};
}

}  // namespace cotsup
