#pragma once

// Prompt conditions and prompt assembly.
//
// Condition descriptors (the strings used on the command line and in run
// records):
//   nocot                 answer directly
//   cot                   unsupervised chain of thought
//   cr, in                chain of thought with the Correct / Incorrect template
//   tot-q3, tot-cr-q3     tree of thought, 3 candidates per step
//   got-r2, got-in-r2     graph of thought, 2 review passes

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotsup/core.hpp"
#include "cotsup/instance.hpp"
#include "cotsup/templates.hpp"

namespace cotsup {

enum class Mode { NoCoT, CoT, ToT, GoT };

struct Condition {
  Mode mode = Mode::CoT;
  SupervisionKind supervision = SupervisionKind::Unsupervised;
  int branch_q = 3;
  int revisit_r = 2;

  friend bool operator==(const Condition&, const Condition&) = default;
};

inline constexpr std::string_view kAnswerMarker = "Final Answer:";
inline constexpr std::string_view kSystemText =
    "You solve reasoning tasks exactly as instructed. Keep every line short and follow the requested format.";
inline constexpr std::string_view kNoCoTDirective = "Answer directly. Do not write intermediate steps.";

inline std::string describe(const Condition& c) {
  auto sup = [&]() -> std::string {
    switch (c.supervision) {
      case SupervisionKind::Correct: return "cr";
      case SupervisionKind::Incorrect: return "in";
      case SupervisionKind::Unsupervised: return "";
    }
    return "";
  };
  switch (c.mode) {
    case Mode::NoCoT: return "nocot";
    case Mode::CoT: return c.supervision == SupervisionKind::Unsupervised ? "cot" : sup();
    case Mode::ToT: return "tot-" + (sup().empty() ? "" : sup() + "-") + "q" + std::to_string(c.branch_q);
    case Mode::GoT: return "got-" + (sup().empty() ? "" : sup() + "-") + "r" + std::to_string(c.revisit_r);
  }
  return "?";
}

inline void validate_condition(const Condition& c) {
  if (c.mode == Mode::NoCoT && c.supervision != SupervisionKind::Unsupervised) {
    throw Error(ErrorCode::InvalidCondition, "nocot takes no step template");
  }
  if (c.mode == Mode::ToT && c.branch_q < 2) throw Error(ErrorCode::InvalidCondition, "branch_q must be >= 2");
  if (c.mode == Mode::GoT && c.revisit_r < 1) throw Error(ErrorCode::InvalidCondition, "revisit_r must be >= 1");
}

inline Condition parse_condition(std::string_view text) {
  const std::string s = detail::lower(detail::trim(text));
  auto bad = [&]() { return Error(ErrorCode::ConfigError, "unknown condition '" + s + "'"); };
  if (s == "nocot" || s == "no-cot") return {Mode::NoCoT, SupervisionKind::Unsupervised};
  if (s == "cot" || s == "un" || s == "cot-un") return {Mode::CoT, SupervisionKind::Unsupervised};
  if (s == "cr" || s == "cot-cr") return {Mode::CoT, SupervisionKind::Correct};
  if (s == "in" || s == "cot-in") return {Mode::CoT, SupervisionKind::Incorrect};

  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '-') {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() < 2 || parts.size() > 3) throw bad();
  Condition c;
  if (parts[0] == "tot") {
    c.mode = Mode::ToT;
  } else if (parts[0] == "got") {
    c.mode = Mode::GoT;
  } else {
    throw bad();
  }
  if (parts.size() == 3) {
    if (parts[1] == "cr") {
      c.supervision = SupervisionKind::Correct;
    } else if (parts[1] == "in") {
      c.supervision = SupervisionKind::Incorrect;
    } else {
      throw bad();
    }
  }
  const std::string& p = parts.back();
  const char want = c.mode == Mode::ToT ? 'q' : 'r';
  if (p.size() < 2 || p[0] != want || !detail::is_integer_text(p.substr(1))) throw bad();
  const int k = std::stoi(p.substr(1));
  (c.mode == Mode::ToT ? c.branch_q : c.revisit_r) = k;
  validate_condition(c);
  return c;
}

// Canonical column order for reports.
inline int condition_rank(const Condition& c) {
  const int sup = c.supervision == SupervisionKind::Unsupervised ? 0 : c.supervision == SupervisionKind::Correct ? 1 : 2;
  switch (c.mode) {
    case Mode::NoCoT: return 0;
    case Mode::CoT: return 1 + sup;
    case Mode::ToT: return 10 + sup;
    case Mode::GoT: return 20 + sup;
  }
  return 99;
}

inline std::optional<StepTemplate> condition_template(TaskId id, const Condition& c) {
  if (c.supervision == SupervisionKind::Unsupervised) return std::nullopt;
  return get_template(id, c.supervision);
}

struct PromptBundle {
  nlohmann::ordered_json instance_ref;
  std::string condition;
  std::string system_text;
  std::string user_text;
};

inline PromptBundle build_prompt(const TaskInstance& inst, const Condition& c) {
  validate_condition(c);
  std::string u = render_instance(inst);
  u += "\n\n";
  if (c.mode == Mode::NoCoT) {
    u += std::string(kNoCoTDirective) + "\n";
  } else {
    if (auto t = condition_template(inst.task_id, c)) {
      u += "Solve the task step by step. " + t->instruction_text + ".\n";
      u += "Write one line per step in the form:\nStep k: " + t->state_format + "\n";
    } else {
      u += std::string(kUnsupervisedInstruction) + "\n";
    }
    if (c.mode == Mode::ToT) {
      u += "At every step, first propose " + std::to_string(c.branch_q) +
           " candidate next steps on one line as \"Step k candidates: <a> | <b> | ...\", check them, and then "
           "write the one you keep as \"Step k: ...\".\n";
    } else if (c.mode == Mode::GoT) {
      u += "Write a first draft of all steps as \"Draft k: ...\", redoing any step that fails your check. Then "
           "review the whole draft " +
           std::to_string(c.revisit_r) +
           " times; in each review re-derive every step from the step before it and repair any step that is "
           "wrong, noting it as \"Review p, step k: ...\". Finally write the repaired steps as \"Step k: ...\".\n";
    }
  }
  u += "End with a line: " + std::string(kAnswerMarker) + " <answer>";
  return {instance_ref(inst), describe(c), std::string(kSystemText), u};
}

inline nlohmann::ordered_json prompt_to_json(const PromptBundle& b) {
  return {{"instance_ref", b.instance_ref},
          {"condition", b.condition},
          {"system_text", b.system_text},
          {"user_text", b.user_text}};
}

}  // namespace cotsup
