#pragma once

// Scripted agent: a stand-in for a model with a constant working window.
//
// Step t is computed from the previous emitted line, input element t, the
// fixed instructions and a random stream keyed by (run, pass, t). The stream
// key does not depend on earlier elements, so rearranging elements that
// were already consumed cannot change what the agent writes at step t.
//
// Without a chain of thought the agent can afford internal_budget_c
// sequential updates; longer problems are answered by a seeded guess. With a
// template whose last state has no read-out (Incorrect templates) the agent
// guesses as well.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cotsup/core.hpp"
#include "cotsup/instance.hpp"
#include "cotsup/oracle.hpp"
#include "cotsup/prompt.hpp"
#include "cotsup/task_suite.hpp"
#include "cotsup/templates.hpp"

namespace cotsup {

struct ScriptedAgentConfig {
  double step_noise_eps = 0.0;
  double checker_noise = 0.1;
  int internal_budget_c = 4;
  std::uint64_t guess_seed = 0;
  // Probability that an unsupervised run settles on the Correct template,
  // indexed by hierarchy level (R, CF, CS).
  std::array<double, 3> template_hit_rate = {0.90, 0.87, 0.84};
};

inline void validate_agent_config(const ScriptedAgentConfig& cfg) {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidParams, std::string(name) + " must be in [0, 1]");
  };
  prob(cfg.step_noise_eps, "eps");
  prob(cfg.checker_noise, "checker_noise");
  for (double r : cfg.template_hit_rate) prob(r, "template hit rate");
  if (cfg.internal_budget_c < 0) throw Error(ErrorCode::InvalidParams, "internal budget must be >= 0");
}

namespace detail {

class ScriptedRun {
 public:
  ScriptedRun(const TaskInstance& inst, const Condition& cond, const ScriptedAgentConfig& cfg)
      : inst_(inst), cond_(cond), cfg_(cfg) {
    run_seed_ = derive_seed(cfg.guess_seed, to_string(inst.task_id));
    run_seed_ = derive_seed(derive_seed(run_seed_, inst.seed), static_cast<std::uint64_t>(inst.length_n));
    run_seed_ = derive_seed(run_seed_, describe(cond));
  }

  std::string run() {
    if (cond_.mode == Mode::NoCoT) return marker(no_cot_answer());
    const StepTemplate& t = get_template(inst_.task_id, chosen_kind());
    const auto elements = element_stream(inst_);
    std::string out;
    std::vector<StepState> chain;
    switch (cond_.mode) {
      case Mode::CoT: chain = chain_of_thought(t, elements, out); break;
      case Mode::ToT: chain = tree_of_thought(t, elements, out); break;
      case Mode::GoT: chain = graph_of_thought(t, elements, out); break;
      case Mode::NoCoT: break;
    }
    std::optional<std::string> answer;
    if (!chain.empty()) answer = finalize(t, chain.back());
    return out + marker(answer ? *answer : guess());
  }

 private:
  Rng stream(std::string_view purpose, std::uint64_t pass = 0, std::uint64_t step = 0) const {
    return Rng(derive_seed(derive_seed(derive_seed(run_seed_, purpose), pass), step));
  }

  static std::string marker(const std::string& answer) { return std::string(kAnswerMarker) + " " + answer + "\n"; }

  std::string guess() const {
    Rng rng = stream("guess");
    return sample_candidate_answer(inst_, rng);
  }

  std::string no_cot_answer() const {
    if (required_depth(inst_.task_id, inst_.length_n) <= static_cast<std::uint64_t>(cfg_.internal_budget_c)) {
      return oracle_solve(inst_).answer;
    }
    return guess();
  }

  SupervisionKind chosen_kind() const {
    if (cond_.supervision != SupervisionKind::Unsupervised) return cond_.supervision;
    Rng rng = stream("mixture");
    const double hit = cfg_.template_hit_rate[static_cast<std::size_t>(level_of(inst_.task_id))];
    return bernoulli(rng, hit) ? SupervisionKind::Correct : SupervisionKind::Incorrect;
  }

  // One attempt at the next line: the template's rule, corrupted with
  // probability eps.
  StepState attempt(const StepTemplate& t, const StepState& prev, const std::string& e, Rng& rng) const {
    StepState next = schema_step(t, prev, e);
    if (bernoulli(rng, cfg_.step_noise_eps)) next = perturb_state(t, next, e, rng);
    return next;
  }

  // Noisy local check of a proposed line against the rule.
  bool approve(const StepTemplate& t, const StepState& prev, const std::string& e, const StepState& cand,
               Rng& rng) const {
    const bool valid = cand == schema_step(t, prev, e);
    return valid ? !bernoulli(rng, cfg_.checker_noise) : bernoulli(rng, cfg_.checker_noise);
  }

  static std::string step_line(const std::string& label, std::size_t t, const StepState& s) {
    return label + " " + std::to_string(t) + ": " + s.rendered_text + "\n";
  }

  std::vector<StepState> chain_of_thought(const StepTemplate& t, const std::vector<std::string>& elements,
                                          std::string& out) const {
    std::vector<StepState> chain;
    StepState prev = initial_state(t, inst_);
    for (std::size_t i = 0; i < elements.size(); ++i) {
      Rng rng = stream("step", 0, i);
      prev = attempt(t, prev, elements[i], rng);
      chain.push_back(prev);
      out += step_line("Step", i + 1, prev);
    }
    return chain;
  }

  std::vector<StepState> tree_of_thought(const StepTemplate& t, const std::vector<std::string>& elements,
                                         std::string& out) const {
    std::vector<StepState> chain;
    StepState prev = initial_state(t, inst_);
    for (std::size_t i = 0; i < elements.size(); ++i) {
      Rng rng = stream("branch", 0, i);
      std::vector<StepState> cands;
      for (int k = 0; k < cond_.branch_q; ++k) cands.push_back(attempt(t, prev, elements[i], rng));
      std::optional<StepState> kept;
      for (const auto& c : cands) {
        if (approve(t, prev, elements[i], c, rng)) {
          kept = c;
          break;
        }
      }
      out += "Step " + std::to_string(i + 1) + " candidates: ";
      for (std::size_t k = 0; k < cands.size(); ++k) out += (k ? " | " : "") + cands[k].rendered_text;
      out += "\n";
      prev = kept ? *kept : cands.front();
      chain.push_back(prev);
      out += step_line("Step", i + 1, prev);
    }
    return chain;
  }

  // Re-derives a step until the checker approves it, at most `attempts`
  // times; falls back to the first attempt.
  StepState checked_attempt(const StepTemplate& t, const StepState& prev, const std::string& e, int attempts,
                            Rng& rng) const {
    std::optional<StepState> first;
    for (int k = 0; k < attempts; ++k) {
      StepState c = attempt(t, prev, e, rng);
      if (approve(t, prev, e, c, rng)) return c;
      if (!first) first = std::move(c);
    }
    return *first;
  }

  // Draft pass in which a rejected step is revisited up to revisit_r times,
  // then revisit_r review passes. A review re-derives step t from the
  // (possibly repaired) step t-1. If step t-1 changed in this pass, step t is
  // stale and is replaced by the re-derivation. Otherwise the re-derivation
  // replaces the current line only when the checker approves the new line
  // and rejects the old one.
  std::vector<StepState> graph_of_thought(const StepTemplate& t, const std::vector<std::string>& elements,
                                          std::string& out) const {
    const int attempts = 1 + cond_.revisit_r;
    std::vector<StepState> chain;
    {
      StepState prev = initial_state(t, inst_);
      for (std::size_t i = 0; i < elements.size(); ++i) {
        Rng rng = stream("draft", 0, i);
        prev = checked_attempt(t, prev, elements[i], attempts, rng);
        chain.push_back(prev);
        out += step_line("Draft", i + 1, prev);
      }
    }
    for (int pass = 1; pass <= cond_.revisit_r; ++pass) {
      StepState prev = initial_state(t, inst_);
      bool prev_changed = false;
      for (std::size_t i = 0; i < elements.size(); ++i) {
        Rng rng = stream("review", static_cast<std::uint64_t>(pass), i);
        const StepState fresh = checked_attempt(t, prev, elements[i], attempts, rng);
        bool replace = false;
        if (!(fresh == chain[i])) {
          if (prev_changed) {
            replace = true;
          } else {
            const bool keep_old = approve(t, prev, elements[i], chain[i], rng);
            replace = !keep_old && approve(t, prev, elements[i], fresh, rng);
          }
        }
        if (replace) {
          chain[i] = fresh;
          out += "Review " + std::to_string(pass) + ", step " + std::to_string(i + 1) + ": " + fresh.rendered_text + "\n";
        }
        prev_changed = replace;
        prev = chain[i];
      }
    }
    for (std::size_t i = 0; i < chain.size(); ++i) out += step_line("Step", i + 1, chain[i]);
    return chain;
  }

  const TaskInstance& inst_;
  Condition cond_;
  ScriptedAgentConfig cfg_;
  std::uint64_t run_seed_ = 0;
};

}  // namespace detail

inline std::string scripted_run(const TaskInstance& inst, const Condition& cond, const ScriptedAgentConfig& cfg) {
  validate_condition(cond);
  validate_agent_config(cfg);
  return detail::ScriptedRun(inst, cond, cfg).run();
}

}  // namespace cotsup
