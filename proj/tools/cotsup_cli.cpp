// cotsup command-line tool.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotsup/cotsup.hpp"

namespace {

using namespace cotsup;

// Writes to --out when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct Selection {
  std::vector<std::string> tasks;
  std::string level;
  int n = 50;
  std::string len = "10..20";
  std::uint64_t seed = 0;

  void add_to(CLI::App* app, bool with_count = true) {
    app->add_option("--task", tasks, "Task id(s), or 'all'")->delimiter(',');
    app->add_option("--level", level, "Hierarchy level: R, CF or CS");
    if (with_count) app->add_option("--n", n, "Instances per task")->check(CLI::PositiveNumber);
    app->add_option("--len", len, "Length range A..B");
    app->add_option("--seed", seed, "Master seed");
  }

  std::vector<TaskId> task_ids() const {
    if (!level.empty()) return tasks_at(parse_level(level));
    if (tasks.empty()) return {kAllTasks.begin(), kAllTasks.end()};
    std::vector<TaskId> out;
    for (const auto& t : tasks) {
      if (t == "all") return {kAllTasks.begin(), kAllTasks.end()};
      out.push_back(parse_task_id(t));
    }
    return out;
  }

  std::vector<TaskInstance> instances() const {
    RunConfig cfg;
    cfg.n = n;
    cfg.lengths = parse_length_range(len);
    cfg.master_seed = seed;
    std::vector<TaskInstance> out;
    for (TaskId id : task_ids()) {
      auto batch = matrix_instances(cfg, id);
      out.insert(out.end(), batch.begin(), batch.end());
    }
    return out;
  }
};

int cmd_solve_examples(std::ostream& out) {
  int mismatches = 0;
  for (const auto& ex : worked_examples()) {
    const auto got = oracle_solve(ex.instance).answer;
    const auto want = normalize_answer_text(ex.instance.task_id, ex.published_answer);
    const bool ok = got == want;
    mismatches += ok ? 0 : 1;
    out << (ok ? "match    " : "MISMATCH ") << to_string(ex.instance.task_id) << ": " << got << "\n";
  }
  for (const auto& e : known_errata()) out << erratum_note(e) << "\n";
  return mismatches == 0 ? 0 : 1;
}

int cmd_check_templates(int max_len, const std::vector<std::string>& task_filter, const std::string& witness_dir,
                        std::ostream& out) {
  std::vector<TaskId> ids;
  for (const auto& t : task_filter) ids.push_back(parse_task_id(t));
  if (ids.empty()) ids.assign(kAllTasks.begin(), kAllTasks.end());
  if (!witness_dir.empty()) std::filesystem::create_directories(witness_dir);
  bool all_ok = true;
  for (TaskId id : ids) {
    for (auto kind : {SupervisionKind::Correct, SupervisionKind::Incorrect}) {
      const auto& t = get_template(id, kind);
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = check_sufficiency(t, max_len);
      const auto ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
      const Verdict expected = kind == SupervisionKind::Correct ? Verdict::Sufficient : Verdict::Insufficient;
      bool ok = res.verdict == expected;
      if (res.witness) ok = ok && verify_witness(t, *res.witness);
      all_ok = all_ok && ok;
      out << (ok ? "ok   " : "FAIL ") << to_string(id) << " " << to_string(kind) << ": " << to_string(res.verdict)
          << " (" << res.inputs_checked << " inputs, " << ms << " ms)";
      if (res.witness) {
        out << "\n       shared state \"" << res.witness->shared_state << "\" answers " << res.witness->first_answer
            << " vs " << res.witness->second_answer;
        if (!witness_dir.empty()) {
          const auto path = std::filesystem::path(witness_dir) /
                            (std::string(to_string(id)) + "." + std::string(to_string(kind)) + ".json");
          std::ofstream(path) << witness_to_json(t, *res.witness).dump(2) << "\n";
        }
      }
      out << "\n";
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-of-thought supervision harness"};
  app.require_subcommand(1);
  std::string out_path;
  std::string format = "text";

  // gen
  auto* gen = app.add_subcommand("gen", "Generate task instances as JSON Lines");
  Selection gen_sel;
  gen_sel.add_to(gen);
  gen->add_option("--out", out_path, "Output file (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve instances with the reference machines");
  Selection solve_sel;
  solve_sel.add_to(solve);
  std::string solve_in;
  bool solve_examples = false;
  solve->add_option("--in", solve_in, "Instance JSON Lines file (default: generate)");
  solve->add_flag("--examples", solve_examples, "Reproduce the published worked examples and list errata");
  solve->add_option("--out", out_path, "Output file (default stdout)");

  // prompt
  auto* prompt = app.add_subcommand("prompt", "Build prompts as JSON Lines");
  Selection prompt_sel;
  prompt_sel.add_to(prompt);
  std::string prompt_conditions = "nocot,cot,cr,in";
  int prompt_q = 0;
  int prompt_r = 0;
  prompt->add_option("--condition", prompt_conditions, "Comma-separated condition descriptors");
  prompt->add_option("--q", prompt_q, "Candidates per step for tree-of-thought conditions");
  prompt->add_option("--r", prompt_r, "Review passes for graph-of-thought conditions");
  prompt->add_option("--out", out_path, "Output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run a task x condition matrix and append run records");
  std::string run_config;
  std::vector<std::string> run_tasks;
  std::string run_level, run_conditions, run_agent, run_len;
  std::optional<int> run_n, run_q, run_r;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> run_eps;
  run->add_option("--config", run_config, "key = value configuration file");
  run->add_option("--task", run_tasks, "Task id(s)")->delimiter(',');
  run->add_option("--level", run_level, "Hierarchy level");
  run->add_option("--condition", run_conditions, "Comma-separated condition descriptors");
  run->add_option("--agent", run_agent, "scripted or http")->check(CLI::IsMember({"scripted", "http"}));
  run->add_option("--n", run_n, "Instances per task");
  run->add_option("--len", run_len, "Length range A..B");
  run->add_option("--seed", run_seed, "Master seed");
  run->add_option("--eps", run_eps, "Scripted agent per-step noise");
  run->add_option("--q", run_q, "Candidates per step (tree of thought)");
  run->add_option("--r", run_r, "Review passes (graph of thought)");
  run->add_option("--out", out_path, "Run record file (appended; existing cells are skipped)")->required();

  // score
  auto* score = app.add_subcommand("score", "Re-grade run records from their raw outputs");
  std::string score_in, review_out;
  score->add_option("--in", score_in, "Run record file")->required();
  score->add_option("--out", out_path, "Re-graded records (default stdout)");
  score->add_option("--review", review_out, "Also write a human-review file");

  // report
  auto* report = app.add_subcommand("report", "Aggregate run records into an accuracy table");
  std::vector<std::string> report_in;
  report->add_option("--in", report_in, "Run record file(s)")->required();
  report->add_option("--format", format, "text, csv or markdown");
  report->add_option("--out", out_path, "Output file (default stdout)");

  // theory
  auto* theory = app.add_subcommand("theory", "Prompt-space and answer-space calculations");
  theory->require_subcommand(1);
  theory->add_option("--format", format, "text or csv");
  theory->add_option("--out", out_path, "Output file (default stdout)");
  theory->fallthrough();
  auto* th_count = theory->add_subcommand("count", "Number of step templates C(m, s)");
  std::uint64_t m_bits = 0, s_bits = 0;
  th_count->add_option("--m", m_bits, "Bits in the hidden state")->required();
  th_count->add_option("--s", s_bits, "Bits extracted per step")->required();
  auto* th_ratio = theory->add_subcommand("ratio", "Answer-space ratio for a template");
  std::string ratio_task, ratio_kind = "in";
  int ratio_n = 4;
  th_ratio->add_option("--task", ratio_task, "Task id")->required();
  th_ratio->add_option("--n", ratio_n, "Length (at most 8)");
  th_ratio->add_option("--kind", ratio_kind, "cr, in or un");
  auto* th_depth = theory->add_subcommand("depth", "Required sequential depth per length");
  std::string depth_task, depth_len = "1..10";
  th_depth->add_option("--task", depth_task, "Task id")->required();
  th_depth->add_option("--len", depth_len, "Length range A..B (at most 20)");

  // check-templates
  auto* check = app.add_subcommand("check-templates", "Audit every step template for information sufficiency");
  int max_len = kAuditLength;
  std::vector<std::string> check_tasks;
  std::string witness_dir;
  check->add_option("--max-len", max_len, "Largest enumerated length (at most 8)");
  check->add_option("--task", check_tasks, "Restrict to task id(s)")->delimiter(',');
  check->add_option("--witness-dir", witness_dir, "Write insufficiency witnesses here");
  check->add_option("--out", out_path, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    // `run` appends to --out itself; every other command writes it afresh.
    Output out(run->parsed() ? std::string() : out_path);
    std::ostream& os = out.stream();

    if (gen->parsed()) {
      for (const auto& inst : gen_sel.instances()) os << instance_to_json(inst).dump() << "\n";
      return 0;
    }

    if (solve->parsed()) {
      if (solve_examples) return cmd_solve_examples(os);
      const auto instances = solve_in.empty() ? solve_sel.instances() : read_instances(solve_in);
      for (const auto& inst : instances) {
        const auto r = oracle_solve(inst);
        ojson j;
        j["instance_ref"] = instance_ref(inst);
        j["answer"] = r.answer;
        j["depth"] = r.depth.sequential_updates;
        os << j.dump() << "\n";
      }
      return 0;
    }

    if (prompt->parsed()) {
      auto conds = parse_conditions(prompt_conditions);
      for (auto& c : conds) {
        if (prompt_q > 0) c.branch_q = prompt_q;
        if (prompt_r > 0) c.revisit_r = prompt_r;
        validate_condition(c);
      }
      for (const auto& inst : prompt_sel.instances()) {
        for (const auto& c : conds) os << prompt_to_json(build_prompt(inst, c)).dump() << "\n";
      }
      return 0;
    }

    if (run->parsed()) {
      RunConfig cfg;
      if (!run_config.empty()) {
        for (const auto& [k, v] : read_config_file(run_config)) apply_setting(cfg, k, v);
      }
      if (!run_tasks.empty()) {
        std::string joined;
        for (const auto& t : run_tasks) joined += t + ",";
        apply_setting(cfg, "tasks", joined);
      }
      if (!run_level.empty()) apply_setting(cfg, "level", run_level);
      if (!run_conditions.empty()) apply_setting(cfg, "conditions", run_conditions);
      if (!run_agent.empty()) apply_setting(cfg, "agent", run_agent);
      if (run_n) apply_setting(cfg, "n", std::to_string(*run_n));
      if (!run_len.empty()) apply_setting(cfg, "len", run_len);
      if (run_seed) apply_setting(cfg, "seed", std::to_string(*run_seed));
      if (run_eps) apply_setting(cfg, "eps", std::to_string(*run_eps));
      if (run_q) apply_setting(cfg, "q", std::to_string(*run_q));
      if (run_r) apply_setting(cfg, "r", std::to_string(*run_r));
      const auto summary = run_matrix_to_file(cfg, out_path);
      std::cerr << "wrote " << summary.written << " records, skipped " << summary.skipped << " existing, "
                << summary.errors << " errors\n";
      return 0;
    }

    if (score->parsed()) {
      std::optional<std::ofstream> review;
      if (!review_out.empty()) {
        review.emplace(review_out, std::ios::trunc);
        if (!*review) throw Error(ErrorCode::IoError, "cannot write '" + review_out + "'");
      }
      for (const auto& rec : read_records(score_in)) {
        const RunRecord r = rescore(rec);
        os << record_to_json(r).dump() << "\n";
        if (review) {
          const auto inst = instance_from_ref(r.instance_ref);
          const auto cond = parse_condition(r.condition);
          const auto kind = cond.supervision != SupervisionKind::Unsupervised ? cond.supervision : SupervisionKind::Correct;
          *review << review_record(inst, r.raw_output, get_template(inst.task_id, kind)).dump() << "\n";
        }
      }
      return 0;
    }

    if (report->parsed()) {
      std::vector<RunRecord> records;
      for (const auto& path : report_in) {
        auto batch = read_records(path);
        records.insert(records.end(), batch.begin(), batch.end());
      }
      os << render_report(aggregate(records), parse_report_format(format));
      return 0;
    }

    if (theory->parsed()) {
      const bool csv = format == "csv";
      if (!csv && format != "text") throw Error(ErrorCode::ConfigError, "theory output is text or csv");
      if (th_count->parsed()) {
        const auto c = template_count(m_bits, s_bits);
        if (csv) {
          os << "m,s,count\n" << m_bits << "," << s_bits << "," << c << "\n";
        } else {
          os << "C(" << m_bits << ", " << s_bits << ") = " << c << "\n";
        }
      } else if (th_ratio->parsed()) {
        const TaskId id = parse_task_id(ratio_task);
        const auto& t = get_template(id, parse_supervision_kind(ratio_kind));
        const auto est = answer_space_ratio(id, ratio_n, t);
        if (csv) {
          os << "task,n,template,solutions,space,guided,ratio\n"
             << to_string(id) << "," << ratio_n << "," << to_string(t.kind) << "," << est.solution_count << ","
             << est.space_count << "," << (est.guided ? "yes" : "no") << "," << est.ratio_text() << "\n";
        } else {
          os << to_string(id) << " n=" << ratio_n << " template=" << to_string(t.kind) << "\n"
             << "  candidate answers |S| = " << est.space_count << "\n"
             << "  correct answers |CR|  = " << est.solution_count << "\n"
             << "  ratio                 = " << est.ratio_text() << (est.guided ? " (template is sufficient)" : " (blind)")
             << "\n";
        }
      } else if (th_depth->parsed()) {
        const TaskId id = parse_task_id(depth_task);
        const auto range = parse_length_range(depth_len);
        const auto rows = depth_profile(id, range.lo, range.hi);
        os << (csv ? "n,depth\n" : "     n      depth\n");
        for (const auto& [n, d] : rows) {
          if (csv) {
            os << n << "," << d << "\n";
          } else {
            std::string a = std::to_string(n), b = std::to_string(d);
            os << std::string(6 - std::min<std::size_t>(6, a.size()), ' ') << a
               << std::string(11 - std::min<std::size_t>(11, b.size()), ' ') << b << "\n";
          }
        }
      }
      return 0;
    }

    if (check->parsed()) return cmd_check_templates(max_len, check_tasks, witness_dir, os);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
