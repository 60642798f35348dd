// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cotsup/cotsup.hpp"
#include "stub_server.hpp"

using namespace cotsup;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cotsup_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<RunRecord> collect(const RunConfig& cfg) {
  std::vector<RunRecord> out;
  run_matrix(cfg, {}, [&](const RunRecord& r) { out.push_back(r); });
  return out;
}

// --- 1 ---------------------------------------------------------------------
Outcome oracle_matches_brute_force() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  for (TaskId id : kAllTasks) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const auto inst = generate_instance(id, instance_seed(2024, id, i), LengthRange{min_length(id), 12});
      const auto got = oracle_solve(inst).answer;
      const auto want = brute_force_solve(inst);
      o.require(got == want && got == inst.canonical_answer,
                std::string(to_string(id)) + " seed " + std::to_string(inst.seed) + ": " + got + " vs " + want);
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "took " + fmt(secs) + " s");
  if (o.pass) o.detail = std::to_string(checked) + " instances in " + fmt(secs) + " s";
  return o;
}

// --- 2 ---------------------------------------------------------------------
Outcome worked_examples_reproduce() {
  Outcome o;
  const auto examples = worked_examples();
  for (const auto& ex : examples) {
    const auto id = ex.instance.task_id;
    o.require(oracle_solve(ex.instance).answer == normalize_answer_text(id, ex.published_answer),
              std::string(to_string(id)) + " example disagrees");
    o.require(brute_force_solve(ex.instance) == oracle_solve(ex.instance).answer,
              std::string(to_string(id)) + " example: oracles disagree");
  }
  const auto errata = known_errata();
  bool mod_erratum = false;
  for (const auto& e : errata) {
    o.require(normalize_answer_text(e.task_id, e.published) != e.computed, "erratum matches after all");
    o.require(!erratum_note(e).empty() && !e.note.empty(), "erratum without note");
    if (e.task_id == TaskId::ModArithComplex) mod_erratum = e.computed == std::to_string(((2 + 4) * (3 - 1)) % 5);
  }
  o.require(mod_erratum, "mod-arith-complex erratum missing or wrong");
  if (o.pass) o.detail = std::to_string(examples.size()) + " examples, " + std::to_string(errata.size()) + " errata noted";
  return o;
}

// --- 3 ---------------------------------------------------------------------
Outcome template_audit() {
  Outcome o;
  const auto dir = scratch("witnesses");
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = std::string("\"") + COTSUP_CLI + "\" check-templates --max-len 6 --witness-dir \"" +
                          dir.string() + "\" > \"" + (dir / "audit.txt").string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  o.require(rc == 0, "check-templates exited with " + std::to_string(rc));
  o.require(secs < 120.0, "audit took " + fmt(secs) + " s");
  std::size_t verified = 0;
  for (TaskId id : kAllTasks) {
    const auto path = dir / (std::string(to_string(id)) + ".Incorrect.json");
    std::ifstream in(path);
    o.require(static_cast<bool>(in), "missing witness " + path.string());
    if (!in) continue;
    const auto [t, w] = witness_from_json(nlohmann::ordered_json::parse(in));
    const bool ok = verify_witness(t, w) && w.first_answer != w.second_answer &&
                    brute_force_solve(w.first) == w.first_answer && brute_force_solve(w.second) == w.second_answer;
    o.require(ok, std::string(to_string(id)) + " witness does not verify");
    verified += ok ? 1 : 0;
    o.require(audit_verdict(get_template(id, SupervisionKind::Correct)) == Verdict::Sufficient,
              std::string(to_string(id)) + " Correct template not sufficient");
  }
  if (o.pass) o.detail = "10 Sufficient, " + std::to_string(verified) + " witnesses verified, " + fmt(secs) + " s";
  fs::remove_all(dir);
  return o;
}

// --- 4 ---------------------------------------------------------------------
Outcome supervision_gap(std::vector<RunRecord>& records) {
  Outcome o;
  RunConfig cfg;
  cfg.conditions = parse_conditions("nocot,cr,in");
  cfg.n = 200;
  cfg.scripted.step_noise_eps = 0.0;
  records = collect(cfg);
  std::ostringstream summary;
  for (TaskId id : kAllTasks) {
    double chance = 0;
    const auto instances = matrix_instances(cfg, id);
    for (const auto& inst : instances) {
      chance += 1.0 / candidate_answer_count(inst).convert_to<double>();
    }
    chance /= static_cast<double>(instances.size());
    std::map<std::string, Cell> cells;
    for (const auto& r : records) {
      if (r.instance_ref.at("task_id") != to_string(id)) continue;
      Cell& c = cells[r.condition];
      ++c.total;
      c.correct += r.grade && r.grade->correct ? 1 : 0;
    }
    const std::string name(to_string(id));
    o.require(cells["cr"].total == 200 && cells["cr"].correct == 200,
              name + " cr accuracy " + fmt(cells["cr"].accuracy()));
    o.require(cells["in"].accuracy() <= chance + 0.10,
              name + " in " + fmt(cells["in"].accuracy()) + " above chance " + fmt(chance));
    o.require(cells["nocot"].accuracy() <= chance + 0.10,
              name + " nocot " + fmt(cells["nocot"].accuracy()) + " above chance " + fmt(chance));
  }
  if (o.pass) o.detail = "cr 1.00 on all tasks; in and nocot within chance + 0.10";
  return o;
}

// --- 5 ---------------------------------------------------------------------
Outcome search_modes_order() {
  Outcome o;
  RunConfig cfg;
  cfg.tasks = {TaskId::ParityCheck, TaskId::CycleNavigation};
  cfg.conditions = parse_conditions("cr,tot-cr-q3,got-cr-r2");
  cfg.n = 500;
  cfg.scripted.step_noise_eps = 0.1;
  cfg.scripted.checker_noise = 0.1;
  const auto t = aggregate(collect(cfg));
  std::ostringstream detail;
  for (TaskId id : cfg.tasks) {
    const double cot = t.cells.at({id, "cr"}).accuracy();
    const double tot = t.cells.at({id, "tot-cr-q3"}).accuracy();
    const double got = t.cells.at({id, "got-cr-r2"}).accuracy();
    detail << to_string(id) << " cot " << fixed2(cot) << " tot " << fixed2(tot) << " got " << fixed2(got) << "; ";
    o.require(got >= tot - 0.02 && tot >= cot - 0.04, detail.str());
  }
  if (o.pass) o.detail = detail.str();
  return o;
}

// --- 6 ---------------------------------------------------------------------
Outcome template_hit_rates(const std::vector<RunRecord>& supervised) {
  Outcome o;
  for (const auto& r : supervised) {
    if (r.condition == "cr") o.require(r.classification == "Correct", "cr trace classified " + r.classification);
    if (r.condition == "in") o.require(r.classification == "Incorrect", "in trace classified " + r.classification);
  }
  RunConfig cfg;
  cfg.conditions = parse_conditions("cot");
  cfg.n = 500;
  const auto t = aggregate(collect(cfg));
  std::ostringstream detail;
  for (auto level : {HierarchyLevel::R, HierarchyLevel::CF, HierarchyLevel::CS}) {
    const double want = cfg.scripted.template_hit_rate[static_cast<std::size_t>(level)];
    const double got = t.template_hits.at(level).accuracy();
    detail << to_string(level) << " " << fixed2(got) << " (target " << fixed2(want) << ") ";
    o.require(std::abs(got - want) <= 0.05, detail.str());
  }
  if (o.pass) o.detail = detail.str() + "; supervised traces classified 100%";
  return o;
}

// --- 7 ---------------------------------------------------------------------
Outcome theory_values() {
  Outcome o;
  std::vector<std::vector<cpp_int>> pascal(65);
  for (std::size_t m = 0; m <= 64; ++m) {
    pascal[m].assign(m + 1, 1);
    for (std::size_t s = 1; s < m; ++s) pascal[m][s] = pascal[m - 1][s - 1] + pascal[m - 1][s];
    for (std::size_t s = 0; s <= m; ++s) o.require(template_count(m, s) == pascal[m][s], "C(" + std::to_string(m) + ")");
  }
  const auto ratio = [](TaskId id, int n) {
    return answer_space_ratio(id, n, get_template(id, SupervisionKind::Incorrect)).ratio_text();
  };
  o.require(ratio(TaskId::ParityCheck, 8) == "1/2", "parity ratio " + ratio(TaskId::ParityCheck, 8));
  o.require(ratio(TaskId::CycleNavigation, 8) == "1/5", "cycle ratio " + ratio(TaskId::CycleNavigation, 8));
  o.require(ratio(TaskId::ReverseList, 4) == "1/24", "reverse ratio " + ratio(TaskId::ReverseList, 4));
  if (o.pass) o.detail = "C(m, s) for m <= 64; ratios 1/2, 1/5, 1/24";
  return o;
}

// --- 8 ---------------------------------------------------------------------
Outcome reproducible_runs() {
  Outcome o;
  const auto dir = scratch("repro");
  RunConfig cfg;
  cfg.conditions = parse_conditions("nocot,cot,cr,in,tot-q3,got-in-r2");
  cfg.n = 10;
  cfg.master_seed = 7;
  cfg.scripted.step_noise_eps = 0.1;
  auto read_stripped = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    while (std::getline(in, line)) {
      auto j = nlohmann::ordered_json::parse(line);
      j["wall_ms"] = 0;
      out += j.dump() + "\n";
    }
    return out;
  };
  run_matrix_to_file(cfg, (dir / "a.jsonl").string());
  run_matrix_to_file(cfg, (dir / "b.jsonl").string());
  const auto a = read_stripped(dir / "a.jsonl");
  const auto b = read_stripped(dir / "b.jsonl");
  o.require(!a.empty() && a == b, "runs differ");
  if (o.pass) o.detail = std::to_string(std::count(a.begin(), a.end(), '\n')) + " records identical";
  fs::remove_all(dir);
  return o;
}

// --- 9 ---------------------------------------------------------------------
Outcome http_failure_handling() {
  Outcome o;
  stub::Server server;
  const auto bundle = build_prompt(generate_instance(TaskId::ParityCheck, 5, 1), parse_condition("cr"));
  auto cfg = [&](const std::string& mode) {
    EndpointConfig c;
    c.base_url = server.url(mode);
    c.timeout_s = 0.5;
    c.max_retries = 2;
    c.backoff_initial_ms = 10;
    c.backoff_cap_ms = 20;
    return c;
  };
  const auto echo = http_complete(bundle, cfg("echo"));
  o.require(echo.ok() && echo.text == bundle.user_text, "echo failed: " + echo.error_text());
  const auto retry = http_complete(bundle, cfg("flaky"));
  o.require(retry.ok() && retry.attempts == 2, "429 not retried");
  const auto timeout = http_complete(bundle, cfg("slow"));
  o.require(timeout.status == CallStatus::Timeout && timeout.attempts == 3, "timeout: " + timeout.error_text());
  const auto malformed = http_complete(bundle, cfg("broken"));
  o.require(malformed.status == CallStatus::MalformedResponse, "malformed: " + malformed.error_text());
  if (o.pass) o.detail = "echo, 429 retry, timeout after 3 attempts, malformed body";
  return o;
}

}  // namespace

int main() {
  std::vector<RunRecord> supervised;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle agrees with brute force on 1000 instances per task", oracle_matches_brute_force},
      {"worked examples reproduce; errata noted", worked_examples_reproduce},
      {"template audit at length 6", template_audit},
      {"Correct template solves; Incorrect and no chain stay at chance", [&] { return supervision_gap(supervised); }},
      {"GoT >= ToT - 0.02 and ToT >= CoT - 0.04 under noise", search_modes_order},
      {"template hit rates and classification", [&] { return template_hit_rates(supervised); }},
      {"template counts and answer-space ratios", theory_values},
      {"runs reproduce byte for byte apart from wall_ms", reproducible_runs},
      {"HTTP retry, timeout and malformed handling", http_failure_handling},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i + 1 << ": " << criteria[i].first << " (" << o.detail << ")"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
