#pragma once

// Experiment matrix: run records, persistence, aggregation and reports.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotsup/core.hpp"
#include "cotsup/grader.hpp"
#include "cotsup/http_agent.hpp"
#include "cotsup/oracle.hpp"
#include "cotsup/prompt.hpp"
#include "cotsup/scripted_agent.hpp"
#include "cotsup/task_suite.hpp"
#include "cotsup/templates.hpp"

namespace cotsup {

using ojson = nlohmann::ordered_json;

enum class AgentKind { Scripted, Http };

struct RunConfig {
  std::vector<TaskId> tasks{kAllTasks.begin(), kAllTasks.end()};
  std::vector<Condition> conditions{parse_condition("nocot"), parse_condition("cr"), parse_condition("in")};
  AgentKind agent = AgentKind::Scripted;
  int n = 50;
  LengthRange lengths = kDefaultLengths;
  std::uint64_t master_seed = 0;
  ScriptedAgentConfig scripted;
  EndpointConfig endpoint;
};

inline LengthRange parse_length_range(std::string_view text) {
  const std::string s = detail::trim(text);
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(s);
      return {v, v};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad length range '" + s + "', expected A..B");
  }
}

inline std::vector<std::string> split_csv(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
  return out;
}

inline std::vector<Condition> parse_conditions(std::string_view text) {
  std::vector<Condition> out;
  for (const auto& s : split_csv(text)) out.push_back(parse_condition(s));
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no conditions given");
  return out;
}

inline std::vector<TaskId> parse_tasks(std::string_view text) {
  std::vector<TaskId> out;
  for (const auto& s : split_csv(text)) {
    if (s == "all") return {kAllTasks.begin(), kAllTasks.end()};
    out.push_back(parse_task_id(s));
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "no tasks given");
  return out;
}

// Applies one key/value setting. Unknown keys are a ConfigError.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto num = [&]() {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "'" + key + "' needs a number, got '" + value + "'");
    }
  };
  auto u64 = [&]() {
    try {
      return static_cast<std::uint64_t>(std::stoull(value));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "'" + key + "' needs an unsigned integer, got '" + value + "'");
    }
  };
  if (key == "task" || key == "tasks") {
    cfg.tasks = parse_tasks(value);
  } else if (key == "level") {
    cfg.tasks = tasks_at(parse_level(value));
  } else if (key == "condition" || key == "conditions") {
    cfg.conditions = parse_conditions(value);
  } else if (key == "agent") {
    if (value == "scripted") {
      cfg.agent = AgentKind::Scripted;
    } else if (value == "http") {
      cfg.agent = AgentKind::Http;
    } else {
      throw Error(ErrorCode::ConfigError, "agent must be scripted or http");
    }
  } else if (key == "n") {
    cfg.n = static_cast<int>(u64());
  } else if (key == "len" || key == "lengths") {
    cfg.lengths = parse_length_range(value);
  } else if (key == "seed") {
    cfg.master_seed = u64();
  } else if (key == "eps") {
    cfg.scripted.step_noise_eps = num();
  } else if (key == "checker_noise") {
    cfg.scripted.checker_noise = num();
  } else if (key == "budget" || key == "internal_budget_c") {
    cfg.scripted.internal_budget_c = static_cast<int>(u64());
  } else if (key == "guess_seed") {
    cfg.scripted.guess_seed = u64();
  } else if (key == "hit_rate_r") {
    cfg.scripted.template_hit_rate[0] = num();
  } else if (key == "hit_rate_cf") {
    cfg.scripted.template_hit_rate[1] = num();
  } else if (key == "hit_rate_cs") {
    cfg.scripted.template_hit_rate[2] = num();
  } else if (key == "q" || key == "r") {
    const int k = static_cast<int>(u64());
    for (auto& c : cfg.conditions) (key == "q" ? c.branch_q : c.revisit_r) = k;
  } else if (key == "base_url") {
    cfg.endpoint.base_url = value;
  } else if (key == "model" || key == "model_name") {
    cfg.endpoint.model_name = value;
  } else if (key == "api_key_ref" || key == "api_key_env") {
    cfg.endpoint.api_key_ref = value;
  } else if (key == "timeout_s") {
    cfg.endpoint.timeout_s = num();
  } else if (key == "max_in_flight") {
    cfg.endpoint.max_in_flight = static_cast<int>(u64());
  } else if (key == "max_retries") {
    cfg.endpoint.max_retries = static_cast<int>(u64());
  } else if (key == "temperature") {
    cfg.endpoint.temperature = num();
  } else {
    throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
}

// "key = value" lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return out;
}

inline void validate_run_config(const RunConfig& cfg) {
  if (cfg.tasks.empty()) throw Error(ErrorCode::ConfigError, "no tasks");
  if (cfg.conditions.empty()) throw Error(ErrorCode::ConfigError, "no conditions");
  if (cfg.n < 1) throw Error(ErrorCode::ConfigError, "n must be positive");
  if (cfg.lengths.lo < 1 || cfg.lengths.hi < cfg.lengths.lo) throw Error(ErrorCode::ConfigError, "bad length range");
  for (const auto& c : cfg.conditions) validate_condition(c);
  try {
    validate_agent_config(cfg.scripted);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (cfg.agent == AgentKind::Http) validate_endpoint_config(cfg.endpoint);
}

// ---------------------------------------------------------------------------
// Records

struct RunRecord {
  ojson instance_ref;
  std::string condition;
  std::string agent;
  std::string raw_output;
  std::optional<Grade> grade;
  std::string classification = "Unknown";
  std::optional<std::size_t> depth_used;
  std::uint64_t oracle_depth = 0;
  std::int64_t wall_ms = 0;
  std::optional<std::string> error;
};

inline ojson record_to_json(const RunRecord& r) {
  ojson j;
  j["instance_ref"] = r.instance_ref;
  j["condition"] = r.condition;
  j["agent"] = r.agent;
  j["raw_output"] = r.raw_output;
  j["grade"] = r.grade ? grade_to_json(*r.grade) : ojson(nullptr);
  j["classification"] = r.classification;
  j["depth_used"] = r.depth_used ? ojson(*r.depth_used) : ojson(nullptr);
  j["oracle_depth"] = r.oracle_depth;
  j["wall_ms"] = r.wall_ms;
  j["error"] = r.error ? ojson(*r.error) : ojson(nullptr);
  return j;
}

inline RunRecord record_from_json(const ojson& j) {
  try {
    RunRecord r;
    r.instance_ref = j.at("instance_ref");
    r.condition = j.at("condition").get<std::string>();
    r.agent = j.at("agent").get<std::string>();
    r.raw_output = j.value("raw_output", std::string{});
    if (j.contains("grade") && !j["grade"].is_null()) {
      const auto& g = j["grade"];
      r.grade = Grade{g.at("correct").get<bool>(), g.value("normalized_expected", std::string{}),
                      g.value("normalized_got", std::string{})};
    }
    r.classification = j.value("classification", std::string("Unknown"));
    if (j.contains("depth_used") && !j["depth_used"].is_null()) r.depth_used = j["depth_used"].get<std::size_t>();
    r.oracle_depth = j.value("oracle_depth", std::uint64_t{0});
    r.wall_ms = j.value("wall_ms", std::int64_t{0});
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedPayload, std::string("bad run record: ") + e.what());
  }
}

inline std::string record_key(const RunRecord& r) {
  return r.instance_ref.dump() + "|" + r.condition + "|" + r.agent;
}

inline std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read records '" + path + "'");
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto j = ojson::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::MalformedPayload, "bad JSON line in '" + path + "'");
    out.push_back(record_from_json(j));
  }
  return out;
}

inline TaskInstance instance_from_ref(const ojson& ref) {
  try {
    return generate_instance(parse_task_id(ref.at("task_id").get<std::string>()), ref.at("length_n").get<int>(),
                             ref.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedPayload, std::string("bad instance_ref: ") + e.what());
  }
}

inline std::string agent_id(const RunConfig& cfg) {
  return cfg.agent == AgentKind::Scripted ? std::string("scripted") : "http:" + cfg.endpoint.model_name;
}

// Fills grade, classification and depth_used from raw_output.
inline void score_record(RunRecord& r, const TaskInstance& inst, const Condition& cond) {
  r.oracle_depth = required_depth(inst.task_id, inst.length_n);
  if (r.error) {
    r.grade.reset();
    r.classification = "Unknown";
    r.depth_used.reset();
    return;
  }
  const auto kind = classify_template(r.raw_output, inst.task_id);
  r.classification = classification_text(kind);
  r.grade = grade(inst, extract_final_answer(r.raw_output));
  r.depth_used.reset();
  std::optional<SupervisionKind> parse_as = cond.supervision != SupervisionKind::Unsupervised
                                                ? std::optional(cond.supervision)
                                                : kind;
  if (cond.mode != Mode::NoCoT && parse_as) {
    r.depth_used = parse_trace(r.raw_output, get_template(inst.task_id, *parse_as)).steps.size();
  }
}

// Re-grades records from their instance references.
inline RunRecord rescore(RunRecord r) {
  score_record(r, instance_from_ref(r.instance_ref), parse_condition(r.condition));
  return r;
}

// ---------------------------------------------------------------------------
// Running

class RecordSink {
 public:
  explicit RecordSink(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot append to '" + path + "'");
  }
  void write(const RunRecord& r) {
    out_ << record_to_json(r).dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

struct RunSummary {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::size_t errors = 0;
};

inline std::vector<TaskInstance> matrix_instances(const RunConfig& cfg, TaskId id) {
  std::vector<TaskInstance> out;
  for (int i = 0; i < cfg.n; ++i) {
    out.push_back(generate_instance(id, instance_seed(cfg.master_seed, id, static_cast<std::uint64_t>(i)), cfg.lengths));
  }
  return out;
}

// Runs every (task, instance, condition) cell once and hands each record to
// `emit`, in a fixed order. Keys in `done` are skipped (resume).
template <typename Emit>
RunSummary run_matrix(const RunConfig& cfg, const std::set<std::string>& done, Emit&& emit) {
  validate_run_config(cfg);
  RunSummary summary;
  const std::string agent = agent_id(cfg);
  std::optional<EndpointClient> client;
  if (cfg.agent == AgentKind::Http) client.emplace(cfg.endpoint);

  for (TaskId id : cfg.tasks) {
    const auto instances = matrix_instances(cfg, id);
    struct Pending {
      RunRecord record;
      const TaskInstance* inst;
      Condition cond;
    };
    std::vector<Pending> pending;
    for (const auto& inst : instances) {
      for (const auto& cond : cfg.conditions) {
        RunRecord r;
        r.instance_ref = instance_ref(inst);
        r.condition = describe(cond);
        r.agent = agent;
        if (done.count(record_key(r)) != 0) {
          ++summary.skipped;
          continue;
        }
        pending.push_back({std::move(r), &inst, cond});
      }
    }
    if (client) {
      std::vector<PromptBundle> bundles;
      for (const auto& p : pending) bundles.push_back(build_prompt(*p.inst, p.cond));
      const auto t0 = std::chrono::steady_clock::now();
      const auto outcomes = client->complete_all(bundles);
      const auto elapsed =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
      for (std::size_t i = 0; i < pending.size(); ++i) {
        auto& p = pending[i];
        p.record.raw_output = outcomes[i].text;
        if (!outcomes[i].ok()) p.record.error = outcomes[i].error_text();
        p.record.wall_ms = pending.empty() ? 0 : elapsed / static_cast<std::int64_t>(pending.size());
      }
    } else {
      for (auto& p : pending) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
          p.record.raw_output = scripted_run(*p.inst, p.cond, cfg.scripted);
        } catch (const std::exception& e) {
          p.record.error = e.what();
        }
        p.record.wall_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
      }
    }
    for (auto& p : pending) {
      score_record(p.record, *p.inst, p.cond);
      if (p.record.error) ++summary.errors;
      emit(p.record);
      ++summary.written;
    }
  }
  return summary;
}

// Appends to `path`, skipping cells already recorded there.
inline RunSummary run_matrix_to_file(const RunConfig& cfg, const std::string& path) {
  std::set<std::string> done;
  if (std::ifstream probe(path); probe) {
    for (const auto& r : read_records(path)) done.insert(record_key(r));
  }
  RecordSink sink(path);
  return run_matrix(cfg, done, [&](const RunRecord& r) { sink.write(r); });
}

// ---------------------------------------------------------------------------
// Aggregation

struct Cell {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct ReportTable {
  std::vector<TaskId> tasks;            // hierarchy order
  std::vector<std::string> conditions;  // canonical column order
  std::map<std::pair<TaskId, std::string>, Cell> cells;
  std::map<HierarchyLevel, Cell> template_hits;  // unsupervised records classified Correct
};

inline ReportTable aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no run records");
  // One record per key; among duplicates the smallest serialization wins so
  // the result does not depend on record order.
  std::map<std::string, ojson> unique;
  for (const auto& r : records) {
    ojson j = record_to_json(r);
    j["wall_ms"] = 0;
    auto [it, inserted] = unique.try_emplace(record_key(r), j);
    if (!inserted && j.dump() < it->second.dump()) it->second = j;
  }
  ReportTable table;
  std::set<TaskId> tasks;
  std::vector<Condition> conds;
  for (const auto& [key, j] : unique) {
    const RunRecord r = record_from_json(j);
    const TaskId id = parse_task_id(r.instance_ref.at("task_id").get<std::string>());
    const Condition cond = parse_condition(r.condition);
    const std::string c = describe(cond);
    tasks.insert(id);
    if (std::find(conds.begin(), conds.end(), cond) == conds.end()) conds.push_back(cond);
    Cell& cell = table.cells[{id, c}];
    ++cell.total;
    if (r.grade && r.grade->correct && !r.error) ++cell.correct;
    if (cond.supervision == SupervisionKind::Unsupervised && cond.mode != Mode::NoCoT) {
      Cell& hit = table.template_hits[level_of(id)];
      ++hit.total;
      if (r.classification == "Correct") ++hit.correct;
    }
  }
  for (TaskId id : kAllTasks) {
    if (tasks.count(id) != 0) table.tasks.push_back(id);
  }
  std::sort(conds.begin(), conds.end(), [](const Condition& a, const Condition& b) {
    const int ra = condition_rank(a);
    const int rb = condition_rank(b);
    return ra != rb ? ra < rb : describe(a) < describe(b);
  });
  for (const auto& c : conds) table.conditions.push_back(describe(c));
  return table;
}

enum class ReportFormat { Text, Csv, Markdown };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw Error(ErrorCode::ConfigError, "format must be text, csv or markdown");
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string render_report(const ReportTable& t, ReportFormat format) {
  auto cell_text = [&](TaskId id, const std::string& c) -> std::string {
    const auto it = t.cells.find({id, c});
    return it == t.cells.end() ? std::string("-") : fixed2(it->second.accuracy());
  };
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "level,task";
    for (const auto& c : t.conditions) out << "," << c << "," << c << "_n";
    out << "\n";
    for (TaskId id : t.tasks) {
      out << to_string(level_of(id)) << "," << to_string(id);
      for (const auto& c : t.conditions) {
        const auto it = t.cells.find({id, c});
        out << "," << cell_text(id, c) << "," << (it == t.cells.end() ? 0 : it->second.total);
      }
      out << "\n";
    }
    return out.str();
  }

  if (format == ReportFormat::Markdown) {
    out << "| Level | Task |";
    for (const auto& c : t.conditions) out << " " << c << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < t.conditions.size(); ++i) out << "---:|";
    out << "\n";
    for (TaskId id : t.tasks) {
      out << "| " << to_string(level_of(id)) << " | " << to_string(id) << " |";
      for (const auto& c : t.conditions) out << " " << cell_text(id, c) << " |";
      out << "\n";
    }
    if (!t.template_hits.empty()) {
      out << "\n| Level | Template hit rate | n |\n|---|---:|---:|\n";
      for (const auto& [level, cell] : t.template_hits) {
        out << "| " << to_string(level) << " | " << fixed2(cell.accuracy()) << " | " << cell.total << " |\n";
      }
    }
    return out.str();
  }

  std::size_t task_w = 4;
  for (TaskId id : t.tasks) task_w = std::max(task_w, to_string(id).size());
  std::vector<std::size_t> col_w;
  for (const auto& c : t.conditions) col_w.push_back(std::max<std::size_t>(c.size(), 4));
  auto pad = [](const std::string& s, std::size_t w, bool right) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    return right ? fill + s : s + fill;
  };
  out << pad("level", 5, false) << "  " << pad("task", task_w, false);
  for (std::size_t i = 0; i < t.conditions.size(); ++i) out << "  " << pad(t.conditions[i], col_w[i], true);
  out << "\n";
  for (TaskId id : t.tasks) {
    out << pad(std::string(to_string(level_of(id))), 5, false) << "  " << pad(std::string(to_string(id)), task_w, false);
    for (std::size_t i = 0; i < t.conditions.size(); ++i) out << "  " << pad(cell_text(id, t.conditions[i]), col_w[i], true);
    out << "\n";
  }
  if (!t.template_hits.empty()) {
    out << "\ntemplate hit rate (unsupervised runs classified Correct)\n";
    for (const auto& [level, cell] : t.template_hits) {
      out << pad(std::string(to_string(level)), 5, false) << "  " << fixed2(cell.accuracy()) << "  (n=" << cell.total
          << ")\n";
    }
  }
  return out.str();
}

inline void emit_report(const ReportTable& t, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write report '" + path + "'");
  out << render_report(t, format);
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace cotsup
