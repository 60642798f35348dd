#pragma once

// Shared vocabulary: task identifiers, hierarchy levels, error type, and the
// seeded random helpers every generator and agent draws from.

#include <array>
#include <cctype>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cotsup {

enum class ErrorCode {
  UnsupportedLength,
  TypeMismatch,
  MalformedPayload,
  TooLarge,
  NotRegistered,
  InsufficientState,
  InvalidCondition,
  InvalidParams,
  ConfigError,
  EmptyInput,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedLength: return "UnsupportedLength";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::MalformedPayload: return "MalformedPayload";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotRegistered: return "NotRegistered";
    case ErrorCode::InsufficientState: return "InsufficientState";
    case ErrorCode::InvalidCondition: return "InvalidCondition";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class HierarchyLevel { R, CF, CS };

inline std::string_view to_string(HierarchyLevel level) {
  switch (level) {
    case HierarchyLevel::R: return "R";
    case HierarchyLevel::CF: return "CF";
    case HierarchyLevel::CS: return "CS";
  }
  return "?";
}

enum class TaskId {
  ModArithSimple,
  ParityCheck,
  CycleNavigation,
  StackManipulation,
  ReverseList,
  ModArithComplex,
  OddsFirst,
  Addition,
  Multiplication,
  Sorting,
};

inline constexpr std::array<TaskId, 10> kAllTasks = {
    TaskId::ModArithSimple,    TaskId::ParityCheck, TaskId::CycleNavigation,
    TaskId::StackManipulation, TaskId::ReverseList, TaskId::ModArithComplex,
    TaskId::OddsFirst,         TaskId::Addition,    TaskId::Multiplication,
    TaskId::Sorting,
};

inline std::string_view to_string(TaskId id) {
  switch (id) {
    case TaskId::ModArithSimple: return "mod-arith-simple";
    case TaskId::ParityCheck: return "parity-check";
    case TaskId::CycleNavigation: return "cycle-navigation";
    case TaskId::StackManipulation: return "stack-manipulation";
    case TaskId::ReverseList: return "reverse-list";
    case TaskId::ModArithComplex: return "mod-arith-complex";
    case TaskId::OddsFirst: return "odds-first";
    case TaskId::Addition: return "addition";
    case TaskId::Multiplication: return "multiplication";
    case TaskId::Sorting: return "sorting";
  }
  return "?";
}

inline TaskId parse_task_id(std::string_view text) {
  for (TaskId id : kAllTasks) {
    if (to_string(id) == text) return id;
  }
  throw Error(ErrorCode::ConfigError, "unknown task id '" + std::string(text) + "'");
}

inline HierarchyLevel level_of(TaskId id) {
  switch (id) {
    case TaskId::ModArithSimple:
    case TaskId::ParityCheck:
    case TaskId::CycleNavigation:
      return HierarchyLevel::R;
    case TaskId::StackManipulation:
    case TaskId::ReverseList:
    case TaskId::ModArithComplex:
      return HierarchyLevel::CF;
    default:
      return HierarchyLevel::CS;
  }
}

inline HierarchyLevel parse_level(std::string_view text) {
  std::string up(text);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "R") return HierarchyLevel::R;
  if (up == "CF") return HierarchyLevel::CF;
  if (up == "CS") return HierarchyLevel::CS;
  throw Error(ErrorCode::ConfigError, "unknown hierarchy level '" + std::string(text) + "'");
}

inline std::vector<TaskId> tasks_at(HierarchyLevel level) {
  std::vector<TaskId> out;
  for (TaskId id : kAllTasks) {
    if (level_of(id) == level) out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Seeding.
//
// Engines are std::mt19937_64 (output fully fixed by the standard). Bounded
// draws go through uniform_below/bernoulli below instead of <random>
// distributions, whose outputs differ between standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Combines a parent seed with a child key; the result is a new independent
// stream seed.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) {
  return splitmix64(splitmix64(parent) ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view key) {
  return derive_seed(parent, fnv1a64(key));
}

using Rng = std::mt19937_64;

// Uniform integer in [0, bound) by rejection sampling.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::InvalidParams, "uniform_below(0)");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

// 53-bit uniform in [0, 1).
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform_unit(rng) < p;
}

}  // namespace cotsup
