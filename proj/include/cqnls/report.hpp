#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cqnls/fit.hpp"
#include "cqnls/nls.hpp"

namespace cqnls {

/// Outcome of one acceptance check. `criterion` is an acceptance-criterion id in 1..10.
struct Verdict {
  int criterion;
  std::string check;
  bool pass;
  double measured;
  double expected;
  double tolerance;
};

/// Throws InvalidArgument for ids outside 1..10.
Verdict make_verdict(int criterion, std::string check, bool pass, double measured, double expected, double tolerance);

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ScanReport {
  std::string command;
  std::vector<Table> tables;
  std::vector<CollapsePoint> points;
  std::optional<PowerLawFit> fit;
  std::vector<Verdict> verdicts;
  std::vector<std::filesystem::path> files;

  bool all_pass() const;
};

/// Shortest round-trip form "%.17g".
std::string format_real(double v);

/// Comma-separated, '.' decimal, LF line endings, header row.
void write_csv(const Table& table, const std::filesystem::path& path);
std::string verdict_json(const Verdict& v);
void write_verdicts(const std::vector<Verdict>& verdicts, const std::filesystem::path& path);

/// fn(0..count-1) on up to `jobs` threads; results keep index order and the first failure by
/// index is rethrown after all workers finish.
template <class Fn>
auto ordered_map(std::size_t count, int jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace cqnls
