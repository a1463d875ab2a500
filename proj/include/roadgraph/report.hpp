#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace roadgraph {

using StageTimings = std::vector<std::pair<std::string, double>>;  // name, ms

// Wall-clock stage durations in the order stages finish.
class StageTimer {
 public:
  class Scope {
   public:
    Scope(StageTimer* t, std::string name) : timer_(t), name_(std::move(name)), start_(Clock::now()) {}
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;
    ~Scope() {
      if (timer_) timer_->record(name_, std::chrono::duration<double, std::milli>(Clock::now() - start_).count());
    }

   private:
    StageTimer* timer_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
  };

  // Null-safe: stage(nullptr, ...) times nothing.
  static Scope stage(StageTimer* t, std::string name) { return Scope(t, std::move(name)); }

  void record(const std::string& name, double ms) { timings_.emplace_back(name, ms < 0.0 ? 0.0 : ms); }
  const StageTimings& timings() const { return timings_; }

 private:
  using Clock = std::chrono::steady_clock;
  StageTimings timings_;
};

// {"stage": ms, ...} in recorded order; repeated names are summed.
nlohmann::ordered_json timing_report(const StageTimings& stages);

struct RunReport {
  std::string command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  StageTimings timings;
  std::vector<std::string> outputs;
  nlohmann::ordered_json scores;  // null when the command computes none

  nlohmann::ordered_json to_json() const;
};

}  // namespace roadgraph
