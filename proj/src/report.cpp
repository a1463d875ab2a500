#include "roadgraph/report.hpp"

namespace roadgraph {

nlohmann::ordered_json timing_report(const StageTimings& stages) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [name, ms] : stages) {
    out[name] = out.contains(name) ? out[name].get<double>() + ms : ms;
  }
  return out;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["params"] = params;
  j["timings"] = timing_report(timings);
  j["outputs"] = outputs;
  if (!scores.is_null()) j["scores"] = scores;
  return j;
}

}  // namespace roadgraph
