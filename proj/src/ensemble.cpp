#include "dsnt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dsnt/common.hpp"
#include "json.hpp"

namespace dsnt {

std::vector<int> ensemble_stars(double threshold, const std::vector<std::size_t>& lengths,
                                const std::vector<int>& short_preds, const std::vector<int>& long_preds) {
  if (lengths.size() != short_preds.size() || lengths.size() != long_preds.size())
    throw Error("ensemble: predictions and lengths are not aligned");
  std::vector<int> out(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i)
    out[i] = static_cast<double>(lengths[i]) <= threshold ? short_preds[i] : long_preds[i];
  return out;
}

TuningResult tune_threshold(const std::vector<TuningRun>& runs, const std::vector<int>& golds,
                            const std::vector<std::size_t>& lengths, Metric metric, const std::string& short_model,
                            const std::string& long_model) {
  if (golds.empty()) throw Error("tune_threshold: empty dev set");
  if (runs.empty()) throw Error("tune_threshold: no tuning runs");
  if (lengths.size() != golds.size()) throw Error("tune_threshold: lengths and labels are not aligned");

  std::vector<double> candidates{0.0};
  for (auto l : std::set<std::size_t>(lengths.begin(), lengths.end()))
    if (l > 0) candidates.push_back(static_cast<double>(l));
  candidates.push_back(kInfiniteThreshold);

  TuningResult result;
  const bool maximize = higher_is_better(metric);
  for (const auto& run : runs) {
    double best_t = 0.0, best = 0.0;
    bool first = true;
    for (double t : candidates) {  // ascending, so strict improvement keeps the smaller t on ties
      double v = metric_value(compute_metrics(ensemble_stars(t, lengths, run.short_preds, run.long_preds), golds), metric);
      if (first || (maximize ? v > best : v < best)) {
        best = v;
        best_t = t;
        first = false;
      }
    }
    result.run_thresholds.push_back(best_t);
    result.run_scores.push_back(best);
  }
  double sum = 0.0;
  for (double t : result.run_thresholds) sum += t;
  result.rule = {sum / static_cast<double>(runs.size()), short_model, long_model, metric};
  return result;
}

const Prediction& ensemble_predict(const ThresholdRule& rule, std::size_t length, const Prediction& pred_short,
                                   const Prediction& pred_long) {
  return static_cast<double>(length) <= rule.threshold ? pred_short : pred_long;
}

void save_rule(const std::filesystem::path& path, const ThresholdRule& rule) {
  nlohmann::json j;
  j["threshold"] = std::isinf(rule.threshold) ? std::numeric_limits<double>::max() : rule.threshold;
  j["short"] = rule.short_model;
  j["long"] = rule.long_model;
  j["metric"] = to_string(rule.metric);
  io::write_atomic(path, j.dump(1) + "\n");
}

ThresholdRule load_rule(const std::filesystem::path& path) {
  try {
    auto j = nlohmann::json::parse(io::read_file(path));
    ThresholdRule r;
    r.threshold = j.at("threshold").get<double>();
    if (r.threshold == std::numeric_limits<double>::max()) r.threshold = kInfiniteThreshold;
    if (!(r.threshold >= 0.0)) throw Error("threshold must be >= 0");
    r.short_model = j.at("short").get<std::string>();
    r.long_model = j.at("long").get<std::string>();
    r.metric = parse_metric(j.at("metric").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": bad rule file (" + e.what() + ")");
  }
}

}  // namespace dsnt
