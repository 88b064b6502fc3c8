#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "dsnt/eval.hpp"
#include "dsnt/nnet.hpp"

namespace dsnt {

inline constexpr double kInfiniteThreshold = std::numeric_limits<double>::infinity();

/// Documents of at most `threshold` words go to the short model.
struct ThresholdRule {
  double threshold = 0.0;
  std::string short_model;
  std::string long_model;
  Metric metric = Metric::Acc;
};

/// One tuning run: star predictions of both models on the dev set.
struct TuningRun {
  std::vector<int> short_preds;
  std::vector<int> long_preds;
};

struct TuningResult {
  ThresholdRule rule;
  std::vector<double> run_thresholds;  // optimum of each run
  std::vector<double> run_scores;      // ensemble metric at that optimum
};

/// Per run, scans 0, every distinct dev length and infinity and keeps the best
/// threshold for the metric (smaller threshold on ties). The rule's threshold
/// is the mean of the per-run optima.
TuningResult tune_threshold(const std::vector<TuningRun>& runs, const std::vector<int>& golds,
                            const std::vector<std::size_t>& lengths, Metric metric,
                            const std::string& short_model = "A", const std::string& long_model = "B");

/// Star predictions of the ensemble at threshold t.
std::vector<int> ensemble_stars(double threshold, const std::vector<std::size_t>& lengths,
                                const std::vector<int>& short_preds, const std::vector<int>& long_preds);

/// Short-side inclusive selection: length <= t picks `pred_short`.
const Prediction& ensemble_predict(const ThresholdRule& rule, std::size_t length, const Prediction& pred_short,
                                   const Prediction& pred_long);

/// {"threshold": float, "short": str, "long": str, "metric": str}; an
/// infinite threshold is written as the largest finite double.
void save_rule(const std::filesystem::path& path, const ThresholdRule& rule);
ThresholdRule load_rule(const std::filesystem::path& path);

}  // namespace dsnt
