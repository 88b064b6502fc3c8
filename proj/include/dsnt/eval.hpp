#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dsnt {

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  std::size_t support = 0;
};

enum class Metric { Acc, F1, Mse, Mae };

Metric parse_metric(const std::string& s);
std::string to_string(Metric m);
/// Larger is better for Acc and F1, smaller for MSE and MAE.
bool higher_is_better(Metric m);
double metric_value(const MetricsReport& r, Metric m);

/// Predictions and golds are star values 1..5. Macro-F1 averages per-class F1
/// over the classes that occur in the gold labels.
MetricsReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& golds);

struct Bin {
  std::size_t lo = 0;  // observed min length in the bin (nominal edge when empty)
  std::size_t hi = 0;
  MetricsReport metrics;  // NaN metrics when the bin is empty

  /// Axis label in the "1-211 (27447)" style.
  std::string label() const;
};

struct BinnedReport {
  std::vector<Bin> bins;
};

/// Equal-width bins over [min length, max length] of the evaluated set.
BinnedReport binned_report(const std::vector<int>& preds, const std::vector<int>& golds,
                           const std::vector<std::size_t>& lengths, std::size_t n_bins = 5);

/// Header bin_lo,bin_hi,support,acc,f1,mse,mae then one row per bin.
std::string format_csv(const BinnedReport& report);
void emit_csv(const BinnedReport& report, const std::filesystem::path& path);

}  // namespace dsnt
