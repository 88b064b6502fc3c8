#include "dsnt/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "dsnt/common.hpp"

namespace dsnt {

Metric parse_metric(const std::string& s) {
  if (s == "acc") return Metric::Acc;
  if (s == "f1") return Metric::F1;
  if (s == "mse") return Metric::Mse;
  if (s == "mae") return Metric::Mae;
  throw Error("unknown metric '" + s + "' (expected acc, f1, mse or mae)");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Acc: return "acc";
    case Metric::F1: return "f1";
    case Metric::Mse: return "mse";
    case Metric::Mae: return "mae";
  }
  return "?";
}

bool higher_is_better(Metric m) { return m == Metric::Acc || m == Metric::F1; }

double metric_value(const MetricsReport& r, Metric m) {
  switch (m) {
    case Metric::Acc: return r.accuracy;
    case Metric::F1: return r.macro_f1;
    case Metric::Mse: return r.mse;
    case Metric::Mae: return r.mae;
  }
  return 0.0;
}

MetricsReport compute_metrics(const std::vector<int>& preds, const std::vector<int>& golds) {
  if (preds.empty()) throw Error("compute_metrics: empty input");
  if (preds.size() != golds.size())
    throw Error("compute_metrics: " + std::to_string(preds.size()) + " predictions for " +
                std::to_string(golds.size()) + " labels");
  std::array<std::size_t, 5> tp{}, fp{}, fn{}, gold_count{};
  std::size_t hits = 0;
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], g = golds[i];
    if (p < 1 || p > 5 || g < 1 || g > 5) throw Error("compute_metrics: star value out of range at " + std::to_string(i));
    const double d = p - g;
    se += d * d;
    ae += std::abs(d);
    ++gold_count[static_cast<std::size_t>(g - 1)];
    if (p == g) {
      ++hits;
      ++tp[static_cast<std::size_t>(g - 1)];
    } else {
      ++fp[static_cast<std::size_t>(p - 1)];
      ++fn[static_cast<std::size_t>(g - 1)];
    }
  }
  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    if (gold_count[k] == 0) continue;
    ++present;
    const double denom = 2.0 * static_cast<double>(tp[k]) + static_cast<double>(fp[k]) + static_cast<double>(fn[k]);
    f1_sum += denom > 0 ? 2.0 * static_cast<double>(tp[k]) / denom : 0.0;
  }
  const double n = static_cast<double>(preds.size());
  MetricsReport r;
  r.accuracy = static_cast<double>(hits) / n;
  r.macro_f1 = f1_sum / static_cast<double>(present);
  r.mse = se / n;
  r.mae = ae / n;
  r.support = preds.size();
  return r;
}

std::string Bin::label() const {
  return std::to_string(lo) + "-" + std::to_string(hi) + " (" + std::to_string(metrics.support) + ")";
}

BinnedReport binned_report(const std::vector<int>& preds, const std::vector<int>& golds,
                           const std::vector<std::size_t>& lengths, std::size_t n_bins) {
  if (preds.empty()) throw Error("binned_report: empty input");
  if (n_bins == 0) throw Error("binned_report: need at least one bin");
  if (preds.size() != golds.size() || preds.size() != lengths.size())
    throw Error("binned_report: predictions, labels and lengths are not aligned");
  const auto [mn_it, mx_it] = std::minmax_element(lengths.begin(), lengths.end());
  const std::size_t mn = *mn_it, mx = *mx_it;
  const std::size_t span = mx - mn + 1;

  std::vector<std::vector<std::size_t>> members(n_bins);
  for (std::size_t i = 0; i < lengths.size(); ++i)
    members[std::min(n_bins - 1, (lengths[i] - mn) * n_bins / span)].push_back(i);

  BinnedReport report;
  for (std::size_t b = 0; b < n_bins; ++b) {
    Bin bin;
    if (members[b].empty()) {
      // nominal edges: smallest and largest length that would map here
      bin.lo = mn + (b * span + n_bins - 1) / n_bins;
      bin.hi = mn + ((b + 1) * span + n_bins - 1) / n_bins - 1;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      bin.metrics = {nan, nan, nan, nan, 0};
    } else {
      std::vector<int> p, g;
      bin.lo = std::numeric_limits<std::size_t>::max();
      for (auto i : members[b]) {
        p.push_back(preds[i]);
        g.push_back(golds[i]);
        bin.lo = std::min(bin.lo, lengths[i]);
        bin.hi = std::max(bin.hi, lengths[i]);
      }
      bin.metrics = compute_metrics(p, g);
    }
    report.bins.push_back(bin);
  }
  return report;
}

std::string format_csv(const BinnedReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,support,acc,f1,mse,mae\n";
  for (const auto& b : report.bins)
    out << b.lo << ',' << b.hi << ',' << b.metrics.support << ',' << b.metrics.accuracy << ',' << b.metrics.macro_f1
        << ',' << b.metrics.mse << ',' << b.metrics.mae << '\n';
  return out.str();
}

void emit_csv(const BinnedReport& report, const std::filesystem::path& path) { io::write_atomic(path, format_csv(report)); }

}  // namespace dsnt
