#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uaelab/harness.hpp"

namespace uaelab {

namespace {

// Average ranks: ties share the mean of the positions they occupy.
std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based mean rank
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

SpearmanResult spearman_rho(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman_rho: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman_rho: at least two points required");
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double ax = rx[i] - mx, ay = ry[i] - my;
    sxx += ax * ax;
    syy += ay * ay;
    sxy += ax * ay;
  }
  SpearmanResult res;
  if (sxx <= 0.0 || syy <= 0.0) {
    res.defined = false;  // a constant side has no ranking to correlate
    return res;
  }
  res.rho = sxy / std::sqrt(sxx * syy);
  res.defined = true;
  return res;
}

std::vector<CorrelationEntry> correlate_metrics(
    const std::vector<MetricRecord>& records,
    const std::vector<std::pair<std::string, std::vector<double>>>& score_columns) {
  if (records.size() < 2)
    throw std::invalid_argument("correlate_metrics: at least two records required");
  for (const auto& [name, col] : score_columns)
    if (col.size() != records.size())
      throw std::invalid_argument("correlate_metrics: score column '" + name +
                                  "' length does not match records");
  const bool low_power = records.size() < 3;

  std::vector<std::pair<std::string, std::vector<double>>> metric_columns;
  auto push = [&](const std::string& name, auto getter) {
    std::vector<double> col;
    col.reserve(records.size());
    for (const auto& r : records) col.push_back(getter(r));
    metric_columns.emplace_back(name, std::move(col));
  };
  push("params", [](const MetricRecord& r) { return static_cast<double>(r.params); });
  push("flops", [](const MetricRecord& r) { return static_cast<double>(r.flops); });
  push("psnr", [](const MetricRecord& r) { return r.psnr; });
  push("cpu_ms", [](const MetricRecord& r) { return r.cpu_ms; });
  push("param_eff", [](const MetricRecord& r) { return r.param_eff; });

  std::vector<CorrelationEntry> out;
  for (const auto& [sname, scol] : score_columns)
    for (const auto& [mname, mcol] : metric_columns) {
      const SpearmanResult r = spearman_rho(scol, mcol);
      CorrelationEntry e;
      e.variant = sname;
      e.metric = mname;
      e.rho = r.rho;
      e.defined = r.defined;
      e.low_power = low_power;
      out.push_back(std::move(e));
    }
  return out;
}

}  // namespace uaelab
