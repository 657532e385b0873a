#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "vcasir/error.hpp"

namespace vcasir {

struct CorrelationMetrics {
  double plcc = 0.0;
  double srcc = 0.0;
  double krcc = 0.0;
  double rmse = 0.0;
};

/// Pearson correlation; empty when either input has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) return std::nullopt;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// 1-based ranks with ties replaced by their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

/// Kendall tau-b.
inline std::optional<double> kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) return std::nullopt;
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0) ++ties_a;
      if (db == 0.0) ++ties_b;
      const double s = da * db;
      if (s > 0.0) ++concordant;
      else if (s < 0.0) ++discordant;
    }
  const auto pairs = static_cast<long long>(n * (n - 1) / 2);
  const double denom = std::sqrt(static_cast<double>(pairs - ties_a) * static_cast<double>(pairs - ties_b));
  if (denom <= 0.0) return std::nullopt;
  return static_cast<double>(concordant - discordant) / denom;
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

/// PLCC, SRCC, KRCC (tau-b) and RMSE of predictions against MOS, without any nonlinear
/// mapping. Throws UndefinedCorrelationError (carrying the RMSE) on zero variance.
inline CorrelationMetrics correlation_metrics(std::span<const double> pred, std::span<const double> mos) {
  if (pred.size() != mos.size()) throw InputError("correlation: length mismatch");
  if (pred.size() < 2) throw InputError("correlation: need at least 2 samples");
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!std::isfinite(pred[i]) || !std::isfinite(mos[i])) throw DataError("correlation: non-finite input");
  CorrelationMetrics m;
  m.rmse = rmse(pred, mos);
  const auto p = pearson(pred, mos);
  const auto s = spearman(pred, mos);
  const auto k = kendall_tau_b(pred, mos);
  if (!p || !s || !k) throw UndefinedCorrelationError("correlation undefined: zero variance input", m.rmse);
  m.plcc = *p;
  m.srcc = *s;
  m.krcc = *k;
  return m;
}

}  // namespace vcasir
