#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vcasir/error.hpp"
#include "vcasir/features.hpp"
#include "vcasir/metrics.hpp"
#include "vcasir/rng.hpp"
#include "vcasir/svr.hpp"

namespace vcasir {

/// Subset of the feature families, selected by name: dr, bd, did, niq, fiq.
class FeatureSet {
 public:
  enum Family : unsigned { Dr = 1, Bd = 2, Did = 4, Niq = 8, Fiq = 16 };

  FeatureSet() = default;
  explicit FeatureSet(unsigned mask) : mask_(mask) {}

  /// Accepts "dr,bd,did" or "DR+BD+DID".
  static FeatureSet parse(std::string_view text) {
    unsigned mask = 0;
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      std::string t;
      for (char c : tok) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      if (t == "dr") mask |= Dr;
      else if (t == "bd") mask |= Bd;
      else if (t == "did") mask |= Did;
      else if (t == "niq") mask |= Niq;
      else if (t == "fiq") mask |= Fiq;
      else throw ParameterError("unknown feature family '" + tok + "'");
      tok.clear();
    };
    for (char c : text) {
      if (c == ',' || c == '+') flush();
      else if (!std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
    }
    flush();
    if (mask == 0) throw ParameterError("empty feature selection");
    return FeatureSet(mask);
  }

  bool has(Family f) const noexcept { return (mask_ & f) != 0; }
  unsigned mask() const noexcept { return mask_; }

  /// Report label in canonical order, e.g. "NIQ+DR+BD+DID".
  std::string label() const {
    std::string out;
    auto add = [&](Family f, const char* name) {
      if (!has(f)) return;
      if (!out.empty()) out += '+';
      out += name;
    };
    add(Fiq, "FIQ");
    add(Niq, "NIQ");
    add(Dr, "DR");
    add(Bd, "BD");
    add(Did, "DID");
    return out;
  }

  /// Selected columns, always in FeatureVector order.
  std::vector<double> select(const FeatureVector& fv) const {
    std::vector<double> out;
    if (has(Dr)) out.push_back(fv.dr);
    if (has(Bd)) out.insert(out.end(), fv.bd.begin(), fv.bd.end());
    if (has(Did)) out.insert(out.end(), fv.did.begin(), fv.did.end());
    if (has(Niq)) out.insert(out.end(), fv.niq.begin(), fv.niq.end());
    if (has(Fiq)) {
      if (fv.fiq.empty()) throw InputError("feature set requests FIQ but no external scores are present");
      out.insert(out.end(), fv.fiq.begin(), fv.fiq.end());
    }
    return out;
  }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  unsigned mask_ = Dr | Bd | Did | Niq;
};

struct MosLabels {
  double vc = 0.0;
  std::optional<double> iq, dq, ov;
};

struct RatedSample {
  std::string id;
  std::string scene;
  std::string method;
  FeatureVector features;
  MosLabels mos;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

struct EvalReport {
  std::string features;
  MetricSummary plcc, srcc, krcc, rmse;
  std::size_t iterations = 0;  // completed
  std::size_t skipped = 0;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct CrossValidationOptions {
  std::size_t iterations = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool group_by_scene = true;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Random train/test split over scene groups (or single samples when ungrouped).
inline Split random_split(const std::vector<RatedSample>& data, double train_fraction, bool group_by_scene,
                          Rng& rng) {
  std::vector<std::vector<std::size_t>> groups;
  if (group_by_scene) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto [it, fresh] = index.try_emplace(data[i].scene, groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) groups.push_back({i});
  }
  std::vector<std::size_t> order(groups.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  rng.shuffle(order);
  const auto n_groups = static_cast<long>(groups.size());
  const long n_train =
      std::clamp(static_cast<long>(std::lround(train_fraction * static_cast<double>(n_groups))), 1L,
                 std::max(n_groups - 1, 1L));
  Split s;
  for (long k = 0; k < n_groups; ++k) {
    auto& dst = k < n_train ? s.train : s.test;
    const auto& g = groups[order[static_cast<std::size_t>(k)]];
    dst.insert(dst.end(), g.begin(), g.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Repeated random-split validation of SVR pooling against visual-comfort MOS.
/// Reports mean and population std of each metric over completed iterations.
inline EvalReport cross_validate(const std::vector<RatedSample>& data, const FeatureSet& features,
                                 const SvrParams& params = {}, const CrossValidationOptions& opts = {}) {
  if (opts.iterations == 0) throw ParameterError("cross-validation: iterations must be positive");
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0))
    throw ParameterError("cross-validation: train fraction must lie in (0, 1)");
  if (data.size() < 4) throw InputError("cross-validation: dataset too small");

  std::vector<std::vector<double>> x;
  x.reserve(data.size());
  for (const auto& s : data) x.push_back(features.select(s.features));

  Rng rng(opts.seed);
  std::vector<Split> splits;
  for (std::size_t it = 0; it < opts.iterations; ++it)
    splits.push_back(random_split(data, opts.train_fraction, opts.group_by_scene, rng));

  std::vector<CorrelationMetrics> results;
  std::size_t skipped = 0;
  for (const Split& sp : splits) {
    if (sp.train.size() < 2 || sp.test.size() < 2) {
      ++skipped;
      continue;
    }
    std::vector<std::vector<double>> xt;
    std::vector<double> yt;
    for (std::size_t i : sp.train) {
      xt.push_back(x[i]);
      yt.push_back(data[i].mos.vc);
    }
    try {
      const SvrModel model = train_svr(xt, yt, params);
      std::vector<double> pred, truth;
      for (std::size_t i : sp.test) {
        pred.push_back(predict_svr(model, x[i]));
        truth.push_back(data[i].mos.vc);
      }
      results.push_back(correlation_metrics(pred, truth));
    } catch (const UndefinedCorrelationError&) {
      ++skipped;
    } catch (const ConvergenceError&) {
      ++skipped;
    }
  }
  if (results.empty() || static_cast<double>(skipped) > 0.1 * static_cast<double>(opts.iterations))
    throw InputError("cross-validation: " + std::to_string(skipped) + " of " + std::to_string(opts.iterations) +
                     " iterations had degenerate splits");

  auto summarize = [&](double CorrelationMetrics::*field) {
    double mean = 0.0;
    for (const auto& r : results) mean += r.*field;
    mean /= static_cast<double>(results.size());
    double var = 0.0;
    for (const auto& r : results) var += (r.*field - mean) * (r.*field - mean);
    return MetricSummary{mean, std::sqrt(var / static_cast<double>(results.size()))};
  };
  EvalReport rep;
  rep.features = features.label();
  rep.plcc = summarize(&CorrelationMetrics::plcc);
  rep.srcc = summarize(&CorrelationMetrics::srcc);
  rep.krcc = summarize(&CorrelationMetrics::krcc);
  rep.rmse = summarize(&CorrelationMetrics::rmse);
  rep.iterations = results.size();
  rep.skipped = skipped;
  rep.train_fraction = opts.train_fraction;
  rep.seed = opts.seed;
  return rep;
}

}  // namespace vcasir
