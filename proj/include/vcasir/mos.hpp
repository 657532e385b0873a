#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "vcasir/error.hpp"
#include "vcasir/metrics.hpp"

namespace vcasir {

struct SubjectAgreement {
  std::size_t subject = 0;
  std::optional<double> plcc;  // against the mean of the other retained subjects
};

struct MosResult {
  std::vector<double> mos;  // per image
  std::vector<std::size_t> retained;
  std::vector<std::size_t> rejected;  // in rejection order
  std::vector<SubjectAgreement> agreement;  // retained subjects only
  double agreement_mean = std::numeric_limits<double>::quiet_NaN();
  double agreement_min = std::numeric_limits<double>::quiet_NaN();
  double agreement_max = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::vector<SubjectAgreement> leave_one_out_agreement(const std::vector<std::vector<double>>& ratings,
                                                             const std::vector<std::size_t>& active) {
  const std::size_t images = ratings.front().size();
  std::vector<double> total(images, 0.0);
  for (std::size_t s : active)
    for (std::size_t i = 0; i < images; ++i) total[i] += ratings[s][i];
  std::vector<SubjectAgreement> out;
  std::vector<double> others(images);
  const double k = static_cast<double>(active.size() - 1);
  for (std::size_t s : active) {
    for (std::size_t i = 0; i < images; ++i) others[i] = (total[i] - ratings[s][i]) / k;
    out.push_back({s, pearson(ratings[s], others)});
  }
  return out;
}

}  // namespace detail

/// Screens subjects by leave-one-out PLCC and averages the survivors.
///
/// `ratings[s][i]` is subject s's score for image i on the 1..5 scale. While more than three
/// subjects remain, the least agreeing subject is dropped if its PLCC is below `threshold`.
/// Subjects whose PLCC is undefined (constant ratings) are never rejected.
inline MosResult mos_from_ratings(const std::vector<std::vector<double>>& ratings, double threshold = 0.7) {
  if (ratings.size() < 3) throw InputError("MOS: need at least 3 subjects");
  const std::size_t images = ratings.front().size();
  if (images < 2) throw InputError("MOS: need at least 2 images");
  for (const auto& r : ratings) {
    if (r.size() != images) throw InputError("MOS: every subject must rate every image");
    for (double v : r)
      if (!(v >= 1.0 && v <= 5.0)) throw DataError("MOS: rating outside [1, 5]");
  }

  MosResult res;
  for (std::size_t s = 0; s < ratings.size(); ++s) res.retained.push_back(s);
  for (;;) {
    auto agreement = detail::leave_one_out_agreement(ratings, res.retained);
    const SubjectAgreement* worst = nullptr;
    for (const auto& a : agreement)
      if (a.plcc && (!worst || *a.plcc < *worst->plcc)) worst = &a;
    if (res.retained.size() <= 3 || !worst || *worst->plcc >= threshold) {
      res.agreement = std::move(agreement);
      break;
    }
    const std::size_t drop = worst->subject;
    res.rejected.push_back(drop);
    res.retained.erase(std::find(res.retained.begin(), res.retained.end(), drop));
  }

  res.mos.assign(images, 0.0);
  for (std::size_t s : res.retained)
    for (std::size_t i = 0; i < images; ++i) res.mos[i] += ratings[s][i];
  for (auto& v : res.mos) v /= static_cast<double>(res.retained.size());

  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& a : res.agreement) {
    if (!a.plcc) continue;
    sum += *a.plcc;
    res.agreement_min = defined ? std::min(res.agreement_min, *a.plcc) : *a.plcc;
    res.agreement_max = defined ? std::max(res.agreement_max, *a.plcc) : *a.plcc;
    ++defined;
  }
  if (defined) res.agreement_mean = sum / static_cast<double>(defined);
  return res;
}

}  // namespace vcasir
