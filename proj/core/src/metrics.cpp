#include <algorithm>
#include <cmath>
#include <numeric>

#include "scou/errors.hpp"
#include "scou/evaluation.hpp"
#include "scou/rng.hpp"

namespace scou {

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw ValidationError("rmse: sequences must be non-empty and aligned");
  double ss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(truth.size()));
}

double coverage_rate(std::span<const double> lower, std::span<const double> upper,
                     std::span<const double> truth) {
  if (lower.size() != truth.size() || upper.size() != truth.size() || truth.empty())
    throw ValidationError("coverage_rate: sequences must be non-empty and aligned");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (lower[i] <= truth[i] && truth[i] <= upper[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

namespace {

void check_labels(std::span<const double> scores, std::span<const int> labels, std::size_t& pos,
                  std::size_t& neg) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels must be aligned");
  pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw ValidationError("AUC is undefined unless both classes are present");
}

double rank_auc_indexed(std::span<const double> scores, std::span<const int> labels,
                        std::vector<std::size_t>& idx) {
  const std::size_t m = idx.size();
  std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] != 0) {
        rank_sum += mid;
        ++pos;
      }
    }
    i = j + 1;
  }
  const std::size_t neg = m - pos;
  if (pos == 0 || neg == 0) return std::nan("");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_labels(scores, labels, pos, neg);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return scores[l] > scores[r]; });
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] != 0 ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)});
    i = j;
  }
  return curve;
}

double trapezoid_auc(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * 0.5 * (curve[i].tpr + curve[i - 1].tpr);
  return area;
}

double rank_auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  check_labels(scores, labels, pos, neg);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return rank_auc_indexed(scores, labels, idx);
}

AucEstimate roc_auc(std::span<const double> scores, std::span<const int> labels, std::size_t boot,
                    std::uint64_t seed) {
  AucEstimate est;
  check_labels(scores, labels, est.positives, est.negatives);
  est.auc = rank_auc(scores, labels);
  if (boot < 2) return est;

  Rng rng{splitmix64(seed)};
  const std::size_t m = scores.size();
  std::vector<double> s(m);
  std::vector<int> l(m);
  std::vector<std::size_t> idx(m);
  std::vector<double> draws;
  draws.reserve(boot);
  for (std::size_t b = 0; b < boot; ++b) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = std::min(m - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(m)));
      s[i] = scores[k];
      l[i] = labels[k];
    }
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const double a = rank_auc_indexed(s, l, idx);
    if (std::isfinite(a)) draws.push_back(a);
  }
  if (draws.size() >= 2) {
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
    double ss = 0.0;
    for (double a : draws) ss += (a - mean) * (a - mean);
    est.standard_error = std::sqrt(ss / static_cast<double>(draws.size() - 1));
  }
  return est;
}

SignTest paired_sign_test(std::span<const double> differences) {
  SignTest t;
  for (double d : differences) {
    if (d > 0.0) ++t.positive;
    else if (d < 0.0) ++t.negative;
    else ++t.ties;
  }
  const std::size_t m = t.positive + t.negative;
  if (m == 0) return t;
  const std::size_t k = std::min(t.positive, t.negative);
  double tail = 0.0;
  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i <= k; ++i) {
    const double di = static_cast<double>(i);
    tail += std::exp(std::lgamma(md + 1.0) - std::lgamma(di + 1.0) - std::lgamma(md - di + 1.0) -
                     md * std::log(2.0));
  }
  t.p_value = std::min(1.0, 2.0 * tail);
  return t;
}

}  // namespace scou
