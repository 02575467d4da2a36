#include "tce/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

namespace tce {

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "paired samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorKind::DegenerateSample, "need at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateSample, "differences have zero variance");
  TTestResult r;
  r.df = n - 1;
  r.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t_stat)));
  return r;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    } else {
      ++s.non_finite;
    }
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values)
      if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

}  // namespace tce
