#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tce/audio_io.hpp"
#include "tce/error.hpp"

namespace tce {

// Signal metrics work on any dense Eigen vector expression; reductions are
// carried out in double regardless of the input scalar.

namespace detail {

template <typename DE, typename DR>
void check_pair(const Eigen::MatrixBase<DE>& est, const Eigen::MatrixBase<DR>& ref) {
  if (est.size() != ref.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(est.size()) + " vs " + std::to_string(ref.size()));
}

template <typename D>
double energy(const Eigen::MatrixBase<D>& x) {
  return x.template cast<double>().squaredNorm();
}

}  // namespace detail

// 10 log10(|ref|^2 / |est - ref|^2); +inf when est == ref exactly.
template <typename DE, typename DR>
double snr(const Eigen::MatrixBase<DE>& est, const Eigen::MatrixBase<DR>& ref) {
  detail::check_pair(est, ref);
  const double ref_energy = detail::energy(ref);
  if (ref_energy == 0.0) throw Error(ErrorKind::ZeroReference, "reference is all zeros");
  const double residual = (est.template cast<double>() - ref.template cast<double>()).squaredNorm();
  if (residual == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref_energy / residual);
}

// Scale-invariant SDR without mean removal. Returns -inf when est is
// orthogonal to ref, +inf when est is a scaled copy of ref up to the input
// scalar's rounding.
template <typename DE, typename DR>
double si_sdr(const Eigen::MatrixBase<DE>& est, const Eigen::MatrixBase<DR>& ref) {
  detail::check_pair(est, ref);
  const Eigen::VectorXd e = est.template cast<double>();
  const Eigen::VectorXd r = ref.template cast<double>();
  const double ref_energy = r.squaredNorm();
  if (ref_energy == 0.0) throw Error(ErrorKind::ZeroReference, "reference is all zeros");
  if (e.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroEstimate, "estimate is all zeros");
  const double proj = e.dot(r);
  if (proj == 0.0) return -std::numeric_limits<double>::infinity();
  const double scale = proj / ref_energy;
  const Eigen::VectorXd residual = e - scale * r;

  using InScalar = typename DE::Scalar;
  const double tol = 64.0 * std::numeric_limits<InScalar>::epsilon();
  if ((residual.array().abs() <= tol * e.array().abs()).all())
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(scale * scale * ref_energy / residual.squaredNorm());
}

template <typename Scalar>
double snr(const BasicWaveform<Scalar>& est, const BasicWaveform<Scalar>& ref) {
  return snr(est.samples, ref.samples);
}

template <typename Scalar>
double si_sdr(const BasicWaveform<Scalar>& est, const BasicWaveform<Scalar>& ref) {
  return si_sdr(est.samples, ref.samples);
}

struct Improvements {
  double snri_db = 0.0;
  double si_sdri_db = 0.0;
};

template <typename DM, typename DE, typename DR>
Improvements improvements(const Eigen::MatrixBase<DM>& mixture, const Eigen::MatrixBase<DE>& est,
                          const Eigen::MatrixBase<DR>& ref) {
  detail::check_pair(mixture, ref);
  return {snr(est, ref) - snr(mixture, ref), si_sdr(est, ref) - si_sdr(mixture, ref)};
}

inline constexpr double kLossResidualFloor = 1e-10;

// Negative SNR with the residual floored at 1e-10 |ref|^2 , so the loss bottoms out at -100.
template <typename DE, typename DR>
double neg_snr_loss(const Eigen::MatrixBase<DE>& est, const Eigen::MatrixBase<DR>& ref) {
  detail::check_pair(est, ref);
  const double ref_energy = detail::energy(ref);
  if (ref_energy == 0.0) throw Error(ErrorKind::ZeroReference, "reference is all zeros");
  const double residual = (est.template cast<double>() - ref.template cast<double>()).squaredNorm();
  return -10.0 * std::log10(ref_energy / std::max(residual, kLossResidualFloor * ref_energy));
}

// d loss / d est = (20 / ln 10) (est - ref) / |est - ref|^2 away from the floor.
template <typename DE, typename DR>
Eigen::VectorXd neg_snr_loss_gradient(const Eigen::MatrixBase<DE>& est, const Eigen::MatrixBase<DR>& ref) {
  detail::check_pair(est, ref);
  const Eigen::VectorXd diff = est.template cast<double>() - ref.template cast<double>();
  const double residual = diff.squaredNorm();
  if (residual <= kLossResidualFloor * detail::energy(ref)) return Eigen::VectorXd::Zero(diff.size());
  return (20.0 / std::log(10.0)) * diff / residual;
}

struct EvalResult {
  std::string id;
  double snr_db = 0.0;
  double si_sdr_db = 0.0;
  double snri_db = 0.0;
  double si_sdri_db = 0.0;
};

template <typename Scalar>
EvalResult evaluate(std::string id, const BasicWaveform<Scalar>& mixture,
                    const BasicWaveform<Scalar>& est, const BasicWaveform<Scalar>& ref) {
  EvalResult r{std::move(id), snr(est, ref), si_sdr(est, ref), 0.0, 0.0};
  r.snri_db = r.snr_db - snr(mixture, ref);
  r.si_sdri_db = r.si_sdr_db - si_sdr(mixture, ref);
  return r;
}

template <typename Scalar>
struct TargetCheckT {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vec output;
  Vec target_conv;  // s0 + s_conv
  Vec wrong_conv;   // s0 + s_inter
  Vec mixture;
};
using TargetCheck = TargetCheckT<float>;

// True when the output's SNRi against the wrong conversation strictly exceeds
// its SNRi against the target conversation.
template <typename Scalar>
bool is_incorrect_target(const TargetCheckT<Scalar>& c) {
  const double target_snri = snr(c.output, c.target_conv) - snr(c.mixture, c.target_conv);
  const double wrong_snri = snr(c.output, c.wrong_conv) - snr(c.mixture, c.wrong_conv);
  return wrong_snri > target_snri;
}

template <typename Scalar>
double incorrect_target_ratio(std::span<const TargetCheckT<Scalar>> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptyList, "no samples");
  std::size_t wrong = 0;
  for (const auto& c : samples) wrong += is_incorrect_target(c) ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(samples.size());
}

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t df = 0;
};

// Two-sided paired Student t-test on a - b.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct Summary {
  double mean = 0.0;
  double std = 0.0;           // sample standard deviation of the finite values
  std::size_t count = 0;      // finite values used
  std::size_t non_finite = 0; // excluded +-inf / nan values
};

Summary summarize(std::span<const double> values);

}  // namespace tce
