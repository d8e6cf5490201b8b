#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "fhn/errors.hpp"
#include "fhn/types.hpp"

namespace fhn {

template <typename Scalar = double>
struct TimeSeriesT {
  ArrayX<Scalar> values;
  Scalar dt = Scalar(1);
  Scalar t_start = Scalar(0);
};
using TimeSeries = TimeSeriesT<double>;

struct PowerSpectrum {
  ArrayXd frequency;  // one-sided, f_k = k / (N dt)
  ArrayXd power;      // sum of bins == window-compensated variance
};

struct SnrResult {
  double snr_db = 0;
  double f_signal = 0;
  double peak_power = 0;
  double background_power = 0;
};

// Mean-removed, Hann-windowed one-sided periodogram. Bins are normalized so
// that their sum equals the windowed signal variance (discrete Parseval with
// window power compensation), which for broadband input estimates the sample
// variance directly.
inline PowerSpectrum periodogram(const TimeSeries& series) {
  const Index n = series.values.size();
  if (n < 16) throw TooShort("periodogram: need at least 16 samples");
  if (!(series.dt > 0)) throw ConfigError("periodogram: dt must be > 0");

  const double mean = series.values.mean();
  std::vector<double> windowed(static_cast<std::size_t>(n));
  double window_power = 0;
  for (Index i = 0; i < n; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / double(n - 1));
    windowed[static_cast<std::size_t>(i)] = (series.values[i] - mean) * w;
    window_power += w * w;
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> bins;
  fft.fwd(bins, windowed);

  const Index n_half = n / 2;  // one-sided bin count is n_half + 1
  PowerSpectrum ps;
  ps.frequency.resize(n_half + 1);
  ps.power.resize(n_half + 1);
  const double norm = 1.0 / (double(n) * window_power);
  for (Index k = 0; k <= n_half; ++k) {
    const bool unique = k == 0 || (n % 2 == 0 && k == n_half);
    ps.frequency[k] = double(k) / (double(n) * series.dt);
    ps.power[k] = (unique ? 1.0 : 2.0) *
                  std::norm(bins[static_cast<std::size_t>(k)]) * norm;
  }
  return ps;
}

// Peak power within one bin of f_signal over the median power of the 40
// flanking bins (20 per side, skipping the two bins adjacent to the signal),
// in decibels. Robust to leakage; deterministic given the series.
inline SnrResult snr(const TimeSeries& series, double f_signal) {
  const Index n = series.values.size();
  if (n < 16) throw TooShort("snr: need at least 16 samples");
  const double f_min = 1.0 / (double(n) * series.dt);
  const double f_max = 1.0 / (2.0 * series.dt);
  if (!(f_signal > f_min) || !(f_signal < f_max))
    throw OutOfBand("snr: f_signal not resolvable by this series");

  const PowerSpectrum ps = periodogram(series);
  const Index n_bins = ps.power.size();
  const Index target =
      static_cast<Index>(std::llround(f_signal * double(n) * series.dt));

  double peak = 0;
  for (Index k = std::max<Index>(target - 1, 0);
       k <= std::min(target + 1, n_bins - 1); ++k)
    peak = std::max(peak, ps.power[k]);

  std::vector<double> flank;
  flank.reserve(40);
  for (Index off = 3; off <= 22; ++off) {
    if (target - off >= 1) flank.push_back(ps.power[target - off]);
    if (target + off <= n_bins - 1) flank.push_back(ps.power[target + off]);
  }
  if (flank.empty()) throw OutOfBand("snr: no background bins available");
  const auto mid = flank.begin() + static_cast<std::ptrdiff_t>(flank.size() / 2);
  std::nth_element(flank.begin(), mid, flank.end());
  double background = *mid;
  if (flank.size() % 2 == 0) {
    const double lower = *std::max_element(flank.begin(), mid);
    background = (background + lower) / 2;
  }
  if (!(background > 0)) background = std::numeric_limits<double>::min();

  SnrResult out;
  out.f_signal = f_signal;
  out.peak_power = peak;
  out.background_power = background;
  out.snr_db = 10.0 * std::log10(peak / background);
  return out;
}

}  // namespace fhn
