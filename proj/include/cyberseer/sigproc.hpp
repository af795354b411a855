// Pure signal transformations: mean downsampling, EDA tonic/phasic split,
// SCR event detection, trailing-window statistics, first differences, and
// min-max normalization.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cyberseer/common.hpp"
#include "cyberseer/telemetry.hpp"

namespace cyberseer::sigproc {

using telemetry::ChannelSeries;

// Block means; the trailing partial block is dropped.
inline ChannelSeries downsample_mean(const ChannelSeries& series, double target_hz) {
  if (target_hz <= 0.0) fail(ErrorKind::invalid_input, "target rate must be > 0");
  double ratio = series.rate_hz / target_hz;
  long block = std::lround(ratio);
  if (block < 1 || std::abs(ratio - static_cast<double>(block)) > 1e-9)
    fail(ErrorKind::unsupported_rate,
         series.name + ": rate " + std::to_string(series.rate_hz) + " is not an integer multiple of " +
             std::to_string(target_hz));
  size_t n_out = series.values.size() / static_cast<size_t>(block);
  if (n_out == 0)
    fail(ErrorKind::invalid_input, series.name + ": series shorter than one output block");
  std::vector<double> out(n_out);
  for (size_t k = 0; k < n_out; ++k) {
    double sum = 0.0;
    for (size_t j = 0; j < static_cast<size_t>(block); ++j)
      sum += series.values[k * static_cast<size_t>(block) + j];
    out[k] = sum / static_cast<double>(block);
  }
  return ChannelSeries(series.name, target_hz, std::move(out));
}

// out[0] = 0, out[t] = in[t] - in[t-1]; length preserved.
inline ChannelSeries first_difference(const ChannelSeries& series) {
  if (series.values.empty()) fail(ErrorKind::invalid_input, "first_difference: empty series");
  std::vector<double> out(series.values.size());
  out[0] = 0.0;
  for (size_t t = 1; t < series.values.size(); ++t)
    out[t] = series.values[t] - series.values[t - 1];
  return ChannelSeries("d_" + series.name, series.rate_hz, std::move(out));
}

struct TrailingStats {
  ChannelSeries min, max, mean, std;
};

// Statistics over the trailing window [max(0, t-w+1), t]; the head windows
// are truncated so output length equals input length. Std is population std.
inline TrailingStats trailing_stats(const ChannelSeries& series, int window_s = 3) {
  if (series.values.empty()) fail(ErrorKind::invalid_input, "trailing_stats: empty series");
  if (window_s < 1) fail(ErrorKind::invalid_input, "trailing_stats: window must be >= 1");
  size_t w = static_cast<size_t>(std::lround(window_s * series.rate_hz));
  if (w < 1) w = 1;
  size_t n = series.values.size();
  std::vector<double> mn(n), mx(n), mean(n), sd(n);
  for (size_t t = 0; t < n; ++t) {
    size_t lo = t + 1 >= w ? t + 1 - w : 0;
    double vmin = series.values[lo], vmax = series.values[lo], sum = 0.0;
    for (size_t i = lo; i <= t; ++i) {
      double v = series.values[i];
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
      sum += v;
    }
    size_t count = t - lo + 1;
    double m = sum / static_cast<double>(count);
    double var = 0.0;
    for (size_t i = lo; i <= t; ++i) var += (series.values[i] - m) * (series.values[i] - m);
    var /= static_cast<double>(count);
    mn[t] = vmin;
    mx[t] = vmax;
    mean[t] = m;
    sd[t] = std::sqrt(var);
  }
  auto mk = [&](const char* suffix, std::vector<double> v) {
    return ChannelSeries(series.name + suffix, series.rate_hz, std::move(v));
  };
  return TrailingStats{mk("_min", std::move(mn)), mk("_max", std::move(mx)),
                       mk("_mean", std::move(mean)), mk("_std", std::move(sd))};
}

// ---------------------------------------------------------------------------
// EDA decomposition: tonic (SCL) + phasic (SCR), additive by construction.

struct EdaDecomposition {
  ChannelSeries scl;
  ChannelSeries scr;
};

struct DecompositionConfig {
  double median_window_s = 10.0;  // tonic estimate
  double smooth_window_s = 4.0;   // moving-average polish of the tonic
};

namespace detail {

// Centered window with half-width floor(window_s*rate/2), edge-truncated.
inline std::vector<double> moving_median(const std::vector<double>& v, size_t half) {
  std::vector<double> out(v.size());
  std::vector<double> window;
  for (size_t i = 0; i < v.size(); ++i) {
    size_t lo = i >= half ? i - half : 0;
    size_t hi = std::min(v.size() - 1, i + half);
    window.assign(v.begin() + static_cast<long>(lo), v.begin() + static_cast<long>(hi) + 1);
    size_t n = window.size();
    auto mid = window.begin() + static_cast<long>(n / 2);
    std::nth_element(window.begin(), mid, window.end());
    if (n % 2 == 1) {
      out[i] = *mid;
    } else {
      double upper = *mid;
      double lower = *std::max_element(window.begin(), mid);
      out[i] = 0.5 * (lower + upper);
    }
  }
  return out;
}

inline std::vector<double> moving_average(const std::vector<double>& v, size_t half) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    size_t lo = i >= half ? i - half : 0;
    size_t hi = std::min(v.size() - 1, i + half);
    double sum = 0.0;
    for (size_t j = lo; j <= hi; ++j) sum += v[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace detail

inline EdaDecomposition decompose_eda(const ChannelSeries& eda,
                                      const DecompositionConfig& config = {}) {
  if (!all_finite(eda.values)) fail(ErrorKind::invalid_input, "decompose_eda: non-finite samples");
  size_t half_med = static_cast<size_t>(std::floor(config.median_window_s * eda.rate_hz / 2.0));
  size_t half_avg = static_cast<size_t>(std::floor(config.smooth_window_s * eda.rate_hz / 2.0));
  std::vector<double> scl = detail::moving_median(eda.values, half_med);
  scl = detail::moving_average(scl, half_avg);
  std::vector<double> scr(eda.values.size());
  for (size_t i = 0; i < scr.size(); ++i) scr[i] = eda.values[i] - scl[i];
  return EdaDecomposition{ChannelSeries("scl", eda.rate_hz, std::move(scl)),
                          ChannelSeries("scr", eda.rate_hz, std::move(scr))};
}

// ---------------------------------------------------------------------------
// SCR event detection on the phasic component.

struct ScrEvent {
  size_t onset_idx = 0;
  size_t peak_idx = 0;
  size_t offset_idx = 0;
  double amplitude = 0.0;  // peak minus onset value, uS
  double duration_s = 0.0;
  double area = 0.0;  // uS*s above the onset level
};

inline std::vector<ScrEvent> detect_scr_events(const ChannelSeries& scr,
                                               double threshold_uS = 0.01) {
  if (!all_finite(scr.values)) fail(ErrorKind::invalid_input, "detect_scr_events: non-finite input");
  if (threshold_uS <= 0.0) fail(ErrorKind::invalid_input, "detect_scr_events: threshold must be > 0");
  const auto& v = scr.values;
  const size_t n = v.size();
  std::vector<ScrEvent> events;
  if (n < 3) return events;

  // Candidate peaks: strict rise on the left, non-rise on the right
  // (plateaus yield their first index).
  for (size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    size_t onset = i;
    while (onset > 0 && v[onset - 1] < v[onset]) --onset;
    double amplitude = v[i] - v[onset];
    if (amplitude < threshold_uS) continue;
    ScrEvent ev;
    ev.onset_idx = onset;
    ev.peak_idx = i;
    ev.amplitude = amplitude;
    events.push_back(ev);
  }

  // Offsets: recovery to onset + 10% of amplitude, capped by the next onset.
  for (size_t e = 0; e < events.size(); ++e) {
    auto& ev = events[e];
    double recovery = v[ev.onset_idx] + 0.1 * ev.amplitude;
    size_t limit = e + 1 < events.size() ? events[e + 1].onset_idx : n - 1;
    size_t offset = limit;
    for (size_t m = ev.peak_idx; m <= limit; ++m) {
      if (m > ev.peak_idx && v[m] <= recovery) {
        offset = m;
        break;
      }
    }
    ev.offset_idx = offset;
    ev.duration_s = static_cast<double>(ev.offset_idx - ev.onset_idx) / scr.rate_hz;
    double base = v[ev.onset_idx];
    double area = 0.0;
    for (size_t m = ev.onset_idx; m + 1 <= ev.offset_idx; ++m) {
      double a = std::max(v[m] - base, 0.0);
      double b = std::max(v[m + 1] - base, 0.0);
      area += 0.5 * (a + b) / scr.rate_hz;
    }
    ev.area = area;
  }
  return events;
}

// ---------------------------------------------------------------------------
// Min-max normalization, fitted on training data only.

class NormalizerStats {
 public:
  NormalizerStats() = default;

  static NormalizerStats from_min_max(std::vector<double> min, std::vector<double> max) {
    if (min.size() != max.size() || min.empty())
      fail(ErrorKind::invalid_input, "normalizer: min/max width mismatch");
    for (size_t j = 0; j < min.size(); ++j)
      if (max[j] < min[j]) fail(ErrorKind::invalid_input, "normalizer: max below min");
    NormalizerStats s;
    s.min_ = std::move(min);
    s.max_ = std::move(max);
    s.fitted_ = true;
    return s;
  }

  // Rows are observations, columns are features.
  static NormalizerStats fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) fail(ErrorKind::invalid_input, "normalizer: fit needs at least one row");
    size_t width = rows[0].size();
    NormalizerStats s;
    s.min_.assign(width, std::numeric_limits<double>::infinity());
    s.max_.assign(width, -std::numeric_limits<double>::infinity());
    for (const auto& row : rows) {
      if (row.size() != width) fail(ErrorKind::invalid_input, "normalizer: ragged fit matrix");
      for (size_t j = 0; j < width; ++j) {
        s.min_[j] = std::min(s.min_[j], row[j]);
        s.max_[j] = std::max(s.max_[j], row[j]);
      }
    }
    s.fitted_ = true;
    return s;
  }

  bool fitted() const { return fitted_; }
  size_t width() const { return min_.size(); }
  const std::vector<double>& feature_min() const { return min_; }
  const std::vector<double>& feature_max() const { return max_; }

  // (x - min) / (max - min), clamped to [0,1]; constant features map to 0.5.
  double apply_one(size_t feature, double x) const {
    if (!fitted_) fail(ErrorKind::state_error, "normalizer: apply before fit");
    double lo = min_[feature], hi = max_[feature];
    if (hi == lo) return 0.5;
    double y = (x - lo) / (hi - lo);
    return std::clamp(y, 0.0, 1.0);
  }

  std::vector<double> apply_row(const std::vector<double>& row) const {
    if (!fitted_) fail(ErrorKind::state_error, "normalizer: apply before fit");
    if (row.size() != min_.size()) fail(ErrorKind::invalid_input, "normalizer: width mismatch");
    std::vector<double> out(row.size());
    for (size_t j = 0; j < row.size(); ++j) out[j] = apply_one(j, row[j]);
    return out;
  }

 private:
  std::vector<double> min_, max_;
  bool fitted_ = false;
};

inline NormalizerStats fit_normalizer(const std::vector<std::vector<double>>& rows) {
  return NormalizerStats::fit(rows);
}

inline std::vector<std::vector<double>> apply_normalizer(
    const NormalizerStats& stats, const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(stats.apply_row(row));
  return out;
}

}  // namespace cyberseer::sigproc
