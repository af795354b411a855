// Turns processed sessions into model inputs: T_s-second segments carrying a
// 16 x T_s kinematic matrix, a 15 x T_s EDA time-series matrix, and a
// 38-entry EDA numerical vector with statistical and sublevel-set
// persistence features. Also the binary feature-store container.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyberseer/common.hpp"
#include "cyberseer/sigproc.hpp"
#include "cyberseer/telemetry.hpp"
#include "cyberseer/tensor.hpp"

namespace cyberseer::features {

using telemetry::ChannelSeries;
using telemetry::CsLabel;
using telemetry::RawSession;

struct PipelineConfig {
  double target_hz = 1.0;
  int stats_window_s = 3;
  sigproc::DecompositionConfig decomposition;
  double scr_threshold_uS = 0.01;

  uint64_t hash() const {
    // FNV-1a over the textual form; identifies the config in store footers.
    std::string repr = "hz=" + csv::format_double(target_hz) +
                       ";win=" + std::to_string(stats_window_s) +
                       ";med=" + csv::format_double(decomposition.median_window_s) +
                       ";avg=" + csv::format_double(decomposition.smooth_window_s) +
                       ";thr=" + csv::format_double(scr_threshold_uS);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : repr) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

// Fixed row orders of the two time-series feature blocks.
inline constexpr int kKinematicRows = 16;
inline constexpr int kEdaTsRows = 15;
inline constexpr int kNumericWidth = 38;

// A session resampled to the feature rate with every session-wide derived
// row precomputed; segmentation just slices columns.
struct ProcessedSession {
  std::string session_id;
  CsLabel label;
  size_t usable_s = 0;

  // kinematic rows: pos x,y,z; dpos x,y,z; rot x,y,z; drot x,y,z;
  // speed; dspeed; rotation; drotation
  std::array<std::vector<double>, kKinematicRows> kinematic;
  // EDA rows: eda, scr, scl, then {min,max,mean,std} for eda, scr, scl
  std::array<std::vector<double>, kEdaTsRows> eda_ts;
  // extra rows consumed by the numerical block
  std::vector<double> d_eda, d_scr;
};

inline ProcessedSession process_session(const RawSession& raw, const PipelineConfig& cfg = {}) {
  namespace ch = telemetry::channel;
  ProcessedSession ps;
  ps.session_id = raw.session_id;
  ps.label = telemetry::session_label(raw);

  auto down = [&](const std::string& name) {
    return sigproc::downsample_mean(raw.channel(name), cfg.target_hz);
  };

  // Tonic/phasic split runs at the native EDA rate, then every component is
  // downsampled the same way as the raw signal.
  auto decomp = sigproc::decompose_eda(raw.channel(ch::eda), cfg.decomposition);
  ChannelSeries eda = down(ch::eda);
  ChannelSeries scl = sigproc::downsample_mean(decomp.scl, cfg.target_hz);
  ChannelSeries scr = sigproc::downsample_mean(decomp.scr, cfg.target_hz);

  std::vector<ChannelSeries> kin_base;
  for (const char* name : {ch::head_pos_x, ch::head_pos_y, ch::head_pos_z, ch::head_rot_x,
                           ch::head_rot_y, ch::head_rot_z, ch::speed, ch::rotation})
    kin_base.push_back(down(name));

  size_t usable = eda.size();
  usable = std::min({usable, scl.size(), scr.size()});
  for (const auto& s : kin_base) usable = std::min(usable, s.size());
  if (usable == 0) fail(ErrorKind::invalid_input, raw.session_id + ": no usable samples");
  ps.usable_s = usable;

  auto cut = [&](ChannelSeries& s) { s.values.resize(usable); };
  cut(eda);
  cut(scl);
  cut(scr);
  for (auto& s : kin_base) cut(s);

  // Kinematic block: base rows interleaved with their session-wide first
  // differences (pos triplet, then its deltas, and so on).
  auto diff_of = [&](const ChannelSeries& s) { return sigproc::first_difference(s).values; };
  for (int i = 0; i < 3; ++i) {
    ps.kinematic[static_cast<size_t>(i)] = kin_base[static_cast<size_t>(i)].values;
    ps.kinematic[static_cast<size_t>(i + 3)] = diff_of(kin_base[static_cast<size_t>(i)]);
    ps.kinematic[static_cast<size_t>(i + 6)] = kin_base[static_cast<size_t>(i + 3)].values;
    ps.kinematic[static_cast<size_t>(i + 9)] = diff_of(kin_base[static_cast<size_t>(i + 3)]);
  }
  ps.kinematic[12] = kin_base[6].values;
  ps.kinematic[13] = diff_of(kin_base[6]);
  ps.kinematic[14] = kin_base[7].values;
  ps.kinematic[15] = diff_of(kin_base[7]);

  ps.eda_ts[0] = eda.values;
  ps.eda_ts[1] = scr.values;
  ps.eda_ts[2] = scl.values;
  const ChannelSeries* components[3] = {&eda, &scr, &scl};
  for (int c = 0; c < 3; ++c) {
    auto stats = sigproc::trailing_stats(*components[c], cfg.stats_window_s);
    size_t base = 3 + static_cast<size_t>(c) * 4;
    ps.eda_ts[base + 0] = std::move(stats.min.values);
    ps.eda_ts[base + 1] = std::move(stats.max.values);
    ps.eda_ts[base + 2] = std::move(stats.mean.values);
    ps.eda_ts[base + 3] = std::move(stats.std.values);
  }
  ps.d_eda = diff_of(eda);
  ps.d_scr = diff_of(scr);
  return ps;
}

// ---------------------------------------------------------------------------
// Segmentation

struct SegmentSlices {
  int index = 0;
  size_t start = 0;
  int t_s = 0;
  std::vector<double> eda, scl, scr, d_eda, d_scr;
};

inline std::vector<SegmentSlices> segment_session(const ProcessedSession& ps, int t_s) {
  if (t_s <= 0 || static_cast<size_t>(t_s) > ps.usable_s)
    fail(ErrorKind::invalid_input,
         "segment_session: T_s " + std::to_string(t_s) + " out of range for usable duration " +
             std::to_string(ps.usable_s));
  size_t count = ps.usable_s / static_cast<size_t>(t_s);
  std::vector<SegmentSlices> out;
  out.reserve(count);
  auto slice = [&](const std::vector<double>& v, size_t start) {
    return std::vector<double>(v.begin() + static_cast<long>(start),
                               v.begin() + static_cast<long>(start + static_cast<size_t>(t_s)));
  };
  for (size_t s = 0; s < count; ++s) {
    SegmentSlices seg;
    seg.index = static_cast<int>(s);
    seg.start = s * static_cast<size_t>(t_s);
    seg.t_s = t_s;
    seg.eda = slice(ps.eda_ts[0], seg.start);
    seg.scr = slice(ps.eda_ts[1], seg.start);
    seg.scl = slice(ps.eda_ts[2], seg.start);
    seg.d_eda = slice(ps.d_eda, seg.start);
    seg.d_scr = slice(ps.d_scr, seg.start);
    out.push_back(std::move(seg));
  }
  return out;
}

inline Tensor2 kinematic_feature_matrix(const ProcessedSession& ps, size_t start, int t_s) {
  Tensor2 m(kKinematicRows, static_cast<size_t>(t_s));
  for (int r = 0; r < kKinematicRows; ++r) {
    const auto& row = ps.kinematic[static_cast<size_t>(r)];
    if (row.size() < start + static_cast<size_t>(t_s))
      fail(ErrorKind::invalid_input, "kinematic row shorter than segment");
    for (int c = 0; c < t_s; ++c)
      m.at(static_cast<size_t>(r), static_cast<size_t>(c)) = row[start + static_cast<size_t>(c)];
  }
  return m;
}

inline Tensor2 eda_timeseries_matrix(const ProcessedSession& ps, size_t start, int t_s) {
  for (const auto& row : ps.eda_ts)
    if (row.empty()) fail(ErrorKind::state_error, "eda decomposition rows not populated");
  Tensor2 m(kEdaTsRows, static_cast<size_t>(t_s));
  for (int r = 0; r < kEdaTsRows; ++r) {
    const auto& row = ps.eda_ts[static_cast<size_t>(r)];
    if (row.size() < start + static_cast<size_t>(t_s))
      fail(ErrorKind::invalid_input, "eda row shorter than segment");
    for (int c = 0; c < t_s; ++c)
      m.at(static_cast<size_t>(r), static_cast<size_t>(c)) = row[start + static_cast<size_t>(c)];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Sublevel-set persistence (dimension 0) of a 1-D series.

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;
  bool essential = false;  // the global-min component, paired with the global max
  double persistence() const { return death - birth; }
};

// Union-find sweep in increasing value order; on a merge the younger
// component (higher birth, ties to the higher index) dies — the elder rule.
inline std::vector<PersistencePair> sublevel_persistence(const std::vector<double>& series) {
  if (series.empty()) fail(ErrorKind::invalid_input, "sublevel_persistence: empty series");
  if (!all_finite(series)) fail(ErrorKind::invalid_input, "sublevel_persistence: non-finite values");
  const size_t n = series.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (series[a] != series[b]) return series[a] < series[b];
    return a < b;
  });

  std::vector<long> parent(n, -1);           // -1 = not yet activated
  std::vector<size_t> birth_index(n, 0);     // root -> index of component minimum
  auto find = [&](size_t i) {
    size_t root = i;
    while (parent[root] != static_cast<long>(root)) root = static_cast<size_t>(parent[root]);
    while (parent[i] != static_cast<long>(root)) {
      size_t next = static_cast<size_t>(parent[i]);
      parent[i] = static_cast<long>(root);
      i = next;
    }
    return root;
  };

  std::vector<PersistencePair> pairs;
  for (size_t idx : order) {
    long left = static_cast<long>(idx) - 1;
    long right = static_cast<long>(idx) + 1;
    bool left_active = left >= 0 && parent[static_cast<size_t>(left)] >= 0;
    bool right_active = right < static_cast<long>(n) && parent[static_cast<size_t>(right)] >= 0;
    if (!left_active && !right_active) {
      // local minimum: births a component
      parent[idx] = static_cast<long>(idx);
      birth_index[idx] = idx;
      continue;
    }
    if (left_active != right_active) {
      // extends one existing component
      parent[idx] = static_cast<long>(find(static_cast<size_t>(left_active ? left : right)));
      continue;
    }
    // bridges two components: the younger dies here
    size_t root_l = find(static_cast<size_t>(left));
    size_t root_r = find(static_cast<size_t>(right));
    if (root_l == root_r) {
      parent[idx] = static_cast<long>(root_l);
      continue;
    }
    size_t min_l = birth_index[root_l], min_r = birth_index[root_r];
    bool l_elder =
        series[min_l] != series[min_r] ? series[min_l] < series[min_r] : min_l < min_r;
    size_t elder = l_elder ? root_l : root_r;
    size_t younger = l_elder ? root_r : root_l;
    // plateau ties produce zero-persistence merges; those diagonal pairs are
    // dropped
    if (series[birth_index[younger]] != series[idx])
      pairs.push_back({series[birth_index[younger]], series[idx], false});
    parent[younger] = static_cast<long>(elder);
    parent[idx] = static_cast<long>(elder);
  }
  double global_min = series[order.front()];
  double global_max = series[order.back()];
  pairs.push_back({global_min, global_max, true});
  return pairs;
}

// ---------------------------------------------------------------------------
// Numerical feature vector (38 entries).

namespace detail {

inline double population_std(const std::vector<double>& v) {
  return std::sqrt(population_variance(v));
}

// Least-squares slope of y against its 0-based index.
inline double ls_slope(const std::vector<double>& y) {
  size_t n = y.size();
  if (n < 2) return 0.0;
  double tm = (static_cast<double>(n) - 1.0) / 2.0;
  double ym = mean_of(y);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dt = static_cast<double>(i) - tm;
    num += dt * (y[i] - ym);
    den += dt * dt;
  }
  return den == 0.0 ? 0.0 : num / den;
}

// Pearson r against the index; 0 for constant input.
inline double corr_with_time(const std::vector<double>& y) {
  size_t n = y.size();
  if (n < 2) return 0.0;
  double tm = (static_cast<double>(n) - 1.0) / 2.0;
  double ym = mean_of(y);
  double syy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dt = static_cast<double>(i) - tm;
    double dy = y[i] - ym;
    stt += dt * dt;
    syy += dy * dy;
    sty += dt * dy;
  }
  if (syy == 0.0 || stt == 0.0) return 0.0;
  return sty / std::sqrt(stt * syy);
}

inline void series_stats(const std::vector<double>& v, std::vector<double>& out) {
  double mn = *std::min_element(v.begin(), v.end());
  double mx = *std::max_element(v.begin(), v.end());
  out.push_back(mean_of(v));
  out.push_back(population_std(v));
  out.push_back(mn);
  out.push_back(mx);
  out.push_back(mx - mn);
  out.push_back(ls_slope(v));
}

}  // namespace detail

inline std::vector<double> eda_numerical_vector(const SegmentSlices& seg,
                                                const std::vector<sigproc::ScrEvent>& events,
                                                const std::vector<PersistencePair>& eda_pairs,
                                                const std::vector<PersistencePair>& scr_pairs) {
  size_t w = seg.eda.size();
  if (w == 0 || seg.scl.size() != w || seg.scr.size() != w || seg.d_eda.size() != w ||
      seg.d_scr.size() != w)
    fail(ErrorKind::invalid_input, "eda_numerical_vector: slice width mismatch");

  std::vector<double> out;
  out.reserve(kNumericWidth);
  detail::series_stats(seg.eda, out);  // 1-6
  detail::series_stats(seg.scl, out);  // 7-12
  detail::series_stats(seg.scr, out);  // 13-18
  out.push_back(detail::corr_with_time(seg.scl));  // 19

  // 20-27: SCR event aggregates.
  double n_ev = static_cast<double>(events.size());
  double sum_amp = 0.0, max_amp = 0.0, sum_dur = 0.0, sum_area = 0.0;
  for (const auto& ev : events) {
    sum_amp += ev.amplitude;
    max_amp = std::max(max_amp, ev.amplitude);
    sum_dur += ev.duration_s;
    sum_area += ev.area;
  }
  out.push_back(n_ev);
  out.push_back(sum_amp);
  out.push_back(n_ev > 0 ? sum_amp / n_ev : 0.0);
  out.push_back(max_amp);
  out.push_back(sum_dur);
  out.push_back(n_ev > 0 ? sum_dur / n_ev : 0.0);
  out.push_back(sum_area);
  out.push_back(n_ev * 60.0 / static_cast<double>(seg.t_s));

  // 28-31: first-difference magnitudes.
  std::vector<double> abs_d_eda(w), abs_d_scr(w);
  for (size_t i = 0; i < w; ++i) {
    abs_d_eda[i] = std::fabs(seg.d_eda[i]);
    abs_d_scr[i] = std::fabs(seg.d_scr[i]);
  }
  out.push_back(mean_of(abs_d_eda));
  out.push_back(detail::population_std(seg.d_eda));
  out.push_back(mean_of(abs_d_scr));
  out.push_back(detail::population_std(seg.d_scr));

  // 32-36: EDA persistence summary; 37-38: SCR persistence summary.
  auto persistence_block = [&](const std::vector<PersistencePair>& pairs, bool full) {
    double count = static_cast<double>(pairs.size());
    double max_p = 0.0, sum_p = 0.0;
    double finite_sum = 0.0;
    size_t finite_count = 0;
    for (const auto& p : pairs) {
      double pers = p.persistence();
      max_p = std::max(max_p, pers);
      sum_p += pers;
      if (!p.essential) {
        finite_sum += pers;
        ++finite_count;
      }
    }
    out.push_back(count);
    if (!full) {
      out.push_back(sum_p);
      return;
    }
    out.push_back(max_p);
    out.push_back(sum_p);
    out.push_back(finite_count > 0 ? finite_sum / static_cast<double>(finite_count) : 0.0);
    double entropy = 0.0;
    if (sum_p > 0.0) {
      for (const auto& p : pairs) {
        double q = p.persistence() / sum_p;
        if (q > 0.0) entropy -= q * std::log(q);
      }
    }
    out.push_back(entropy);
  };
  persistence_block(eda_pairs, /*full=*/true);
  persistence_block(scr_pairs, /*full=*/false);

  if (out.size() != static_cast<size_t>(kNumericWidth))
    fail(ErrorKind::numerical_failure, "numerical vector assembled with wrong width");
  return out;
}

// ---------------------------------------------------------------------------
// Segment samples

struct SegmentSample {
  std::string session_id;
  int segment_index = 0;
  Tensor2 kinematic;             // 16 x T_s
  Tensor2 eda_ts;                // 15 x T_s
  std::vector<double> eda_num;   // 38
  CsLabel label;
};

inline std::vector<SegmentSample> build_segments(const ProcessedSession& ps, int t_s,
                                                 const PipelineConfig& cfg = {}) {
  std::vector<SegmentSample> out;
  for (const auto& seg : segment_session(ps, t_s)) {
    SegmentSample sample;
    sample.session_id = ps.session_id;
    sample.segment_index = seg.index;
    sample.label = ps.label;
    sample.kinematic = kinematic_feature_matrix(ps, seg.start, t_s);
    sample.eda_ts = eda_timeseries_matrix(ps, seg.start, t_s);
    auto events = sigproc::detect_scr_events(ChannelSeries("scr", cfg.target_hz, seg.scr),
                                             cfg.scr_threshold_uS);
    sample.eda_num = eda_numerical_vector(seg, events, sublevel_persistence(seg.eda),
                                          sublevel_persistence(seg.scr));
    out.push_back(std::move(sample));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature store: "CSF1" magic, little-endian u32 counts, fixed-size segment
// records (label byte, 16xT f64, 15xT f64, 38 f64), then a JSON footer.

struct FeatureStore {
  uint32_t t_s = 0;
  std::vector<SegmentSample> segments;
  uint64_t config_hash = 0;
};

namespace detail {

inline void put_u32_le(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64_le(std::string& buf, double v) {
  uint64_t bits = 0;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) {
    uint64_t swapped = 0;
    for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xff) << (8 * (7 - i));
    bits = swapped;
  }
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline uint32_t get_u32_le(const std::string& buf, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + static_cast<size_t>(i)]))
         << (8 * i);
  return v;
}

inline double get_f64_le(const std::string& buf, size_t pos) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + static_cast<size_t>(i)]))
            << (8 * i);
  if constexpr (std::endian::native == std::endian::big) {
    uint64_t swapped = 0;
    for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xff) << (8 * (7 - i));
    bits = swapped;
  }
  double v = 0.0;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline void write_feature_store(const FeatureStore& store, const std::string& path) {
  std::string buf;
  buf += "CSF1";
  detail::put_u32_le(buf, static_cast<uint32_t>(store.segments.size()));
  detail::put_u32_le(buf, store.t_s);
  nlohmann::json footer;
  auto& ids = footer["session_ids"] = nlohmann::json::array();
  auto& indices = footer["segment_indices"] = nlohmann::json::array();
  auto& deltas = footer["ssq_deltas"] = nlohmann::json::array();
  for (const auto& seg : store.segments) {
    if (seg.kinematic.rows != kKinematicRows || seg.kinematic.cols != store.t_s ||
        seg.eda_ts.rows != kEdaTsRows || seg.eda_ts.cols != store.t_s ||
        seg.eda_num.size() != kNumericWidth)
      fail(ErrorKind::shape_error, "feature store: segment with unexpected shape");
    buf.push_back(static_cast<char>(seg.label.value));
    for (double v : seg.kinematic.data) detail::put_f64_le(buf, v);
    for (double v : seg.eda_ts.data) detail::put_f64_le(buf, v);
    for (double v : seg.eda_num) detail::put_f64_le(buf, v);
    ids.push_back(seg.session_id);
    indices.push_back(seg.segment_index);
    deltas.push_back(seg.label.ssq_delta);
  }
  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(store.config_hash));
  footer["config_hash"] = hash_hex;
  buf += footer.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  out.write(buf.data(), static_cast<long>(buf.size()));
}

inline FeatureStore read_feature_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::missing_file, path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || buf.compare(0, 4, "CSF1") != 0)
    fail(ErrorKind::corrupt_file, path + ": bad magic");
  FeatureStore store;
  uint32_t n_segments = detail::get_u32_le(buf, 4);
  store.t_s = detail::get_u32_le(buf, 8);
  size_t t = store.t_s;
  size_t record =
      1 + 8 * (static_cast<size_t>(kKinematicRows) * t + static_cast<size_t>(kEdaTsRows) * t +
               static_cast<size_t>(kNumericWidth));
  size_t pos = 12;
  if (buf.size() < pos + record * n_segments)
    fail(ErrorKind::corrupt_file, path + ": truncated records");
  store.segments.resize(n_segments);
  for (uint32_t s = 0; s < n_segments; ++s) {
    auto& seg = store.segments[s];
    seg.label.value = static_cast<int>(static_cast<unsigned char>(buf[pos]));
    pos += 1;
    seg.kinematic = Tensor2(kKinematicRows, t);
    for (auto& v : seg.kinematic.data) {
      v = detail::get_f64_le(buf, pos);
      pos += 8;
    }
    seg.eda_ts = Tensor2(kEdaTsRows, t);
    for (auto& v : seg.eda_ts.data) {
      v = detail::get_f64_le(buf, pos);
      pos += 8;
    }
    seg.eda_num.resize(kNumericWidth);
    for (auto& v : seg.eda_num) {
      v = detail::get_f64_le(buf, pos);
      pos += 8;
    }
  }
  nlohmann::json footer;
  try {
    footer = nlohmann::json::parse(buf.substr(pos));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::corrupt_file, path + ": bad footer: " + e.what());
  }
  auto ids = footer.at("session_ids");
  auto indices = footer.at("segment_indices");
  if (ids.size() != n_segments || indices.size() != n_segments)
    fail(ErrorKind::corrupt_file, path + ": footer does not match record count");
  for (uint32_t s = 0; s < n_segments; ++s) {
    store.segments[s].session_id = ids.at(s).get<std::string>();
    store.segments[s].segment_index = indices.at(s).get<int>();
    if (footer.contains("ssq_deltas"))
      store.segments[s].label.ssq_delta = footer.at("ssq_deltas").at(s).get<double>();
  }
  store.config_hash =
      std::strtoull(footer.at("config_hash").get<std::string>().c_str(), nullptr, 16);
  return store;
}

// One row per segment, fully flattened; columns documented in the header.
inline void export_feature_csv(const FeatureStore& store, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  out << "session_id,segment_index,label";
  for (int r = 0; r < kKinematicRows; ++r)
    for (uint32_t c = 0; c < store.t_s; ++c) out << ",kin_r" << r << "_t" << c;
  for (int r = 0; r < kEdaTsRows; ++r)
    for (uint32_t c = 0; c < store.t_s; ++c) out << ",eda_r" << r << "_t" << c;
  for (int i = 0; i < kNumericWidth; ++i) out << ",num_" << i;
  out << "\n";
  for (const auto& seg : store.segments) {
    out << seg.session_id << "," << seg.segment_index << "," << seg.label.value;
    for (double v : seg.kinematic.data) out << "," << csv::format_double(v);
    for (double v : seg.eda_ts.data) out << "," << csv::format_double(v);
    for (double v : seg.eda_num) out << "," << csv::format_double(v);
    out << "\n";
  }
}

}  // namespace cyberseer::features
