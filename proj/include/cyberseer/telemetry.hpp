// Session data model: channel series, SSQ labels, disk I/O for recorded
// sessions, validation, and the synthetic session generator.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyberseer/common.hpp"
#include "cyberseer/csv.hpp"

namespace cyberseer::telemetry {

struct ChannelSeries {
  std::string name;
  double rate_hz = 0.0;
  std::vector<double> values;

  ChannelSeries() = default;
  ChannelSeries(std::string n, double rate, std::vector<double> v)
      : name(std::move(n)), rate_hz(rate), values(std::move(v)) {
    if (rate_hz <= 0.0) fail(ErrorKind::invalid_input, "channel " + name + ": rate must be > 0");
    if (values.empty()) fail(ErrorKind::invalid_input, "channel " + name + ": empty series");
  }

  size_t size() const { return values.size(); }
};

// Channel names for the required and optional series of one session.
namespace channel {
inline constexpr const char* head_pos_x = "head_pos_x";
inline constexpr const char* head_pos_y = "head_pos_y";
inline constexpr const char* head_pos_z = "head_pos_z";
inline constexpr const char* head_rot_x = "head_rot_x";
inline constexpr const char* head_rot_y = "head_rot_y";
inline constexpr const char* head_rot_z = "head_rot_z";
inline constexpr const char* speed = "speed";
inline constexpr const char* rotation = "rotation";
inline constexpr const char* eda = "eda";
inline constexpr const char* bvp = "bvp";
inline constexpr const char* tem = "tem";
}  // namespace channel

inline const std::vector<std::string>& required_channels() {
  static const std::vector<std::string> names = {
      channel::head_pos_x, channel::head_pos_y, channel::head_pos_z,
      channel::head_rot_x, channel::head_rot_y, channel::head_rot_z,
      channel::speed,      channel::rotation,   channel::eda,
  };
  return names;
}

struct RawSession {
  std::string session_id;
  std::string participant_id;
  int duration_s = 0;
  std::map<std::string, ChannelSeries> channels;
  double ssq_pre = 0.0;
  double ssq_post = 0.0;

  const ChannelSeries& channel(const std::string& name) const {
    auto it = channels.find(name);
    if (it == channels.end()) fail(ErrorKind::missing_channel, name);
    return it->second;
  }

  bool has_channel(const std::string& name) const { return channels.count(name) > 0; }
};

struct CsLabel {
  int value = 0;  // 0 = non-sick, 1 = sick
  double ssq_delta = 0.0;
};

inline double ssq_delta(double ssq_pre, double ssq_post) {
  if (!std::isfinite(ssq_pre) || !std::isfinite(ssq_post))
    fail(ErrorKind::invalid_input, "ssq scores must be finite");
  return ssq_post - ssq_pre;
}

// Sick iff the post-minus-pre SSQ score reaches 20.
inline CsLabel label_from_ssq(double delta) {
  if (!std::isfinite(delta)) fail(ErrorKind::invalid_input, "ssq delta must be finite");
  return CsLabel{delta >= 20.0 ? 1 : 0, delta};
}

inline CsLabel session_label(const RawSession& s) {
  return label_from_ssq(ssq_delta(s.ssq_pre, s.ssq_post));
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { non_finite, flatline_eda, length_mismatch, missing_channel };
  Kind kind;
  std::string channel;
  long index = -1;  // sample index for non_finite, else -1
  std::string message;
};

struct ValidationReport {
  std::string session_id;
  std::vector<Violation> violations;
  bool passed() const { return violations.empty(); }
};

inline ValidationReport validate_session(const RawSession& s) {
  ValidationReport report;
  report.session_id = s.session_id;
  for (const auto& name : required_channels()) {
    if (!s.has_channel(name)) {
      report.violations.push_back({Violation::Kind::missing_channel, name, -1,
                                   "required channel missing: " + name});
    }
  }
  for (const auto& [name, series] : s.channels) {
    for (size_t i = 0; i < series.values.size(); ++i) {
      if (!std::isfinite(series.values[i])) {
        report.violations.push_back({Violation::Kind::non_finite, name, static_cast<long>(i),
                                     name + "[" + std::to_string(i) + "] is not finite"});
        break;  // one finding per channel is enough to reject
      }
    }
    double expected = s.duration_s * series.rate_hz;
    double len = static_cast<double>(series.values.size());
    if (len < expected - 1.0 || len > expected + 1.0) {
      report.violations.push_back({Violation::Kind::length_mismatch, name, -1,
                                   name + ": length " + std::to_string(series.values.size()) +
                                       " vs expected " + std::to_string(expected)});
    }
  }
  if (s.has_channel(channel::eda)) {
    const auto& eda = s.channel(channel::eda).values;
    if (all_finite(eda) && population_variance(eda) == 0.0) {
      report.violations.push_back({Violation::Kind::flatline_eda, channel::eda, -1,
                                   "eda has zero variance over the full session"});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Disk layout: manifest.json plus one CSV per channel group.

namespace detail {

inline double default_rate(const std::string& group) {
  if (group == "head" || group == "motion") return 90.0;
  if (group == "eda" || group == "tem") return 4.0;
  if (group == "bvp") return 64.0;
  fail(ErrorKind::invalid_config, "unknown channel group: " + group);
}

struct GroupSpec {
  std::string group;
  std::vector<std::string> columns;        // csv columns after 't'
  std::vector<std::string> channel_names;  // matching channel names
};

inline const std::vector<GroupSpec>& group_specs() {
  static const std::vector<GroupSpec> specs = {
      {"head",
       {"pos_x", "pos_y", "pos_z", "rot_x", "rot_y", "rot_z"},
       {channel::head_pos_x, channel::head_pos_y, channel::head_pos_z, channel::head_rot_x,
        channel::head_rot_y, channel::head_rot_z}},
      {"motion", {"speed", "rotation"}, {channel::speed, channel::rotation}},
      {"eda", {"eda"}, {channel::eda}},
      {"bvp", {"bvp"}, {channel::bvp}},
      {"tem", {"tem"}, {channel::tem}},
  };
  return specs;
}

inline bool group_required(const std::string& group) {
  return group == "head" || group == "motion" || group == "eda";
}

}  // namespace detail

// Reconcile a loaded channel against duration*rate: longer series are cut to
// the expected length, up to one missing sample is tolerated.
inline void reconcile_length(ChannelSeries& series, int duration_s) {
  double expected_d = duration_s * series.rate_hz;
  size_t expected = static_cast<size_t>(std::llround(expected_d));
  if (series.values.size() + 1 < expected) {
    fail(ErrorKind::length_mismatch,
         series.name + ": got " + std::to_string(series.values.size()) + " samples, expected " +
             std::to_string(expected));
  }
  if (series.values.size() > expected) series.values.resize(expected);
}

inline RawSession load_session(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorKind::missing_file, manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::corrupt_file, manifest_path.string() + ": " + e.what());
  }

  RawSession s;
  try {
    s.session_id = manifest.at("session_id").get<std::string>();
    s.participant_id = manifest.at("participant_id").get<std::string>();
    s.duration_s = manifest.at("duration_s").get<int>();
    s.ssq_pre = manifest.at("ssq_pre").get<double>();
    s.ssq_post = manifest.at("ssq_post").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::corrupt_file, manifest_path.string() + ": " + e.what());
  }

  auto dir = manifest_path.parent_path();
  auto files = manifest.value("channels", nlohmann::json::object());
  for (const auto& spec : detail::group_specs()) {
    if (!files.contains(spec.group)) {
      if (detail::group_required(spec.group))
        fail(ErrorKind::missing_channel, spec.group + " (not in manifest)");
      continue;
    }
    auto path = dir / files.at(spec.group).get<std::string>();
    if (!std::filesystem::exists(path)) {
      if (detail::group_required(spec.group)) fail(ErrorKind::missing_channel, spec.group);
      continue;
    }
    auto table = csv::read_table(path.string());
    std::vector<std::string> expected_header = {"t"};
    expected_header.insert(expected_header.end(), spec.columns.begin(), spec.columns.end());
    if (table.header != expected_header)
      fail(ErrorKind::malformed_csv, path.string() + ": unexpected header");
    if (table.rows.empty()) fail(ErrorKind::malformed_csv, path.string() + ": no data rows");
    for (size_t r = 1; r < table.rows.size(); ++r) {
      if (!(table.rows[r][0] > table.rows[r - 1][0]))
        fail(ErrorKind::malformed_csv,
             path.string() + ":" + std::to_string(r + 2) + " time column not increasing");
    }
    double rate = detail::default_rate(spec.group);
    if (manifest.contains("rates") && manifest.at("rates").contains(spec.group))
      rate = manifest.at("rates").at(spec.group).get<double>();
    for (size_t c = 0; c < spec.columns.size(); ++c) {
      std::vector<double> vals;
      vals.reserve(table.rows.size());
      for (const auto& row : table.rows) vals.push_back(row[c + 1]);
      ChannelSeries series(spec.channel_names[c], rate, std::move(vals));
      reconcile_length(series, s.duration_s);
      s.channels.emplace(series.name, std::move(series));
    }
  }
  return s;
}

inline void save_session(const RawSession& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["session_id"] = s.session_id;
  manifest["participant_id"] = s.participant_id;
  manifest["duration_s"] = s.duration_s;
  manifest["ssq_pre"] = s.ssq_pre;
  manifest["ssq_post"] = s.ssq_post;
  nlohmann::json files = nlohmann::json::object();
  nlohmann::json rates = nlohmann::json::object();

  for (const auto& spec : detail::group_specs()) {
    if (!s.has_channel(spec.channel_names[0])) continue;
    std::string filename = spec.group + ".csv";
    files[spec.group] = filename;
    const auto& first = s.channel(spec.channel_names[0]);
    rates[spec.group] = first.rate_hz;
    std::ofstream out(dir / filename);
    if (!out) fail(ErrorKind::missing_file, (dir / filename).string());
    out << "t";
    for (const auto& col : spec.columns) out << "," << col;
    out << "\n";
    std::vector<const ChannelSeries*> cols;
    for (const auto& name : spec.channel_names) cols.push_back(&s.channel(name));
    for (size_t i = 0; i < first.values.size(); ++i) {
      out << csv::format_double(static_cast<double>(i) / first.rate_hz);
      for (const auto* col : cols) out << "," << csv::format_double(col->values[i]);
      out << "\n";
    }
  }
  manifest["channels"] = files;
  manifest["rates"] = rates;
  std::ofstream mout(dir / "manifest.json");
  mout << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Synthetic session generator. Sick sessions get an upward tonic EDA drift,
// denser SCR bursts, and larger head-rotation variance than non-sick ones.

struct GeneratorConfig {
  int duration_s = 240;
  double kinematic_rate_hz = 90.0;
  double eda_rate_hz = 4.0;
  double sick_probability = 0.5;
  // SSQ delta draws
  double sick_delta_lo = 25.0, sick_delta_hi = 60.0;
  double nonsick_delta_lo = 0.0, nonsick_delta_hi = 15.0;
  // A per-session arousal level couples the modalities: both the kinematic
  // agitation and the electrodermal activity scale with it, the way one
  // sickness state drives both signals. Sick sessions draw high arousal,
  // non-sick low.
  double arousal_sick_lo = 0.65, arousal_sick_hi = 1.0;
  double arousal_nonsick_lo = 0.0, arousal_nonsick_hi = 0.35;
  // signal shape at the arousal extremes (low end first)
  double yaw_amp_nonsick = 15.0, yaw_amp_sick = 42.0;           // deg, head sway
  double rot_jitter_nonsick = 1.5, rot_jitter_sick = 9.0;       // deg
  double speed_base_nonsick = 1.35, speed_base_sick = 0.7;      // m/s, sick users slow down
  double scr_rate_per_min_nonsick = 0.6, scr_rate_per_min_sick = 8.0;
  double eda_base_lo = 1.5, eda_base_hi = 2.2;                  // uS at zero arousal
  double eda_base_arousal_gain = 2.5;                           // uS added at full arousal
  double tonic_drift_sick_lo = 2.0, tonic_drift_sick_hi = 4.0;  // uS over session at full arousal
  // Each SCR burst coincides with a head-rotation transient (a startle),
  // so discomfort episodes are visible in both modalities.
  double startle_rot_gain = 30.0;  // deg of rotation transient per uS of burst
  bool include_bvp_tem = true;

  void validate() const {
    if (duration_s <= 0 || kinematic_rate_hz <= 0 || eda_rate_hz <= 0)
      fail(ErrorKind::invalid_config, "rates and duration must be positive");
    if (sick_probability < 0.0 || sick_probability > 1.0)
      fail(ErrorKind::invalid_config, "sick_probability must be in [0,1]");
  }
};

namespace detail {

// SCR burst: sharp rise, slow exponential recovery.
inline void add_scr_burst(std::vector<double>& eda, double rate_hz, double t0, double amplitude) {
  double tau_rise = 0.8, tau_decay = 3.5;
  size_t start = static_cast<size_t>(t0 * rate_hz);
  for (size_t i = start; i < eda.size(); ++i) {
    double dt = static_cast<double>(i) / rate_hz - t0;
    if (dt < 0) continue;
    double v = amplitude * (1.0 - std::exp(-dt / tau_rise)) * std::exp(-dt / tau_decay);
    if (v < 1e-6 && dt > tau_decay) break;
    eda[i] += v;
  }
}

// Head-rotation transient accompanying a burst: a damped jerk ~1.5 s long.
inline void add_startle(std::vector<double>& rot, double rate_hz, double t0, double amplitude) {
  double tau = 0.5;
  size_t start = static_cast<size_t>(t0 * rate_hz);
  for (size_t i = start; i < rot.size(); ++i) {
    double dt = static_cast<double>(i) / rate_hz - t0;
    if (dt < 0) continue;
    if (dt > 2.5) break;
    rot[i] += amplitude * std::sin(2.0 * M_PI * 1.2 * dt) * std::exp(-dt / tau);
  }
}

}  // namespace detail

inline RawSession generate_synthetic_session(const GeneratorConfig& config, uint64_t seed) {
  config.validate();
  rng::Engine eng(rng::mix(seed, 0x5e551017ULL));

  RawSession s;
  s.session_id = "synth-" + std::to_string(seed);
  s.participant_id = "p-" + std::to_string(seed % 53);
  s.duration_s = config.duration_s;

  bool sick = eng.bernoulli(config.sick_probability);
  double delta = sick ? eng.uniform(config.sick_delta_lo, config.sick_delta_hi)
                      : eng.uniform(config.nonsick_delta_lo, config.nonsick_delta_hi);
  s.ssq_pre = eng.uniform(0.0, 8.0);
  s.ssq_post = s.ssq_pre + delta;

  double arousal = sick ? eng.uniform(config.arousal_sick_lo, config.arousal_sick_hi)
                        : eng.uniform(config.arousal_nonsick_lo, config.arousal_nonsick_hi);
  auto lerp = [&](double lo, double hi) { return lo + (hi - lo) * arousal; };

  const size_t n_kin = static_cast<size_t>(config.duration_s * config.kinematic_rate_hz);
  const size_t n_eda = static_cast<size_t>(config.duration_s * config.eda_rate_hz);
  const double kin_rate = config.kinematic_rate_hz;

  auto time_at = [&](size_t i) { return static_cast<double>(i) / kin_rate; };

  // Head position: slow wander around a standing pose.
  double fx = eng.uniform(0.01, 0.04), fz = eng.uniform(0.01, 0.04);
  double px_phase = eng.uniform(0.0, 2.0 * M_PI), pz_phase = eng.uniform(0.0, 2.0 * M_PI);
  std::vector<double> pos_x(n_kin), pos_y(n_kin), pos_z(n_kin);
  for (size_t i = 0; i < n_kin; ++i) {
    double t = time_at(i);
    pos_x[i] = 0.4 * std::sin(2.0 * M_PI * fx * t + px_phase) + 0.01 * eng.normal();
    pos_y[i] = 1.6 + 0.02 * std::sin(2.0 * M_PI * 0.25 * t) + 0.004 * eng.normal();
    pos_z[i] = 0.4 * std::sin(2.0 * M_PI * fz * t + pz_phase) + 0.01 * eng.normal();
  }

  // Head rotation: sway whose amplitude and jitter both scale with arousal;
  // agitated users sway wider and noisier.
  double jitter = lerp(config.rot_jitter_nonsick, config.rot_jitter_sick);
  double yaw_amp = lerp(config.yaw_amp_nonsick, config.yaw_amp_sick) * eng.uniform(0.9, 1.1);
  std::vector<double> rot_x(n_kin), rot_y(n_kin), rot_z(n_kin);
  double yaw_f = eng.uniform(0.05, 0.15), yaw_phase = eng.uniform(0.0, 2.0 * M_PI);
  double ar_x = 0.0, ar_y = 0.0, ar_z = 0.0;  // smooth jitter via AR(1)
  for (size_t i = 0; i < n_kin; ++i) {
    double t = time_at(i);
    ar_x = 0.995 * ar_x + 0.1 * eng.normal();
    ar_y = 0.995 * ar_y + 0.1 * eng.normal();
    ar_z = 0.995 * ar_z + 0.1 * eng.normal();
    rot_x[i] = 0.2 * yaw_amp * std::sin(2.0 * M_PI * 0.08 * t) + jitter * ar_x;
    rot_y[i] = yaw_amp * std::sin(2.0 * M_PI * yaw_f * t + yaw_phase) + jitter * ar_y;
    rot_z[i] = 0.1 * yaw_amp * std::sin(2.0 * M_PI * 0.11 * t) + jitter * ar_z;
  }

  // Locomotion: steady walk with mild modulation; angular speed follows yaw.
  std::vector<double> speed(n_kin), rotation(n_kin);
  double speed_base = lerp(config.speed_base_nonsick, config.speed_base_sick) *
                      eng.uniform(0.9, 1.1);
  double rot_speed_jitter = 0.6 * jitter;
  for (size_t i = 0; i < n_kin; ++i) {
    double t = time_at(i);
    speed[i] = speed_base + 0.2 * std::sin(2.0 * M_PI * 0.05 * t) + 0.04 * eng.normal();
    rotation[i] = yaw_amp * 2.0 * M_PI * yaw_f * std::cos(2.0 * M_PI * yaw_f * t + yaw_phase) +
                  rot_speed_jitter * eng.normal();
  }

  // EDA: tonic base with an arousal-scaled upward drift and Poisson SCR
  // bursts on top; low-arousal sessions stay near flat with sparse bursts.
  std::vector<double> eda(n_eda);
  double base = eng.uniform(config.eda_base_lo, config.eda_base_hi) +
                config.eda_base_arousal_gain * arousal;
  double drift = arousal * eng.uniform(config.tonic_drift_sick_lo, config.tonic_drift_sick_hi);
  for (size_t i = 0; i < n_eda; ++i) {
    double t = static_cast<double>(i) / config.eda_rate_hz;
    eda[i] = base + drift * (t / config.duration_s) + 0.01 * eng.normal();
  }
  double burst_rate = lerp(config.scr_rate_per_min_nonsick, config.scr_rate_per_min_sick);
  int n_bursts = eng.poisson(burst_rate * config.duration_s / 60.0);
  for (int b = 0; b < n_bursts; ++b) {
    double t0 = eng.uniform(0.0, static_cast<double>(config.duration_s));
    double amp = eng.uniform(0.1, 0.7);
    detail::add_scr_burst(eda, config.eda_rate_hz, t0, amp);
    double rot_amp = config.startle_rot_gain * amp;
    detail::add_startle(rot_x, kin_rate, t0, 0.6 * rot_amp);
    detail::add_startle(rot_y, kin_rate, t0, rot_amp);
    detail::add_startle(rotation, kin_rate, t0, 1.5 * rot_amp);
  }

  auto put = [&](const char* name, double rate, std::vector<double> v) {
    s.channels.emplace(name, ChannelSeries(name, rate, std::move(v)));
  };
  put(channel::head_pos_x, kin_rate, std::move(pos_x));
  put(channel::head_pos_y, kin_rate, std::move(pos_y));
  put(channel::head_pos_z, kin_rate, std::move(pos_z));
  put(channel::head_rot_x, kin_rate, std::move(rot_x));
  put(channel::head_rot_y, kin_rate, std::move(rot_y));
  put(channel::head_rot_z, kin_rate, std::move(rot_z));
  put(channel::speed, kin_rate, std::move(speed));
  put(channel::rotation, kin_rate, std::move(rotation));
  put(channel::eda, config.eda_rate_hz, std::move(eda));

  if (config.include_bvp_tem) {
    size_t n_bvp = static_cast<size_t>(config.duration_s * 64.0);
    std::vector<double> bvp(n_bvp), tem(n_eda);
    double hr = eng.uniform(1.0, 1.4);  // beats per second
    for (size_t i = 0; i < n_bvp; ++i)
      bvp[i] = std::sin(2.0 * M_PI * hr * static_cast<double>(i) / 64.0) + 0.05 * eng.normal();
    for (size_t i = 0; i < n_eda; ++i)
      tem[i] = 34.5 + 0.3 * (static_cast<double>(i) / n_eda) + 0.01 * eng.normal();
    put(channel::bvp, 64.0, std::move(bvp));
    put(channel::tem, config.eda_rate_hz, std::move(tem));
  }
  return s;
}

}  // namespace cyberseer::telemetry
