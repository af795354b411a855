// Evaluation protocol: k-fold cross-validation with segment- or
// session-level grouping, time-span and exposure-time sweeps with sample-size
// controls, seeded random hyperparameter search, and CSV report emission.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cyberseer/common.hpp"
#include "cyberseer/features.hpp"
#include "cyberseer/models.hpp"
#include "cyberseer/nnet.hpp"
#include "cyberseer/sigproc.hpp"

namespace cyberseer::experiments {

enum class Grouping { segment, session };

inline Grouping grouping_from_string(const std::string& s) {
  if (s == "segment") return Grouping::segment;
  if (s == "session") return Grouping::session;
  fail(ErrorKind::invalid_config, "unknown grouping: " + s);
}

inline const char* to_string(Grouping g) { return g == Grouping::segment ? "segment" : "session"; }

struct FoldSpec {
  int k = 5;
  Grouping grouping = Grouping::session;
  uint64_t seed = 0;
};

// Disjoint index folds covering [0, n). Session grouping keeps all items of
// one session in one fold; fold sizes differ by at most one item (segment
// mode) or one session (session mode).
inline std::vector<std::vector<size_t>> kfold_split(
    size_t n_items, const FoldSpec& spec,
    const std::vector<std::string>* session_of_item = nullptr) {
  if (spec.k < 2) fail(ErrorKind::invalid_input, "kfold: k must be >= 2");
  size_t k = static_cast<size_t>(spec.k);
  std::vector<std::vector<size_t>> folds(k);
  auto chunk = [&](size_t n, size_t fold) {
    // fold sizes: first n%k folds carry one extra
    size_t base = n / k, extra = n % k;
    size_t lo = fold * base + std::min(fold, extra);
    size_t hi = lo + base + (fold < extra ? 1 : 0);
    return std::pair<size_t, size_t>(lo, hi);
  };
  if (spec.grouping == Grouping::segment) {
    if (n_items < k) fail(ErrorKind::invalid_input, "kfold: fewer items than folds");
    std::vector<size_t> order(n_items);
    for (size_t i = 0; i < n_items; ++i) order[i] = i;
    rng::Engine eng(rng::mix(spec.seed, 0xf01dULL));
    eng.shuffle(order);
    for (size_t f = 0; f < k; ++f) {
      auto [lo, hi] = chunk(n_items, f);
      folds[f].assign(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi));
      std::sort(folds[f].begin(), folds[f].end());
    }
    return folds;
  }
  if (!session_of_item || session_of_item->size() != n_items)
    fail(ErrorKind::invalid_input, "kfold: session grouping requires session ids");
  std::vector<std::string> sessions;  // first-appearance order
  std::map<std::string, size_t> session_index;
  for (const auto& id : *session_of_item) {
    if (session_index.emplace(id, sessions.size()).second) sessions.push_back(id);
  }
  if (sessions.size() < k) fail(ErrorKind::invalid_input, "kfold: fewer sessions than folds");
  std::vector<size_t> order(sessions.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng::Engine eng(rng::mix(spec.seed, 0xf01dULL));
  eng.shuffle(order);
  std::vector<size_t> fold_of_session(sessions.size());
  for (size_t f = 0; f < k; ++f) {
    auto [lo, hi] = chunk(sessions.size(), f);
    for (size_t i = lo; i < hi; ++i) fold_of_session[order[i]] = f;
  }
  for (size_t i = 0; i < n_items; ++i)
    folds[fold_of_session[session_index[(*session_of_item)[i]]]].push_back(i);
  return folds;
}

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  int t_s = 0;
  std::vector<features::SegmentSample> segments;

  std::vector<std::string> session_ids() const {
    std::vector<std::string> out;
    out.reserve(segments.size());
    for (const auto& s : segments) out.push_back(s.session_id);
    return out;
  }
};

inline Dataset dataset_from_sessions(const std::vector<features::ProcessedSession>& sessions,
                                     int t_s, const features::PipelineConfig& cfg = {}) {
  Dataset d;
  d.t_s = t_s;
  for (const auto& ps : sessions) {
    auto segs = features::build_segments(ps, t_s, cfg);
    for (auto& s : segs) d.segments.push_back(std::move(s));
  }
  return d;
}

inline Dataset dataset_from_store(const features::FeatureStore& store) {
  return Dataset{static_cast<int>(store.t_s), store.segments};
}

// Uniform subsample without replacement, deterministic per seed; preserves
// the original segment order.
inline Dataset subsample_dataset(const Dataset& d, size_t target, uint64_t seed) {
  if (target > d.segments.size())
    fail(ErrorKind::invalid_input, "subsample: target exceeds dataset size");
  std::vector<size_t> order(d.segments.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng::Engine eng(rng::mix(seed, 0x5a3bULL));
  eng.shuffle(order);
  order.resize(target);
  std::sort(order.begin(), order.end());
  Dataset out;
  out.t_s = d.t_s;
  out.segments.reserve(target);
  for (size_t i : order) out.segments.push_back(d.segments[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
};

inline Metrics metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    fail(ErrorKind::invalid_input, "metrics: length mismatch");
  if (predictions.empty()) fail(ErrorKind::invalid_input, "metrics: empty input");
  size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
    if (predictions[i] == 1 && labels[i] == 1) ++tp;
    if (predictions[i] == 1 && labels[i] == 0) ++fp;
    if (predictions[i] == 0 && labels[i] == 1) ++fn;
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation

struct ModelPlan {
  models::ModelKind kind = models::ModelKind::kinematic;
  models::EdaParams eda;
  models::KinematicParams kinematic;
  models::FusionParams fusion;
  models::EnhancedParams enhanced;
  models::EdaParams teacher;  // hyperparameters of the enhanced model's teacher

  double learning_rate() const {
    switch (kind) {
      case models::ModelKind::eda: return eda.lr;
      case models::ModelKind::kinematic: return kinematic.lr;
      case models::ModelKind::fusion: return fusion.lr;
      case models::ModelKind::enhanced: return enhanced.lr;
    }
    return 0.0;
  }
};

inline ModelPlan preset_plan(models::ModelKind kind) {
  ModelPlan plan;
  plan.kind = kind;
  return plan;
}

struct CvConfig {
  FoldSpec folds;
  int epochs = 100;
  int teacher_epochs = 0;  // 0 = same as epochs
  int batch_size = 64;
  uint64_t train_seed = 0;
  bool normalize_numeric = true;
  bool global_normalization = false;  // fit the normalizer on the whole dataset
  int jobs = 1;
};

struct FoldResult {
  int fold = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  size_t n_train = 0;
  size_t n_test = 0;
};

struct CvResult {
  std::string model;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over folds
  size_t n_samples = 0;
  std::string grouping;
  uint64_t seed = 0;
};

namespace detail {

struct BlockNormalizers {
  sigproc::NormalizerStats kinematic;
  sigproc::NormalizerStats eda_ts;
  sigproc::NormalizerStats numeric;
  bool normalize_numeric = true;
};

inline BlockNormalizers fit_normalizers(const Dataset& d, const std::vector<size_t>& indices,
                                        bool normalize_numeric) {
  std::vector<std::vector<double>> kin_rows, eda_rows, num_rows;
  for (size_t i : indices) {
    const auto& seg = d.segments[i];
    for (size_t c = 0; c < seg.kinematic.cols; ++c) {
      std::vector<double> row(seg.kinematic.rows);
      for (size_t r = 0; r < seg.kinematic.rows; ++r) row[r] = seg.kinematic.at(r, c);
      kin_rows.push_back(std::move(row));
    }
    for (size_t c = 0; c < seg.eda_ts.cols; ++c) {
      std::vector<double> row(seg.eda_ts.rows);
      for (size_t r = 0; r < seg.eda_ts.rows; ++r) row[r] = seg.eda_ts.at(r, c);
      eda_rows.push_back(std::move(row));
    }
    num_rows.push_back(seg.eda_num);
  }
  BlockNormalizers n;
  n.kinematic = sigproc::fit_normalizer(kin_rows);
  n.eda_ts = sigproc::fit_normalizer(eda_rows);
  n.numeric = sigproc::fit_normalizer(num_rows);
  n.normalize_numeric = normalize_numeric;
  return n;
}

inline Tensor2 normalize_matrix(const sigproc::NormalizerStats& stats, const Tensor2& m) {
  Tensor2 out(m.rows, m.cols);
  for (size_t r = 0; r < m.rows; ++r)
    for (size_t c = 0; c < m.cols; ++c) out.at(r, c) = stats.apply_one(r, m.at(r, c));
  return out;
}

inline features::SegmentSample normalize_segment(const BlockNormalizers& n,
                                                 const features::SegmentSample& seg) {
  features::SegmentSample out = seg;
  out.kinematic = normalize_matrix(n.kinematic, seg.kinematic);
  out.eda_ts = normalize_matrix(n.eda_ts, seg.eda_ts);
  if (n.normalize_numeric) out.eda_num = n.numeric.apply_row(seg.eda_num);
  return out;
}

inline nnet::Sample make_sample(const features::SegmentSample& seg,
                                const std::vector<std::string>& tags) {
  nnet::Sample s;
  for (const auto& tag : tags) {
    if (tag == models::block::kinematic)
      s.inputs.push_back(seg.kinematic);
    else if (tag == models::block::eda_ts)
      s.inputs.push_back(seg.eda_ts);
    else if (tag == models::block::eda_num)
      s.inputs.push_back(Tensor2::column(seg.eda_num));
    else
      fail(ErrorKind::invalid_config, "unknown input tag: " + tag);
  }
  s.label = static_cast<double>(seg.label.value);
  return s;
}

template <typename Fn>
inline void parallel_for(size_t n, int jobs, Fn fn) {
  size_t workers = std::min<size_t>(n, jobs < 1 ? 1 : static_cast<size_t>(jobs));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline CvResult run_cv(const ModelPlan& plan, const Dataset& dataset, const CvConfig& cfg) {
  if (dataset.segments.empty()) fail(ErrorKind::invalid_input, "run_cv: empty dataset");
  auto sessions = dataset.session_ids();
  auto folds = kfold_split(dataset.segments.size(), cfg.folds,
                           cfg.folds.grouping == Grouping::session ? &sessions : nullptr);

  CvResult result;
  result.model = models::to_string(plan.kind);
  result.grouping = to_string(cfg.folds.grouping);
  result.seed = cfg.train_seed;
  result.n_samples = dataset.segments.size();
  result.folds.resize(folds.size());

  int teacher_epochs = cfg.teacher_epochs > 0 ? cfg.teacher_epochs : cfg.epochs;

  detail::parallel_for(folds.size(), cfg.jobs, [&](size_t f) {
    try {
      std::vector<size_t> test_idx = folds[f];
      std::vector<size_t> train_idx;
      train_idx.reserve(dataset.segments.size() - test_idx.size());
      std::set<size_t> held(test_idx.begin(), test_idx.end());
      for (size_t i = 0; i < dataset.segments.size(); ++i)
        if (!held.count(i)) train_idx.push_back(i);
      if (train_idx.empty() || test_idx.empty())
        fail(ErrorKind::invalid_input, "empty train or test fold");

      std::vector<size_t> all_idx;
      if (cfg.global_normalization) {
        all_idx.resize(dataset.segments.size());
        for (size_t i = 0; i < all_idx.size(); ++i) all_idx[i] = i;
      }
      auto normalizers = detail::fit_normalizers(
          dataset, cfg.global_normalization ? all_idx : train_idx, cfg.normalize_numeric);

      uint64_t fold_seed = rng::mix(cfg.train_seed, f, 0xcf01dULL);
      int t_s = dataset.t_s;

      auto assemble = [&](const std::vector<size_t>& idx, const std::vector<std::string>& tags) {
        std::vector<nnet::Sample> out;
        out.reserve(idx.size());
        for (size_t i : idx)
          out.push_back(
              detail::make_sample(detail::normalize_segment(normalizers, dataset.segments[i]), tags));
        return out;
      };

      nnet::ModelGraph model;
      if (plan.kind == models::ModelKind::enhanced) {
        // Teacher first, on training-fold data only.
        auto teacher = models::build_eda_model(plan.teacher, t_s, rng::mix(fold_seed, 1));
        auto teacher_train = assemble(train_idx, teacher.input_tags());
        nnet::TrainConfig tcfg;
        tcfg.epochs = teacher_epochs;
        tcfg.batch_size = cfg.batch_size;
        tcfg.learning_rate = plan.teacher.lr;
        tcfg.shuffle_seed = rng::mix(fold_seed, 2);
        nnet::train(teacher, teacher_train, tcfg);

        auto reps = models::extract_teacher_representations(teacher, teacher_train);
        int teacher_width = plan.teacher.lstm + plan.teacher.dense1;
        model = models::build_enhanced_model(plan.enhanced, teacher_width, t_s,
                                             rng::mix(fold_seed, 3));
        if (plan.enhanced.teacher_projection) {
          auto projection = models::make_teacher_projection(teacher_width, plan.enhanced.dense1,
                                                            rng::mix(fold_seed, 5));
          for (auto& rep : reps) rep = models::project_teacher_vector(projection, rep);
        }
        auto student_train = assemble(train_idx, model.input_tags());
        models::train_enhanced(model, student_train, reps, plan.enhanced, cfg.epochs,
                               cfg.batch_size, rng::mix(fold_seed, 4));
      } else {
        switch (plan.kind) {
          case models::ModelKind::eda:
            model = models::build_eda_model(plan.eda, t_s, rng::mix(fold_seed, 1));
            break;
          case models::ModelKind::kinematic:
            model = models::build_kinematic_model(plan.kinematic, t_s, rng::mix(fold_seed, 1));
            break;
          case models::ModelKind::fusion:
            model = models::build_fusion_model(plan.fusion, t_s, rng::mix(fold_seed, 1));
            break;
          case models::ModelKind::enhanced: break;
        }
        auto train_samples = assemble(train_idx, model.input_tags());
        nnet::TrainConfig tcfg;
        tcfg.epochs = cfg.epochs;
        tcfg.batch_size = cfg.batch_size;
        tcfg.learning_rate = plan.learning_rate();
        tcfg.shuffle_seed = rng::mix(fold_seed, 2);
        nnet::train(model, train_samples, tcfg);
      }

      auto test_samples = assemble(test_idx, model.input_tags());
      std::vector<int> predictions, labels;
      predictions.reserve(test_samples.size());
      for (size_t i = 0; i < test_samples.size(); ++i) {
        predictions.push_back(model.predict_class(test_samples[i]));
        labels.push_back(dataset.segments[test_idx[i]].label.value);
      }
      Metrics m = metrics(predictions, labels);
      result.folds[f] = {static_cast<int>(f), m.accuracy, m.f1, train_idx.size(), test_idx.size()};
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
    }
  });

  double mean = 0.0;
  for (const auto& fr : result.folds) mean += fr.accuracy;
  mean /= static_cast<double>(result.folds.size());
  double var = 0.0;
  for (const auto& fr : result.folds) var += (fr.accuracy - mean) * (fr.accuracy - mean);
  var /= static_cast<double>(result.folds.size());
  result.mean_accuracy = mean;
  result.std_accuracy = std::sqrt(var);
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  std::string model;
  std::string variable;  // "T_s" or "n"
  int value = 0;
  CvResult cv;
  size_t n_samples = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

struct SweepConfig {
  std::vector<int> spans = {10, 15, 20, 30, 40};
  bool downsample_control = false;
  std::vector<ModelPlan> plans;
  CvConfig cv;
  uint64_t seed = 0;
  features::PipelineConfig pipeline;
};

inline SweepReport time_span_sweep(const std::vector<features::ProcessedSession>& sessions,
                                   const SweepConfig& cfg) {
  if (sessions.empty()) fail(ErrorKind::invalid_input, "time_span_sweep: no sessions");
  if (cfg.spans.empty()) fail(ErrorKind::invalid_input, "time_span_sweep: no spans");
  if (cfg.plans.empty()) fail(ErrorKind::invalid_input, "time_span_sweep: no models");

  std::map<int, Dataset> datasets;
  size_t min_count = SIZE_MAX;
  for (int span : cfg.spans) {
    datasets[span] = dataset_from_sessions(sessions, span, cfg.pipeline);
    min_count = std::min(min_count, datasets[span].segments.size());
  }
  if (cfg.downsample_control)
    for (auto& [span, d] : datasets)
      d = subsample_dataset(d, min_count, rng::mix(cfg.seed, static_cast<uint64_t>(span)));

  SweepReport report;
  for (size_t p = 0; p < cfg.plans.size(); ++p) {
    for (int span : cfg.spans) {
      CvConfig cell_cfg = cfg.cv;
      cell_cfg.train_seed = rng::mix(cfg.seed, p, static_cast<uint64_t>(span));
      SweepRow row;
      row.model = models::to_string(cfg.plans[p].kind);
      row.variable = "T_s";
      row.value = span;
      row.cv = run_cv(cfg.plans[p], datasets[span], cell_cfg);
      row.n_samples = datasets[span].segments.size();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

struct ExposureConfig {
  int t_s = 20;
  std::vector<int> n_removed = {1, 2, 3, 4, 5};
  std::vector<ModelPlan> plans;
  CvConfig cv;
  uint64_t seed = 0;
  features::PipelineConfig pipeline;
};

// Drops the first n segments of every session to probe exposure time, then
// equalizes sample counts across the n values.
inline SweepReport exposure_sweep(const std::vector<features::ProcessedSession>& sessions,
                                  const ExposureConfig& cfg) {
  if (sessions.empty()) fail(ErrorKind::invalid_input, "exposure_sweep: no sessions");
  if (cfg.n_removed.empty()) fail(ErrorKind::invalid_input, "exposure_sweep: no n values");
  if (cfg.plans.empty()) fail(ErrorKind::invalid_input, "exposure_sweep: no models");
  int max_n = *std::max_element(cfg.n_removed.begin(), cfg.n_removed.end());
  for (const auto& ps : sessions) {
    if (static_cast<size_t>(max_n * cfg.t_s) >= ps.usable_s)
      fail(ErrorKind::invalid_input,
           "exposure_sweep: removing " + std::to_string(max_n) + " segments of " +
               std::to_string(cfg.t_s) + " s over-truncates session " + ps.session_id);
  }

  Dataset full = dataset_from_sessions(sessions, cfg.t_s, cfg.pipeline);
  size_t target = 0;
  for (const auto& ps : sessions) {
    size_t per_session = ps.usable_s / static_cast<size_t>(cfg.t_s);
    target += per_session - static_cast<size_t>(max_n);
  }

  SweepReport report;
  for (size_t p = 0; p < cfg.plans.size(); ++p) {
    for (int n : cfg.n_removed) {
      Dataset truncated;
      truncated.t_s = cfg.t_s;
      for (const auto& seg : full.segments)
        if (seg.segment_index >= n) truncated.segments.push_back(seg);
      truncated = subsample_dataset(truncated, target, rng::mix(cfg.seed, static_cast<uint64_t>(n)));
      CvConfig cell_cfg = cfg.cv;
      cell_cfg.train_seed = rng::mix(cfg.seed, p, static_cast<uint64_t>(n), 0xe4bULL);
      SweepRow row;
      row.model = models::to_string(cfg.plans[p].kind);
      row.variable = "n";
      row.value = n;
      row.cv = run_cv(cfg.plans[p], truncated, cell_cfg);
      row.n_samples = truncated.segments.size();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Random hyperparameter search

struct TuneSpace {
  std::vector<int> lstm_sizes = {32, 64, 96, 128};
  std::vector<int> dense_sizes = {24, 32, 40, 48};
  double rate_lo = 0.1, rate_hi = 0.3;
  double lr_lo = 1e-4, lr_hi = 5e-3;
  std::vector<models::Activation> activations = {models::Activation::tanh,
                                                 models::Activation::relu,
                                                 models::Activation::sigmoid};
  double beta_lo = 0.01, beta_hi = 1.0;
  std::vector<models::RegKind> regs = {models::RegKind::mse, models::RegKind::mae};

  void validate() const {
    if (lstm_sizes.empty() || dense_sizes.empty() || activations.empty() || regs.empty() ||
        rate_lo > rate_hi || lr_lo > lr_hi || lr_lo <= 0.0 || beta_lo > beta_hi || beta_lo <= 0.0)
      fail(ErrorKind::invalid_input, "tune: malformed search space");
  }
};

struct Trial {
  int index = 0;
  nlohmann::json params;
  double mean_accuracy = 0.0;
};

struct TuneResult {
  int best_index = 0;
  ModelPlan best_plan;
  std::vector<Trial> trials;
};

namespace detail {

template <typename T>
inline T pick(rng::Engine& eng, const std::vector<T>& options) {
  return options[static_cast<size_t>(eng.below(options.size()))];
}

inline double log_uniform(rng::Engine& eng, double lo, double hi) {
  return std::exp(eng.uniform(std::log(lo), std::log(hi)));
}

inline ModelPlan sample_plan(models::ModelKind kind, const TuneSpace& space, rng::Engine& eng,
                             nlohmann::json& out_params) {
  ModelPlan plan = preset_plan(kind);
  switch (kind) {
    case models::ModelKind::eda: {
      auto& p = plan.eda;
      p.lstm = pick(eng, space.lstm_sizes);
      p.dense1 = pick(eng, space.dense_sizes);
      p.dense2 = pick(eng, space.dense_sizes);
      p.rate = eng.uniform(space.rate_lo, space.rate_hi);
      p.lr = log_uniform(eng, space.lr_lo, space.lr_hi);
      p.acti = pick(eng, space.activations);
      out_params = {{"LSTM_size", p.lstm}, {"Dense_size_1", p.dense1}, {"Dense_size_2", p.dense2},
                    {"Rate", p.rate},      {"Lr", p.lr},               {"Acti", nnet::to_string(p.acti)}};
      break;
    }
    case models::ModelKind::kinematic: {
      auto& p = plan.kinematic;
      p.lstm = pick(eng, space.lstm_sizes);
      p.dense = pick(eng, space.dense_sizes);
      p.rate = eng.uniform(space.rate_lo, space.rate_hi);
      p.lr = log_uniform(eng, space.lr_lo, space.lr_hi);
      p.acti = pick(eng, space.activations);
      out_params = {{"LSTM_size", p.lstm}, {"Dense_size", p.dense}, {"Rate", p.rate},
                    {"Lr", p.lr},          {"Acti", nnet::to_string(p.acti)}};
      break;
    }
    case models::ModelKind::fusion: {
      auto& p = plan.fusion;
      p.lstm1 = pick(eng, space.lstm_sizes);
      p.lstm2 = pick(eng, space.lstm_sizes);
      p.dense1 = pick(eng, space.dense_sizes);
      p.dense2 = pick(eng, space.dense_sizes);
      p.rate = eng.uniform(space.rate_lo, space.rate_hi);
      p.lr = log_uniform(eng, space.lr_lo, space.lr_hi);
      p.acti1 = pick(eng, space.activations);
      p.acti2 = pick(eng, space.activations);
      out_params = {{"LSTM_size_1", p.lstm1}, {"LSTM_size_2", p.lstm2},
                    {"Dense_size_1", p.dense1}, {"Dense_size_2", p.dense2},
                    {"Rate", p.rate}, {"Lr", p.lr},
                    {"Acti_1", nnet::to_string(p.acti1)}, {"Acti_2", nnet::to_string(p.acti2)}};
      break;
    }
    case models::ModelKind::enhanced: {
      auto& p = plan.enhanced;
      p.lstm = pick(eng, space.lstm_sizes);
      p.dense1 = pick(eng, space.dense_sizes);
      p.dense2 = pick(eng, space.dense_sizes);
      p.dense3 = pick(eng, space.dense_sizes);
      p.rate1 = eng.uniform(space.rate_lo, space.rate_hi);
      p.rate2 = eng.uniform(space.rate_lo, space.rate_hi);
      p.rate3 = eng.uniform(space.rate_lo, space.rate_hi);
      p.lr = log_uniform(eng, space.lr_lo, space.lr_hi);
      p.acti1 = pick(eng, space.activations);
      p.acti2 = pick(eng, space.activations);
      p.acti3 = pick(eng, space.activations);
      p.beta = log_uniform(eng, space.beta_lo, space.beta_hi);
      p.reg = pick(eng, space.regs);
      out_params = {{"LSTM_size", p.lstm}, {"Dense_size_1", p.dense1},
                    {"Dense_size_2", p.dense2}, {"Dense_size_3", p.dense3},
                    {"Rate_1", p.rate1}, {"Rate_2", p.rate2}, {"Rate_3", p.rate3},
                    {"Lr", p.lr},
                    {"Acti_1", nnet::to_string(p.acti1)}, {"Acti_2", nnet::to_string(p.acti2)},
                    {"Acti_3", nnet::to_string(p.acti3)},
                    {"beta", p.beta}, {"loss", nnet::to_string(p.reg)}};
      break;
    }
  }
  return plan;
}

}  // namespace detail

inline TuneResult tune_random_search(models::ModelKind kind, const TuneSpace& space, int budget,
                                     uint64_t seed, const Dataset& dataset,
                                     const CvConfig& inner) {
  space.validate();
  if (budget < 1) fail(ErrorKind::invalid_input, "tune: budget must be >= 1");
  rng::Engine eng(rng::mix(seed, 0x707eULL));
  TuneResult result;
  double best = -1.0;
  for (int trial = 0; trial < budget; ++trial) {
    nlohmann::json params;
    ModelPlan plan = detail::sample_plan(kind, space, eng, params);
    CvConfig cfg = inner;
    cfg.train_seed = rng::mix(seed, static_cast<uint64_t>(trial), 0x7217ULL);
    CvResult cv = run_cv(plan, dataset, cfg);
    result.trials.push_back({trial, params, cv.mean_accuracy});
    if (cv.mean_accuracy > best) {
      best = cv.mean_accuracy;
      result.best_index = trial;
      result.best_plan = plan;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report emission

inline void write_report_csv(const SweepReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  out << "model,variable,value,fold,accuracy,f1,n_samples,grouping,seed\n";
  for (const auto& row : report.rows) {
    for (const auto& fr : row.cv.folds) {
      out << row.model << "," << row.variable << "," << row.value << "," << fr.fold << ","
          << csv::format_double(fr.accuracy) << "," << csv::format_double(fr.f1) << ","
          << row.n_samples << "," << row.cv.grouping << "," << row.cv.seed << "\n";
    }
  }
}

// Aggregate layout: model rows x variable-value columns, mean±std cells.
inline void write_aggregate_csv(const SweepReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  std::vector<int> values;
  std::vector<std::string> model_order;
  std::string variable = report.rows.empty() ? "value" : report.rows.front().variable;
  for (const auto& row : report.rows) {
    if (std::find(values.begin(), values.end(), row.value) == values.end())
      values.push_back(row.value);
    if (std::find(model_order.begin(), model_order.end(), row.model) == model_order.end())
      model_order.push_back(row.model);
  }
  std::sort(values.begin(), values.end());
  out << "model";
  for (int v : values) out << "," << variable << "=" << v;
  out << "\n";
  char cell[64];
  for (const auto& model : model_order) {
    out << model;
    for (int v : values) {
      const SweepRow* found = nullptr;
      for (const auto& row : report.rows)
        if (row.model == model && row.value == v) found = &row;
      if (!found) {
        out << ",";
        continue;
      }
      std::snprintf(cell, sizeof(cell), "%.3f±%.3f", found->cv.mean_accuracy,
                    found->cv.std_accuracy);
      out << "," << cell;
    }
    out << "\n";
  }
}

inline void write_trials_csv(const TuneResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  out << "trial,mean_accuracy,params\n";
  for (const auto& t : result.trials) {
    std::string params = t.params.dump();
    std::string quoted = "\"";
    for (char c : params) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += "\"";
    out << t.index << "," << csv::format_double(t.mean_accuracy) << "," << quoted << "\n";
  }
}

}  // namespace cyberseer::experiments
