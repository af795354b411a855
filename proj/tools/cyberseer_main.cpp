// Command-line surface for the cybersickness-prediction toolkit: generate,
// validate, featurize, train, eval, sweep, tune, and stats subcommands, all
// seeded and reproducible. A JSON config file can supply any flag value;
// explicit flags win.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cyberseer/cyberseer.hpp"

namespace fs = std::filesystem;
using namespace cyberseer;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_file, path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_config, path + ": " + e.what());
  }
  return doc;
}

// Fills target from the config file when the flag was not given explicitly.
template <typename T>
void config_or(const CLI::Option* opt, const json& cfg, const char* key, T& target) {
  if (opt->count() > 0) return;
  if (cfg.contains(key)) target = cfg.at(key).get<T>();
}

std::vector<fs::path> session_manifests(const std::string& data_root) {
  if (!fs::is_directory(data_root)) fail(ErrorKind::missing_file, data_root);
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(data_root)) {
    if (!entry.is_directory()) continue;
    auto manifest = entry.path() / "manifest.json";
    if (fs::exists(manifest)) manifests.push_back(manifest);
  }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) fail(ErrorKind::missing_file, "no session directories under " + data_root);
  return manifests;
}

// Loads, validates, and processes every session; invalid ones are excluded.
std::vector<features::ProcessedSession> load_processed_sessions(
    const std::string& data_root, const features::PipelineConfig& pipeline) {
  std::vector<features::ProcessedSession> out;
  for (const auto& manifest : session_manifests(data_root)) {
    auto session = telemetry::load_session(manifest);
    auto report = telemetry::validate_session(session);
    if (!report.passed()) {
      log_warn("excluding session " + session.session_id + " (" +
               std::to_string(report.violations.size()) + " violations)");
      continue;
    }
    out.push_back(features::process_session(session, pipeline));
  }
  if (out.empty()) fail(ErrorKind::invalid_input, "no valid sessions in " + data_root);
  return out;
}

experiments::ModelPlan plan_for(const std::string& preset, const std::string& presets_path) {
  auto kind = models::model_kind_from_string(preset);
  experiments::ModelPlan plan = experiments::preset_plan(kind);
  if (!presets_path.empty()) {
    auto doc = models::load_preset_file(presets_path);
    if (doc.contains("eda")) plan.eda = models::eda_params_from_json(doc.at("eda"));
    if (doc.contains("kinematic"))
      plan.kinematic = models::kinematic_params_from_json(doc.at("kinematic"));
    if (doc.contains("fusion")) plan.fusion = models::fusion_params_from_json(doc.at("fusion"));
    if (doc.contains("enhanced"))
      plan.enhanced = models::enhanced_params_from_json(doc.at("enhanced"));
    plan.teacher = plan.eda;
  }
  return plan;
}

json normalizer_to_json(const sigproc::NormalizerStats& stats) {
  return json{{"min", stats.feature_min()}, {"max", stats.feature_max()}};
}

sigproc::NormalizerStats normalizer_from_json(const json& j) {
  return sigproc::NormalizerStats::from_min_max(j.at("min").get<std::vector<double>>(),
                                                j.at("max").get<std::vector<double>>());
}

void save_normalizers(const experiments::detail::BlockNormalizers& n, const std::string& path) {
  json doc;
  doc["kinematic"] = normalizer_to_json(n.kinematic);
  doc["eda_ts"] = normalizer_to_json(n.eda_ts);
  doc["numeric"] = normalizer_to_json(n.numeric);
  doc["normalize_numeric"] = n.normalize_numeric;
  std::ofstream out(path);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  out << doc.dump(1) << "\n";
}

experiments::detail::BlockNormalizers load_normalizers(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_file, path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, path + ": " + e.what());
  }
  experiments::detail::BlockNormalizers n;
  n.kinematic = normalizer_from_json(doc.at("kinematic"));
  n.eda_ts = normalizer_from_json(doc.at("eda_ts"));
  n.numeric = normalizer_from_json(doc.at("numeric"));
  n.normalize_numeric = doc.at("normalize_numeric").get<bool>();
  return n;
}

std::vector<nnet::Sample> assemble_samples(const experiments::Dataset& dataset,
                                           const experiments::detail::BlockNormalizers& norm,
                                           const std::vector<std::string>& tags) {
  std::vector<nnet::Sample> out;
  out.reserve(dataset.segments.size());
  for (const auto& seg : dataset.segments)
    out.push_back(
        experiments::detail::make_sample(experiments::detail::normalize_segment(norm, seg), tags));
  return out;
}

std::vector<int> parse_int_list(const std::string& csv_list) {
  std::vector<int> out;
  std::string cur;
  for (char c : csv_list + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> parse_str_list(const std::string& csv_list) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv_list + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

void print_test_result(const char* name, const stats::TestResult& r) {
  std::printf("test,statistic,df,p_value\n%s,%s,%s,%s\n", name,
              csv::format_double(r.statistic).c_str(), csv::format_double(r.df).c_str(),
              csv::format_double(r.p_value).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cybersickness prediction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // parent options like --config may follow the subcommand

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; explicit flags override it")
      ->envname("CYBERSEER_CONFIG");

  // -- generate -------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "write synthetic session directories");
  std::string gen_out = "data";
  int gen_sessions = 40;
  uint64_t gen_seed = 1;
  double gen_sick_prob = 0.5;
  int gen_duration = 240;
  auto* gen_out_opt = gen->add_option("--out,--data-root", gen_out, "output directory");
  auto* gen_sessions_opt = gen->add_option("--sessions", gen_sessions, "number of sessions");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "master seed");
  auto* gen_prob_opt = gen->add_option("--sick-prob", gen_sick_prob, "sick probability");
  auto* gen_dur_opt = gen->add_option("--duration", gen_duration, "session length in seconds");

  // -- validate -------------------------------------------------------------
  auto* val = app.add_subcommand("validate", "validate recorded sessions");
  std::string val_root = "data";
  auto* val_root_opt = val->add_option("--data-root", val_root, "session directory root");

  // -- featurize ------------------------------------------------------------
  auto* feat = app.add_subcommand("featurize", "build the segment feature store");
  std::string feat_root = "data", feat_out = "features.csf", feat_csv;
  int feat_ts = 30;
  auto* feat_root_opt = feat->add_option("--data-root", feat_root, "session directory root");
  auto* feat_ts_opt = feat->add_option("--ts", feat_ts, "segment time span in seconds");
  auto* feat_out_opt = feat->add_option("--out", feat_out, "feature store path");
  feat->add_option("--csv", feat_csv, "also export a CSV copy here");

  // -- train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train one model on a feature store");
  std::string train_store = "features.csf", train_preset = "kinematic", train_out = "model.json";
  std::string train_presets_file;
  uint64_t train_seed = 1;
  int train_epochs = 100, train_batch = 64, train_teacher_epochs = 0;
  auto* train_store_opt = train_cmd->add_option("--store", train_store, "feature store path");
  auto* train_preset_opt =
      train_cmd->add_option("--preset", train_preset, "eda|kinematic|fusion|enhanced");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "training seed");
  auto* train_epochs_opt = train_cmd->add_option("--epochs", train_epochs, "training epochs");
  auto* train_batch_opt = train_cmd->add_option("--batch", train_batch, "batch size");
  auto* train_teacher_opt = train_cmd->add_option("--teacher-epochs", train_teacher_epochs,
                                                  "teacher epochs (enhanced; 0 = same)");
  auto* train_out_opt = train_cmd->add_option("--out", train_out, "checkpoint path");
  auto* train_presets_opt =
      train_cmd->add_option("--presets", train_presets_file, "hyperparameter presets JSON");

  // -- eval -----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a feature store");
  std::string eval_store = "features.csf", eval_ckpt = "model.json";
  auto* eval_store_opt = eval_cmd->add_option("--store", eval_store, "feature store path");
  auto* eval_ckpt_opt = eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint path");

  // -- sweep ----------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "time-span or exposure-time sweep");
  std::string sweep_root = "data", sweep_out = "reports", sweep_spans = "10,15,20,30,40";
  std::string sweep_models = "kinematic,eda,fusion,enhanced", sweep_control = "none";
  std::string sweep_grouping = "session", sweep_exposure, sweep_presets_file;
  int sweep_k = 5, sweep_epochs = 100, sweep_jobs = 1, sweep_ts = 20, sweep_batch = 64;
  uint64_t sweep_seed = 1;
  auto* sweep_root_opt = sweep_cmd->add_option("--data-root", sweep_root, "session root");
  auto* sweep_spans_opt = sweep_cmd->add_option("--spans", sweep_spans, "time spans, comma list");
  auto* sweep_models_opt = sweep_cmd->add_option("--models", sweep_models, "models, comma list");
  auto* sweep_control_opt =
      sweep_cmd->add_option("--control", sweep_control, "none|downsample sample-size control");
  auto* sweep_exposure_opt = sweep_cmd->add_option(
      "--exposure-n", sweep_exposure, "exposure mode: segments to drop, comma list");
  auto* sweep_ts_opt = sweep_cmd->add_option("--ts", sweep_ts, "time span for exposure mode");
  auto* sweep_k_opt = sweep_cmd->add_option("--k", sweep_k, "folds");
  auto* sweep_grouping_opt =
      sweep_cmd->add_option("--grouping", sweep_grouping, "segment|session fold grouping");
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "sweep seed");
  auto* sweep_epochs_opt = sweep_cmd->add_option("--epochs", sweep_epochs, "epochs per fold");
  auto* sweep_batch_opt = sweep_cmd->add_option("--batch", sweep_batch, "batch size");
  auto* sweep_jobs_opt = sweep_cmd->add_option("--jobs", sweep_jobs, "parallel folds");
  auto* sweep_out_opt = sweep_cmd->add_option("--out", sweep_out, "report directory");
  auto* sweep_presets_opt =
      sweep_cmd->add_option("--presets", sweep_presets_file, "hyperparameter presets JSON");

  // -- tune -----------------------------------------------------------------
  auto* tune_cmd = app.add_subcommand("tune", "seeded random hyperparameter search");
  std::string tune_root = "data", tune_preset = "kinematic", tune_out = "trials.csv";
  int tune_budget = 20, tune_k = 3, tune_epochs = 30, tune_ts = 30, tune_batch = 64,
      tune_jobs = 1;
  uint64_t tune_seed = 1;
  std::string tune_grouping = "session";
  auto* tune_root_opt = tune_cmd->add_option("--data-root", tune_root, "session root");
  auto* tune_preset_opt = tune_cmd->add_option("--preset", tune_preset, "architecture to tune");
  auto* tune_budget_opt = tune_cmd->add_option("--budget", tune_budget, "number of trials");
  auto* tune_seed_opt = tune_cmd->add_option("--seed", tune_seed, "search seed");
  auto* tune_ts_opt = tune_cmd->add_option("--ts", tune_ts, "segment time span");
  auto* tune_k_opt = tune_cmd->add_option("--k", tune_k, "inner folds");
  auto* tune_grouping_opt = tune_cmd->add_option("--grouping", tune_grouping, "fold grouping");
  auto* tune_epochs_opt = tune_cmd->add_option("--epochs", tune_epochs, "epochs per trial fold");
  auto* tune_batch_opt = tune_cmd->add_option("--batch", tune_batch, "batch size");
  auto* tune_jobs_opt = tune_cmd->add_option("--jobs", tune_jobs, "parallel folds");
  auto* tune_out_opt = tune_cmd->add_option("--out", tune_out, "trial log CSV path");

  // -- stats ----------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "statistical tests over CSV columns");
  auto* ttest = stats_cmd->add_subcommand("ttest", "independent two-sample t-test");
  std::string tt_file, tt_group = "label", tt_value = "value";
  ttest->add_option("--file", tt_file, "input CSV")->required();
  ttest->add_option("--group-col", tt_group, "binary group column");
  ttest->add_option("--value-col", tt_value, "value column");
  auto* pears = stats_cmd->add_subcommand("pearson", "Pearson correlation");
  std::string pe_file, pe_x = "x", pe_y = "y";
  pears->add_option("--file", pe_file, "input CSV")->required();
  pears->add_option("--x-col", pe_x, "x column");
  pears->add_option("--y-col", pe_y, "y column");
  auto* chisq = stats_cmd->add_subcommand("chisq", "chi-square independence test");
  std::string ch_file;
  chisq->add_option("--file", ch_file, "CSV of counts (all columns numeric)")->required();
  stats_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
    json cfg = load_config(config_path);

    if (*gen) {
      config_or(gen_out_opt, cfg, "data-root", gen_out);
      config_or(gen_sessions_opt, cfg, "sessions", gen_sessions);
      config_or(gen_seed_opt, cfg, "seed", gen_seed);
      config_or(gen_prob_opt, cfg, "sick-prob", gen_sick_prob);
      config_or(gen_dur_opt, cfg, "duration", gen_duration);
      telemetry::GeneratorConfig gcfg;
      gcfg.duration_s = gen_duration;
      gcfg.sick_probability = gen_sick_prob;
      fs::create_directories(gen_out);
      for (int i = 0; i < gen_sessions; ++i) {
        auto session = telemetry::generate_synthetic_session(
            gcfg, rng::mix(gen_seed, static_cast<uint64_t>(i)));
        char dirname[32];
        std::snprintf(dirname, sizeof(dirname), "session_%04d", i);
        telemetry::save_session(session, fs::path(gen_out) / dirname);
      }
      std::printf("wrote %d sessions under %s\n", gen_sessions, gen_out.c_str());
      return 0;
    }

    if (*val) {
      config_or(val_root_opt, cfg, "data-root", val_root);
      size_t passed = 0, failed = 0;
      for (const auto& manifest : session_manifests(val_root)) {
        auto session = telemetry::load_session(manifest);
        auto report = telemetry::validate_session(session);
        if (report.passed()) {
          ++passed;
        } else {
          ++failed;
          for (const auto& v : report.violations)
            std::printf("%s: %s\n", session.session_id.c_str(), v.message.c_str());
        }
      }
      std::printf("validated %zu sessions: %zu passed, %zu failed\n", passed + failed, passed,
                  failed);
      return 0;
    }

    if (*feat) {
      config_or(feat_root_opt, cfg, "data-root", feat_root);
      config_or(feat_ts_opt, cfg, "ts", feat_ts);
      config_or(feat_out_opt, cfg, "out", feat_out);
      features::PipelineConfig pipeline;
      auto sessions = load_processed_sessions(feat_root, pipeline);
      features::FeatureStore store;
      store.t_s = static_cast<uint32_t>(feat_ts);
      store.config_hash = pipeline.hash();
      for (const auto& ps : sessions)
        for (auto& seg : features::build_segments(ps, feat_ts, pipeline))
          store.segments.push_back(std::move(seg));
      features::write_feature_store(store, feat_out);
      if (!feat_csv.empty()) features::export_feature_csv(store, feat_csv);
      std::printf("wrote %zu segments (T_s=%d) from %zu sessions to %s\n", store.segments.size(),
                  feat_ts, sessions.size(), feat_out.c_str());
      return 0;
    }

    if (*train_cmd) {
      config_or(train_store_opt, cfg, "store", train_store);
      config_or(train_preset_opt, cfg, "preset", train_preset);
      config_or(train_seed_opt, cfg, "seed", train_seed);
      config_or(train_epochs_opt, cfg, "epochs", train_epochs);
      config_or(train_batch_opt, cfg, "batch", train_batch);
      config_or(train_teacher_opt, cfg, "teacher-epochs", train_teacher_epochs);
      config_or(train_out_opt, cfg, "out", train_out);
      config_or(train_presets_opt, cfg, "presets", train_presets_file);

      auto dataset = experiments::dataset_from_store(features::read_feature_store(train_store));
      auto plan = plan_for(train_preset, train_presets_file);
      std::vector<size_t> all_idx(dataset.segments.size());
      for (size_t i = 0; i < all_idx.size(); ++i) all_idx[i] = i;
      auto norm = experiments::detail::fit_normalizers(dataset, all_idx, true);

      nnet::ModelGraph model;
      nnet::TrainHistory history;
      if (plan.kind == models::ModelKind::enhanced) {
        auto teacher =
            models::build_eda_model(plan.teacher, dataset.t_s, rng::mix(train_seed, 1));
        auto teacher_samples = assemble_samples(dataset, norm, teacher.input_tags());
        nnet::TrainConfig tcfg;
        tcfg.epochs = train_teacher_epochs > 0 ? train_teacher_epochs : train_epochs;
        tcfg.batch_size = train_batch;
        tcfg.learning_rate = plan.teacher.lr;
        tcfg.shuffle_seed = rng::mix(train_seed, 2);
        nnet::train(teacher, teacher_samples, tcfg);
        auto reps = models::extract_teacher_representations(teacher, teacher_samples);
        model = models::build_enhanced_model(plan.enhanced, plan.teacher.lstm + plan.teacher.dense1,
                                             dataset.t_s, rng::mix(train_seed, 3));
        auto student_samples = assemble_samples(dataset, norm, model.input_tags());
        history = models::train_enhanced(model, student_samples, reps, plan.enhanced,
                                         train_epochs, train_batch, rng::mix(train_seed, 4));
      } else {
        switch (plan.kind) {
          case models::ModelKind::eda:
            model = models::build_eda_model(plan.eda, dataset.t_s, rng::mix(train_seed, 1));
            break;
          case models::ModelKind::kinematic:
            model = models::build_kinematic_model(plan.kinematic, dataset.t_s,
                                                  rng::mix(train_seed, 1));
            break;
          case models::ModelKind::fusion:
            model = models::build_fusion_model(plan.fusion, dataset.t_s, rng::mix(train_seed, 1));
            break;
          case models::ModelKind::enhanced:
            break;
        }
        auto samples = assemble_samples(dataset, norm, model.input_tags());
        nnet::TrainConfig tcfg;
        tcfg.epochs = train_epochs;
        tcfg.batch_size = train_batch;
        tcfg.learning_rate = plan.learning_rate();
        tcfg.shuffle_seed = rng::mix(train_seed, 2);
        history = nnet::train(model, samples, tcfg);
      }
      nnet::save_checkpoint(model, train_out);
      save_normalizers(norm, train_out + ".norm.json");
      std::ofstream hist(train_out + ".history.csv");
      hist << "epoch,loss,loss_pre,loss_reg,accuracy\n";
      for (size_t e = 0; e < history.epochs.size(); ++e) {
        const auto& row = history.epochs[e];
        hist << e << "," << csv::format_double(row.loss) << ","
             << csv::format_double(row.loss_pre) << "," << csv::format_double(row.loss_reg) << ","
             << csv::format_double(row.accuracy) << "\n";
      }
      std::printf("trained %s for %d epochs, final train accuracy %s, checkpoint %s\n",
                  train_preset.c_str(), train_epochs,
                  csv::format_double(history.epochs.back().accuracy).c_str(), train_out.c_str());
      return 0;
    }

    if (*eval_cmd) {
      config_or(eval_store_opt, cfg, "store", eval_store);
      config_or(eval_ckpt_opt, cfg, "checkpoint", eval_ckpt);
      auto dataset = experiments::dataset_from_store(features::read_feature_store(eval_store));
      auto model = nnet::load_checkpoint(eval_ckpt);
      auto norm = load_normalizers(eval_ckpt + ".norm.json");
      auto samples = assemble_samples(dataset, norm, model.input_tags());
      std::vector<int> predictions, labels;
      for (size_t i = 0; i < samples.size(); ++i) {
        predictions.push_back(model.predict_class(samples[i]));
        labels.push_back(dataset.segments[i].label.value);
      }
      auto m = experiments::metrics(predictions, labels);
      std::printf("accuracy,f1,n_samples\n%s,%s,%zu\n", csv::format_double(m.accuracy).c_str(),
                  csv::format_double(m.f1).c_str(), samples.size());
      return 0;
    }

    if (*sweep_cmd) {
      config_or(sweep_root_opt, cfg, "data-root", sweep_root);
      config_or(sweep_spans_opt, cfg, "spans", sweep_spans);
      config_or(sweep_models_opt, cfg, "models", sweep_models);
      config_or(sweep_control_opt, cfg, "control", sweep_control);
      config_or(sweep_exposure_opt, cfg, "exposure-n", sweep_exposure);
      config_or(sweep_ts_opt, cfg, "ts", sweep_ts);
      config_or(sweep_k_opt, cfg, "k", sweep_k);
      config_or(sweep_grouping_opt, cfg, "grouping", sweep_grouping);
      config_or(sweep_seed_opt, cfg, "seed", sweep_seed);
      config_or(sweep_epochs_opt, cfg, "epochs", sweep_epochs);
      config_or(sweep_batch_opt, cfg, "batch", sweep_batch);
      config_or(sweep_jobs_opt, cfg, "jobs", sweep_jobs);
      config_or(sweep_out_opt, cfg, "out", sweep_out);
      config_or(sweep_presets_opt, cfg, "presets", sweep_presets_file);
      if (sweep_control != "none" && sweep_control != "downsample")
        fail(ErrorKind::invalid_config, "--control must be none or downsample");

      features::PipelineConfig pipeline;
      auto sessions = load_processed_sessions(sweep_root, pipeline);
      std::vector<experiments::ModelPlan> plans;
      for (const auto& name : parse_str_list(sweep_models))
        plans.push_back(plan_for(name, sweep_presets_file));

      experiments::CvConfig cv;
      cv.folds.k = sweep_k;
      cv.folds.grouping = experiments::grouping_from_string(sweep_grouping);
      cv.folds.seed = sweep_seed;
      cv.epochs = sweep_epochs;
      cv.batch_size = sweep_batch;
      cv.jobs = sweep_jobs;

      experiments::SweepReport report;
      if (!sweep_exposure.empty()) {
        experiments::ExposureConfig ecfg;
        ecfg.t_s = sweep_ts;
        ecfg.n_removed = parse_int_list(sweep_exposure);
        ecfg.plans = plans;
        ecfg.cv = cv;
        ecfg.seed = sweep_seed;
        ecfg.pipeline = pipeline;
        report = experiments::exposure_sweep(sessions, ecfg);
      } else {
        experiments::SweepConfig scfg;
        scfg.spans = parse_int_list(sweep_spans);
        scfg.downsample_control = sweep_control == "downsample";
        scfg.plans = plans;
        scfg.cv = cv;
        scfg.seed = sweep_seed;
        scfg.pipeline = pipeline;
        report = experiments::time_span_sweep(sessions, scfg);
      }
      fs::create_directories(sweep_out);
      auto fold_csv = (fs::path(sweep_out) / "report.csv").string();
      auto agg_csv = (fs::path(sweep_out) / "report_agg.csv").string();
      experiments::write_report_csv(report, fold_csv);
      experiments::write_aggregate_csv(report, agg_csv);
      std::printf("wrote %s and %s (%zu sweep cells)\n", fold_csv.c_str(), agg_csv.c_str(),
                  report.rows.size());
      return 0;
    }

    if (*tune_cmd) {
      config_or(tune_root_opt, cfg, "data-root", tune_root);
      config_or(tune_preset_opt, cfg, "preset", tune_preset);
      config_or(tune_budget_opt, cfg, "budget", tune_budget);
      config_or(tune_seed_opt, cfg, "seed", tune_seed);
      config_or(tune_ts_opt, cfg, "ts", tune_ts);
      config_or(tune_k_opt, cfg, "k", tune_k);
      config_or(tune_grouping_opt, cfg, "grouping", tune_grouping);
      config_or(tune_epochs_opt, cfg, "epochs", tune_epochs);
      config_or(tune_batch_opt, cfg, "batch", tune_batch);
      config_or(tune_jobs_opt, cfg, "jobs", tune_jobs);
      config_or(tune_out_opt, cfg, "out", tune_out);

      features::PipelineConfig pipeline;
      auto sessions = load_processed_sessions(tune_root, pipeline);
      auto dataset = experiments::dataset_from_sessions(sessions, tune_ts, pipeline);
      experiments::CvConfig inner;
      inner.folds.k = tune_k;
      inner.folds.grouping = experiments::grouping_from_string(tune_grouping);
      inner.folds.seed = tune_seed;
      inner.epochs = tune_epochs;
      inner.batch_size = tune_batch;
      inner.jobs = tune_jobs;
      experiments::TuneSpace space;
      auto result = experiments::tune_random_search(models::model_kind_from_string(tune_preset),
                                                    space, tune_budget, tune_seed, dataset, inner);
      experiments::write_trials_csv(result, tune_out);
      const auto& best = result.trials[static_cast<size_t>(result.best_index)];
      json out;
      out["model"] = tune_preset;
      out["best_trial"] = result.best_index;
      out["mean_accuracy"] = best.mean_accuracy;
      out["params"] = best.params;
      std::printf("%s\n", out.dump().c_str());
      return 0;
    }

    if (*stats_cmd) {
      if (*ttest) {
        auto table = csv::read_table(tt_file);
        auto groups = table.column_values(tt_group);
        auto values = table.column_values(tt_value);
        std::set<double> distinct(groups.begin(), groups.end());
        if (distinct.size() != 2)
          fail(ErrorKind::invalid_input, "group column must have exactly two distinct values");
        double lo = *distinct.begin();
        std::vector<double> a, b;
        for (size_t i = 0; i < groups.size(); ++i) (groups[i] == lo ? a : b).push_back(values[i]);
        print_test_result("ttest", stats::t_test_independent(a, b));
      } else if (*pears) {
        auto table = csv::read_table(pe_file);
        print_test_result("pearson",
                          stats::pearson(table.column_values(pe_x), table.column_values(pe_y)));
      } else if (*chisq) {
        auto table = csv::read_table(ch_file);
        print_test_result("chisq", stats::chi_square_independence(table.rows));
      }
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    json err;
    err["kind"] = to_string(e.kind());
    err["message"] = e.what();
    std::fprintf(stderr, "error: %s\n", err.dump().c_str());
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["kind"] = "internal";
    err["message"] = e.what();
    std::fprintf(stderr, "error: %s\n", err.dump().c_str());
    return 2;
  }
  return 0;
}
