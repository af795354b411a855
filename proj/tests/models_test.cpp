#include "cyberseer/models.hpp"

#include <gtest/gtest.h>

#include "cyberseer/nnet.hpp"

using namespace cyberseer;
using namespace cyberseer::models;
using nnet::Activation;
using nnet::ModelGraph;
using nnet::Sample;

namespace {

void zero_params(ModelGraph& g) {
  for (auto& tensors : g.params())
    for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), 0.0);
}

Sample eda_sample(rng::Engine& eng, int t_s, double label = 1.0) {
  Sample s;
  Tensor2 ts(features::kEdaTsRows, static_cast<size_t>(t_s));
  for (auto& v : ts.data) v = eng.uniform(0.0, 1.0);
  Tensor2 num(features::kNumericWidth, 1);
  for (auto& v : num.data) v = eng.uniform(0.0, 1.0);
  s.inputs = {std::move(ts), std::move(num)};
  s.label = label;
  return s;
}

Sample kin_sample(rng::Engine& eng, int t_s, double label = 1.0, double amp = 1.0) {
  Sample s;
  Tensor2 kin(features::kKinematicRows, static_cast<size_t>(t_s));
  for (auto& v : kin.data) v = amp * eng.uniform(0.0, 1.0);
  s.inputs = {std::move(kin)};
  s.label = label;
  return s;
}

}  // namespace

TEST(EdaModel, PresetRepresentationWidth) {
  auto g = build_eda_model(eda_preset(), 30, 1);
  ASSERT_GE(g.representation_node(), 0);
  EXPECT_EQ(g.node(g.representation_node()).width, 96 + 24);
}

TEST(EdaModel, ZeroWeightsPredictHalf) {
  auto g = build_eda_model(eda_preset(), 12, 2);
  zero_params(g);
  rng::Engine eng(3);
  Sample s = eda_sample(eng, 12);
  for (auto& t : s.inputs) std::fill(t.data.begin(), t.data.end(), 0.0);
  EXPECT_DOUBLE_EQ(g.predict(s), 0.5);
}

TEST(EdaModel, ParameterCountMatchesClosedForm) {
  auto g = build_eda_model(eda_preset(), 30, 4);
  // lstm: 4u(i + u + 1); dense: out*(in + 1)
  size_t lstm = 4 * 96 * (15 + 96 + 1);
  size_t dense_num = 24 * (38 + 1);
  size_t dense_mix = 48 * (120 + 1);
  size_t head = 1 * (48 + 1);
  EXPECT_EQ(g.parameter_count(), lstm + dense_num + dense_mix + head);
}

TEST(KinematicModel, PresetShape) {
  auto g = build_kinematic_model(kinematic_preset(), 30, 5);
  bool saw_lstm = false, saw_dense = false;
  for (size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(static_cast<int>(i));
    if (n.kind == nnet::LayerKind::lstm) {
      EXPECT_EQ(n.width, 128);
      saw_lstm = true;
    }
    if (n.kind == nnet::LayerKind::dense && n.width == 48) {
      EXPECT_EQ(n.activation, Activation::relu);
      saw_dense = true;
    }
  }
  EXPECT_TRUE(saw_lstm);
  EXPECT_TRUE(saw_dense);
}

TEST(KinematicModel, ZeroWeightsPredictHalf) {
  auto g = build_kinematic_model(kinematic_preset(), 10, 6);
  zero_params(g);
  rng::Engine eng(7);
  EXPECT_DOUBLE_EQ(g.predict(kin_sample(eng, 10)), 0.5);
}

TEST(KinematicModel, ReducedVariantPassesGradientCheck) {
  KinematicParams hp;
  hp.lstm = 6;
  hp.dense = 5;
  auto g = build_kinematic_model(hp, 5, 8);
  rng::Engine eng(9);
  std::vector<Sample> data;
  for (int i = 0; i < 3; ++i) data.push_back(kin_sample(eng, 5, i % 2));
  EXPECT_LT(nnet::gradient_check(g, data, {0.0, nnet::RegKind::mse}), 1e-4);
}

TEST(FusionModel, PresetConcatWidth) {
  auto g = build_fusion_model(fusion_preset(), 30, 10);
  int concat_width = 0;
  for (size_t i = 0; i < g.node_count(); ++i)
    if (g.node(static_cast<int>(i)).kind == nnet::LayerKind::concat)
      concat_width = g.node(static_cast<int>(i)).width;
  EXPECT_EQ(concat_width, 32 + 128 + 40);
}

TEST(FusionModel, ZeroWeightsPredictHalf) {
  auto g = build_fusion_model(fusion_preset(), 8, 11);
  zero_params(g);
  Sample s;
  Tensor2 eda_ts(features::kEdaTsRows, 8);
  Tensor2 kin(features::kKinematicRows, 8);
  Tensor2 num(features::kNumericWidth, 1);
  s.inputs = {eda_ts, kin, num};
  s.label = 0.0;
  EXPECT_DOUBLE_EQ(g.predict(s), 0.5);
}

TEST(FusionModel, KinematicChainMirrorsKinematicModel) {
  auto fusion = build_fusion_model(fusion_preset(), 30, 13);
  auto kin = build_kinematic_model(kinematic_preset(), 30, 13);
  // the fusion graph embeds the same kinematic processing chain:
  // input(16) -> lstm(128), then dropout -> dense -> dense(1, sigmoid)
  bool has_kin_input = false, has_kin_lstm = false;
  for (size_t i = 0; i < fusion.node_count(); ++i) {
    const auto& n = fusion.node(static_cast<int>(i));
    if (n.kind == nnet::LayerKind::input_seq && n.width == features::kKinematicRows)
      has_kin_input = true;
    if (n.kind == nnet::LayerKind::lstm && n.width == 128) has_kin_lstm = true;
  }
  EXPECT_TRUE(has_kin_input);
  EXPECT_TRUE(has_kin_lstm);
  auto tail_kinds = [](const ModelGraph& g) {
    std::vector<nnet::LayerKind> kinds;
    for (size_t i = g.node_count() - 3; i < g.node_count(); ++i)
      kinds.push_back(g.node(static_cast<int>(i)).kind);
    return kinds;
  };
  EXPECT_EQ(tail_kinds(fusion), tail_kinds(kin));
}

TEST(EnhancedModel, EmbeddingWidthForcedToTeacherWidth) {
  auto g = build_enhanced_model(enhanced_preset(), 120, 30, 14);
  ASSERT_GE(g.representation_node(), 0);
  EXPECT_EQ(g.node(g.representation_node()).width, 120);  // overrides Dense_size_1 = 48
}

TEST(EnhancedModel, ProjectionFlagKeepsConfiguredWidth) {
  EnhancedParams hp;
  hp.teacher_projection = true;
  auto g = build_enhanced_model(hp, 120, 30, 15);
  EXPECT_EQ(g.node(g.representation_node()).width, 48);
}

TEST(EnhancedModel, BothBranchesReadTheLstmState) {
  auto g = build_enhanced_model(enhanced_preset(), 120, 30, 16);
  int lstm_id = -1;
  std::vector<int> dropout_inputs;
  for (size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(static_cast<int>(i));
    if (n.kind == nnet::LayerKind::lstm) lstm_id = static_cast<int>(i);
  }
  for (size_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(static_cast<int>(i));
    if (n.kind == nnet::LayerKind::dropout && n.inputs[0] == lstm_id)
      dropout_inputs.push_back(static_cast<int>(i));
  }
  EXPECT_EQ(dropout_inputs.size(), 2u);  // embedding branch and kinematic branch
}

TEST(EnhancedModel, ConsumesOnlyKinematicInput) {
  auto g = build_enhanced_model(enhanced_preset(), 120, 30, 17);
  ASSERT_EQ(g.input_nodes().size(), 1u);
  EXPECT_EQ(g.input_tags(), std::vector<std::string>{block::kinematic});
  EXPECT_EQ(g.node(g.input_nodes()[0]).width, features::kKinematicRows);
}

TEST(EnhancedModel, ZeroWeightsPredictHalf) {
  auto g = build_enhanced_model(enhanced_preset(), 120, 10, 18);
  zero_params(g);
  rng::Engine eng(19);
  EXPECT_DOUBLE_EQ(g.predict(kin_sample(eng, 10)), 0.5);
}

TEST(TeacherRepresentation, UntrainedTeacherIsStateError) {
  auto g = build_eda_model(eda_preset(), 12, 20);
  rng::Engine eng(21);
  try {
    extract_teacher_representation(g, eda_sample(eng, 12));
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::state_error);
  }
}

TEST(TeacherRepresentation, DeterministicWidthAndSensitivity) {
  EdaParams hp;
  hp.lstm = 6;
  hp.dense1 = 4;
  hp.dense2 = 5;
  auto teacher = build_eda_model(hp, 8, 22);
  rng::Engine eng(23);
  std::vector<Sample> train_set;
  for (int i = 0; i < 12; ++i) train_set.push_back(eda_sample(eng, 8, i % 2));
  nnet::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  nnet::train(teacher, train_set, cfg);

  Sample probe = eda_sample(eng, 8);
  auto rep1 = extract_teacher_representation(teacher, probe);
  auto rep2 = extract_teacher_representation(teacher, probe);
  EXPECT_EQ(rep1, rep2);
  EXPECT_EQ(rep1.size(), static_cast<size_t>(hp.lstm + hp.dense1));

  Sample perturbed = probe;
  for (size_t c = 0; c < perturbed.inputs[0].cols; ++c) perturbed.inputs[0].at(0, c) += 0.25;
  EXPECT_NE(extract_teacher_representation(teacher, perturbed), rep1);
}

TEST(TrainEnhanced, BetaZeroMatchesPlainStudentBitwise) {
  EnhancedParams hp;
  hp.lstm = 5;
  hp.dense2 = 4;
  hp.dense3 = 4;
  hp.beta = 0.0;
  int teacher_width = 7;
  rng::Engine eng(24);
  std::vector<Sample> data;
  for (int i = 0; i < 10; ++i) data.push_back(kin_sample(eng, 6, i % 2));

  auto student_a = build_enhanced_model(hp, teacher_width, 6, 25);
  auto student_b = build_enhanced_model(hp, teacher_width, 6, 25);

  std::vector<std::vector<double>> no_reps(data.size());
  auto ha = train_enhanced(student_a, data, no_reps, hp, 4, 4, 77);

  nnet::TrainConfig plain;
  plain.epochs = 4;
  plain.batch_size = 4;
  plain.learning_rate = hp.lr;
  plain.shuffle_seed = 77;
  auto hb = nnet::train(student_b, data, plain);

  ASSERT_EQ(ha.epochs.size(), hb.epochs.size());
  for (size_t e = 0; e < ha.epochs.size(); ++e) {
    EXPECT_EQ(ha.epochs[e].loss, hb.epochs[e].loss);
    EXPECT_EQ(ha.epochs[e].accuracy, hb.epochs[e].accuracy);
  }
  for (size_t n = 0; n < student_a.params().size(); ++n)
    for (size_t t = 0; t < student_a.params()[n].size(); ++t)
      EXPECT_EQ(student_a.params()[n][t].data, student_b.params()[n][t].data);
}

TEST(TrainEnhanced, RegressionLossDecreasesInTraining) {
  EnhancedParams hp;
  hp.lstm = 6;
  hp.dense2 = 4;
  hp.dense3 = 4;
  // beta and reg kind from the tuned preset
  hp.beta = enhanced_preset().beta;
  hp.reg = nnet::RegKind::mse;
  int teacher_width = 8;

  rng::Engine eng(26);
  std::vector<Sample> data;
  std::vector<std::vector<double>> reps;
  for (int i = 0; i < 24; ++i) {
    data.push_back(kin_sample(eng, 6, i % 2));
    std::vector<double> rep(static_cast<size_t>(teacher_width));
    for (auto& v : rep) v = eng.uniform(-0.5, 0.5);
    reps.push_back(std::move(rep));
  }
  auto student = build_enhanced_model(hp, teacher_width, 6, 27);
  auto history = train_enhanced(student, data, reps, hp, 30, 8, 78);
  EXPECT_LT(history.epochs.back().loss_reg, history.epochs.front().loss_reg);
}

TEST(TrainEnhanced, MissingTeacherVectorIsAnError) {
  EnhancedParams hp;
  hp.lstm = 4;
  hp.dense2 = 3;
  hp.dense3 = 3;
  rng::Engine eng(28);
  std::vector<Sample> data = {kin_sample(eng, 5), kin_sample(eng, 5)};
  auto student = build_enhanced_model(hp, 6, 5, 29);
  std::vector<std::vector<double>> reps = {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};  // one short
  EXPECT_THROW(train_enhanced(student, data, reps, hp, 2, 2, 1), Error);
  std::vector<std::vector<double>> bad_width(2, std::vector<double>(3, 0.0));
  EXPECT_THROW(train_enhanced(student, data, bad_width, hp, 2, 2, 1), Error);
}

TEST(Presets, AllFourInstantiateFromTable5Values) {
  EXPECT_NO_THROW(build_eda_model(eda_preset(), 30, 1));
  EXPECT_NO_THROW(build_kinematic_model(kinematic_preset(), 30, 1));
  EXPECT_NO_THROW(build_fusion_model(fusion_preset(), 30, 1));
  EXPECT_NO_THROW(build_enhanced_model(enhanced_preset(), 120, 30, 1));
}

TEST(Presets, ShippedJsonMatchesBuiltIns) {
  auto doc = load_preset_file(CYBERSEER_PRESET_FILE);
  auto eda = eda_params_from_json(doc.at("eda"));
  EXPECT_EQ(eda.lstm, eda_preset().lstm);
  EXPECT_EQ(eda.dense1, eda_preset().dense1);
  EXPECT_EQ(eda.dense2, eda_preset().dense2);
  EXPECT_DOUBLE_EQ(eda.rate, eda_preset().rate);
  EXPECT_DOUBLE_EQ(eda.lr, eda_preset().lr);
  EXPECT_EQ(eda.acti, eda_preset().acti);

  auto kin = kinematic_params_from_json(doc.at("kinematic"));
  EXPECT_EQ(kin.lstm, 128);
  EXPECT_EQ(kin.dense, 48);
  EXPECT_EQ(kin.acti, Activation::relu);
  EXPECT_DOUBLE_EQ(kin.lr, kinematic_preset().lr);

  auto fus = fusion_params_from_json(doc.at("fusion"));
  EXPECT_EQ(fus.lstm1, 32);
  EXPECT_EQ(fus.lstm2, 128);
  EXPECT_EQ(fus.dense1, 40);

  auto enh = enhanced_params_from_json(doc.at("enhanced"));
  EXPECT_DOUBLE_EQ(enh.beta, enhanced_preset().beta);
  EXPECT_EQ(enh.reg, nnet::RegKind::mse);
  EXPECT_EQ(enh.lstm, 96);
}

TEST(Presets, CheckpointOfKinematicPresetReloadsWithWidth128) {
  auto g = build_kinematic_model(kinematic_preset(), 30, 31);
  auto path = (std::filesystem::temp_directory_path() / "cyberseer_kin_preset.json").string();
  nnet::save_checkpoint(g, path);
  auto loaded = nnet::load_checkpoint(path);
  bool found = false;
  for (size_t i = 0; i < loaded.node_count(); ++i) {
    const auto& n = loaded.node(static_cast<int>(i));
    if (n.kind == nnet::LayerKind::lstm) {
      EXPECT_EQ(n.width, 128);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(KinematicModel, PresetLearnsSeparableSequences) {
  // full-width tuned model on a small linearly separable set
  auto g = build_kinematic_model(kinematic_preset(), 6, 40);
  rng::Engine eng(41);
  std::vector<Sample> data;
  for (int i = 0; i < 40; ++i) {
    double amp = i % 2 ? 0.9 : 0.2;
    data.push_back(kin_sample(eng, 6, i % 2, amp));
  }
  nnet::TrainConfig cfg;
  cfg.epochs = 40;  // within the 100-epoch budget
  cfg.batch_size = 16;
  cfg.learning_rate = kinematic_preset().lr;
  cfg.shuffle_seed = 42;
  auto history = nnet::train(g, data, cfg);
  double best = 0.0;
  for (const auto& e : history.epochs) best = std::max(best, e.accuracy);
  EXPECT_GE(best, 0.95);
}
