#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "oracles.hpp"

using testutil::same_params;
using testutil::tiny_config;
using testutil::tiny_dataset;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(InitModel, BiasesZeroRecurrentOrthogonal) {
  const auto ds = tiny_dataset();
  const auto m = nas::init_model(ds, tiny_config(5));
  for (const auto& l : m.attribute.layers) EXPECT_EQ(l.bias, nas::Vector::Zero(l.bias.size()));
  nas::for_each_block(m.sequence, [&](const std::string& name, const auto& blk) {
    if (name[0] == 'b') {
      EXPECT_EQ(blk.squaredNorm(), 0.0) << name;
    }
    if (name[0] == 'U') {
      const nas::Matrix u = blk;
      EXPECT_TRUE((u.transpose() * u).isApprox(nas::Matrix::Identity(5, 5), 1e-6)) << name;
    }
  });
  EXPECT_EQ(m.attribute.code_width(), m.sequence.hidden());
  EXPECT_EQ(m.sequence.items(), ds.item_count());
}

TEST(InitModel, BitwiseDeterministic) {
  const auto ds = tiny_dataset();
  EXPECT_TRUE(same_params(nas::init_model(ds, tiny_config()), nas::init_model(ds, tiny_config())));
  EXPECT_FALSE(same_params(nas::init_model(ds, tiny_config(4, 1)), nas::init_model(ds, tiny_config(4, 2))));
}

TEST(InitModel, InvalidConfigAndMismatch) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config();
  cfg.hidden = 0;
  EXPECT_THROW(nas::init_model(ds, cfg), nas::ConfigError);
  cfg = tiny_config();
  cfg.epochs = 0;
  EXPECT_THROW(nas::init_model(ds, cfg), nas::ConfigError);
  cfg = tiny_config();
  cfg.learning_rate = -1;
  EXPECT_THROW(nas::init_model(ds, cfg), nas::ConfigError);

  auto m = nas::init_model(ds, tiny_config(4));
  nas::RandomSource rng(1);
  m.sequence = nas::make_sequence_net(ds.item_count(), 6, nas::CandidateGate::Tanh, rng);
  EXPECT_THROW(nas::validate_model(m), nas::ConfigError);
  EXPECT_THROW(nas::train_model(m, ds, tiny_config(4)), nas::ConfigError);
}

TEST(InitModel, EmptyDataset) {
  nas::Dataset empty;
  EXPECT_THROW(nas::init_model(empty, tiny_config()), nas::InputDomainError);
}

TEST(Train, SequenceLossDecreasesOnSyntheticData) {
  const auto ds = nas::generate_synthetic({}).dataset;
  nas::TrainingConfig cfg;  // defaults
  const auto m = nas::train(ds, cfg);
  std::vector<double> seq;
  for (const auto& h : m.history)
    if (h.phase == "sequence") seq.push_back(h.mean_loss);
  ASSERT_EQ(seq.size(), 10u);
  EXPECT_LT(seq.back(), seq.front());
}

TEST(Train, HistoryHasOneRowPerEpochAndPhase) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config();
  cfg.epochs = 3;
  cfg.pretrain_epochs = 2;
  const auto m = nas::train(ds, cfg);
  ASSERT_EQ(m.history.size(), 5u);
  EXPECT_EQ(m.history[0].phase, "attribute");
  EXPECT_EQ(m.history[1].epoch, 2u);
  EXPECT_EQ(m.history[2].phase, "sequence");
  EXPECT_EQ(m.history[4].epoch, 3u);
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config();
  cfg.learning_rate = 0.0;
  EXPECT_TRUE(same_params(nas::train(ds, cfg), nas::init_model(ds, cfg)));
}

TEST(Train, OverfitsOneInstance) {
  nas::Dataset ds = tiny_dataset();
  ds.instances.resize(1);
  ds.instances[0].items = {0, 1, 2, 3, 4, 0};
  for (auto gate : {nas::CandidateGate::Tanh, nas::CandidateGate::Sigmoid}) {
    nas::TrainingConfig cfg;
    cfg.epochs = 200;
    cfg.hidden = 8;
    cfg.learning_rate = 0.1;  // one step per epoch
    cfg.candidate = gate;
    const auto m = nas::train(ds, cfg);
    EXPECT_DOUBLE_EQ(nas::next_item_accuracy(m, ds), 1.0);
  }
}

TEST(Train, NonFiniteLossNamesEpochAndBatch) {
  const auto ds = tiny_dataset();
  const auto cfg = tiny_config();
  auto m = nas::init_model(ds, cfg);
  m.attribute.layers[0].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    nas::train_model(m, ds, cfg);
    FAIL() << "expected NumericError";
  } catch (const nas::NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch 1"), std::string::npos) << msg;
  }
}

TEST(Train, JointLossScheduleTrainsEveryLayer) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config();
  cfg.joint_loss = true;
  const auto init = nas::init_model(ds, cfg);
  const auto m = nas::train(ds, cfg);
  ASSERT_EQ(m.history.size(), cfg.epochs);
  EXPECT_EQ(m.history[0].phase, "joint");
  for (std::size_t l = 0; l < m.attribute.layers.size(); ++l)
    EXPECT_FALSE(testutil::bitwise_equal(m.attribute.layers[l].weight, init.attribute.layers[l].weight));
}

TEST(Train, ClippingIsDeterministicAndChangesTheRun) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config();
  cfg.learning_rate = 0.5;
  const auto plain = nas::train(ds, cfg);
  cfg.clip_norm = 0.01;
  const auto a = nas::train(ds, cfg), b = nas::train(ds, cfg);
  EXPECT_TRUE(same_params(a, b));
  EXPECT_FALSE(same_params(a, plain));
}

TEST(TrainProperty, BitReproducible) {
  const auto ds = tiny_dataset();
  const auto a = nas::train(ds, tiny_config()), b = nas::train(ds, tiny_config());
  EXPECT_TRUE(same_params(a, b));
  EXPECT_EQ(a.history, b.history);
}

TEST(TrainProperty, LabelBlind) {
  const auto ds = tiny_dataset();
  auto shuffled = ds;
  nas::RandomSource rng(99);
  std::vector<std::optional<nas::Label>> labels;
  for (const auto& inst : ds.instances) labels.push_back(inst.label);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < ds.size(); ++i) shuffled.instances[i].label = labels[i];
  auto stripped = ds;
  for (auto& inst : stripped.instances) inst.label.reset();
  for (bool joint : {false, true}) {
    auto cfg = tiny_config();
    cfg.joint_loss = joint;
    const auto ref = nas::train(ds, cfg);
    EXPECT_TRUE(same_params(ref, nas::train(shuffled, cfg)));
    EXPECT_TRUE(same_params(ref, nas::train(stripped, cfg)));
  }
}

TEST(TrainProperty, ReconstructionLossDoesNotIncrease) {
  const auto ds = nas::generate_synthetic({}).dataset;
  nas::TrainingConfig cfg;
  auto m = nas::init_model(ds, cfg);
  const double before = nas::mean_attribute_loss(m, ds);
  nas::train_attribute_phase(m, ds, cfg, cfg.attribute_epochs());
  EXPECT_LE(nas::mean_attribute_loss(m, ds), before);
}

TEST(TrainProperty, FrozenEncoderWithoutJointUpdate) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config();
  cfg.joint_encoder_update = false;
  auto phase1 = nas::init_model(ds, cfg);
  nas::train_attribute_phase(phase1, ds, cfg, cfg.attribute_epochs());
  const auto full = nas::train(ds, cfg);
  for (std::size_t l = 0; l < full.attribute.layers.size(); ++l) {
    EXPECT_TRUE(testutil::bitwise_equal(full.attribute.layers[l].weight, phase1.attribute.layers[l].weight));
    EXPECT_TRUE(testutil::bitwise_equal(full.attribute.layers[l].bias, phase1.attribute.layers[l].bias));
  }
  cfg.joint_encoder_update = true;
  const auto joint = nas::train(ds, cfg);
  EXPECT_FALSE(testutil::bitwise_equal(joint.attribute.layers[0].weight, phase1.attribute.layers[0].weight));
  // Decoder stays frozen in the sequence phase either way.
  EXPECT_TRUE(testutil::bitwise_equal(joint.attribute.layers[1].weight, phase1.attribute.layers[1].weight));
}

TEST(GradientCheck, TinyModelPasses) {
  const auto ds = tiny_dataset();
  for (auto gate : {nas::CandidateGate::Sigmoid, nas::CandidateGate::Tanh}) {
    for (std::size_t depth : {1u, 2u}) {
      auto cfg = tiny_config(4);
      cfg.candidate = gate;
      cfg.depth = depth;
      const auto m = nas::train(ds, cfg);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto rep = nas::gradient_check(m, ds.instances[i], 1e-4);
        EXPECT_TRUE(rep.passed) << rep.worst_parameter << " " << rep.max_relative_error;
        EXPECT_GT(rep.checked, 0u);
      }
    }
  }
}

TEST(GradientCheck, UnconditionedModelPasses) {
  const auto ds = tiny_dataset();
  auto cfg = tiny_config(4);
  cfg.conditioning = false;
  const auto rep = nas::gradient_check(nas::train(ds, cfg), ds.instances[0], 1e-4);
  EXPECT_TRUE(rep.passed) << rep.worst_parameter;
}

TEST(GradientCheck, StationaryZeroAttributeNet) {
  auto ds = tiny_dataset();
  auto m = nas::init_model(ds, tiny_config(4));
  for (auto& l : m.attribute.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  auto inst = ds.instances[0];
  inst.attributes = nas::Vector::Constant(inst.attributes.size(), 0.5);
  const auto fwd = nas::attr_forward(m.attribute, inst.attributes);
  const auto g = nas::attr_backward(m.attribute, fwd.trace, inst.attributes);
  EXPECT_LT(g.squared_norm(), 1e-24);
  EXPECT_TRUE(nas::gradient_check(m, inst, 1e-4).passed);
}

TEST(GradientCheck, ZeroToleranceReportsFailure) {
  const auto ds = tiny_dataset();
  const auto rep = nas::gradient_check(nas::init_model(ds, tiny_config()), ds.instances[0], 0.0);
  EXPECT_FALSE(rep.passed);
  EXPECT_GE(rep.max_relative_error, 0.0);
}

TEST(Persistence, RoundTripPreservesEmbeddingsExactly) {
  const auto ds = tiny_dataset();
  const auto m = nas::train(ds, tiny_config());
  const auto path = testutil::tmp_path("model.json");
  nas::save_model(m, path);
  const auto back = nas::load_model(path);
  EXPECT_TRUE(same_params(m, back));
  EXPECT_EQ(back.history, m.history);
  EXPECT_TRUE(back.vocabulary == m.vocabulary);
  EXPECT_TRUE(back.schema == m.schema);
  EXPECT_EQ(nas::to_json(back.config), nas::to_json(m.config));
  for (const auto& inst : ds.instances)
    EXPECT_TRUE(testutil::bitwise_equal(nas::embed_instance(m, inst), nas::embed_instance(back, inst)));
}

TEST(Persistence, TruncatedFileIsCorrupt) {
  const auto ds = tiny_dataset();
  const auto path = testutil::tmp_path("model_full.json");
  nas::save_model(nas::init_model(ds, tiny_config()), path);
  const auto text = slurp(path);
  const auto cut = testutil::tmp_path("model_cut.json");
  std::ofstream(cut) << text.substr(0, text.size() / 2);
  EXPECT_THROW(nas::load_model(cut), nas::CorruptFileError);
}

TEST(Persistence, MissingBlockIsCorrupt) {
  const auto ds = tiny_dataset();
  auto doc = nas::model_to_json(nas::init_model(ds, tiny_config()));
  doc["sequence"]["blocks"].erase(doc["sequence"]["blocks"].size() - 1);
  EXPECT_THROW(nas::model_from_json(doc), nas::CorruptFileError);
}

TEST(Persistence, FutureVersionRejected) {
  const auto ds = tiny_dataset();
  auto doc = nas::model_to_json(nas::init_model(ds, tiny_config()));
  doc["version"] = nas::kModelFormatVersion + 1;
  const auto path = testutil::tmp_path("model_future.json");
  std::ofstream(path) << doc.dump();
  EXPECT_THROW(nas::load_model(path), nas::VersionError);
}

TEST(Persistence, LossCsv) {
  const std::vector<nas::LossRecord> h{{1, "attribute", 0.5}, {1, "sequence", 2.25}};
  std::ostringstream out;
  nas::write_loss_csv(h, out);
  EXPECT_EQ(out.str(), "epoch,phase,mean_loss\n1,attribute,0.5\n1,sequence,2.25\n");
}
