#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "helpers.hpp"

using namespace svss;
using svss::testing::random_inputs;
using svss::testing::random_normal;
using svss::testing::scratch_dir;

namespace {

Checkpoint trained_checkpoint(Mode mode) {
  Rng rng(3);
  const MatrixXd X = random_inputs(rng, 40, 2);
  const VectorXd y = random_normal(rng, 40);
  TrainConfig c;
  c.mode = mode;
  c.use_ws = c.use_ng = mode == Mode::kSVSS;
  c.components = 3;
  c.total_points = 9;
  c.iterations = 15;
  c.seed = 12;
  c.max_pairs.reset();
  const TrainResult r = train(X, y, c);
  Checkpoint ckpt;
  ckpt.config = c;
  ckpt.iterations_done = r.state.iteration;
  ckpt.params = r.params;
  ckpt.log_params = r.state.log_params;
  ckpt.prior = r.state.prior;
  ckpt.allocation = r.state.allocation;
  ckpt.fixed_noise = r.state.fixed_noise;
  ckpt.standardization = fit_standardization(X, y);
  ckpt.data.path = "/data/some file.csv";
  ckpt.data.train_fraction = 0.9;
  ckpt.data.split_seed = 77;
  return ckpt;
}

}  // namespace

TEST(HexDouble, RoundTrip) {
  for (double v : {0.1, -1.0 / 3.0, 1e-310, std::numeric_limits<double>::max(), 0.0, 12345.678}) {
    EXPECT_EQ(parse_hex_double(hex_double(v)), v);
  }
  EXPECT_THROW(parse_hex_double("zz"), DataError);
}

TEST(Checkpoint, BitExactRoundTrip) {
  for (Mode mode : {Mode::kSVSS, Mode::kSS}) {
    const Checkpoint a = trained_checkpoint(mode);
    const auto dir = scratch_dir("ckpt");
    const std::string path = (dir / "c.json").string();
    save_checkpoint(path, a);
    const Checkpoint b = load_checkpoint(path);
    EXPECT_EQ(b.params.weights, a.params.weights);
    EXPECT_EQ(b.params.means, a.params.means);
    EXPECT_EQ(b.params.scales, a.params.scales);
    EXPECT_EQ(b.params.noise_var, a.params.noise_var);
    EXPECT_EQ(b.log_params, a.log_params);
    EXPECT_EQ(b.prior.means, a.prior.means);
    EXPECT_EQ(b.prior.scales, a.prior.scales);
    EXPECT_EQ(b.allocation.counts, a.allocation.counts);
    EXPECT_EQ(b.fixed_noise.has_value(), a.fixed_noise.has_value());
    if (a.fixed_noise) EXPECT_EQ(*b.fixed_noise, *a.fixed_noise);
    EXPECT_EQ(b.standardization.x_mean, a.standardization.x_mean);
    EXPECT_EQ(b.standardization.y_std, a.standardization.y_std);
    EXPECT_EQ(b.config.mode, a.config.mode);
    EXPECT_EQ(b.config.use_ws, a.config.use_ws);
    EXPECT_EQ(b.config.seed, a.config.seed);
    EXPECT_FALSE(b.config.max_pairs.has_value());
    EXPECT_EQ(b.iterations_done, 15);
    EXPECT_EQ(b.data.path, a.data.path);
    EXPECT_EQ(b.data.split_seed, 77u);
    // Serializing the loaded copy reproduces the document.
    EXPECT_EQ(checkpoint_to_text(b), checkpoint_to_text(a));
  }
}

TEST(Checkpoint, SchemaMismatch) {
  const std::string good = checkpoint_to_text(trained_checkpoint(Mode::kSVSS));
  EXPECT_THROW(checkpoint_from_text("not json"), DataError);
  std::string wrong_version = good;
  wrong_version.replace(wrong_version.find("\"version\": 1"), 12, "\"version\": 9");
  EXPECT_THROW(checkpoint_from_text(wrong_version), DataError);
  std::string missing = good;
  missing.replace(missing.find("\"noise_var\""), 11, "\"noise_vor\"");
  EXPECT_THROW(checkpoint_from_text(missing), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/checkpoint.json"), FileNotFound);
}
