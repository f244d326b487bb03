#ifndef SVSS_CHECKPOINT_HPP
#define SVSS_CHECKPOINT_HPP

#include <optional>
#include <string>

#include "svss/data_io.hpp"
#include "svss/inference.hpp"

namespace svss {

/// Where the training data of a checkpoint came from, so that prediction can
/// rebuild exactly the same standardized training set.
struct DataReference {
  std::string path;
  std::string target_column = "-1";
  bool has_header = true;
  double train_fraction = 1.0;  // 1 means the whole file was used
  std::uint64_t split_seed = 0;
};

/// Trained model snapshot. Serialized as a JSON document (schema
/// "svss-checkpoint", version 1) in which every floating-point value is a
/// C99 hexadecimal-float string, so a save/load cycle is bit-exact.
struct Checkpoint {
  TrainConfig config;
  int iterations_done = 0;
  SMParams params;
  VectorXd log_params;
  ComponentPrior prior;
  Allocation allocation;
  std::optional<MatrixXd> fixed_noise;  // SS mode: the noise behind the trained points
  Standardization standardization;
  DataReference data;
};

std::string checkpoint_to_text(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_text(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

std::string hex_double(double value);
double parse_hex_double(const std::string& text);

}  // namespace svss

#endif  // SVSS_CHECKPOINT_HPP
