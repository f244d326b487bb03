#ifndef SVSS_DATA_IO_HPP
#define SVSS_DATA_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "svss/types.hpp"

namespace svss {

/// String-level view of a CSV file: comma separated, optional single header
/// line, '#' comment lines, LF or CRLF line endings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // without the leading '#'
};

Table read_table(const std::string& path, bool has_header);

/// Numeric table split into features and a target column.
struct RawTable {
  MatrixXd X;
  VectorXd y;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::size_t rejected_rows = 0;  // rows containing NaN or Inf
  std::vector<std::string> comments;
};

/// Loads a numeric CSV. `target_column` is a header name or a column index
/// (0-based; negative values count from the end, "-1" is the last column).
RawTable load_csv(const std::string& path, const std::string& target_column = "-1", bool has_header = true);

/// Writes features then target with round-trip precision.
void write_csv(const std::string& path, const RawTable& table);
void write_csv(std::ostream& out, const RawTable& table);

/// Formats a double with the shortest representation that parses back exactly.
std::string format_double(double value);

/// Affine maps fitted on a training split. Constant columns are dropped.
struct Standardization {
  std::vector<Index> kept_columns;
  VectorXd x_mean;  // over kept columns
  VectorXd x_std;
  double y_mean = 0.0;
  double y_std = 1.0;
  std::vector<std::string> warnings;

  MatrixXd apply_x(const Eigen::Ref<const MatrixXd>& raw) const;
  VectorXd apply_y(const Eigen::Ref<const VectorXd>& raw) const;
  VectorXd restore_y(const Eigen::Ref<const VectorXd>& standardized) const;
};

/// Population mean / standard deviation of every column and the target.
Standardization fit_standardization(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y);

/// Standardized inputs and targets together with the statistics used.
struct Dataset {
  MatrixXd X;
  VectorXd Y;
  Standardization stats;
  std::vector<Index> source_rows;
  std::string provenance;
};

Dataset standardize(const RawTable& table, const Standardization& stats, std::vector<Index> rows = {});

/// Seeded uniform shuffle then split; standardization is fitted on the
/// training side only and applied to both.
std::pair<Dataset, Dataset> split(const RawTable& table, double train_fraction, std::uint64_t seed);

struct SyntheticData {
  RawTable table;
  SMParams truth;
  std::string provenance;
};

inline constexpr Index kSynthDenseCap = 5000;

/// Draws y ~ N(0, K_SM + noise_var I) on a uniform grid (or uniform random
/// inputs) of D = params.dims() columns spanning [x_min, x_max).
SyntheticData synth_sm(const SMParams& params, Index n, double x_min, double x_max, std::uint64_t seed,
                       bool grid = true);

/// One-line provenance record of synthetic ground truth and its inverse.
std::string provenance_line(const SMParams& params, Index n, std::uint64_t seed);
SMParams parse_provenance(const std::vector<std::string>& comments);

}  // namespace svss

#endif  // SVSS_DATA_IO_HPP
