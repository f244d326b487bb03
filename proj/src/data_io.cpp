#include "svss/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "svss/errors.hpp"
#include "svss/low_rank.hpp"
#include "svss/rng.hpp"
#include "svss/sm_kernel.hpp"
#include "svss/spectral_sampling.hpp"

namespace svss {
namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ';')) {
    double v = 0.0;
    if (!parse_double(trim(item), v)) throw DataError("provenance: bad number '" + item + "'");
    values.push_back(v);
  }
  return values;
}

std::string join(const Eigen::Ref<const VectorXd>& values) {
  std::string out;
  for (Index i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format_double(values(i));
  }
  return out;
}

}  // namespace

Table read_table(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open '" + path + "'");
  Table table;
  std::string line;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    if (header_pending) {
      table.header = split_fields(line);
      header_pending = false;
      continue;
    }
    table.rows.push_back(split_fields(line));
  }
  return table;
}

RawTable load_csv(const std::string& path, const std::string& target_column, bool has_header) {
  const Table table = read_table(path, has_header);
  if (table.rows.empty()) throw DataError("'" + path + "' contains no data rows");
  const auto columns = static_cast<long>(table.rows.front().size());
  if (columns < 2) throw DataError("'" + path + "' needs at least one feature and one target column");

  long target = -1;
  if (const auto it = std::find(table.header.begin(), table.header.end(), target_column);
      !table.header.empty() && it != table.header.end()) {
    target = static_cast<long>(it - table.header.begin());
  } else {
    long index = 0;
    const auto [ptr, ec] = std::from_chars(target_column.data(), target_column.data() + target_column.size(), index);
    if (ec != std::errc() || ptr != target_column.data() + target_column.size()) {
      throw DataError("target column '" + target_column + "' not found");
    }
    target = index < 0 ? columns + index : index;
  }
  if (target < 0 || target >= columns) throw DataError("target column '" + target_column + "' out of range");

  RawTable raw;
  raw.comments = table.comments;
  for (long c = 0; c < columns; ++c) {
    const std::string name =
        table.header.size() == static_cast<std::size_t>(columns) ? table.header[c] : "x" + std::to_string(c + 1);
    if (c == target) {
      raw.target_name = table.header.empty() ? "y" : name;
    } else {
      raw.feature_names.push_back(name);
    }
  }

  std::vector<double> values;
  std::vector<double> row_values(static_cast<std::size_t>(columns));
  std::size_t kept = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    const long row_number = static_cast<long>(r) + 1;
    if (static_cast<long>(fields.size()) != columns) {
      throw ParseError("row " + std::to_string(row_number) + " has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(columns),
                       row_number, 0);
    }
    bool finite = true;
    for (long c = 0; c < columns; ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw ParseError("non-numeric cell '" + fields[c] + "' at (row " + std::to_string(row_number) +
                             ", column " + std::to_string(c + 1) + ")",
                         row_number, c + 1);
      }
      finite = finite && std::isfinite(v);
      row_values[c] = v;
    }
    if (!finite) {
      ++raw.rejected_rows;
      continue;
    }
    values.insert(values.end(), row_values.begin(), row_values.end());
    ++kept;
  }
  if (kept == 0) throw DataError("'" + path + "' has no finite rows");

  raw.X.resize(static_cast<Index>(kept), columns - 1);
  raw.y.resize(static_cast<Index>(kept));
  for (std::size_t r = 0; r < kept; ++r) {
    Index feature = 0;
    for (long c = 0; c < columns; ++c) {
      const double v = values[r * columns + c];
      if (c == target) {
        raw.y(static_cast<Index>(r)) = v;
      } else {
        raw.X(static_cast<Index>(r), feature++) = v;
      }
    }
  }
  return raw;
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void write_csv(const std::string& path, const RawTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, table);
}

void write_csv(std::ostream& out, const RawTable& table) {
  for (const auto& comment : table.comments) out << '#' << comment << '\n';
  for (Index c = 0; c < table.X.cols(); ++c) {
    out << (static_cast<std::size_t>(c) < table.feature_names.size() ? table.feature_names[c]
                                                                     : "x" + std::to_string(c + 1))
        << ',';
  }
  out << (table.target_name.empty() ? "y" : table.target_name) << '\n';
  for (Index r = 0; r < table.X.rows(); ++r) {
    for (Index c = 0; c < table.X.cols(); ++c) out << format_double(table.X(r, c)) << ',';
    out << format_double(table.y(r)) << '\n';
  }
}

MatrixXd Standardization::apply_x(const Eigen::Ref<const MatrixXd>& raw) const {
  MatrixXd out(raw.rows(), static_cast<Index>(kept_columns.size()));
  for (std::size_t k = 0; k < kept_columns.size(); ++k) {
    const auto c = static_cast<Index>(k);
    if (kept_columns[k] >= raw.cols()) throw ShapeError("standardization: input has too few columns");
    out.col(c) = (raw.col(kept_columns[k]).array() - x_mean(c)) / x_std(c);
  }
  return out;
}

VectorXd Standardization::apply_y(const Eigen::Ref<const VectorXd>& raw) const {
  return ((raw.array() - y_mean) / y_std).matrix();
}

VectorXd Standardization::restore_y(const Eigen::Ref<const VectorXd>& standardized) const {
  return (standardized.array() * y_std + y_mean).matrix();
}

Standardization fit_standardization(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y) {
  if (X.rows() < 1 || X.rows() != y.size()) throw ShapeError("standardization: X and Y lengths differ");
  Standardization stats;
  std::vector<double> means;
  std::vector<double> stds;
  for (Index c = 0; c < X.cols(); ++c) {
    const double mean = X.col(c).mean();
    const double sd = std::sqrt((X.col(c).array() - mean).square().mean());
    if (!(sd > 0.0)) {
      stats.warnings.push_back("feature column " + std::to_string(c + 1) +
                               " is constant on the training split and was dropped");
      continue;
    }
    stats.kept_columns.push_back(c);
    means.push_back(mean);
    stds.push_back(sd);
  }
  if (stats.kept_columns.empty()) throw DataError("standardization: every feature column is constant");
  stats.x_mean = Eigen::Map<VectorXd>(means.data(), static_cast<Index>(means.size()));
  stats.x_std = Eigen::Map<VectorXd>(stds.data(), static_cast<Index>(stds.size()));
  stats.y_mean = y.mean();
  stats.y_std = std::sqrt((y.array() - stats.y_mean).square().mean());
  if (!(stats.y_std > 0.0)) {
    stats.warnings.push_back("target is constant on the training split; scale left at 1");
    stats.y_std = 1.0;
  }
  return stats;
}

Dataset standardize(const RawTable& table, const Standardization& stats, std::vector<Index> rows) {
  if (rows.empty()) {
    rows.resize(static_cast<std::size_t>(table.X.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
  }
  MatrixXd X(static_cast<Index>(rows.size()), table.X.cols());
  VectorXd y(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    X.row(static_cast<Index>(r)) = table.X.row(rows[r]);
    y(static_cast<Index>(r)) = table.y(rows[r]);
  }
  Dataset data;
  data.X = stats.apply_x(X);
  data.Y = stats.apply_y(y);
  data.stats = stats;
  data.source_rows = std::move(rows);
  return data;
}

std::pair<Dataset, Dataset> split(const RawTable& table, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("split: fraction must lie in (0, 1)");
  const Index n = table.X.rows();
  const auto n_train = static_cast<Index>(round_half_even(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw DataError("split: fraction " + format_double(train_fraction) + " of " + std::to_string(n) +
                    " rows leaves one side empty");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(order));
  std::vector<Index> train_rows(order.begin(), order.begin() + n_train);
  std::vector<Index> test_rows(order.begin() + n_train, order.end());

  MatrixXd x_train(n_train, table.X.cols());
  VectorXd y_train(n_train);
  for (Index r = 0; r < n_train; ++r) {
    x_train.row(r) = table.X.row(train_rows[r]);
    y_train(r) = table.y(train_rows[r]);
  }
  const Standardization stats = fit_standardization(x_train, y_train);
  Dataset train = standardize(table, stats, std::move(train_rows));
  Dataset test = standardize(table, stats, std::move(test_rows));
  train.provenance = test.provenance = "split seed=" + std::to_string(seed) +
                                       " fraction=" + format_double(train_fraction);
  return {std::move(train), std::move(test)};
}

std::string provenance_line(const SMParams& params, Index n, std::uint64_t seed) {
  std::ostringstream line;
  const MatrixXd means_t = params.means.transpose();
  const MatrixXd scales_t = params.scales.transpose();
  line << " svss-synth q=" << params.components() << " d=" << params.dims() << " n=" << n << " seed=" << seed
       << " weights=" << join(params.weights)
       << " means=" << join(Eigen::Map<const VectorXd>(means_t.data(), means_t.size()))
       << " scales=" << join(Eigen::Map<const VectorXd>(scales_t.data(), scales_t.size()))
       << " noise_var=" << format_double(params.noise_var);
  return line.str();
}

SMParams parse_provenance(const std::vector<std::string>& comments) {
  for (const auto& comment : comments) {
    std::istringstream stream(comment);
    std::string token;
    if (!(stream >> token) || token != "svss-synth") continue;
    long q = -1;
    long d = -1;
    std::vector<double> weights, means, scales;
    double noise_var = -1.0;
    while (stream >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "q") q = std::stol(value);
      if (key == "d") d = std::stol(value);
      if (key == "weights") weights = parse_list(value);
      if (key == "means") means = parse_list(value);
      if (key == "scales") scales = parse_list(value);
      if (key == "noise_var") noise_var = parse_list(value).at(0);
    }
    if (q < 1 || d < 1 || static_cast<long>(weights.size()) != q || static_cast<long>(means.size()) != q * d ||
        static_cast<long>(scales.size()) != q * d) {
      throw DataError("malformed svss-synth provenance record");
    }
    SMParams params;
    params.weights = Eigen::Map<VectorXd>(weights.data(), q);
    params.means = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(means.data(), q, d);
    params.scales =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(scales.data(), q, d);
    params.noise_var = noise_var;
    params.validate();
    return params;
  }
  throw DataError("no svss-synth provenance record found");
}

SyntheticData synth_sm(const SMParams& params, Index n, double x_min, double x_max, std::uint64_t seed, bool grid) {
  params.validate();
  if (n < 1) throw UsageError("synth: n must be positive");
  if (n > kSynthDenseCap) throw TooLarge("synth: n exceeds the dense cap of " + std::to_string(kSynthDenseCap));
  if (!(x_max > x_min)) throw UsageError("synth: x range is empty");
  const Index dims = params.dims();
  if (grid && dims != 1) throw UsageError("synth: grid inputs require D = 1");

  Rng root(seed);
  Rng x_rng = root.split(0);
  Rng y_rng = root.split(1);
  SyntheticData out;
  out.truth = params;
  RawTable& table = out.table;
  table.X.resize(n, dims);
  const double width = x_max - x_min;
  for (Index i = 0; i < n; ++i) {
    for (Index d = 0; d < dims; ++d) {
      table.X(i, d) = grid ? x_min + width * static_cast<double>(i) / static_cast<double>(n)
                           : x_min + width * x_rng.uniform();
    }
  }
  MatrixXd cov = sm_gram(params, table.X);
  cov.diagonal().array() += params.noise_var;
  const JitteredCholesky chol(cov);
  VectorXd z(n);
  for (Index i = 0; i < n; ++i) z(i) = y_rng.normal();
  table.y = chol.llt.matrixL() * z;
  for (Index d = 0; d < dims; ++d) table.feature_names.push_back("x" + std::to_string(d + 1));
  table.target_name = "y";
  out.provenance = provenance_line(params, n, seed);
  table.comments.push_back(out.provenance);
  return out;
}

}  // namespace svss
