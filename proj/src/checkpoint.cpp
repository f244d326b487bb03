#include "svss/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "svss/errors.hpp"

namespace svss {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "svss-checkpoint";
constexpr int kVersion = 1;

json hex_vector(const Eigen::Ref<const VectorXd>& values) {
  json out = json::array();
  for (Index i = 0; i < values.size(); ++i) out.push_back(hex_double(values(i)));
  return out;
}

json hex_matrix(const MatrixXd& values) {
  json out = json::array();
  for (Index r = 0; r < values.rows(); ++r) out.push_back(hex_vector(values.row(r).transpose()));
  return out;
}

VectorXd read_vector(const json& node) {
  VectorXd out(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) out(static_cast<Index>(i)) = parse_hex_double(node.at(i));
  return out;
}

MatrixXd read_matrix(const json& node, Index rows, Index cols) {
  if (static_cast<Index>(node.size()) != rows) throw DataError("checkpoint: matrix row count mismatch");
  MatrixXd out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const VectorXd row = read_vector(node.at(static_cast<std::size_t>(r)));
    if (row.size() != cols) throw DataError("checkpoint: matrix column count mismatch");
    out.row(r) = row.transpose();
  }
  return out;
}

}  // namespace

std::string hex_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%a", value);
  return buffer;
}

double parse_hex_double(const std::string& text) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw DataError("checkpoint: bad floating-point value '" + text + "'");
  return value;
}

std::string checkpoint_to_text(const Checkpoint& ckpt) {
  const TrainConfig& c = ckpt.config;
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["Q"] = ckpt.params.components();
  doc["D"] = ckpt.params.dims();
  doc["M"] = c.total_points;
  doc["mode"] = std::string(mode_name(c.mode));
  doc["ws"] = c.use_ws;
  doc["ng"] = c.use_ng;
  doc["seed"] = c.seed;
  doc["iterations"] = ckpt.iterations_done;
  doc["optimizer"] = {{"mc_samples", c.mc_samples},
                      {"pair_rate", hex_double(c.pair_rate)},
                      {"max_pairs", c.max_pairs ? json(*c.max_pairs) : json(nullptr)},
                      {"step_size", hex_double(c.step_size)},
                      {"beta1", hex_double(c.beta1)},
                      {"beta2", hex_double(c.beta2)},
                      {"epsilon", hex_double(c.adam_epsilon)},
                      {"prior_scale_factor", hex_double(c.prior_scale_factor)},
                      {"init", std::string(init_name(c.init))}};
  doc["params"] = {{"weights", hex_vector(ckpt.params.weights)},
                   {"means", hex_matrix(ckpt.params.means)},
                   {"scales", hex_matrix(ckpt.params.scales)},
                   {"noise_var", hex_double(ckpt.params.noise_var)},
                   {"log_params", hex_vector(ckpt.log_params)}};
  doc["prior"] = {{"means", hex_matrix(ckpt.prior.means)}, {"scales", hex_matrix(ckpt.prior.scales)}};
  doc["allocation"] = ckpt.allocation.counts;
  doc["fixed_noise"] = ckpt.fixed_noise ? hex_matrix(*ckpt.fixed_noise) : json(nullptr);
  const Standardization& s = ckpt.standardization;
  doc["standardization"] = {{"kept_columns", s.kept_columns},
                            {"x_mean", hex_vector(s.x_mean)},
                            {"x_std", hex_vector(s.x_std)},
                            {"y_mean", hex_double(s.y_mean)},
                            {"y_std", hex_double(s.y_std)}};
  doc["data"] = {{"path", ckpt.data.path},
                 {"target_column", ckpt.data.target_column},
                 {"header", ckpt.data.has_header},
                 {"train_fraction", hex_double(ckpt.data.train_fraction)},
                 {"split_seed", ckpt.data.split_seed}};
  return doc.dump(2) + "\n";
}

Checkpoint checkpoint_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != kFormat) throw DataError("checkpoint: unexpected format tag");
    if (doc.at("version") != kVersion) throw DataError("checkpoint: unsupported schema version");
    Checkpoint ckpt;
    const auto q = doc.at("Q").get<Index>();
    const auto d = doc.at("D").get<Index>();
    TrainConfig& c = ckpt.config;
    c.components = static_cast<int>(q);
    c.total_points = doc.at("M").get<int>();
    c.mode = parse_mode(doc.at("mode").get<std::string>());
    c.use_ws = doc.at("ws").get<bool>();
    c.use_ng = doc.at("ng").get<bool>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    ckpt.iterations_done = doc.at("iterations").get<int>();
    c.iterations = ckpt.iterations_done;
    const json& opt = doc.at("optimizer");
    c.mc_samples = opt.at("mc_samples").get<int>();
    c.pair_rate = parse_hex_double(opt.at("pair_rate"));
    if (opt.at("max_pairs").is_null()) {
      c.max_pairs.reset();
    } else {
      c.max_pairs = opt.at("max_pairs").get<std::uint64_t>();
    }
    c.step_size = parse_hex_double(opt.at("step_size"));
    c.beta1 = parse_hex_double(opt.at("beta1"));
    c.beta2 = parse_hex_double(opt.at("beta2"));
    c.adam_epsilon = parse_hex_double(opt.at("epsilon"));
    c.prior_scale_factor = parse_hex_double(opt.at("prior_scale_factor"));
    c.init = parse_init(opt.at("init").get<std::string>());

    const json& p = doc.at("params");
    ckpt.params.weights = read_vector(p.at("weights"));
    if (ckpt.params.weights.size() != q) throw DataError("checkpoint: weight count does not match Q");
    ckpt.params.means = read_matrix(p.at("means"), q, d);
    ckpt.params.scales = read_matrix(p.at("scales"), q, d);
    ckpt.params.noise_var = parse_hex_double(p.at("noise_var"));
    ckpt.log_params = read_vector(p.at("log_params"));
    ckpt.params.validate();
    ckpt.prior.means = read_matrix(doc.at("prior").at("means"), q, d);
    ckpt.prior.scales = read_matrix(doc.at("prior").at("scales"), q, d);

    ckpt.allocation.counts = doc.at("allocation").get<std::vector<int>>();
    if (static_cast<Index>(ckpt.allocation.counts.size()) != q) {
      throw DataError("checkpoint: allocation length does not match Q");
    }
    ckpt.allocation.total = 0;
    for (int count : ckpt.allocation.counts) ckpt.allocation.total += count;
    ckpt.allocation.ratios.resize(q);
    for (Index k = 0; k < q; ++k) {
      ckpt.allocation.ratios(k) = static_cast<double>(ckpt.allocation.counts[k]) / ckpt.allocation.total;
    }

    if (!doc.at("fixed_noise").is_null()) {
      ckpt.fixed_noise = read_matrix(doc.at("fixed_noise"), ckpt.allocation.total, d);
    }

    const json& s = doc.at("standardization");
    ckpt.standardization.kept_columns = s.at("kept_columns").get<std::vector<Index>>();
    ckpt.standardization.x_mean = read_vector(s.at("x_mean"));
    ckpt.standardization.x_std = read_vector(s.at("x_std"));
    ckpt.standardization.y_mean = parse_hex_double(s.at("y_mean"));
    ckpt.standardization.y_std = parse_hex_double(s.at("y_std"));
    if (static_cast<Index>(ckpt.standardization.kept_columns.size()) != d) {
      throw DataError("checkpoint: standardization does not match D");
    }

    const json& data = doc.at("data");
    ckpt.data.path = data.at("path").get<std::string>();
    ckpt.data.target_column = data.at("target_column").get<std::string>();
    ckpt.data.has_header = data.at("header").get<bool>();
    ckpt.data.train_fraction = parse_hex_double(data.at("train_fraction"));
    ckpt.data.split_seed = data.at("split_seed").get<std::uint64_t>();
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: schema mismatch: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_text(checkpoint);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open checkpoint '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return checkpoint_from_text(text.str());
}

}  // namespace svss
