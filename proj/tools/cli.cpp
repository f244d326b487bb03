#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <memory>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "svss/svss.hpp"

namespace svss::cli {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// "-" means standard output.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw DataError("cannot write '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::istringstream field(item);
    T value{};
    field >> value;
    if (field.fail() || !field.eof()) throw UsageError(std::string("bad entry '") + item + "' in " + what);
    values.push_back(value);
  }
  if (values.empty()) throw UsageError(std::string(what) + " is empty");
  return values;
}

std::string fmt(double value) { return format_double(value); }

// ---------------------------------------------------------------- approx-bench

struct BenchOptions {
  Index n = 100;
  int q = 4;
  std::string m_list = "20,60";
  std::string policies = "equal,weight,ws";
  std::string rate_list = "1";
  std::string weight_init = "uniform0-20";
  int trials = 50;
  std::uint64_t seed = 0;
  std::string data;
  std::string target_col = "-1";
  bool no_header = false;
  std::string out = "-";
};

int cmd_approx_bench(const BenchOptions& o, std::ostream& out) {
  if (o.q < 1) throw UsageError("--q must be at least 1");
  if (o.trials < 1) throw UsageError("--trials must be at least 1");
  const auto budgets = parse_list<int>(o.m_list, "--m-list");
  const auto rates = parse_list<double>(o.rate_list, "--rate-list");
  std::vector<SamplingPolicy> policies;
  for (const auto& name : parse_list<std::string>(o.policies, "--policies")) policies.push_back(parse_policy(name));
  for (int m : budgets) {
    if (m < o.q) throw BudgetTooSmall("every M in --m-list must be at least Q");
  }
  for (double r : rates) {
    if (!(r > 0.0 && r <= 1.0)) throw UsageError("rates must lie in (0, 1]");
  }
  double w_lo = 0.0;
  double w_hi = 20.0;
  if (o.weight_init == "uniform0.99-1.01") {
    w_lo = 0.99;
    w_hi = 1.01;
  } else if (o.weight_init != "uniform0-20") {
    throw UsageError("--weight-init must be uniform0-20 or uniform0.99-1.01");
  }

  MatrixXd X;
  if (o.data.empty()) {
    if (o.n < 2) throw UsageError("--n must be at least 2");
    X.resize(o.n, 1);
    for (Index i = 0; i < o.n; ++i) X(i, 0) = static_cast<double>(i) / static_cast<double>(o.n);
  } else {
    const RawTable raw = load_csv(o.data, o.target_col, !o.no_header);
    X = standardize(raw, fit_standardization(raw.X, raw.y)).X;
  }
  if (X.rows() > kSynthDenseCap) throw TooLarge("approx-bench needs the dense kernel; at most 5000 rows");

  Sink sink(o.out, out);
  std::ostream& csv = *sink;
  csv << "policy,M,Q,rate,trial,rel_error,wall_ms\n";
  const VectorXd zeros = VectorXd::Zero(X.rows());
  const Rng root(o.seed);
  for (int trial = 0; trial < o.trials; ++trial) {
    // One kernel per trial, shared by every policy so comparisons are paired.
    const Rng trial_rng = root.split(static_cast<std::uint64_t>(trial));
    Rng param_rng = trial_rng.split(0);
    SMParams params = initial_params(X, zeros, o.q, param_rng, InitMethod::kUniform);
    for (Index c = 0; c < params.components(); ++c) {
      params.weights(c) = w_lo + (w_hi - w_lo) * (1.0 - param_rng.uniform());
    }
    const MatrixXd K = sm_gram(params, X);
    const double k_norm = K.norm();
    // Policies share the spectral noise stream of each (trial, M): common
    // random numbers, so identical allocations give identical errors.
    const Rng subset_root = trial_rng.split(1);
    const Rng noise_root = trial_rng.split(2);
    std::uint64_t cell = 0;
    for (SamplingPolicy policy : policies) {
      const std::vector<double> policy_rates = policy == SamplingPolicy::kOptimal ? rates : std::vector<double>{1.0};
      for (std::size_t b = 0; b < budgets.size(); ++b) {
        const int m = budgets[b];
        for (double rate : policy_rates) {
          Rng subset_rng = subset_root.split(cell++);
          Rng noise_rng = noise_root.split(b);
          const auto start = Clock::now();
          VectorXd ratios;
          switch (policy) {
            case SamplingPolicy::kEqual: ratios = equal_ratios(params.components()); break;
            case SamplingPolicy::kWeight: ratios = weight_ratios(params); break;
            case SamplingPolicy::kOptimal: ratios = optimal_ratios(params, pairwise_subset(X, rate, subset_rng)); break;
          }
          const SpectralSample sample = draw_sample(params, allocate(ratios, m), noise_rng);
          const FeatureMatrix phi = feature_map(params, sample, X);
          const MatrixXd estimate = phi.values * phi.values.transpose();
          const double rel = (K - estimate).norm() / k_norm;
          const double wall = ms_since(start);
          csv << policy_name(policy) << ',' << m << ',' << o.q << ',' << fmt(rate) << ',' << trial << ','
              << fmt(rel) << ',' << fmt(wall) << '\n';
        }
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string data;
  std::string target_col = "-1";
  bool no_header = false;
  double train_fraction = 1.0;
  std::optional<std::uint64_t> split_seed;
  std::string eval_data;
  int eval_every = 10;
  std::string mode = "svss";
  bool ws = false;
  bool ng = false;
  int q = 4;
  int m = 20;
  int iters = 1000;
  int mc_samples = 1;
  double pair_rate = 1.0;
  std::uint64_t max_pairs = kDefaultMaxPairs;
  double step = 0.01;
  std::uint64_t seed = 0;
  std::string init = "spectrum";
  double prior_scale = 10.0;
  std::string out_checkpoint;
  std::string out_trace;
};

struct TrainingData {
  Dataset train;
  std::optional<Dataset> held_out;
};

TrainingData load_training_data(const DataReference& ref, std::ostream& err) {
  const RawTable raw = load_csv(ref.path, ref.target_column, ref.has_header);
  if (raw.rejected_rows > 0) {
    err << "warning: " << raw.rejected_rows << " rows with NaN or Inf were skipped\n";
  }
  if (ref.train_fraction < 1.0) {
    auto [train, test] = split(raw, ref.train_fraction, ref.split_seed);
    return {std::move(train), std::move(test)};
  }
  return {standardize(raw, fit_standardization(raw.X, raw.y)), std::nullopt};
}

Dataset load_with_stats(const std::string& path, const std::string& target_col, bool has_header,
                        const Standardization& stats) {
  const RawTable raw = load_csv(path, target_col, has_header);
  Dataset data = standardize(raw, stats);
  data.provenance = path;
  return data;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  config.mode = parse_mode(o.mode);
  config.use_ws = o.ws;
  config.use_ng = o.ng;
  config.components = o.q;
  config.total_points = o.m;
  config.iterations = o.iters;
  config.mc_samples = o.mc_samples;
  config.pair_rate = o.pair_rate;
  config.max_pairs = o.max_pairs == 0 ? std::nullopt : std::optional<std::uint64_t>(o.max_pairs);
  config.step_size = o.step;
  config.seed = o.seed;
  config.init = parse_init(o.init);
  config.prior_scale_factor = o.prior_scale;
  config.validate();
  if (o.eval_every < 1) throw UsageError("--eval-every must be at least 1");
  if (!(o.train_fraction > 0.0 && o.train_fraction <= 1.0)) throw UsageError("--train-fraction must lie in (0, 1]");

  DataReference ref;
  ref.path = std::filesystem::absolute(o.data).string();
  ref.target_column = o.target_col;
  ref.has_header = !o.no_header;
  ref.train_fraction = o.train_fraction;
  ref.split_seed = o.split_seed.value_or(o.seed);
  TrainingData data = load_training_data(ref, err);
  for (const auto& warning : data.train.stats.warnings) err << "warning: " << warning << '\n';

  std::optional<Dataset> eval;
  if (!o.eval_data.empty()) {
    eval = load_with_stats(o.eval_data, o.target_col, !o.no_header, data.train.stats);
  } else if (data.held_out) {
    eval = std::move(data.held_out);
  }

  const Dataset& train_set = data.train;
  std::optional<Sink> trace_sink;
  std::ostream* trace = nullptr;
  if (!o.out_trace.empty()) {
    trace_sink.emplace(o.out_trace, out);
    trace = &**trace_sink;
    *trace << "iter,objective,kl" << (eval ? ",rmse_test" : "") << ",wall_ms\n";
  }

  TrainState state = initial_state(train_set.X, train_set.Y, config);

  // Wall time is only known after the step, so rows are emitted from the
  // recorded trace instead of inside the callback.
  std::vector<double> rmse_column;
  double last_rmse = 0.0;
  auto record = [&](const IterationInfo& info) {
    if (!eval) return;
    const bool due = info.iteration % o.eval_every == 0 || info.iteration + 1 == config.iterations;
    if (due) {
      const Predictive pred = ssgp_predict(info.params, info.samples.front(), train_set.X, train_set.Y, eval->X);
      last_rmse = metrics(pred, eval->Y).rmse;
    }
    rmse_column.push_back(last_rmse);
  };
  TrainResult result = train(std::move(state), train_set.X, train_set.Y, config, record);

  if (trace) {
    for (std::size_t i = 0; i < result.state.trace.size(); ++i) {
      const TraceRow& row = result.state.trace[i];
      *trace << row.iteration << ',' << fmt(row.objective) << ',' << fmt(row.kl);
      if (eval) *trace << ',' << fmt(rmse_column[i]);
      *trace << ',' << fmt(row.wall_ms) << '\n';
    }
  }

  if (!o.out_checkpoint.empty()) {
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.iterations_done = result.state.iteration;
    ckpt.params = result.params;
    ckpt.log_params = result.state.log_params;
    ckpt.prior = result.state.prior;
    ckpt.allocation = result.state.allocation;
    ckpt.fixed_noise = result.state.fixed_noise;
    ckpt.standardization = train_set.stats;
    ckpt.data = ref;
    save_checkpoint(o.out_checkpoint, ckpt);
  }

  if (!result.state.trace.empty()) {
    const TraceRow& last = result.state.trace.back();
    err << "iterations " << result.state.iteration << " objective " << fmt(last.objective) << " kl "
        << fmt(last.kl);
    if (eval) err << " rmse_test " << fmt(rmse_column.back());
    err << '\n';
  }
  if (result.failure) {
    err << "error: " << *result.failure << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictOptions {
  std::string checkpoint;
  std::string data;
  std::optional<std::string> target_col;
  bool no_header = false;
  std::string engine = "ssgp";
  int samples = 1;
  std::uint64_t seed = 0;
  bool raw_units = false;
  std::string out = "-";
};

bool same_stats(const Standardization& a, const Standardization& b) {
  return a.kept_columns == b.kept_columns && a.x_mean == b.x_mean && a.x_std == b.x_std && a.y_mean == b.y_mean &&
         a.y_std == b.y_std;
}

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  if (o.engine != "ssgp" && o.engine != "exact") throw UsageError("--engine must be ssgp or exact");
  if (o.samples < 1) throw UsageError("--samples must be at least 1");
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  TrainingData data = load_training_data(ckpt.data, err);
  if (!same_stats(data.train.stats, ckpt.standardization)) {
    throw DataError("training data at '" + ckpt.data.path + "' no longer matches the checkpoint");
  }
  if (data.train.X.cols() != ckpt.params.dims()) throw DataError("checkpoint dimension does not match the data");

  Dataset test;
  if (!o.data.empty()) {
    test = load_with_stats(o.data, o.target_col.value_or(ckpt.data.target_column), !o.no_header,
                           ckpt.standardization);
  } else if (data.held_out) {
    test = std::move(*data.held_out);
  } else {
    throw UsageError("--data is required when the checkpoint was trained on the whole file");
  }

  const SMParams& params = ckpt.params;
  Predictive pred;
  if (o.engine == "exact") {
    pred = exact_predict(params, data.train.X, data.train.Y, test.X);
  } else if (ckpt.fixed_noise) {
    // SS models are trained on one fixed set of points; predict with them.
    const SpectralSample sample = sample_from_noise(params, ckpt.allocation, *ckpt.fixed_noise);
    pred = ssgp_predict(params, sample, data.train.X, data.train.Y, test.X);
  } else {
    Rng rng(o.seed);
    std::vector<SpectralSample> samples;
    for (int s = 0; s < o.samples; ++s) samples.push_back(draw_sample(params, ckpt.allocation, rng));
    pred = ssgp_predict(params, samples, data.train.X, data.train.Y, test.X);
  }

  VectorXd targets = test.Y;
  if (o.raw_units) {
    const double scale = ckpt.standardization.y_std;
    pred.mean = ckpt.standardization.restore_y(pred.mean);
    pred.variance *= scale * scale;
    targets = ckpt.standardization.restore_y(targets);
  }
  pred.attach_targets(targets);
  const Metrics m = metrics(pred, targets);

  if (!o.out.empty()) {
    Sink sink(o.out, out);
    std::ostream& csv = *sink;
    csv << "index,mean,variance,target,nll\n";
    for (Index i = 0; i < pred.size(); ++i) {
      csv << i << ',' << fmt(pred.mean(i)) << ',' << fmt(pred.variance(i)) << ',' << fmt(targets(i)) << ','
          << fmt(-(*pred.log_density)(i)) << '\n';
    }
  }
  err << "rmse mnll (" << (o.raw_units ? "raw" : "standardized") << " units, " << o.engine << ")\n";
  out << fmt(m.rmse) << ' ' << fmt(m.mnll) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::optional<int> q;
  std::string w = "1";
  std::string mu = "0.3";
  std::string sigma = "0.05";
  double noise = 0.1;
  Index n = 100;
  std::uint64_t seed = 0;
  double x_min = 0.0;
  double x_max = 1.0;
  bool random_x = false;
  std::string out = "-";
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const auto w = parse_list<double>(o.w, "--w");
  const auto mu = parse_list<double>(o.mu, "--mu");
  const auto sigma = parse_list<double>(o.sigma, "--sigma");
  if (w.size() != mu.size() || w.size() != sigma.size()) {
    throw UsageError("--w, --mu and --sigma need the same number of components");
  }
  if (o.q && static_cast<std::size_t>(*o.q) != w.size()) {
    throw UsageError("--q disagrees with the number of components given");
  }
  if (!(o.noise > 0.0)) throw UsageError("--noise must be positive");
  if (!(o.x_max > o.x_min)) throw UsageError("--x-max must exceed --x-min");
  const auto q = static_cast<Index>(w.size());
  SMParams params{Eigen::Map<const VectorXd>(w.data(), q), Eigen::Map<const MatrixXd>(mu.data(), q, 1),
                  Eigen::Map<const MatrixXd>(sigma.data(), q, 1), o.noise * o.noise};
  params.validate();
  const SyntheticData synth = synth_sm(params, o.n, o.x_min, o.x_max, o.seed, !o.random_x);
  if (o.out.empty() || o.out == "-") {
    write_csv(out, synth.table);
  } else {
    write_csv(o.out, synth.table);
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TooLarge*>(&e)) return kExitTooLarge;
  if (dynamic_cast<const NumericalFailure*>(&e)) return kExitNumerical;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InvalidParams*>(&e) ||
      dynamic_cast<const BudgetTooSmall*>(&e)) {
    return kExitUsage;
  }
  return kExitData;
}

}  // namespace

void apply_thread_env() {
  const char* value = std::getenv("SVSS_NUM_THREADS");
  if (value == nullptr || *value == '\0') return;
  const int threads = std::atoi(value);
  if (threads < 1) return;
  Eigen::setNbThreads(threads);
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-spectrum GP regression with variational spectral sampling"};
  app.name("svss");
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 2 usage, 3 data error (includes missing files), 4 numerical failure,\n"
      "5 size cap exceeded. SVSS_NUM_THREADS sets the thread count.");

  BenchOptions bench;
  auto* b = app.add_subcommand("approx-bench", "Kernel approximation error of each sampling policy");
  b->add_option("--n", bench.n, "Grid size when --data is absent (inputs i/n)");
  b->add_option("--q", bench.q, "Mixture components");
  b->add_option("--m-list", bench.m_list, "Comma-separated spectral point budgets");
  b->add_option("--policies", bench.policies, "Comma-separated subset of equal,weight,ws");
  b->add_option("--rate-list", bench.rate_list, "Pair fractions for ws (other policies use all inputs)");
  b->add_option("--weight-init", bench.weight_init, "uniform0-20 or uniform0.99-1.01");
  b->add_option("--trials", bench.trials, "Kernels drawn per setting");
  b->add_option("--seed", bench.seed);
  b->add_option("--data", bench.data, "CSV whose standardized inputs replace the grid");
  b->add_option("--target-col", bench.target_col, "Target column of --data (name or index)");
  b->add_flag("--no-header", bench.no_header);
  b->add_option("--out", bench.out, "Results CSV ('-' for stdout)");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Fit kernel parameters and write a checkpoint");
  t->add_option("--data", tr.data, "Training CSV")->required();
  t->add_option("--target-col", tr.target_col, "Name or index; negative counts from the end");
  t->add_flag("--no-header", tr.no_header);
  t->add_option("--train-fraction", tr.train_fraction, "Fraction kept for training; the rest is held out");
  t->add_option("--split-seed", tr.split_seed, "Shuffle seed for --train-fraction (default --seed)");
  t->add_option("--eval-data", tr.eval_data, "CSV for rmse_test (default: the held-out split, if any)");
  t->add_option("--eval-every", tr.eval_every, "Iterations between rmse_test evaluations");
  t->add_option("--mode", tr.mode, "ss, ss-rp or svss");
  t->add_flag("--ws", tr.ws, "Variance-optimal allocation (svss only)");
  t->add_flag("--ng", tr.ng, "Approximate natural gradient (svss only)");
  t->add_option("--q", tr.q, "Mixture components");
  t->add_option("--m", tr.m, "Spectral points");
  t->add_option("--iters", tr.iters);
  t->add_option("--mc-samples", tr.mc_samples);
  t->add_option("--pair-rate", tr.pair_rate, "Fraction of input pairs used for the allocation");
  t->add_option("--max-pairs", tr.max_pairs, "Cap on pairs per allocation (0 disables)");
  t->add_option("--step", tr.step);
  t->add_option("--seed", tr.seed);
  t->add_option("--init", tr.init, "spectrum or uniform");
  t->add_option("--prior-scale", tr.prior_scale, "Prior scales as a multiple of the initial scales");
  t->add_option("--out-checkpoint", tr.out_checkpoint);
  t->add_option("--out-trace", tr.out_trace, "Trace CSV ('-' for stdout)");

  PredictOptions pr;
  auto* p = app.add_subcommand("predict", "Predict from a checkpoint and report rmse and mnll");
  p->add_option("--checkpoint", pr.checkpoint)->required();
  p->add_option("--data", pr.data, "Test CSV (default: the checkpoint's held-out split)");
  p->add_option("--target-col", pr.target_col);
  p->add_flag("--no-header", pr.no_header);
  p->add_option("--engine", pr.engine, "ssgp or exact");
  p->add_option("--samples", pr.samples, "Spectral samples averaged by the ssgp engine");
  p->add_option("--seed", pr.seed);
  p->add_flag("--raw-units", pr.raw_units, "Report predictions and metrics in the original target units");
  p->add_option("--out", pr.out, "Prediction CSV ('-' for stdout, empty to skip)");

  SynthOptions sy;
  auto* s = app.add_subcommand("synth", "Sample a 1-D dataset from a known mixture kernel");
  s->add_option("--q", sy.q, "Checked against the component lists");
  s->add_option("--w", sy.w, "Comma-separated weights");
  s->add_option("--mu", sy.mu, "Comma-separated means");
  s->add_option("--sigma", sy.sigma, "Comma-separated scales");
  s->add_option("--noise", sy.noise, "Observation noise standard deviation");
  s->add_option("--n", sy.n);
  s->add_option("--seed", sy.seed);
  s->add_option("--x-min", sy.x_min);
  s->add_option("--x-max", sy.x_max, "Grid is x-min + (x-max - x-min) i / n");
  s->add_flag("--random-x", sy.random_x, "Uniform random inputs instead of the grid");
  s->add_option("--out", sy.out);

  std::vector<const char*> argv{"svss"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*b) return cmd_approx_bench(bench, out);
    if (*t) return cmd_train(tr, out, err);
    if (*p) return cmd_predict(pr, out, err);
    if (*s) return cmd_synth(sy, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace svss::cli
