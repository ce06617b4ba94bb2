// Command-line front end: synthetic data, smoothing, baselines, training,
// forecasting and scoring.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lfm/checkpoint.hpp"
#include "lfm/csv_io.hpp"
#include "lfm/error.hpp"
#include "lfm/filters.hpp"
#include "lfm/metrics.hpp"
#include "lfm/normalization.hpp"
#include "lfm/predictors.hpp"
#include "lfm/synthetic.hpp"
#include "lfm/training.hpp"

namespace {

using namespace lfm;

// Flat `key = value` file; '#' starts a comment. Keys are long flag names
// without the leading dashes.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(detail::concat(path, " line ", line_no, ": expected key=value"));
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::optional<std::string> find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

// Config values become option defaults, so explicit flags still win.
void apply_config(CLI::App& app, const std::map<std::string, std::string>& cfg) {
  for (const auto& [key, value] : cfg) {
    bool used = false;
    for (CLI::App* sub : app.get_subcommands({})) {
      if (CLI::Option* opt = sub->get_option_no_throw("--" + key)) {
        opt->default_str(value);
        opt->default_val(value);
        used = true;
      }
    }
    if (!used) throw InvalidArgument("config key '" + key + "' matches no option");
  }
}

void print_metrics(const std::vector<MetricsRow>& rows, const std::string& csv_path) {
  render_table(std::cout, rows);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw Error("cannot open '" + csv_path + "' for writing");
    render_csv(out, rows);
  }
}

struct SplitChoice {
  std::string split = "test";
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;

  SplitRatios ratios() const { return {train, val, test}; }
};

void add_split_options(CLI::App* sub, SplitChoice& s) {
  sub->add_option("--split", s.split, "Portion to score: all, train, val or test")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  sub->add_option("--train-ratio", s.train, "Chronological train fraction")->capture_default_str();
  sub->add_option("--val-ratio", s.val, "Validation fraction")->capture_default_str();
  sub->add_option("--test-ratio", s.test, "Test fraction (latest steps)")->capture_default_str();
}

// Portion of `series` named by the split choice, with its first time index.
std::pair<TimeSeriesTensor, std::size_t> select_split(const TimeSeriesTensor& series,
                                                      const SplitChoice& s, std::size_t history,
                                                      std::size_t horizon) {
  if (s.split == "all") return {series, 0};
  auto shared = std::make_shared<const TimeSeriesTensor>(series);
  const auto data = make_windows(shared, history, horizon, s.ratios());
  const Split which = s.split == "train" ? Split::train : s.split == "val" ? Split::val : Split::test;
  return {data.split_series(which), data.range(which).start};
}

TimeAxis shifted(TimeAxis axis, std::size_t offset) {
  axis.origin += static_cast<std::int64_t>(offset) * axis.step;
  return axis;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(std::stoull(item));
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable frequency-domain filters for traffic forecasting"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value file supplying option defaults");

  // generate
  SyntheticConfig syn;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a seeded synthetic traffic CSV");
  gen->add_option("--out,-o", gen_out, "Output CSV")->required();
  gen->add_option("--nodes", syn.n_nodes)->capture_default_str();
  gen->add_option("--days", syn.n_days)->capture_default_str();
  gen->add_option("--interval", syn.interval_seconds, "Seconds per step")->capture_default_str();
  gen->add_option("--noise-std", syn.noise_std)->capture_default_str();
  gen->add_option("--spike-probability", syn.spike_probability)->capture_default_str();
  gen->add_option("--spike-min", syn.spike_magnitude_min)->capture_default_str();
  gen->add_option("--spike-max", syn.spike_magnitude_max)->capture_default_str();
  gen->add_option("--base-min", syn.base_level_min)->capture_default_str();
  gen->add_option("--base-max", syn.base_level_max)->capture_default_str();
  gen->add_option("--amplitude-min", syn.daily_amplitude_min)->capture_default_str();
  gen->add_option("--amplitude-max", syn.daily_amplitude_max)->capture_default_str();
  gen->add_option("--seed", syn.seed)->capture_default_str();

  // Shared data options.
  std::string input;
  long index_interval = 300;
  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input,-i", input, "Wide CSV: timestamp,<node>,...")->required();
    sub->add_option("--index-interval", index_interval,
                    "Seconds per step when timestamps are integers")
        ->capture_default_str();
  };

  // filter
  std::size_t window = kDefaultMovingAverageWindow;
  std::string filter_out;
  bool no_blend = false;
  auto* filt = app.add_subcommand("filter", "Smooth every node with a trailing moving average");
  add_input(filt);
  filt->add_option("--out,-o", filter_out, "Output CSV")->required();
  filt->add_option("--window", window)->capture_default_str();
  filt->add_flag("--no-blend", no_blend, "Write the plain moving average instead of the 50/50 blend");

  // Evaluation shape options.
  std::size_t history = kDefaultHistory, horizon = kDefaultHorizon, stride = 1;
  double mape_eps = kDefaultMapeEpsilon;
  std::string metrics_csv;
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--history", history)->capture_default_str();
    sub->add_option("--horizon", horizon)->capture_default_str();
    sub->add_option("--stride", stride, "Step between evaluation windows")->capture_default_str();
    sub->add_option("--mape-epsilon", mape_eps, "Targets with |x| <= epsilon are left out of MAPE")
        ->capture_default_str();
    sub->add_option("--metrics-csv", metrics_csv, "Also write the metrics as CSV");
  };

  // baseline
  bool rolling = false;
  SplitChoice base_split;
  base_split.split = "all";
  auto* base = app.add_subcommand("baseline", "Score copy-last and filtered copy-last");
  add_input(base);
  add_eval(base);
  add_split_options(base, base_split);
  base->add_flag("--rolling", rolling, "Forecast every step one ahead from true history");
  base->add_option("--window", window)->capture_default_str();

  // train
  FilterPredictor::Shape shape;
  TrainConfig tcfg;
  std::string ckpt_path, log_path, seeds_text;
  std::size_t patience = 0;
  SplitChoice train_split;
  auto* tr = app.add_subcommand("train", "Fit a filter predictor and report test metrics");
  add_input(tr);
  tr->add_option("--history", shape.history)->capture_default_str();
  tr->add_option("--horizon", shape.horizon)->capture_default_str();
  tr->add_option("--width", shape.width, "Filter channels")->capture_default_str();
  tr->add_option("--lr", tcfg.learning_rate)->capture_default_str();
  tr->add_option("--epochs", tcfg.epochs)->capture_default_str();
  tr->add_option("--batch-size", tcfg.batch_size)->capture_default_str();
  tr->add_option("--seed", tcfg.seed)->capture_default_str();
  tr->add_option("--seeds", seeds_text, "Comma-separated seeds; reports mean and std of test MAE");
  tr->add_option("--patience", patience, "Early-stopping patience in epochs, 0 disables")
      ->capture_default_str();
  tr->add_option("--checkpoint,-c", ckpt_path, "Checkpoint output")->required();
  tr->add_option("--log", log_path, "Training log output");
  tr->add_option("--mape-epsilon", mape_eps)->capture_default_str();
  tr->add_option("--train-ratio", train_split.train)->capture_default_str();
  tr->add_option("--val-ratio", train_split.val)->capture_default_str();
  tr->add_option("--test-ratio", train_split.test)->capture_default_str();

  // predict
  std::string forecast_out;
  SplitChoice pred_split;
  pred_split.split = "all";
  auto* pred = app.add_subcommand("predict", "Write forecasts for every window of a CSV");
  add_input(pred);
  pred->add_option("--checkpoint,-c", ckpt_path)->required();
  pred->add_option("--out,-o", forecast_out, "Forecast CSV")->required();
  pred->add_option("--stride", stride)->capture_default_str();
  add_split_options(pred, pred_split);

  // evaluate
  std::string forecasts_in;
  SplitChoice eval_split;
  auto* ev = app.add_subcommand("evaluate", "Metrics per horizon step from forecasts or a model");
  ev->add_option("--forecasts,-f", forecasts_in, "Forecast CSV from predict");
  ev->add_option("--checkpoint,-c", ckpt_path);
  ev->add_option("--input,-i", input);
  ev->add_option("--index-interval", index_interval)->capture_default_str();
  ev->add_option("--stride", stride)->capture_default_str();
  ev->add_option("--mape-epsilon", mape_eps)->capture_default_str();
  ev->add_option("--metrics-csv", metrics_csv);
  ev->add_flag("--rolling", rolling);
  add_split_options(ev, eval_split);

  try {
    if (auto path = find_config_path(argc, argv)) apply_config(app, read_config(*path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto series = generate_synthetic(syn);
      save_csv(gen_out, series, TimeAxis{});
      std::cout << "wrote " << series.n_nodes() << " nodes x " << series.n_steps() << " steps to "
                << gen_out << "\n";
    } else if (*filt) {
      const auto csv = load_csv(input, index_interval);
      const auto& s = csv.tensor;
      std::vector<double> values;
      for (std::size_t n = 0; n < s.n_nodes(); ++n) {
        const auto raw = s.stream(n, 0);
        const std::vector<double> x(raw.begin(), raw.end());
        const auto smooth = moving_average(x, window);
        const auto out = no_blend ? smooth : blend_with_original(x, smooth);
        values.insert(values.end(), out.begin(), out.end());
      }
      const TimeSeriesTensor result(s.n_nodes(), s.n_steps(), 1, std::move(values), s.node_ids(),
                                    s.interval_seconds());
      save_csv(filter_out, result, csv.axis);
    } else if (*base) {
      const auto csv = load_csv(input, index_interval);
      const auto [series, offset] = select_split(csv.tensor, base_split, history, horizon);
      EvaluationOptions opts{history, horizon, stride, rolling, mape_eps};
      const auto raw = rolling_evaluate(copy_last_step, series, opts);
      const std::size_t w = window;
      const auto smooth = rolling_evaluate(
          [w](const Matrix& h, std::size_t t) { return filtered_copy_last_step(h, t, w); }, series,
          opts);
      std::cout << "copy-last (" << (rolling ? "rolling" : "one-shot") << ", " << raw.n_windows
                << " windows)\n";
      print_metrics(raw.rows(), metrics_csv);
      std::cout << "\nfiltered copy-last (window " << window << ")\n";
      render_table(std::cout, smooth.rows());
    } else if (*tr) {
      auto series = std::make_shared<const TimeSeriesTensor>(load_csv(input, index_interval).tensor);
      if (patience > 0) tcfg.early_stop_patience = patience;
      const auto seeds = seeds_text.empty() ? std::vector<std::uint64_t>{tcfg.seed}
                                             : parse_seed_list(seeds_text);
      std::vector<double> maes;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        TrainConfig cfg = tcfg;
        cfg.seed = seeds[i];
        const auto data =
            make_windows(series, shape.history, shape.horizon, train_split.ratios(), cfg.seed);
        const NormStats stats = fit_normalization(*series, data.range(Split::train));
        FilterPredictor predictor(shape, stats, cfg.seed);
        const auto log = train(predictor, data, cfg);
        const auto test = data.split_series(Split::test);
        EvaluationOptions opts{shape.history, shape.horizon, 1, false, mape_eps};
        const auto model = rolling_evaluate(predictor.as_forecaster(), test, opts);
        const auto copy = rolling_evaluate(copy_last_step, test, opts);
        std::cout << "seed " << cfg.seed << ": " << log.epochs.size() - 1 << " epochs"
                  << (log.early_stopped ? " (early stop)" : "") << ", val MAE "
                  << log.epochs.back().val_loss << ", test MAE " << model.aggregate.mae
                  << " vs copy-last " << copy.aggregate.mae << "\n";
        maes.push_back(model.aggregate.mae);
        if (i == 0) {
          save_checkpoint(ckpt_path, predictor);
          if (!log_path.empty()) {
            std::ofstream out(log_path);
            if (!out) throw Error("cannot open '" + log_path + "' for writing");
            write_training_log(out, log);
          }
          if (seeds.size() == 1) {
            std::cout << "\n";
            print_metrics(model.rows(), "");
          }
        }
      }
      if (seeds.size() > 1) {
        const double mean = std::accumulate(maes.begin(), maes.end(), 0.0) / maes.size();
        double var = 0.0;
        for (double m : maes) var += (m - mean) * (m - mean);
        const double sd = std::sqrt(var / (maes.size() - 1));
        std::cout << "test MAE over " << maes.size() << " seeds: " << mean << " +/- " << sd
                  << " (sample std); checkpoint is from seed " << seeds.front() << "\n";
      }
    } else if (*pred) {
      const auto csv = load_csv(input, index_interval);
      const auto predictor = load_checkpoint(ckpt_path, ShapeExpectation{{}, {}, 1, {}});
      const auto& sh = predictor.shape();
      const auto [series, offset] = select_split(csv.tensor, pred_split, sh.history, sh.horizon);
      EvaluationOptions opts{sh.history, sh.horizon, stride, false, mape_eps};
      const auto recs = collect_forecasts(predictor.as_forecaster(), series, opts);
      std::ofstream out(forecast_out);
      if (!out) throw Error("cannot open '" + forecast_out + "' for writing");
      write_forecast_csv(out, recs, series.node_ids(), shifted(csv.axis, offset));
      std::cout << "wrote " << recs.size() << " forecasts to " << forecast_out << "\n";
    } else if (*ev) {
      if (!forecasts_in.empty()) {
        std::ifstream in(forecasts_in);
        if (!in) throw Error("cannot open '" + forecasts_in + "' for reading");
        print_metrics(metrics_from_forecasts(read_forecast_csv(in), mape_eps), metrics_csv);
      } else if (!ckpt_path.empty() && !input.empty()) {
        const auto csv = load_csv(input, index_interval);
        const auto predictor = load_checkpoint(ckpt_path, ShapeExpectation{{}, {}, 1, {}});
        const auto& sh = predictor.shape();
        const auto [series, offset] = select_split(csv.tensor, eval_split, sh.history, sh.horizon);
        EvaluationOptions opts{sh.history, sh.horizon, stride, rolling, mape_eps};
        print_metrics(rolling_evaluate(predictor.as_forecaster(), series, opts).rows(),
                      metrics_csv);
      } else {
        throw InvalidArgument("evaluate needs --forecasts, or --checkpoint together with --input");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
