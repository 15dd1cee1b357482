#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "lcdl/classifier.hpp"
#include "lcdl/ingest.hpp"
#include "lcdl/model_io.hpp"
#include "lcdl/random.hpp"
#include "lcdl/trainer.hpp"

namespace lcdl::cli {

namespace {

struct Failure {
  std::string category;
  int exit_code;
  std::string message;
};

[[noreturn]] void fail(std::string category, int code, std::string message) {
  throw Failure{std::move(category), code, std::move(message)};
}

Failure categorize(const Error& e) {
  switch (e.code()) {
    case ErrorCode::IoError:
      return {"E_IO", kUsageError, e.what()};
    case ErrorCode::InvalidParameter:
    case ErrorCode::KTooLarge:
    case ErrorCode::NonPositiveDelta:
    case ErrorCode::TargetTooLarge:
      return {"E_CONFIG", kUsageError, e.what()};
    case ErrorCode::ModelVersion:
      return {"E_MODEL_VERSION", kUsageError, e.what()};
    case ErrorCode::DimensionMismatch:
      return {"E_DIM", kUsageError, e.what()};
    case ErrorCode::BadModelFile:
      return {"E_MODEL", kDataError, e.what()};
    case ErrorCode::ParseError:
    case ErrorCode::DimensionInconsistent:
    case ErrorCode::EmptyClass:
    case ErrorCode::LengthMismatch:
    case ErrorCode::NonFiniteEntry:
    case ErrorCode::ClassOutOfRange:
    case ErrorCode::EmptyInput:
    case ErrorCode::InsufficientClassSamples:
      return {"E_DATA", kDataError, e.what()};
    case ErrorCode::SingularSystem:
    case ErrorCode::SingularGram:
    case ErrorCode::DegenerateAtom:
    case ErrorCode::NoConvergence:
    case ErrorCode::AsymmetricInput:
    case ErrorCode::NegativeSimilarity:
      return {"E_NUMERIC", kNumericalError, e.what()};
  }
  return {"E_INTERNAL", kNumericalError, e.what()};
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ec == std::errc() ? ptr : buf);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}


std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Flat `key = value` configuration, `#` starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("E_IO", kUsageError, "cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail("E_CONFIG", kUsageError,
           path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail("E_CONFIG", kUsageError,
           path + ":" + std::to_string(line_no) + ": empty key or value");
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Appends config-file entries for every option not given on the command line.
std::vector<std::string> merge_config(const CLI::App& app,
                                      std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    }
  }
  if (!config) return args;
  for (auto& [key, value] : read_config(*config)) {
    const std::string flag = "--" + key;
    if (key == "config" || app.get_option_no_throw(flag) == nullptr) {
      fail("E_CONFIG", kUsageError,
           "unknown key '" + key + "' in config file " + *config);
    }
    if (!has_flag(args, flag)) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

// Returns false when help was printed.
bool parse(CLI::App& app, const std::vector<std::string>& args,
           std::ostream& out) {
  std::string config;
  app.add_option("--config", config, "Flat key = value file; flags override it");
  std::vector<std::string> merged = merge_config(app, args);
  std::reverse(merged.begin(), merged.end());
  try {
    app.parse(merged);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return false;
  } catch (const CLI::ParseError& e) {
    fail("E_USAGE", kUsageError, e.what());
  }
  return true;
}

struct ParamOptions {
  HyperParams params;
  double delta = 0.0;
  double ridge_eps = 0.0;

  void bind(CLI::App& app) {
    app.add_option("--atoms-per-class", params.atoms_per_class)
        ->capture_default_str();
    app.add_option("--lambda1", params.lambda1, "Locality weight")
        ->capture_default_str();
    app.add_option("--lambda2", params.lambda2, "SVM weight")->capture_default_str();
    app.add_option("--theta", params.theta, "Squared-hinge penalty")
        ->capture_default_str();
    app.add_option("--eta1", params.eta1, "Projector ridge")->capture_default_str();
    app.add_option("--eta2", params.eta2, "Fusion weight")->capture_default_str();
    app.add_option("--knn-k", params.knn_k, "Neighbours per atom")
        ->capture_default_str();
    app.add_option("--delta", delta,
                   "Heat-kernel bandwidth (default: mean atom distance)");
    app.add_option("--max-iters", params.max_iters)->capture_default_str();
    app.add_option("--ridge-eps", ridge_eps,
                   "Dictionary ridge (default: 1e-10 trace(ZZ^T)/K)");
    app.add_option("--seed", params.seed)->capture_default_str();
  }

  HyperParams resolve(const CLI::App& app) {
    HyperParams p = params;
    if (app.count("--delta")) p.delta = delta;
    if (app.count("--ridge-eps")) p.ridge_eps = ridge_eps;
    return p;
  }
};

void write_trace(const std::string& path, const std::string& input,
                 const HyperParams& p, const std::optional<PcaTransform>& pca,
                 const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) fail("E_IO", kUsageError, "cannot write trace " + path);
  out << "# input = " << input << '\n'
      << "# atoms-per-class = " << p.atoms_per_class << '\n'
      << "# lambda1 = " << format_real(p.lambda1) << '\n'
      << "# lambda2 = " << format_real(p.lambda2) << '\n'
      << "# theta = " << format_real(p.theta) << '\n'
      << "# eta1 = " << format_real(p.eta1) << '\n'
      << "# eta2 = " << format_real(p.eta2) << '\n'
      << "# knn-k = " << p.knn_k << '\n'
      << "# delta = " << (p.delta ? format_real(*p.delta) : "auto") << '\n'
      << "# max-iters = " << p.max_iters << '\n'
      << "# ridge-eps = " << (p.ridge_eps ? format_real(*p.ridge_eps) : "auto")
      << '\n'
      << "# seed = " << p.seed << '\n'
      << "# pca-dim = " << (pca ? std::to_string(pca->output_dim()) : "none")
      << '\n';
  out << "iteration,objective,mean_active_set_size\n";
  for (std::size_t t = 0; t < trace.iterations(); ++t) {
    const double mean_active =
        trace.num_samples
            ? static_cast<double>(trace.active_set_sizes[t]) /
                  static_cast<double>(trace.num_samples)
            : 0.0;
    out << (t + 1) << ',' << format_real(trace.objective_per_iter[t]) << ','
        << format_real(mean_active) << '\n';
  }
  if (!out) fail("E_IO", kUsageError, "write failure on " + path);
}

int cmd_train(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Learn a dictionary and SVM from labeled features", "train"};
  std::string input, model_path, trace_path;
  long pca_dim = 0;
  double pca_variance = 0.0;
  ParamOptions opts;
  app.add_option("--input", input, "Labeled CSV or raw-f64 features")->required();
  app.add_option("--out", model_path, "Model file to write")->required();
  app.add_option("--trace", trace_path, "Per-iteration objective CSV");
  app.add_option("--pca-dim", pca_dim, "Reduce features to this many components");
  app.add_option("--pca-variance", pca_variance,
                 "Reduce features keeping this variance fraction");
  opts.bind(app);
  if (!parse(app, args, out)) return kOk;
  if (app.count("--pca-dim") && app.count("--pca-variance")) {
    fail("E_CONFIG", kUsageError, "--pca-dim and --pca-variance are exclusive");
  }
  const HyperParams params = opts.resolve(app);

  ingest::LoadedMatrix loaded = ingest::load_matrix(input);
  if (!loaded.labels) {
    fail("E_DATA", kDataError, input + " has no labels");
  }
  auto [label_map, labels] = ingest::encode_labels(*loaded.labels);
  LabeledDataset ds{std::move(loaded.features), std::move(labels),
                    label_map.num_classes()};
  validate_dataset(ds);
  validate_params(params, static_cast<Eigen::Index>(params.atoms_per_class) *
                              ds.num_classes);

  std::optional<PcaTransform> pca;
  if (app.count("--pca-dim")) {
    pca = ingest::pca_fit(ds.features, ingest::Dimensions{pca_dim});
  } else if (app.count("--pca-variance")) {
    pca = ingest::pca_fit(ds.features, ingest::VarianceFraction{pca_variance});
  }
  if (pca) ds.features = ingest::pca_apply(*pca, ds.features);

  auto [model, trace] = trainer::train(ds, params);
  model.label_map = std::move(label_map);
  model.pca = std::move(pca);
  model_io::save(model_path, model);
  if (!trace_path.empty()) write_trace(trace_path, input, params, model.pca, trace);

  out << "atoms=" << model.dictionary.size()
      << " classes=" << model.num_classes()
      << " iterations=" << trace.iterations()
      << " objective=" << format_real(trace.objective_per_iter.back()) << '\n';
  return kOk;
}

struct ModelOptions {
  std::string model_path;
  std::string input;
  double eta1 = 0.0;
  double eta2 = 0.0;

  void bind(CLI::App& app) {
    app.add_option("--model", model_path, "Model file")->required();
    app.add_option("--input", input, "CSV or raw-f64 features")->required();
    app.add_option("--eta1", eta1, "Override the projector ridge");
    app.add_option("--eta2", eta2, "Override the fusion weight");
  }

  TrainedModel load(const CLI::App& app) const {
    TrainedModel model = model_io::load(model_path);
    if (app.count("--eta2")) {
      if (!(eta2 >= 0.0) || !std::isfinite(eta2)) {
        fail("E_CONFIG", kUsageError, "--eta2 must be nonnegative");
      }
      model.params.eta2 = eta2;
    }
    if (app.count("--eta1")) {
      model.params.eta1 = eta1;
      model.projector = classifier::build_projector(model.dictionary, eta1);
    }
    return model;
  }
};

void write_confusion(const std::string& path, const Eigen::MatrixXi& confusion,
                     const LabelMap& map) {
  std::ofstream out(path);
  if (!out) fail("E_IO", kUsageError, "cannot write confusion " + path);
  out << "true\\pred";
  for (const auto& name : map.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
    out << map.names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < confusion.cols(); ++j) out << ',' << confusion(i, j);
    out << '\n';
  }
  if (!out) fail("E_IO", kUsageError, "write failure on " + path);
}

int cmd_eval(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Classify a labeled file and report accuracy", "eval"};
  ModelOptions opts;
  std::string confusion_path;
  opts.bind(app);
  app.add_option("--confusion", confusion_path, "Confusion matrix CSV");
  if (!parse(app, args, out)) return kOk;

  const TrainedModel model = opts.load(app);
  ingest::LoadedMatrix loaded = ingest::load_matrix(opts.input);
  if (!loaded.labels) fail("E_DATA", kDataError, opts.input + " has no labels");
  const Labels labels = ingest::encode_with(model.label_map, *loaded.labels);
  const FeatureMatrix x = classifier::prepare_input(loaded.features, model);
  const auto result = classifier::classify_batch(x, &labels, model);
  out << "accuracy=" << format_real(*result.accuracy) << '\n';
  if (!confusion_path.empty()) {
    write_confusion(confusion_path, result.confusion, model.label_map);
  }
  return kOk;
}

int cmd_predict(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Predict labels for a feature file", "predict"};
  ModelOptions opts;
  std::string out_path;
  opts.bind(app);
  app.add_option("--out", out_path, "Write predictions here instead of stdout");
  if (!parse(app, args, out)) return kOk;

  const TrainedModel model = opts.load(app);
  const ingest::LoadedMatrix loaded = ingest::load_matrix(opts.input);
  const FeatureMatrix x = classifier::prepare_input(loaded.features, model);
  const auto result = classifier::classify_batch(x, nullptr, model);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) fail("E_IO", kUsageError, "cannot write " + out_path);
  }
  std::ostream& sink = out_path.empty() ? out : file;
  for (std::size_t i = 0; i < result.decisions.size(); ++i) {
    const Decision& d = result.decisions[i];
    sink << i << ',' << model.label_map.name(d.predicted_class) << ','
         << format_real(d.fused[d.predicted_class - 1]) << '\n';
  }
  return kOk;
}

int cmd_synth(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Generate a seeded Gaussian-cluster benchmark", "synth"};
  int classes = 3;
  long dim = 20;
  int per_class = 60;
  double separation = 5.0;
  double spread = 1.0;
  std::uint64_t seed = 1;
  int train_per_class = 0;
  std::string prefix;
  app.add_option("--classes", classes)->capture_default_str();
  app.add_option("--dim", dim)->capture_default_str();
  app.add_option("--per-class", per_class)->capture_default_str();
  app.add_option("--separation", separation, "Norm of each class mean")
      ->capture_default_str();
  app.add_option("--spread", spread, "Per-coordinate standard deviation")
      ->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--train-per-class", train_per_class,
                 "Training samples per class (default: half)");
  app.add_option("--out-prefix", prefix,
                 "Writes <prefix>_train.csv and <prefix>_test.csv")
      ->required();
  if (!parse(app, args, out)) return kOk;

  if (classes < 1 || dim < 1 || per_class < 2) {
    fail("E_CONFIG", kUsageError, "need classes >= 1, dim >= 1, per-class >= 2");
  }
  if (!(separation >= 0.0) || !(spread >= 0.0) || !std::isfinite(separation) ||
      !std::isfinite(spread)) {
    fail("E_CONFIG", kUsageError, "separation and spread must be nonnegative");
  }
  if (!app.count("--train-per-class")) train_per_class = per_class / 2;
  if (train_per_class < 1 || train_per_class >= per_class) {
    fail("E_CONFIG", kUsageError, "train-per-class must lie in [1, per-class - 1]");
  }

  Rng rng(seed);
  LabeledDataset ds;
  ds.num_classes = classes;
  ds.features.resize(dim, static_cast<Eigen::Index>(classes) * per_class);
  Eigen::Index col = 0;
  for (int c = 1; c <= classes; ++c) {
    Vector mean(dim);
    for (Eigen::Index i = 0; i < dim; ++i) mean[i] = rng.normal();
    mean *= separation / mean.norm();
    for (int s = 0; s < per_class; ++s, ++col) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        ds.features(i, col) = mean[i] + spread * rng.normal();
      }
      ds.labels.push_back(c);
    }
  }
  const auto split = ingest::split_per_class(ds, train_per_class, seed);
  auto names = [](const Labels& labels) {
    std::vector<std::string> out;
    for (int y : labels) out.push_back(std::to_string(y));
    return out;
  };
  const auto train_names = names(split.train.labels);
  const auto test_names = names(split.test.labels);
  ingest::write_csv(prefix + "_train.csv", split.train.features, &train_names);
  ingest::write_csv(prefix + "_test.csv", split.test.features, &test_names);
  out << "train=" << split.train.size() << " test=" << split.test.size() << '\n';
  return kOk;
}

int cmd_report(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Summarize a training trace", "report"};
  std::string trace_path;
  app.add_option("--trace", trace_path, "Trace CSV written by train")->required();
  if (!parse(app, args, out)) return kOk;

  std::ifstream in(trace_path);
  if (!in) fail("E_IO", kUsageError, "cannot open trace " + trace_path);
  std::vector<std::string> settings;
  std::vector<double> objective;
  std::vector<double> active;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      settings.push_back(trim(line.substr(1)));
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string it, obj, act;
    if (!std::getline(row, it, ',') || !std::getline(row, obj, ',') ||
        !std::getline(row, act, ',')) {
      fail("E_DATA", kDataError,
           trace_path + ":" + std::to_string(line_no) + ": malformed row");
    }
    try {
      objective.push_back(std::stod(obj));
      active.push_back(std::stod(act));
    } catch (const std::exception&) {
      fail("E_DATA", kDataError,
           trace_path + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  if (objective.empty()) fail("E_DATA", kDataError, trace_path + " has no rows");

  double max_increase = 0.0;
  for (std::size_t t = 1; t < objective.size(); ++t) {
    max_increase = std::max(max_increase, objective[t] - objective[t - 1]);
  }
  char buf[160];
  for (const auto& s : settings) out << s << '\n';
  auto row = [&](const char* name, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-22s %s\n", name, value.c_str());
    out << buf;
  };
  auto sci = [](double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.6e", v);
    return std::string(b);
  };
  row("iterations", std::to_string(objective.size()));
  row("initial_objective", sci(objective.front()));
  row("final_objective", sci(objective.back()));
  row("min_objective", sci(*std::min_element(objective.begin(), objective.end())));
  row("relative_decrease",
      sci((objective.front() - objective.back()) / std::abs(objective.front())));
  row("max_step_increase", sci(max_increase));
  row("final_mean_active", sci(active.back()));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  static const std::map<std::string, int (*)(const std::vector<std::string>&,
                                             std::ostream&)>
      commands = {{"train", cmd_train},
                  {"eval", cmd_eval},
                  {"predict", cmd_predict},
                  {"synth", cmd_synth},
                  {"report", cmd_report}};
  try {
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
      out << "usage: lcdl <train|eval|predict|synth|report> [options]\n"
             "       lcdl <command> --help\n";
      return args.empty() ? kUsageError : kOk;
    }
    const auto it = commands.find(args[0]);
    if (it == commands.end()) {
      fail("E_USAGE", kUsageError, "unknown command '" + args[0] + "'");
    }
    return it->second({args.begin() + 1, args.end()}, out);
  } catch (const Failure& f) {
    err << f.category << ": " << one_line(f.message) << '\n';
    return f.exit_code;
  } catch (const Error& e) {
    const Failure f = categorize(e);
    err << f.category << ": " << one_line(f.message) << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    err << "E_INTERNAL: " << one_line(e.what()) << '\n';
    return kNumericalError;
  }
}

}  // namespace lcdl::cli
