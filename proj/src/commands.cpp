#include "mcr2/commands.hpp"

#include "mcr2/errors.hpp"
#include "mcr2/io.hpp"
#include "mcr2/learn.hpp"
#include "mcr2/metrics.hpp"
#include "mcr2/rates.hpp"
#include "mcr2/synth.hpp"
#include "mcr2/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

namespace mcr2::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// JSON object wrapper that remembers which keys were read, so leftovers can
// be reported as unknown.
class ConfigObject {
 public:
  ConfigObject(json value, std::string where) : value_(std::move(value)), where_(std::move(where)) {
    if (!value_.is_object()) throw UsageError(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return value_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw UsageError(where_ + ": missing required key '" + key + "'");
    try {
      return value_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw UsageError(where_ + "." + key + ": " + e.what());
    }
  }

  ConfigObject child(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return ConfigObject(json::object(), where_ + "." + key);
    return ConfigObject(value_.at(key), where_ + "." + key);
  }

  std::vector<ConfigObject> array(const std::string& key) {
    seen_.insert(key);
    std::vector<ConfigObject> out;
    if (!has(key)) return out;
    const json& arr = value_.at(key);
    if (!arr.is_array()) throw UsageError(where_ + "." + key + " must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.emplace_back(arr[i], where_ + "." + key + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : value_.items()) {
      if (!seen_.count(key)) throw UsageError(where_ + ": unknown key '" + key + "'");
    }
  }

  const json& raw() const { return value_; }

 private:
  json value_;
  std::string where_;
  std::set<std::string> seen_;
};

struct RunContext {
  fs::path out;
  fs::path config_dir;
  json manifest = json::object();
  std::vector<std::string> outputs;
  std::vector<std::uint64_t> seeds;

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }
  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : config_dir / path;
  }
};

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json load_config(const CommonOptions& opts) {
  if (!opts.config) return json::object();
  std::ifstream in(*opts.config);
  if (!in) throw UsageError("cannot read config file " + opts.config->string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + opts.config->string() + " is not valid JSON: " + e.what());
  }
}

void check_schema(ConfigObject& cfg, bool required) {
  if (!cfg.has("schema_version")) {
    if (required) throw UsageError("config: missing 'schema_version'");
    return;
  }
  const int v = cfg.require<int>("schema_version");
  if (v != kSchemaVersion) {
    throw UsageError("config: unsupported schema_version " + std::to_string(v) + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
  }
}

// Validation failures of config-derived values are usage errors.
template <class F>
void as_usage(F&& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
}

RateParams read_rate(ConfigObject cfg, const CommonOptions& opts) {
  RateParams p;
  p.eps_sq = cfg.get<double>("eps_sq", p.eps_sq);
  const auto base = cfg.get<std::string>("log_base", std::string(to_string(p.log_base)));
  as_usage([&] { p.log_base = parse_log_base(base); });
  cfg.finish();
  if (opts.log_base) p.log_base = *opts.log_base;
  as_usage([&] { p.validate(); });
  return p;
}

learn::OptimizerConfig read_optimizer(ConfigObject cfg, std::uint64_t seed) {
  learn::OptimizerConfig o;
  o.step_size = cfg.get<double>("step_size", o.step_size);
  o.max_iters = cfg.get<int>("max_iters", o.max_iters);
  o.tol = cfg.get<double>("tol", o.tol);
  const auto norm = cfg.get<std::string>("normalization", std::string(learn::to_string(o.normalization)));
  as_usage([&] { o.normalization = learn::parse_normalization(norm); });
  o.use_ctrl = cfg.get<bool>("use_ctrl", o.use_ctrl);
  o.gamma1 = cfg.get<double>("gamma1", o.gamma1);
  o.gamma2 = cfg.get<double>("gamma2", o.gamma2);
  cfg.finish();
  o.seed = seed;
  as_usage([&] { o.validate(); });
  return o;
}

json rate_json(const RateParams& p) {
  return {{"eps_sq", p.eps_sq}, {"log_base", std::string(to_string(p.log_base))}};
}

json trace_summary(const learn::OptTrace& trace) {
  if (trace.empty()) return json::object();
  const auto& last = trace.back();
  return {{"iterations", last.iter},
          {"R", last.rate_whole},
          {"Rc", last.rate_segmented},
          {"DeltaR", last.reduction},
          {"grad_norm", last.grad_norm}};
}

void write_json(const fs::path& path, const json& value) { io::write_text(path, value.dump(2) + "\n"); }

// Shared driver: loads the config, runs the body, maps exceptions to exit
// codes and always writes the manifest once the output directory is known.
int run_guarded(const std::string& command, const CommonOptions& opts, std::ostream& log,
                const std::function<int(ConfigObject&, RunContext&)>& body, bool config_required = true) {
  RunContext ctx;
  ctx.out = opts.out;
  ctx.config_dir = opts.config ? fs::absolute(*opts.config).parent_path() : fs::current_path();
  ctx.manifest["command"] = command;
  ctx.manifest["tool_version"] = kToolVersion;
  ctx.manifest["timestamp"] = timestamp_utc();
  int code = kExitOk;
  std::string error;
  try {
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw io::IoError("cannot create output directory " + ctx.out.string());
    if (config_required && !opts.config) throw UsageError(command + " requires --config");
    json raw = load_config(opts);
    ctx.manifest["config"] = raw;
    ConfigObject cfg(raw, "config");
    check_schema(cfg, config_required);
    code = body(cfg, ctx);
  } catch (const UsageError& e) {
    code = kExitUsage;
    error = e.what();
  } catch (const std::exception& e) {
    code = kExitFailure;
    error = e.what();
  }
  ctx.manifest["seeds"] = ctx.seeds;
  ctx.manifest["outputs"] = ctx.outputs;
  ctx.manifest["exit_code"] = code;
  ctx.manifest["status"] = code == kExitOk ? "ok" : "failed";
  if (!error.empty()) {
    ctx.manifest["error"] = error;
    log << command << ": error: " << error << '\n';
  }
  try {
    write_json(ctx.out / "manifest.json", ctx.manifest);
  } catch (const std::exception& e) {
    log << command << ": cannot write manifest: " << e.what() << '\n';
    if (code == kExitOk) code = kExitFailure;
  }
  return code;
}

std::uint64_t resolve_seed(ConfigObject& cfg, const CommonOptions& opts) {
  const auto from_config = cfg.get<std::uint64_t>("seed", 0);
  return opts.seed.value_or(from_config);
}

// ---- simulate ---------------------------------------------------------------

struct SimSpec {
  std::string id;
  std::string kind;  // gaussian | subspace
  int d = 0;
  int d_j = 0;
  int k = 10;
  int samples_per_class = 100;
  bool orthogonal = true;
};

SimSpec read_sim_spec(ConfigObject c) {
  SimSpec s;
  s.id = c.require<std::string>("id");
  s.kind = c.require<std::string>("kind");
  s.d = c.require<int>("d");
  s.k = c.get<int>("k", s.k);
  s.samples_per_class = c.get<int>("samples_per_class", s.samples_per_class);
  if (s.kind == "subspace") {
    s.d_j = c.require<int>("d_j");
    s.orthogonal = c.get<bool>("orthogonal", s.orthogonal);
  } else if (s.kind == "gaussian") {
    s.d_j = s.d;
    s.orthogonal = false;
  } else {
    throw UsageError("simulate spec '" + s.id + "': kind must be gaussian or subspace");
  }
  c.finish();
  return s;
}

}  // namespace

int run_simulate(const CommonOptions& opts, std::ostream& log) {
  return run_guarded("simulate", opts, log, [&](ConfigObject& cfg, RunContext& ctx) {
    const RateParams params = read_rate(cfg.child("rate"), opts);
    const std::uint64_t base = resolve_seed(cfg, opts);
    const int num_seeds = cfg.get<int>("num_seeds", 1);
    if (num_seeds < 1) throw UsageError("config.num_seeds must be at least 1");
    std::vector<SimSpec> specs;
    for (auto& s : cfg.array("specs")) specs.push_back(read_sim_spec(std::move(s)));
    cfg.finish();
    for (int s = 0; s < num_seeds; ++s) ctx.seeds.push_back(base + static_cast<std::uint64_t>(s));

    std::ostringstream rows;
    std::ostringstream means;
    std::ostringstream errors;
    rows << "spec_id,seed,d,d_j,orthogonal,R,Rc,DeltaR\n";
    means << "spec_id,d,d_j,orthogonal,R,Rc,DeltaR\n";
    errors << "spec_id,seed,error\n";
    bool any_error = false;

    for (const auto& spec : specs) {
      double sum_r = 0.0, sum_rc = 0.0, sum_dr = 0.0;
      int ok = 0;
      for (const std::uint64_t seed : ctx.seeds) {
        try {
          synth::LabeledData data;
          if (spec.kind == "gaussian") {
            data = synth::gen_gaussian(spec.d, spec.k * spec.samples_per_class, spec.k, seed);
          } else {
            synth::SubspaceMixtureSpec ms;
            ms.k = spec.k;
            ms.d = spec.d;
            ms.d_j = spec.d_j;
            ms.samples_per_class = spec.samples_per_class;
            ms.orthogonal = spec.orthogonal;
            ms.seed = seed;
            data = synth::gen_subspace_mixture(ms);
          }
          const auto rep = rate_reduction(data.X, Membership::from_labels(data.labels, spec.k), params);
          rows << spec.id << ',' << seed << ',' << spec.d << ',' << spec.d_j << ',' << int(spec.orthogonal) << ','
               << io::format_double(rep.rate_whole) << ',' << io::format_double(rep.rate_segmented) << ','
               << io::format_double(rep.reduction) << '\n';
          sum_r += rep.rate_whole;
          sum_rc += rep.rate_segmented;
          sum_dr += rep.reduction;
          ++ok;
        } catch (const std::exception& e) {
          any_error = true;
          std::string msg = e.what();
          std::replace(msg.begin(), msg.end(), ',', ';');
          errors << spec.id << ',' << seed << ',' << msg << '\n';
        }
      }
      if (ok > 0) {
        const double n = ok;
        means << spec.id << ',' << spec.d << ',' << spec.d_j << ',' << int(spec.orthogonal) << ','
              << io::format_double(sum_r / n) << ',' << io::format_double(sum_rc / n) << ','
              << io::format_double(sum_dr / n) << '\n';
        log << std::fixed << std::setprecision(2) << spec.id << ": R=" << sum_r / n << " Rc=" << sum_rc / n
            << " DeltaR=" << sum_dr / n << " (" << to_string(params.log_base) << ", " << ok << " seeds)\n";
        log.unsetf(std::ios::floatfield);
      }
    }
    io::write_text(ctx.output("simulate.csv"), rows.str());
    io::write_text(ctx.output("simulate_means.csv"), means.str());
    if (any_error) {
      io::write_text(ctx.output("simulate_errors.csv"), errors.str());
      return kExitFailure;
    }
    return kExitOk;
  });
}

int run_verify(const CommonOptions& opts, const VerifyOptions& vopts, std::ostream& log,
               const verify::RateBackend& backend) {
  return run_guarded(
      "verify", opts, log,
      [&](ConfigObject& cfg, RunContext& ctx) {
        std::string suite_name = cfg.get<std::string>("suite", "all");
        int trials = cfg.get<int>("trials", 100);
        const std::uint64_t seed = resolve_seed(cfg, opts);
        cfg.finish();
        if (vopts.suite) suite_name = *vopts.suite;
        if (vopts.trials) trials = *vopts.trials;
        if (trials < 1) throw UsageError("trials must be at least 1");
        verify::Suite suite;
        try {
          suite = verify::parse_suite(suite_name);
        } catch (const InvalidInput& e) {
          throw UsageError(e.what());
        }
        ctx.seeds.push_back(seed);

        const auto report = verify::run_suite(suite, trials, seed, backend);
        json props = json::array();
        for (const auto& p : report.properties) {
          props.push_back({{"name", p.name},
                           {"trials", p.trials},
                           {"worst", p.worst},
                           {"threshold", p.threshold},
                           {"relation", p.relation},
                           {"passed", p.passed},
                           {"witness", p.witness}});
          log << (p.passed ? "PASS " : "FAIL ") << p.name << " worst=" << p.worst << ' ' << p.relation << ' '
              << p.threshold;
          if (!p.passed) log << " witness: " << p.witness;
          log << '\n';
        }
        write_json(ctx.output("verify_report.json"), {{"suite", std::string(verify::to_string(suite))},
                                                       {"trials", trials},
                                                       {"seed", seed},
                                                       {"passed", report.passed},
                                                       {"properties", props}});
        return report.passed ? kExitOk : kExitFailure;
      },
      false);
}

namespace {

synth::LabeledData load_or_generate(ConfigObject& cfg, RunContext& ctx, std::uint64_t seed, int& k) {
  if (cfg.has("input")) {
    auto in = cfg.child("input");
    const fs::path features = ctx.resolve(in.require<std::string>("features"));
    const fs::path labels = ctx.resolve(in.require<std::string>("labels"));
    in.finish();
    synth::LabeledData data;
    data.X = io::read_features(features);
    data.labels = io::read_labels(labels);
    if (static_cast<Eigen::Index>(data.labels.size()) != data.X.cols()) {
      throw InvalidInput("features and labels have different sample counts");
    }
    k = 0;
    for (int y : data.labels) k = std::max(k, y + 1);
    return data;
  }
  auto gen = cfg.child("generator");
  const std::string kind = gen.get<std::string>("kind", "gaussian_features");
  synth::LabeledData data;
  if (kind == "gaussian_features") {
    // Unnormalized Gaussian features; the optimizer projects them first.
    const int d = gen.require<int>("d");
    k = gen.require<int>("k");
    const int n = gen.require<int>("samples_per_class");
    gen.finish();
    if (d < 1 || k < 1 || n < 1) throw UsageError("generator dimensions must be positive");
    synth::Rng rng(seed);
    data.X = rng.gaussian(d, static_cast<Eigen::Index>(k) * n);
    for (int j = 0; j < k; ++j) data.labels.insert(data.labels.end(), static_cast<std::size_t>(n), j);
  } else if (kind == "subspace") {
    synth::SubspaceMixtureSpec ms;
    ms.k = gen.require<int>("k");
    ms.d = gen.require<int>("d");
    ms.d_j = gen.require<int>("d_j");
    ms.samples_per_class = gen.require<int>("samples_per_class");
    ms.orthogonal = gen.get<bool>("orthogonal", true);
    ms.seed = seed;
    gen.finish();
    k = ms.k;
    data = synth::gen_subspace_mixture(ms);
  } else {
    throw UsageError("generator.kind must be gaussian_features or subspace");
  }
  return data;
}

json diagnostics_json(const theory::OptimalityDiagnostics& diag) {
  json spectra = json::array();
  for (const auto& s : diag.per_class_singular_values) spectra.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  return {{"max_interclass_cosine", diag.max_interclass_cosine},
          {"per_class_singular_values", spectra},
          {"per_class_rank", diag.per_class_rank},
          {"diversity_condition_satisfied", diag.diversity_condition_satisfied}};
}

}  // namespace

int run_optimize(const CommonOptions& opts, std::ostream& log) {
  return run_guarded("optimize", opts, log, [&](ConfigObject& cfg, RunContext& ctx) {
    const RateParams params = read_rate(cfg.child("rate"), opts);
    const std::uint64_t seed = resolve_seed(cfg, opts);
    const auto ocfg = read_optimizer(cfg.child("optimizer"), seed);
    int k = 0;
    auto data = load_or_generate(cfg, ctx, seed, k);
    cfg.finish();
    ctx.seeds.push_back(seed);

    const Membership pi = Membership::from_labels(data.labels, k);
    const auto result = learn::optimize_representation(data.X, pi, params, ocfg);
    io::write_features(ctx.output("Z_final.csv"), result.Z);
    io::write_labels(ctx.output("labels.csv"), data.labels);
    io::write_trace(ctx.output("trace.csv"), result.trace);

    const auto diag = theory::diagnose_optimum(result.Z, pi, params);
    json d = diagnostics_json(diag);
    d["rate_reduction"] = trace_summary(result.trace);
    d["rate"] = rate_json(params);
    if (ocfg.normalization == learn::Normalization::unit_sphere ||
        ocfg.normalization == learn::Normalization::per_class_frobenius) {
      d["optimal_rate_reduction"] = theory::optimal_rate_reduction(pi, result.Z.rows(), params);
    }
    write_json(ctx.output("diagnostics.json"), d);
    log << "optimize: " << result.trace.back().iter << " iterations, DeltaR=" << result.trace.back().reduction
        << ", max inter-class cosine=" << diag.max_interclass_cosine << '\n';
    return kExitOk;
  });
}

int run_train(const CommonOptions& opts, std::ostream& log) {
  return run_guarded("train", opts, log, [&](ConfigObject& cfg, RunContext& ctx) {
    const RateParams params = read_rate(cfg.child("rate"), opts);
    const std::uint64_t seed = resolve_seed(cfg, opts);
    const auto ocfg = read_optimizer(cfg.child("optimizer"), seed);

    auto net = cfg.child("network");
    const auto hidden = net.get<std::vector<int>>("hidden", {32, 32});
    const int output_dim = net.get<int>("output_dim", 8);
    net.finish();

    auto data_cfg = cfg.child("data");
    const std::string kind = data_cfg.get<std::string>("kind", "two_circles");
    synth::LabeledData data;
    int k = 2;
    if (kind == "two_circles") {
      data = synth::gen_two_circles(data_cfg.get<int>("samples_per_class", 100), data_cfg.get<double>("inner_radius", 1.0),
                                    data_cfg.get<double>("outer_radius", 3.0), data_cfg.get<double>("noise", 0.05), seed);
    } else if (kind == "files") {
      data.X = io::read_features(ctx.resolve(data_cfg.require<std::string>("features")));
      data.labels = io::read_labels(ctx.resolve(data_cfg.require<std::string>("labels")));
      if (static_cast<Eigen::Index>(data.labels.size()) != data.X.cols()) {
        throw InvalidInput("features and labels have different sample counts");
      }
      k = 0;
      for (int y : data.labels) k = std::max(k, y + 1);
    } else {
      throw UsageError("data.kind must be two_circles or files");
    }
    data_cfg.finish();

    const double corruption = cfg.get<double>("corruption_ratio", 0.0);
    const double holdout = cfg.get<double>("holdout_fraction", 0.2);
    const int components = cfg.get<int>("components", 30);
    cfg.finish();
    if (!(holdout >= 0.0 && holdout < 1.0)) throw UsageError("holdout_fraction must lie in [0, 1)");
    if (!(corruption >= 0.0 && corruption <= 1.0)) throw UsageError("corruption_ratio must lie in [0, 1]");
    if (components < 1) throw UsageError("components must be at least 1");
    if (output_dim < 1 || std::any_of(hidden.begin(), hidden.end(), [](int w) { return w < 1; })) {
      throw UsageError("network widths must be positive");
    }
    ctx.seeds.push_back(seed);

    // Deterministic split.
    const auto m = data.labels.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    synth::Rng rng(seed ^ 0x5bd1e995ULL);
    for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_hold = static_cast<std::size_t>(std::floor(holdout * static_cast<double>(m)));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
    std::vector<std::size_t> hold_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(hold_idx.begin(), hold_idx.end());
    auto take = [&](const std::vector<std::size_t>& idx, Matrix& X, LabelVector& y) {
      X.resize(data.X.rows(), static_cast<Eigen::Index>(idx.size()));
      y.clear();
      for (std::size_t c = 0; c < idx.size(); ++c) {
        X.col(static_cast<Eigen::Index>(c)) = data.X.col(static_cast<Eigen::Index>(idx[c]));
        y.push_back(data.labels[idx[c]]);
      }
    };
    Matrix X_train, X_hold;
    LabelVector y_train_clean, y_hold;
    take(train_idx, X_train, y_train_clean);
    take(hold_idx, X_hold, y_hold);
    const LabelVector y_train = synth::corrupt_labels(y_train_clean, corruption, k, seed + 1);

    std::vector<int> widths{static_cast<int>(data.X.rows())};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(output_dim);
    const auto init = learn::init_feature_map(widths, seed);
    const Membership pi = Membership::from_labels(y_train, k);
    const auto trained = learn::train_feature_map(init, X_train, pi, params, ocfg);

    io::write_feature_map(ctx.out / "params", trained.params);
    ctx.outputs.push_back("params/");
    io::write_trace(ctx.output("trace.csv"), trained.trace);

    const Matrix Z_train = learn::feature_map_forward(trained.params, X_train);
    const auto models = metrics::fit_class_models(Z_train, y_train, components, k);
    const double train_acc = metrics::accuracy(y_train, metrics::nearest_subspace_predict_all(models, Z_train));
    const double train_acc_clean = metrics::accuracy(y_train_clean, metrics::nearest_subspace_predict_all(models, Z_train));
    json eval = {{"train_accuracy", train_acc},
                 {"train_accuracy_clean_labels", train_acc_clean},
                 {"corruption_ratio", corruption},
                 {"components", components},
                 {"train_samples", train_idx.size()},
                 {"holdout_samples", hold_idx.size()},
                 {"final", trace_summary(trained.trace)},
                 {"rate", rate_json(params)}};
    if (!hold_idx.empty()) {
      const Matrix Z_hold = learn::feature_map_forward(trained.params, X_hold);
      eval["holdout_accuracy"] = metrics::accuracy(y_hold, metrics::nearest_subspace_predict_all(models, Z_hold));
    }
    write_json(ctx.output("eval.json"), eval);
    log << "train: " << trained.trace.back().iter << " iterations, DeltaR=" << trained.trace.back().reduction
        << ", train accuracy=" << train_acc << '\n';
    return kExitOk;
  });
}

int run_eval(const CommonOptions& opts, std::ostream& log) {
  return run_guarded("eval", opts, log, [&](ConfigObject& cfg, RunContext& ctx) {
    const LabelVector truth = io::read_labels(ctx.resolve(cfg.require<std::string>("truth")));
    LabelVector predicted;
    if (cfg.has("predictions")) {
      predicted = io::read_labels(ctx.resolve(cfg.require<std::string>("predictions")));
    } else if (cfg.has("features")) {
      const Matrix X = io::read_features(ctx.resolve(cfg.require<std::string>("features")));
      auto km = cfg.child("kmeans");
      int k = 0;
      for (int y : truth) k = std::max(k, y + 1);
      k = km.get<int>("k", k);
      const int restarts = km.get<int>("restarts", 10);
      const int max_iters = km.get<int>("max_iters", 300);
      km.finish();
      const std::uint64_t seed = resolve_seed(cfg, opts);
      ctx.seeds.push_back(seed);
      predicted = metrics::kmeans(X, k, seed, max_iters, restarts).labels;
      io::write_labels(ctx.output("predictions.csv"), predicted);
    } else {
      throw UsageError("eval config needs 'predictions' or 'features'");
    }
    if (cfg.has("seed") && ctx.seeds.empty()) cfg.require<std::uint64_t>("seed");
    cfg.finish();

    const auto report = metrics::evaluate_clustering(truth, predicted);
    write_json(ctx.output("metrics.json"),
               {{"nmi", report.nmi}, {"acc", report.acc}, {"ari", report.ari}, {"assignment", report.assignment}});
    log << "eval: NMI=" << report.nmi << " ACC=" << report.acc << " ARI=" << report.ari << '\n';
    return kExitOk;
  });
}

}  // namespace mcr2::cli
