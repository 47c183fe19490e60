#include "mcr2/commands.hpp"
#include "mcr2/errors.hpp"
#include "mcr2/io.hpp"
#include "mcr2/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mcr2;
using namespace mcr2::cli;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path root;
  Sandbox() {
    static int counter = 0;
    root = fs::temp_directory_path() / ("mcr2_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }

  fs::path write_config(const std::string& name, const json& body) const {
    const fs::path p = root / name;
    std::ofstream(p) << body.dump(2);
    return p;
  }
  CommonOptions opts(const fs::path& config, const std::string& out) const {
    CommonOptions o;
    o.config = config;
    o.out = root / out;
    return o;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("file formats round-trip") {
  Sandbox box;
  Matrix Z(2, 3);
  Z << 0.1, -2.5e-17, 3.0, 1.0 / 3.0, 7.0, -1e300;
  io::write_features(box.root / "z.csv", Z);
  CHECK(slurp(box.root / "z.csv").rfind("f0,f1\n", 0) == 0);
  CHECK(io::read_features(box.root / "z.csv") == Z);

  io::write_labels(box.root / "y.csv", {2, 0, 1});
  CHECK(slurp(box.root / "y.csv") == "label\n2\n0\n1\n");
  CHECK(io::read_labels(box.root / "y.csv") == LabelVector{2, 0, 1});

  const auto net = learn::init_feature_map({3, 4, 2}, 1);
  io::write_feature_map(box.root / "net", net);
  const auto back = io::read_feature_map(box.root / "net");
  CHECK(back.layer_widths == net.layer_widths);
  CHECK(back.flatten() == net.flatten());

  std::ofstream(box.root / "bad.csv") << "g0,g1\n1,2\n";
  CHECK_THROWS_AS(io::read_features(box.root / "bad.csv"), io::IoError);
  std::ofstream(box.root / "ragged.csv") << "f0,f1\n1,2\n3\n";
  CHECK_THROWS_AS(io::read_features(box.root / "ragged.csv"), io::IoError);
  CHECK_THROWS_AS(io::read_labels(box.root / "missing.csv"), io::IoError);
}

TEST_CASE("simulate") {
  Sandbox box;
  std::ostringstream log;
  const auto empty = box.write_config("empty.json", {{"schema_version", 1}, {"specs", json::array()}});
  CHECK(run_simulate(box.opts(empty, "e"), log) == kExitOk);
  CHECK(slurp(box.root / "e" / "simulate.csv") == "spec_id,seed,d,d_j,orthogonal,R,Rc,DeltaR\n");
  CHECK(load(box.root / "e" / "manifest.json")["status"] == "ok");

  const json specs = json::array({{{"id", "g"}, {"kind", "gaussian"}, {"d", 16}, {"k", 2}, {"samples_per_class", 5}},
                                  {{"id", "s"}, {"kind", "subspace"}, {"d", 16}, {"d_j", 3}, {"k", 2}, {"samples_per_class", 5}}});
  const auto cfg = box.write_config("sim.json", {{"schema_version", 1}, {"seed", 4}, {"num_seeds", 2}, {"specs", specs}});
  CHECK(run_simulate(box.opts(cfg, "a"), log) == kExitOk);
  CHECK(run_simulate(box.opts(cfg, "b"), log) == kExitOk);
  CHECK(slurp(box.root / "a" / "simulate.csv") == slurp(box.root / "b" / "simulate.csv"));
  CHECK(slurp(box.root / "a" / "simulate_means.csv") == slurp(box.root / "b" / "simulate_means.csv"));
  const auto manifest = load(box.root / "a" / "manifest.json");
  CHECK(manifest["seeds"] == json::array({4, 5}));
  CHECK(manifest["config"]["num_seeds"] == 2);
  CHECK(manifest["tool_version"] == kToolVersion);

  const json bad = json::array({{{"id", "x"}, {"kind", "subspace"}, {"d", 4}, {"d_j", 3}, {"k", 2}, {"samples_per_class", 2}}});
  const auto bcfg = box.write_config("bad.json", {{"schema_version", 1}, {"specs", bad}});
  CHECK(run_simulate(box.opts(bcfg, "bad"), log) == kExitFailure);
  CHECK(fs::exists(box.root / "bad" / "simulate_errors.csv"));
  CHECK(load(box.root / "bad" / "manifest.json")["status"] == "failed");
}

TEST_CASE("config errors are usage errors") {
  Sandbox box;
  std::ostringstream log;
  const auto typo = box.write_config("typo.json", {{"schema_version", 1}, {"spces", json::array()}});
  CHECK(run_simulate(box.opts(typo, "t"), log) == kExitUsage);
  CHECK(load(box.root / "t" / "manifest.json")["exit_code"] == kExitUsage);

  const auto version = box.write_config("v.json", {{"schema_version", 2}});
  CHECK(run_simulate(box.opts(version, "v"), log) == kExitUsage);
  const auto unversioned = box.write_config("nv.json", json::object());
  CHECK(run_simulate(box.opts(unversioned, "nv"), log) == kExitUsage);
  const auto eps = box.write_config("eps.json", {{"schema_version", 1}, {"rate", {{"eps_sq", -1.0}}}});
  CHECK(run_simulate(box.opts(eps, "eps"), log) == kExitUsage);
  std::ofstream(box.root / "broken.json") << "{ not json";
  CHECK(run_simulate(box.opts(box.root / "broken.json", "broken"), log) == kExitUsage);
  CHECK(run_simulate(box.opts(box.root / "absent.json", "absent"), log) == kExitUsage);
  CHECK(fs::exists(box.root / "absent" / "manifest.json"));
}

TEST_CASE("verify") {
  Sandbox box;
  std::ostringstream log;
  CommonOptions opts;
  opts.out = box.root / "lemmas";
  opts.seed = 2024;
  VerifyOptions v;
  v.suite = "lemmas";
  v.trials = 100;
  CHECK(run_verify(opts, v, log) == kExitOk);
  const auto report = load(box.root / "lemmas" / "verify_report.json");
  CHECK(report["passed"] == true);
  CHECK(report["properties"].size() > 5);

  v.trials = 0;
  opts.out = box.root / "zero";
  CHECK(run_verify(opts, v, log) == kExitUsage);
  v.trials = 5;
  v.suite = "everything";
  opts.out = box.root / "unknown";
  CHECK(run_verify(opts, v, log) == kExitUsage);

  // A broken evaluator that reports Rc - R.
  verify::RateBackend broken;
  broken.rate_reduction = [](MatrixCRef Z, const Membership& pi, const RateParams& p) {
    auto r = rate_reduction(Z, pi, p);
    r.reduction = r.rate_segmented - r.rate_whole;
    return r;
  };
  v.suite = "lemmas";
  v.trials = 20;
  opts.out = box.root / "broken";
  CHECK(run_verify(opts, v, log, broken) == kExitFailure);
  const auto failed = load(box.root / "broken" / "verify_report.json");
  bool witnessed = false;
  for (const auto& p : failed["properties"]) {
    if (p["name"] == "reduction_nonnegative") {
      CHECK(p["passed"] == false);
      CHECK(p["worst"].get<double>() < 0.0);
      witnessed = !p["witness"].get<std::string>().empty();
    }
  }
  CHECK(witnessed);
}

TEST_CASE("optimize") {
  Sandbox box;
  std::ostringstream log;
  Matrix Z0 = synth::gen_gaussian(6, 8, 2, 3).X;
  io::write_features(box.root / "z0.csv", Z0);
  io::write_labels(box.root / "y.csv", synth::gen_gaussian(6, 8, 2, 3).labels);
  const json input = {{"features", "z0.csv"}, {"labels", "y.csv"}};
  const auto zero = box.write_config("zero.json", {{"schema_version", 1}, {"optimizer", {{"max_iters", 0}}}, {"input", input}});
  CHECK(run_optimize(box.opts(zero, "zero"), log) == kExitOk);
  CHECK((io::read_features(box.root / "zero" / "Z_final.csv") - Z0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(fs::exists(box.root / "zero" / "trace.csv"));
  CHECK(fs::exists(box.root / "zero" / "diagnostics.json"));

  const auto missing = box.write_config("missing.json",
                                        {{"schema_version", 1}, {"input", {{"features", "nope.csv"}, {"labels", "y.csv"}}}});
  CHECK(run_optimize(box.opts(missing, "missing"), log) == kExitFailure);
  CHECK(load(box.root / "missing" / "manifest.json")["status"] == "failed");

  const json emergence = {{"schema_version", 1},
                          {"seed", 11},
                          {"rate", {{"eps_sq", 0.5}, {"log_base", "nats"}}},
                          {"optimizer", {{"step_size", 1.0}, {"max_iters", 20000}, {"tol", 1e-13}}},
                          {"generator", {{"kind", "gaussian_features"}, {"d", 16}, {"k", 2}, {"samples_per_class", 4}}}};
  CHECK(run_optimize(box.opts(box.write_config("em.json", emergence), "em"), log) == kExitOk);
  const auto diag = load(box.root / "em" / "diagnostics.json");
  CHECK(diag["max_interclass_cosine"].get<double>() < 1e-2);
  const double target = diag["optimal_rate_reduction"].get<double>();
  CHECK(std::abs(diag["rate_reduction"]["DeltaR"].get<double>() - target) / target < 5e-3);
}

TEST_CASE("train") {
  Sandbox box;
  std::ostringstream log;
  json cfg = {{"schema_version", 1},
              {"seed", 3},
              {"rate", {{"eps_sq", 0.5}, {"log_base", "nats"}}},
              {"optimizer", {{"step_size", 0.5}, {"max_iters", 300}, {"tol", 1e-9}}},
              {"network", {{"hidden", {32, 32}}, {"output_dim", 8}}},
              {"data", {{"kind", "two_circles"}, {"samples_per_class", 100}}},
              {"corruption_ratio", 0.0},
              {"components", 4}};
  CHECK(run_train(box.opts(box.write_config("clean.json", cfg), "clean"), log) == kExitOk);
  const auto clean = load(box.root / "clean" / "eval.json");
  CHECK(clean["train_accuracy"].get<double>() >= 0.95);
  CHECK(fs::exists(box.root / "clean" / "params" / "widths.csv"));

  cfg["corruption_ratio"] = 0.3;
  CHECK(run_train(box.opts(box.write_config("noisy.json", cfg), "noisy"), log) == kExitOk);
  const auto noisy = load(box.root / "noisy" / "eval.json");
  CHECK(noisy["final"]["Rc"].get<double>() > clean["final"]["Rc"].get<double>());

  cfg["corruption_ratio"] = 0.0;
  cfg["optimizer"]["step_size"] = 0.0;
  cfg["optimizer"]["max_iters"] = 4;
  CHECK(run_train(box.opts(box.write_config("flat.json", cfg), "flat"), log) == kExitOk);
  const std::string trace = slurp(box.root / "flat" / "trace.csv");
  std::istringstream lines(trace);
  std::string header, first, row;
  std::getline(lines, header);
  std::getline(lines, first);
  const auto tail = [](const std::string& s) { return s.substr(s.find(',')); };
  while (std::getline(lines, row)) CHECK(tail(row) == tail(first));

  cfg["holdout_fraction"] = 1.5;
  CHECK(run_train(box.opts(box.write_config("bad.json", cfg), "bad"), log) == kExitUsage);
}

TEST_CASE("eval") {
  Sandbox box;
  std::ostringstream log;
  io::write_labels(box.root / "y.csv", {0, 0, 1, 1});
  io::write_labels(box.root / "c.csv", {0, 1, 0, 1});
  io::write_labels(box.root / "short.csv", {0, 1});

  const auto same = box.write_config("same.json", {{"schema_version", 1}, {"truth", "y.csv"}, {"predictions", "y.csv"}});
  CHECK(run_eval(box.opts(same, "same"), log) == kExitOk);
  const auto m = load(box.root / "same" / "metrics.json");
  CHECK(m["nmi"].get<double>() == doctest::Approx(1.0));
  CHECK(m["acc"].get<double>() == 1.0);
  CHECK(m["ari"].get<double>() == doctest::Approx(1.0));

  const auto cross = box.write_config("cross.json", {{"schema_version", 1}, {"truth", "y.csv"}, {"predictions", "c.csv"}});
  CHECK(run_eval(box.opts(cross, "cross"), log) == kExitOk);
  const auto x = load(box.root / "cross" / "metrics.json");
  CHECK(x["nmi"].get<double>() == doctest::Approx(0.0));
  CHECK(x["acc"].get<double>() == 0.5);
  CHECK(x["ari"].get<double>() == doctest::Approx(-0.5));

  const auto missing = box.write_config("missing.json", {{"schema_version", 1}, {"truth", "y.csv"}, {"predictions", "nope.csv"}});
  CHECK(run_eval(box.opts(missing, "missing"), log) == kExitFailure);
  const auto mismatch = box.write_config("mm.json", {{"schema_version", 1}, {"truth", "y.csv"}, {"predictions", "short.csv"}});
  CHECK(run_eval(box.opts(mismatch, "mm"), log) == kExitFailure);

  Matrix X(2, 6);
  X << 0, 0.1, 0.2, 50, 50.1, 50.2, 0, 0.1, 0, 50, 50, 50.1;
  io::write_features(box.root / "x.csv", X);
  io::write_labels(box.root / "t.csv", {1, 1, 1, 0, 0, 0});
  const auto km = box.write_config("km.json", {{"schema_version", 1}, {"seed", 2}, {"truth", "t.csv"}, {"features", "x.csv"}, {"kmeans", {{"k", 2}}}});
  CHECK(run_eval(box.opts(km, "km"), log) == kExitOk);
  CHECK(load(box.root / "km" / "metrics.json")["acc"].get<double>() == 1.0);
  CHECK(fs::exists(box.root / "km" / "predictions.csv"));
}

}  // TEST_SUITE
