#include "mcr2/learn.hpp"
#include "mcr2/metrics.hpp"
#include "mcr2/rates.hpp"
#include "mcr2/synth.hpp"
#include "mcr2/theory.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace mcr2;

namespace {

RateParams params(double eps_sq, const std::string& log_base) {
  RateParams p{eps_sq, parse_log_base(log_base)};
  p.validate();
  return p;
}

// Labels (length m) or an m x k weight matrix.
Membership membership(const py::object& pi, int k) {
  if (py::isinstance<py::array>(pi) && py::cast<py::array>(pi).ndim() == 2) return Membership(py::cast<Matrix>(pi));
  const auto labels = py::cast<LabelVector>(pi);
  if (k <= 0) k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  return Membership::from_labels(labels, k);
}

py::dict trace_dict(const learn::OptTrace& trace) {
  std::vector<int> iter;
  std::vector<double> R, Rc, dR, g;
  for (const auto& t : trace) {
    iter.push_back(t.iter);
    R.push_back(t.rate_whole);
    Rc.push_back(t.rate_segmented);
    dR.push_back(t.reduction);
    g.push_back(t.grad_norm);
  }
  py::dict d;
  d["iter"] = iter;
  d["R"] = R;
  d["Rc"] = Rc;
  d["DeltaR"] = dR;
  d["grad_norm"] = g;
  return d;
}

learn::OptimizerConfig optimizer(double step_size, int max_iters, double tol, const std::string& normalization,
                                 bool use_ctrl, double gamma1, double gamma2) {
  learn::OptimizerConfig cfg;
  cfg.step_size = step_size;
  cfg.max_iters = max_iters;
  cfg.tol = tol;
  cfg.normalization = learn::parse_normalization(normalization);
  cfg.use_ctrl = use_ctrl;
  cfg.gamma1 = gamma1;
  cfg.gamma2 = gamma2;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rate reduction core";

  m.def("coding_rate", [](const Matrix& Z, double eps_sq, const std::string& log_base) {
    return coding_rate(Z, params(eps_sq, log_base));
  }, py::arg("Z"), py::arg("eps_sq") = 0.5, py::arg("log_base") = "bits");

  m.def("segmented_rate", [](const Matrix& Z, const py::object& pi, int k, double eps_sq, const std::string& log_base) {
    return segmented_rate(Z, membership(pi, k), params(eps_sq, log_base)).total;
  }, py::arg("Z"), py::arg("pi"), py::arg("k") = 0, py::arg("eps_sq") = 0.5, py::arg("log_base") = "bits");

  m.def("rate_reduction", [](const Matrix& Z, const py::object& pi, int k, double eps_sq, const std::string& log_base) {
    const auto r = rate_reduction(Z, membership(pi, k), params(eps_sq, log_base));
    py::dict d;
    d["R"] = r.rate_whole;
    d["Rc"] = r.rate_segmented;
    d["DeltaR"] = r.reduction;
    d["per_class"] = r.per_class_rates;
    return d;
  }, py::arg("Z"), py::arg("pi"), py::arg("k") = 0, py::arg("eps_sq") = 0.5, py::arg("log_base") = "bits");

  m.def("scaled_rate", [](const Matrix& Z, double gamma1, double gamma2, double eps_sq, const std::string& log_base) {
    return scaled_rate(Z, params(eps_sq, log_base), gamma1, gamma2);
  }, py::arg("Z"), py::arg("gamma1") = 1.0, py::arg("gamma2") = 1.0, py::arg("eps_sq") = 0.5, py::arg("log_base") = "bits");

  m.def("grad_rate_reduction", [](const Matrix& Z, const py::object& pi, int k, double eps_sq, const std::string& log_base) {
    return grad_rate_reduction(Z, membership(pi, k), params(eps_sq, log_base));
  }, py::arg("Z"), py::arg("pi"), py::arg("k") = 0, py::arg("eps_sq") = 0.5, py::arg("log_base") = "bits");

  m.def("gen_subspace_mixture", [](int k, int d, int d_j, int samples_per_class, bool orthogonal, std::uint64_t seed) {
    synth::SubspaceMixtureSpec spec;
    spec.k = k;
    spec.d = d;
    spec.d_j = d_j;
    spec.samples_per_class = samples_per_class;
    spec.orthogonal = orthogonal;
    spec.seed = seed;
    auto data = synth::gen_subspace_mixture(spec);
    return py::make_tuple(data.X, data.labels);
  }, py::arg("k"), py::arg("d"), py::arg("d_j"), py::arg("samples_per_class"), py::arg("orthogonal") = true, py::arg("seed") = 0);

  m.def("gen_gaussian", [](int d, int m_, int k, std::uint64_t seed) {
    auto data = synth::gen_gaussian(d, m_, k, seed);
    return py::make_tuple(data.X, data.labels);
  }, py::arg("d"), py::arg("m"), py::arg("k"), py::arg("seed") = 0);

  m.def("gen_two_circles", [](int samples_per_class, double inner, double outer, double noise, std::uint64_t seed) {
    auto data = synth::gen_two_circles(samples_per_class, inner, outer, noise, seed);
    return py::make_tuple(data.X, data.labels);
  }, py::arg("samples_per_class"), py::arg("inner_radius") = 1.0, py::arg("outer_radius") = 3.0,
     py::arg("noise_sigma") = 0.05, py::arg("seed") = 0);

  m.def("corrupt_labels", &synth::corrupt_labels, py::arg("labels"), py::arg("ratio"), py::arg("k"), py::arg("seed") = 0);

  m.def("optimize", [](const Matrix& Z0, const py::object& pi, int k, double eps_sq, const std::string& log_base,
                       double step_size, int max_iters, double tol, const std::string& normalization, bool use_ctrl,
                       double gamma1, double gamma2) {
    const auto res = learn::optimize_representation(Z0, membership(pi, k), params(eps_sq, log_base),
                                                    optimizer(step_size, max_iters, tol, normalization, use_ctrl, gamma1, gamma2));
    return py::make_tuple(res.Z, trace_dict(res.trace));
  }, py::arg("Z0"), py::arg("pi"), py::arg("k") = 0, py::arg("eps_sq") = 0.5, py::arg("log_base") = "bits",
     py::arg("step_size") = 0.5, py::arg("max_iters") = 5000, py::arg("tol") = 1e-8, py::arg("normalization") = "unit_sphere",
     py::arg("use_ctrl") = false, py::arg("gamma1") = 1.0, py::arg("gamma2") = 1.0);

  m.def("optimal_singular_values", [](int rank, double mass, int d, int m_, double eps_sq) {
    theory::ScalarProgram prog{rank, mass, d, m_, eps_sq};
    const auto sol = theory::optimal_singular_values(prog);
    py::dict out;
    out["sigmas"] = sol.sigmas;
    out["objective"] = sol.objective;
    out["support"] = sol.support;
    out["family"] = sol.family == theory::ProfileFamily::equal_split ? "equal_split" : "one_low";
    return out;
  }, py::arg("rank"), py::arg("mass"), py::arg("d"), py::arg("m"), py::arg("eps_sq"));

  m.def("nearest_subspace_predict", [](const Matrix& Z_train, const LabelVector& labels, const Matrix& Z, int components, int k) {
    if (k <= 0) k = *std::max_element(labels.begin(), labels.end()) + 1;
    return metrics::nearest_subspace_predict_all(metrics::fit_class_models(Z_train, labels, components, k), Z);
  }, py::arg("Z_train"), py::arg("labels"), py::arg("Z"), py::arg("components"), py::arg("k") = 0);

  m.def("kmeans", [](const Matrix& X, int k, std::uint64_t seed, int max_iters, int restarts) {
    return metrics::kmeans(X, k, seed, max_iters, restarts).labels;
  }, py::arg("X"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iters") = 300, py::arg("restarts") = 10);

  m.def("nmi", &metrics::nmi, py::arg("y"), py::arg("c"));
  m.def("ari", &metrics::ari, py::arg("y"), py::arg("c"));
  m.def("acc", [](const LabelVector& y, const LabelVector& c) { return metrics::evaluate_clustering(y, c).acc; },
        py::arg("y"), py::arg("c"));
}
