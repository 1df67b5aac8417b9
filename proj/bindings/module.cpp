#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cnr/baselines.hpp"
#include "cnr/data.hpp"
#include "cnr/experiments.hpp"
#include "cnr/serialize.hpp"

namespace py = pybind11;

namespace {

cnr::Dataset make_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  cnr::Dataset d;
  d.X = X;
  d.y = y;
  d.tag = "python";
  cnr::validate(d);
  if (d.X.rows() == 0) throw cnr::InvalidInput("empty dataset");
  return d;
}

}  // namespace

PYBIND11_MODULE(cnr, m) {
  m.doc() =
      "Conditional density regression: maximum likelihood over increasing "
      "piecewise-linear transformations of the label to a standard normal.";

  py::register_exception<cnr::Error>(m, "CnrError");

  py::class_<cnr::KnotGrid>(m, "KnotGrid")
      .def(py::init<std::vector<double>>(), py::arg("points"))
      .def_property_readonly("points", &cnr::KnotGrid::points)
      .def_property_readonly("deltas", &cnr::KnotGrid::deltas)
      .def("bin", &cnr::KnotGrid::bin, py::arg("y"));

  m.def("knots_from_quantiles", &cnr::knots_from_quantiles, py::arg("samples"),
        py::arg("fractions"));

  py::class_<cnr::Dictionary>(m, "Dictionary")
      .def_static("piecewise_linear", &cnr::Dictionary::piecewise_linear, py::arg("grid"))
      .def_static("affine", &cnr::Dictionary::affine)
      .def_property_readonly("dim", &cnr::Dictionary::dim)
      .def_property_readonly("is_affine", &cnr::Dictionary::is_affine)
      .def_property_readonly("grid", &cnr::Dictionary::grid)
      .def("eval", &cnr::Dictionary::eval, py::arg("y"))
      .def("deriv", &cnr::Dictionary::deriv, py::arg("y"))
      .def("active_bin", &cnr::Dictionary::active_bin, py::arg("y"));

  py::class_<cnr::Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &cnr::Rng::uniform)
      .def("normal", &cnr::Rng::normal)
      .def("below", &cnr::Rng::below, py::arg("bound"));

  py::class_<cnr::CnrParams>(m, "CnrParams")
      .def(py::init([](const cnr::Dictionary& dict, const Eigen::MatrixXd& A,
                       const Eigen::VectorXd& b) { return cnr::CnrParams(dict, A, b); }),
           py::arg("dict"), py::arg("A"), py::arg("b"))
      .def_property_readonly("A", &cnr::CnrParams::coef)
      .def_property_readonly("b", &cnr::CnrParams::offset)
      .def_property_readonly("dict", &cnr::CnrParams::dict)
      .def_property_readonly("dim", &cnr::CnrParams::dim)
      .def_property_readonly("feature_dim", &cnr::CnrParams::feature_dim)
      .def("flatten", &cnr::CnrParams::flatten);

  m.def("std_normal_pdf", &cnr::std_normal_pdf, py::arg("t"));
  m.def("std_normal_cdf", &cnr::std_normal_cdf, py::arg("t"));

  m.def(
      "transform",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, double y) {
        return cnr::transform(p, x, y);
      },
      py::arg("params"), py::arg("x"), py::arg("y"));
  m.def(
      "transform_deriv",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, double y) {
        return cnr::transform_deriv(p, x, y);
      },
      py::arg("params"), py::arg("x"), py::arg("y"));
  m.def(
      "is_valid",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x) { return cnr::is_valid(p, x); },
      py::arg("params"), py::arg("x"));
  m.def(
      "density",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, double y) {
        return cnr::density(p, x, y);
      },
      py::arg("params"), py::arg("x"), py::arg("y"));
  m.def(
      "log_density",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, double y) {
        return cnr::log_density(p, x, y);
      },
      py::arg("params"), py::arg("x"), py::arg("y"));
  m.def(
      "posterior_mean",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x) {
        return cnr::posterior_mean(p, x);
      },
      py::arg("params"), py::arg("x"));
  m.def(
      "inverse_transform",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, double z) {
        return cnr::inverse_transform(p, x, z);
      },
      py::arg("params"), py::arg("x"), py::arg("z"));
  m.def(
      "sample",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, cnr::Rng& rng) {
        return cnr::sample(p, x, rng);
      },
      py::arg("params"), py::arg("x"), py::arg("rng"));
  m.def(
      "nll_objective",
      [](const cnr::CnrParams& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return cnr::nll_objective(p, make_dataset(X, y));
      },
      py::arg("params"), py::arg("X"), py::arg("y"));
  m.def(
      "nll_reported",
      [](const cnr::CnrParams& p, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return cnr::nll_reported(p, make_dataset(X, y));
      },
      py::arg("params"), py::arg("X"), py::arg("y"));

  py::class_<cnr::AdmmConfig>(m, "AdmmConfig")
      .def(py::init<>())
      .def_readwrite("rho", &cnr::AdmmConfig::rho)
      .def_readwrite("max_iters", &cnr::AdmmConfig::max_iters)
      .def_readwrite("tol_primal", &cnr::AdmmConfig::tol_primal)
      .def_readwrite("tol_dual", &cnr::AdmmConfig::tol_dual)
      .def_readwrite("ridge", &cnr::AdmmConfig::ridge)
      .def_readwrite("z_init", &cnr::AdmmConfig::z_init)
      .def_readwrite("quad_penalty", &cnr::AdmmConfig::quad_penalty);

  py::class_<cnr::FitDiagnostics>(m, "FitDiagnostics")
      .def_readonly("iterations", &cnr::FitDiagnostics::iterations)
      .def_readonly("primal_residual", &cnr::FitDiagnostics::primal_residual)
      .def_readonly("dual_residual", &cnr::FitDiagnostics::dual_residual)
      .def_readonly("objective_trace", &cnr::FitDiagnostics::objective_trace)
      .def_readonly("converged", &cnr::FitDiagnostics::converged);

  m.def(
      "fit_cnr",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const cnr::Dictionary& dict,
         const cnr::AdmmConfig& config) {
        cnr::FitResult r = cnr::fit_cnr(make_dataset(X, y), dict, {}, config);
        return py::make_tuple(std::move(r.params), std::move(r.diagnostics));
      },
      py::arg("X"), py::arg("y"), py::arg("dict"), py::arg("config") = cnr::AdmmConfig());
  m.def(
      "reference_fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const cnr::Dictionary& dict,
         double grad_tol) {
        cnr::ReferenceOptions opt;
        opt.grad_tol = grad_tol;
        return cnr::reference_fit(make_dataset(X, y), dict, {}, opt);
      },
      py::arg("X"), py::arg("y"), py::arg("dict"), py::arg("grad_tol") = 1e-6);

  py::class_<cnr::LrModel>(m, "LrModel")
      .def_readonly("w", &cnr::LrModel::w)
      .def_readonly("sigma2", &cnr::LrModel::sigma2);
  m.def(
      "lr_fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return cnr::lr_fit(make_dataset(X, y));
      },
      py::arg("X"), py::arg("y"));
  m.def("lr_predict", &cnr::lr_predict, py::arg("model"), py::arg("x"));
  m.def(
      "lr_nll",
      [](const cnr::LrModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return cnr::lr_nll(model, make_dataset(X, y));
      },
      py::arg("model"), py::arg("X"), py::arg("y"));
  m.def("cnr_from_lr", &cnr::cnr_from_lr, py::arg("model"));

  py::class_<cnr::GrModel>(m, "GrModel")
      .def_readonly("inner", &cnr::GrModel::inner);
  m.def(
      "gr_fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const cnr::AdmmConfig& config) {
        return cnr::gr_fit(make_dataset(X, y), config);
      },
      py::arg("X"), py::arg("y"), py::arg("config") = cnr::AdmmConfig());
  m.def("gr_valid", &cnr::gr_valid, py::arg("model"), py::arg("x"));
  m.def("gr_predict", &cnr::gr_predict, py::arg("model"), py::arg("x"));
  m.def("gr_sigma2", &cnr::gr_sigma2, py::arg("model"), py::arg("x"));
  m.def(
      "gr_nll",
      [](const cnr::GrModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        return cnr::gr_nll(model, make_dataset(X, y));
      },
      py::arg("model"), py::arg("X"), py::arg("y"));

  m.def(
      "gen_lr",
      [](const Eigen::VectorXd& w, double sigma, int n, cnr::Rng& rng) {
        const cnr::Dataset d = cnr::gen_lr({w, sigma}, n, rng);
        return py::make_tuple(d.X, d.y);
      },
      py::arg("w"), py::arg("sigma"), py::arg("n"), py::arg("rng"));
  m.def(
      "gen_mr",
      [](const Eigen::VectorXd& a, double noise, int n, cnr::Rng& rng) {
        const cnr::Dataset d = cnr::gen_mr({a, noise}, n, rng);
        return py::make_tuple(d.X, d.y);
      },
      py::arg("a"), py::arg("noise"), py::arg("n"), py::arg("rng"));
  m.def(
      "gen_cnr",
      [](const cnr::CnrParams& truth, int n, cnr::Rng& rng) {
        long rejections = 0;
        const cnr::Dataset d = cnr::gen_cnr(truth, n, rng, &rejections);
        return py::make_tuple(d.X, d.y, rejections);
      },
      py::arg("truth"), py::arg("n"), py::arg("rng"));
  m.def("random_cnr_truth", &cnr::random_cnr_truth, py::arg("feature_dim"),
        py::arg("grid"), py::arg("rng"));

  m.def(
      "density_curve",
      [](const cnr::CnrParams& p, const Eigen::VectorXd& x, int grid_points) {
        const cnr::DensityCurve c = cnr::density_curve(p, x, grid_points);
        return py::make_tuple(c.y, c.density);
      },
      py::arg("params"), py::arg("x"), py::arg("grid_points") = 401);

  m.def(
      "to_json", [](const cnr::CnrParams& p) { return cnr::to_json_string(p); },
      py::arg("params"));
  m.def("from_json", &cnr::params_from_json_string, py::arg("text"));
}
