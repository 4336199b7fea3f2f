#include "agopfit/agop.hpp"
#include "agopfit/harness.hpp"
#include "agopfit/hermite.hpp"
#include "agopfit/kernel.hpp"
#include "agopfit/krr.hpp"
#include "agopfit/model.hpp"
#include "agopfit/rfm.hpp"
#include "agopfit/verify.hpp"
#include "agopfit/walsh.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace agopfit;

namespace {

kernel::KernelSpec make_kernel(const std::string& name, int d, double bandwidth,
                               const std::optional<Matrix>& metric) {
    auto spec = kernel::KernelSpec::from_name(name, d, bandwidth);
    return metric ? spec.with_metric(*metric) : spec;
}

model::Subspace as_subspace(const Matrix& basis) { return model::Subspace(basis); }

py::dict row_dict(const harness::ResultRow& r) {
    py::dict d;
    d["link"] = r.link;
    d["input"] = r.input;
    d["subspace"] = r.subspace;
    d["kernel"] = r.kernel;
    d["alpha"] = r.alpha;
    d["trial"] = r.trial;
    d["iteration"] = r.iteration;
    d["n"] = r.n;
    d["test_mse"] = r.test_mse;
    d["sin_theta"] = r.sin_theta;
    d["eig1"] = r.eig1;
    d["eig2"] = r.eig2;
    d["eig3"] = r.eig3;
    d["seed"] = r.seed;
    d["runtime_s"] = r.runtime_s;
    d["status"] = r.status;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Subspace recovery from the AGOP of kernel ridge regression";

    py::register_exception<Error>(m, "AgopfitError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def("population_agop", [](const std::map<std::vector<int>, double>& terms, int dim, int degree_cap) {
        walsh::WalshPoly p(dim);
        for (const auto& [members, c] : terms) p.add(walsh::SubsetIndex(members), c);
        return walsh::population_agop_exact(p, degree_cap);
    }, py::arg("terms"), py::arg("dim"), py::arg("degree_cap"),
          "Exact M_{<=cap} of a multilinear polynomial given as {sorted index tuple: coefficient}.");

    m.def("latent_sigma", [](const std::string& link, int p) { return hermite::latent_sigma(hermite::link_by_name(link), p); },
          py::arg("link"), py::arg("p"));
    m.def("gaussian_l2_norm_sq", [](const std::string& link) { return hermite::gaussian_l2_norm_sq(hermite::link_by_name(link)); },
          py::arg("link"));
    m.def("hermite_eval", &hermite::hermite_eval, py::arg("n"), py::arg("t"));

    m.def("haar_subspace", [](int d, int r, std::uint64_t seed) { return model::haar_subspace(d, r, seed).basis(); },
          py::arg("d"), py::arg("r"), py::arg("seed"));
    m.def("sparse_subspace", [](int d, int r, int s, std::uint64_t seed) {
        return model::sparse_subspace(d, r, s, seed).basis();
    }, py::arg("d"), py::arg("r"), py::arg("support_size"), py::arg("seed"));
    m.def("coherence", [](const Matrix& basis) { return model::coherence(as_subspace(basis)); }, py::arg("basis"));
    m.def("sample_dataset", [](const std::string& input, const Matrix& basis, const std::string& link, int n,
                               double noise_var, std::uint64_t seed) {
        const auto data = model::sample_dataset(model::parse_input_dist(input), as_subspace(basis),
                                                hermite::link_by_name(link), n, noise_var, seed);
        return py::make_tuple(data.X, data.y);
    }, py::arg("input"), py::arg("basis"), py::arg("link"), py::arg("n"), py::arg("noise_var"), py::arg("seed"),
          "Returns (X, y).");

    m.def("kernel_matrix", [](const std::string& name, const Matrix& a, const Matrix& b, double bandwidth,
                              const std::optional<Matrix>& metric) {
        return kernel::kernel_matrix(make_kernel(name, static_cast<int>(a.cols()), bandwidth, metric), a, b);
    }, py::arg("kernel"), py::arg("a"), py::arg("b"), py::arg("bandwidth") = 0.0, py::arg("metric") = py::none());

    py::class_<krr::KrrModel>(m, "KrrModel")
        .def_static("fit", [](const Matrix& x, const Vector& y, const std::string& kernel, double ridge, double bandwidth,
                              const std::optional<Matrix>& metric) {
            return krr::KrrModel::fit(x, y, make_kernel(kernel, static_cast<int>(x.cols()), bandwidth, metric), ridge);
        }, py::arg("X"), py::arg("y"), py::arg("kernel") = "gaussian", py::arg("ridge") = 1e-6,
                    py::arg("bandwidth") = 0.0, py::arg("metric") = py::none())
        .def("predict", &krr::KrrModel::predict, py::arg("X"))
        .def("gradient_field", &krr::KrrModel::gradient_field, py::arg("X"))
        .def("training_gradients", &krr::KrrModel::training_gradients)
        .def_property_readonly("alpha", &krr::KrrModel::alpha)
        .def_property_readonly("jitter_used", &krr::KrrModel::jitter_used);

    m.def("empirical_agop", [](const Matrix& grads) {
        const auto res = agop::empirical_agop(grads);
        return py::make_tuple(res.matrix, res.eigenvalues, res.eigenvectors);
    }, py::arg("grads"), "Returns (matrix, eigenvalues descending, eigenvectors as columns).");
    m.def("top_subspace", [](const Matrix& m_sym, int r) { return agop::top_subspace(agop::decompose(m_sym), r).basis(); },
          py::arg("matrix"), py::arg("r"));
    m.def("sin_theta", [](const Matrix& a, const Matrix& b) { return agop::sin_theta_op(as_subspace(a), as_subspace(b)); },
          py::arg("u_hat"), py::arg("u"));
    m.def("davis_kahan_bound", &agop::davis_kahan_bound, py::arg("eps_agop"), py::arg("rho"), py::arg("s"));
    m.def("metric_update", &rfm::metric_update, py::arg("agop"), py::arg("eta"), py::arg("d"));

    m.def("run_rfm", [](const Matrix& x, const Vector& y, const Matrix& x_test, const Vector& y_test,
                        const Matrix& basis, const std::string& kernel, double ridge, double eta, int iterations) {
        model::Dataset train{x, y, model::InputDist::hypercube, 0.0, 0};
        model::Dataset test{x_test, y_test, model::InputDist::hypercube, 0.0, 0};
        rfm::RfmOptions opts;
        opts.ridge = ridge;
        opts.eta = eta;
        opts.iterations = iterations;
        const auto h = rfm::run_rfm(train, kernel::KernelSpec::from_name(kernel, static_cast<int>(x.cols())), opts,
                                    test, as_subspace(basis));
        if (!h.ok()) throw Error(h.failure);
        py::list out;
        for (const auto& rec : h.records) {
            py::dict d;
            d["iteration"] = rec.iteration;
            d["test_mse"] = rec.test_mse;
            d["sin_theta"] = rec.sin_theta;
            d["eigenvalues"] = std::vector<double>(rec.top_eigenvalues.begin(), rec.top_eigenvalues.end());
            d["metric"] = rec.metric;
            out.append(d);
        }
        return out;
    }, py::arg("X"), py::arg("y"), py::arg("X_test"), py::arg("y_test"), py::arg("basis"),
          py::arg("kernel") = "gaussian", py::arg("ridge") = 1e-6, py::arg("eta") = 1.0, py::arg("iterations") = 5);

    m.def("lemma32_gap", [](const std::string& link, const Matrix& basis, int p) {
        const auto r = verify::lemma32_gap(hermite::link_by_name(link), as_subspace(basis), p);
        py::dict d;
        d["gap"] = r.gap;
        d["mu"] = r.mu;
        d["fstar_norm_sq"] = r.fstar_norm_sq;
        d["normalized_gap"] = r.normalized_gap;
        return d;
    }, py::arg("link"), py::arg("basis"), py::arg("p"));

    m.def("verify_suite", [](bool fast, std::uint64_t seed) {
        py::list out;
        for (const auto& r : verify::run_suite(fast, seed)) {
            py::dict d;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["scalars"] = r.scalars;
            d["detail"] = r.detail;
            out.append(d);
        }
        return out;
    }, py::arg("fast") = true, py::arg("seed") = 20240601, py::call_guard<py::gil_scoped_release>());

    m.def("run_experiment", [](const std::string& config_text) {
        const auto cfg = harness::parse_config(config_text);
        std::vector<harness::ResultRow> rows;
        {
            py::gil_scoped_release release;
            rows = harness::run_experiment(cfg);
        }
        py::list out;
        for (const auto& r : rows) out.append(row_dict(r));
        return out;
    }, py::arg("config_text"), "Run a grid from config text (key = value lines or JSON); returns row dicts.");
    m.def("csv_header", [] { return std::string(harness::kCsvHeader); });
}
