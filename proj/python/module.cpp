#include "abp/abp_estimator.hpp"
#include "abp/errors.hpp"
#include "abp/performance_analysis.hpp"
#include "abp/quantizer.hpp"
#include "abp/serialization.hpp"
#include "abp/sim_harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

namespace py = pybind11;
using namespace abp;

namespace {

ExperimentConfig config_for(const std::string &kind, const std::string &descriptor) {
    const ExperimentKind k = parse_experiment_kind(kind);
    return descriptor.empty() ? default_config(k) : config_from_json(descriptor, k);
}

py::list report_rows(const MetricReport &r) {
    py::list out;
    for (const auto &row : r.rows) {
        py::dict point;
        for (const auto &[k, v] : row.point)
            point[py::str(k)] = v;
        py::dict d;
        d["point"] = point;
        d["metric"] = row.metric;
        d["value"] = row.value;
        d["trials"] = row.trials;
        d["seed"] = row.seed;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Auxiliary beam pair angle estimation";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<DegenerateMeasurement>(m, "DegenerateMeasurement", PyExc_RuntimeError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

    m.def("angle_to_spatial_freq", [](double theta, double spacing) {
        return angle_to_spatial_freq({theta}, make_ula(2, spacing)).value;
    }, py::arg("theta"), py::arg("spacing") = 0.5);
    m.def("spatial_freq_to_angle", [](double mu, double spacing) {
        return spatial_freq_to_angle({mu}, make_ula(2, spacing)).value;
    }, py::arg("mu"), py::arg("spacing") = 0.5);
    m.def("steering_vector", [](double mu, std::size_t n) { return Eigen::VectorXcd(steering_vector({mu}, make_ula(n))); },
          py::arg("mu"), py::arg("num_elements"));
    m.def("beam_gain", [](double a, double b, std::size_t n) { return beam_gain({a}, {b}, make_ula(n)); },
          py::arg("freq_a"), py::arg("freq_b"), py::arg("num_elements"));
    m.def("wrap_phase", &wrap_phase);
    m.def("default_offset", &default_offset);
    m.def("exact_offset", &exact_offset);

    m.def("beam_freqs", [](double lo, double hi, double offset, std::size_t n) {
        std::vector<double> out;
        for (const auto &f : build_pair_grid({lo, hi}, offset, make_ula(n)).beam_freqs)
            out.push_back(f.value);
        return out;
    }, py::arg("lo"), py::arg("hi"), py::arg("offset"), py::arg("num_elements"));

    m.def("ratio_metric", [](double mu, double boresight, double offset) {
        return ratio_metric_closed_form({mu}, {{boresight}, offset, 0, 1}).value;
    }, py::arg("mu"), py::arg("boresight"), py::arg("offset"));
    m.def("invert_ratio", [](double z, double boresight, double offset) {
        return invert_ratio({z}, {{boresight}, offset, 0, 1}).value;
    }, py::arg("ratio"), py::arg("boresight"), py::arg("offset"));
    m.def("slope_k", [](double offset) { return slope_k({{0.0}, offset, 0, 1}); }, py::arg("offset"));

    m.def("estimate_single_path",
          [](double aod, double aoa, std::size_t n_tx, std::size_t n_rx, double snr_db, std::uint64_t seed,
             const std::string &offset_rule) {
              const auto tx = make_ula(n_tx), rx = make_ula(n_rx);
              const bool exact = parse_offset_rule(offset_rule) == OffsetRule::exact;
              const auto gt = build_pair_grid({-pi, pi}, exact ? exact_offset(n_tx) : default_offset(n_tx), tx);
              const auto gr = build_pair_grid({-pi, pi}, exact ? exact_offset(n_rx) : default_offset(n_rx), rx);
              const std::vector<PathParams> p{{1.0, {aod}, {aoa}}};
              const auto est = estimate_single_path(build_channel(p, tx, rx), gt, gr, NoiseModel::from_db(snr_db), seed);
              py::dict d;
              d["aod"] = est.aod.angle.value;
              d["aoa"] = est.aoa.angle.value;
              d["mu"] = est.aod.spatial_freq.value;
              d["psi"] = est.aoa.spatial_freq.value;
              d["tx_pair"] = est.aod.pair_id;
              d["rx_pair"] = est.aoa.pair_id;
              d["trace"] = trace_to_json(est);
              return d;
          },
          py::arg("aod"), py::arg("aoa"), py::arg("n_tx") = 16, py::arg("n_rx") = 16,
          py::arg("snr_db") = std::numeric_limits<double>::infinity(), py::arg("seed") = 1,
          py::arg("offset_rule") = "standard");

    m.def("train_ratio_codebook", [](const std::vector<double> &samples, unsigned bits) {
        return train_ratio_codebook(samples, bits).codewords;
    }, py::arg("samples"), py::arg("bits"));
    m.def("uniform_codebook", [](double lo, double hi, unsigned bits) { return uniform_codebook({lo, hi}, bits).codewords; },
          py::arg("lo"), py::arg("hi"), py::arg("bits"));

    m.def("experiments", [] {
        std::vector<std::string> out;
        for (auto k : {ExperimentKind::single_path_mse, ExperimentKind::variance, ExperimentKind::quantization,
                       ExperimentKind::multipath_mse, ExperimentKind::maee, ExperimentKind::control_channel,
                       ExperimentKind::rician})
            out.push_back(to_string(k));
        return out;
    });
    m.def("default_config", [](const std::string &kind) { return config_to_json(default_config(parse_experiment_kind(kind))); },
          py::arg("kind"));
    m.def("run_experiment",
          [](const std::string &kind, const std::string &descriptor) {
              const ExperimentConfig cfg = config_for(kind, descriptor);
              MetricReport r;
              {
                  py::gil_scoped_release release;
                  r = run_experiment(cfg);
              }
              return report_rows(r);
          },
          py::arg("kind"), py::arg("config") = "");
    m.def("run_experiment_csv",
          [](const std::string &kind, const std::string &descriptor) {
              const ExperimentConfig cfg = config_for(kind, descriptor);
              py::gil_scoped_release release;
              return run_experiment(cfg).to_csv();
          },
          py::arg("kind"), py::arg("config") = "");
}
