#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "trea/dqmac.hpp"
#include "trea/errors.hpp"
#include "trea/flow.hpp"
#include "trea/fxp.hpp"
#include "trea/metrics.hpp"
#include "trea/model_io.hpp"
#include "trea/naf.hpp"
#include "trea/sched.hpp"
#include "trea/sharp.hpp"

namespace py = pybind11;
using namespace trea;

namespace {

FxPFormat format_of(int total_bits, int frac_bits) { return FxPFormat::make(total_bits, frac_bits); }

FxPFormat precision_format(const std::string& name) { return mode_format(parse_mac_mode(name)); }

}  // namespace

PYBIND11_MODULE(_trea, m) {
  m.doc() = "Bit-accurate model of the TREA accelerator datapath";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<AllZeroError>(m, "AllZeroError", base.ptr());
  py::register_exception<AccumulatorOverflow>(m, "AccumulatorOverflow", base.ptr());
  py::register_exception<LengthMismatch>(m, "LengthMismatch", base.ptr());
  py::register_exception<ConvergenceDomainError>(m, "ConvergenceDomainError", base.ptr());
  py::register_exception<InvalidSelect>(m, "InvalidSelect", base.ptr());
  py::register_exception<KernelTooSmall>(m, "KernelTooSmall", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::class_<FxPFormat>(m, "FxPFormat")
      .def(py::init(&format_of), py::arg("total_bits"), py::arg("frac_bits"))
      .def_readonly("total_bits", &FxPFormat::total_bits)
      .def_readonly("frac_bits", &FxPFormat::frac_bits)
      .def_property_readonly("min_raw", &FxPFormat::min_raw)
      .def_property_readonly("max_raw", &FxPFormat::max_raw)
      .def_property_readonly("ulp", &FxPFormat::ulp)
      .def(py::self == py::self)
      .def("__repr__", [](const FxPFormat& f) {
        return "FxPFormat(" + std::to_string(f.total_bits) + ", " + std::to_string(f.frac_bits) + ")";
      });
  m.attr("FXP4") = kFxP4;
  m.attr("FXP8") = kFxP8;

  py::class_<FxPValue>(m, "FxPValue")
      .def(py::init<std::int64_t, FxPFormat>(), py::arg("raw"), py::arg("format"))
      .def_property_readonly("raw", &FxPValue::raw)
      .def_property_readonly("format", &FxPValue::format)
      .def("__float__", [](const FxPValue& v) { return decode(v); })
      .def(py::self == py::self)
      .def("__repr__", [](const FxPValue& v) {
        return "FxPValue(raw=" + std::to_string(v.raw()) + ", value=" + std::to_string(decode(v)) + ")";
      });

  py::class_<PoTTerm>(m, "PoTTerm")
      .def_readonly("sign", &PoTTerm::sign)
      .def_readonly("shift", &PoTTerm::shift)
      .def_property_readonly("value", &PoTTerm::value);
  py::class_<PoTDecomposition>(m, "PoTDecomposition")
      .def_readonly("terms", &PoTDecomposition::terms)
      .def_readonly("residual_raw", &PoTDecomposition::residual_raw)
      .def_property_readonly("residual", &PoTDecomposition::residual)
      .def_property_readonly("approximation", &PoTDecomposition::approximation);

  m.def("encode", &encode, py::arg("value"), py::arg("format"));
  m.def("decode", &decode, py::arg("x"));
  m.def("trunc_shift", &trunc_shift, py::arg("x"), py::arg("m"));
  m.def("msd_decompose", &msd_decompose, py::arg("w"), py::arg("iterations"));
  m.def("potq_multiply", &potq_multiply, py::arg("x"), py::arg("w"), py::arg("iterations"));
  m.def("error_bound", &error_bound, py::arg("x"), py::arg("iterations"), py::arg("frac_bits"));

  m.def("accumulator_width", &accumulator_width, py::arg("operand_bits"), py::arg("operands"));
  m.def("conventional_accumulator_width", &conventional_accumulator_width, py::arg("operand_bits"),
        py::arg("operands"));
  m.def("lanes", [](const std::string& p) { return lanes(parse_mac_mode(p)); }, py::arg("precision"));
  m.def("precision_format", &precision_format, py::arg("precision"));
  m.def("kernel_cycles", [](std::int64_t k, const std::string& p) { return kernel_cycles(k, parse_mac_mode(p)); },
        py::arg("operands"), py::arg("precision"));
  m.def("dot_product",
        [](const std::vector<FxPValue>& xs, const std::vector<FxPValue>& ws, const std::string& p, FxPValue bias) {
          const DotResult r = dot_product(xs, ws, parse_mac_mode(p), bias);
          return py::make_tuple(r.value, r.cycles);
        },
        py::arg("xs"), py::arg("ws"), py::arg("precision"), py::arg("bias"),
        "Returns (accumulator value, cycles).");
  m.def("retained_count", &retained_count, py::arg("kernel_h"), py::arg("kernel_w"));

  m.def("af_tanh", &af_tanh, py::arg("x"));
  m.def("af_sigmoid", &af_sigmoid, py::arg("x"));
  m.def("af_relu", &af_relu, py::arg("x"));
  m.def("piso_latency", &piso_latency, py::arg("n_outputs"));

  m.def("nfpci", [](double luts, double luts_total, double ffs, double ffs_total) {
          PlatformNumbers p;
          p.luts = luts;
          p.luts_total = luts_total;
          p.ffs = ffs;
          p.ffs_total = ffs_total;
          return nfpci(p);
        },
        py::arg("luts"), py::arg("luts_total"), py::arg("ffs"), py::arg("ffs_total"));
  m.def("sfil", &sfil, py::arg("cpfi"), py::arg("clock_hz"));
  m.def("ecpi", &ecpi, py::arg("power_w"), py::arg("sfil_s"));

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("iterations", &SweepRow::iterations)
      .def_readonly("max_error", &SweepRow::max_error)
      .def_readonly("mean_error", &SweepRow::mean_error)
      .def_readonly("pairs", &SweepRow::pairs);
  m.def("error_sweep", &error_sweep, py::arg("format"), py::arg("t_min"), py::arg("t_max"));
  m.def("check_error_bound",
        [](FxPFormat f, int t) {
          const BoundCheck c = check_error_bound(f, t);
          return py::make_tuple(c.pairs, c.violations);
        },
        py::arg("format"), py::arg("iterations"), "Returns (pairs, violations).");
  m.def("run_check",
        [](bool inject_fault) {
          const GateResult g = run_check(inject_fault);
          return py::make_tuple(g.lines, g.failures);
        },
        py::arg("inject_fault") = false, "Returns (lines, failures).");

  py::class_<NetworkDescriptor>(m, "Network")
      .def_readonly("name", &NetworkDescriptor::name)
      .def_property_readonly("layer_count", [](const NetworkDescriptor& n) { return n.layers.size(); })
      .def_property_readonly("input_size", [](const NetworkDescriptor& n) { return n.input_shape.size(); })
      .def_property_readonly("precisions", [](const NetworkDescriptor& n) {
        std::vector<std::string> out;
        for (const auto& l : n.layers) out.emplace_back(to_string(l.precision));
        return out;
      });
  m.def("load_model", &load_model, py::arg("path"));
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("forward_quant",
        [](const NetworkDescriptor& n, const std::vector<double>& input) { return forward_quant(n, input); },
        py::arg("model"), py::arg("input"));
  m.def("simulate",
        [](const NetworkDescriptor& n, const std::vector<double>& input, int mac_units, int naf_instances,
           bool overlap_naf) {
          ArrayConfig cfg;
          cfg.mac_units = mac_units;
          cfg.naf_instances = naf_instances;
          cfg.overlap_naf = overlap_naf;
          const SimResult r = simulate(n, input, cfg);
          return py::make_tuple(r.scores, r.trace.cpfi);
        },
        py::arg("model"), py::arg("input"), py::arg("mac_units") = 100, py::arg("naf_instances") = 1,
        py::arg("overlap_naf") = false, "Returns (scores, cpfi).");
  m.def("cpfi",
        [](const NetworkDescriptor& n, int mac_units, int naf_instances, bool overlap_naf) {
          ArrayConfig cfg;
          cfg.mac_units = mac_units;
          cfg.naf_instances = naf_instances;
          cfg.overlap_naf = overlap_naf;
          return cpfi_analytic(n, cfg);
        },
        py::arg("model"), py::arg("mac_units") = 100, py::arg("naf_instances") = 1, py::arg("overlap_naf") = false);
}
