#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "trea/errors.hpp"
#include "trea/flow.hpp"
#include "trea/metrics.hpp"
#include "trea/model_io.hpp"
#include "trea/sched.hpp"

namespace trea::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_output_path(const std::string& path) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  if (!fs::is_directory(parent)) throw UsageError("output directory does not exist: " + parent.string());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw FormatError("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

struct Platform {
  std::string device_profile;
  std::string device;
  double luts = 0.0;
  double ffs = 0.0;
  double power_w = 0.0;
  double clock_hz = 100e6;

  void add_options(CLI::App* app, bool with_clock) {
    app->add_option("--device-profile", device_profile, "Device profile JSON (default: built-in table)")
        ->check(CLI::ExistingFile);
    app->add_option("--device", device, "Device name for LUT/FF totals");
    app->add_option("--luts", luts, "LUT-6 cells used")->check(CLI::NonNegativeNumber);
    app->add_option("--ffs", ffs, "Flip-flops used")->check(CLI::NonNegativeNumber);
    app->add_option("--power-w", power_w, "Average power from implementation tools, watts")
        ->check(CLI::NonNegativeNumber);
    if (with_clock) app->add_option("--clock-hz", clock_hz, "Array clock")->check(CLI::PositiveNumber);
  }

  PlatformNumbers numbers(double clock) const {
    PlatformNumbers p;
    p.luts = luts;
    p.ffs = ffs;
    p.power_w = power_w;
    p.clock_hz = clock;
    if (!device.empty()) {
      const auto profiles = device_profile.empty() ? builtin_device_profiles() : load_device_profiles(device_profile);
      const DeviceProfile& d = find_device(profiles, device);
      p.luts_total = d.luts_total;
      p.ffs_total = d.ffs_total;
    } else if (luts > 0.0 || ffs > 0.0) {
      throw UsageError("--luts/--ffs need --device for the totals");
    }
    return p;
  }
};

QuantOptions quant_options(std::optional<int> iterations) {
  QuantOptions q;
  if (iterations) {
    if (*iterations < 1) throw UsageError("--iterations must be >= 1");
    q.fxp4_iterations = *iterations;
    q.fxp8_iterations = *iterations;
  }
  return q;
}

std::string precision_summary(const NetworkDescriptor& m) {
  std::string s;
  for (const auto& l : m.layers) {
    if (!s.empty()) s += '/';
    s += l.precision == MacMode::kFxP4Simd ? "4" : "8";
    if (l.mask) s += 's';
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bit-accurate TREA accelerator model", "trea"};
  app.require_subcommand(1);

  // gen-data
  DatasetSpec ds;
  std::string out_path;
  auto* gen = app.add_subcommand("gen-data", "Write a seeded synthetic dataset recipe");
  gen->add_option("--out", out_path, "Recipe JSON path")->required();
  gen->add_option("--seed", ds.seed, "Dataset seed")->required();
  gen->add_option("--n-train", ds.n_train)->check(CLI::PositiveNumber);
  gen->add_option("--n-test", ds.n_test)->check(CLI::PositiveNumber);
  gen->add_option("--classes", ds.classes)->check(CLI::Range(2, 16));
  gen->add_option("--image-size", ds.image_size)->check(CLI::Range(8, 64));

  // train
  std::string data_path;
  std::string model_path;
  TrainOptions topts;
  auto* train = app.add_subcommand("train", "Train the float reference network");
  train->add_option("--data", data_path, "Dataset recipe")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Model file")->required();
  train->add_option("--seed", topts.seed, "Initialisation and shuffle seed")->required();
  train->add_option("--epochs", topts.epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", topts.lr)->check(CLI::PositiveNumber);

  // quantize
  double epsilon = 0.01;
  std::string precision = "auto";
  auto* quant = app.add_subcommand("quantize", "Assign per-layer FxP4/FxP8 precision");
  quant->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  quant->add_option("--data", data_path, "Dataset recipe (needed for --precision auto)")->check(CLI::ExistingFile);
  quant->add_option("--out", out_path)->required();
  quant->add_option("--epsilon", epsilon, "Tolerated accuracy drop per layer")->check(CLI::Range(0.0, 1.0));
  quant->add_option("--precision", precision, "auto, fxp4 or fxp8")
      ->check(CLI::IsMember({"auto", "fxp4", "fxp4_simd", "fxp8"}));

  // prune
  auto* prune = app.add_subcommand("prune", "Apply SHARP structured pruning");
  prune->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  prune->add_option("--out", out_path)->required();

  // finetune
  FineTuneOptions fopts;
  auto* tune = app.add_subcommand("finetune", "Quantisation-aware fine-tuning with fixed masks");
  tune->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  tune->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  tune->add_option("--out", out_path)->required();
  tune->add_option("--seed", fopts.seed)->required();
  tune->add_option("--epochs", fopts.epochs)->check(CLI::NonNegativeNumber);
  tune->add_option("--lr", fopts.lr)->check(CLI::PositiveNumber);

  // evaluate
  std::optional<int> iterations;
  auto* eval = app.add_subcommand("evaluate", "Float and bit-accurate test accuracy");
  eval->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--iterations", iterations, "Override T for every layer");

  // simulate
  ArrayConfig acfg;
  std::string trace_out;
  std::string report_out;
  std::string config_id;
  int sample = 0;
  Platform platform;
  auto* sim = app.add_subcommand("simulate", "Cycle-accurate run of one frame");
  sim->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--data", data_path, "Dataset recipe; frame taken from the test split")->check(CLI::ExistingFile);
  sim->add_option("--sample", sample, "Test-split index")->check(CLI::NonNegativeNumber);
  sim->add_option("--iterations", iterations, "Override T for every layer");
  sim->add_option("--mac-units", acfg.mac_units)->check(CLI::PositiveNumber);
  sim->add_option("--naf-instances", acfg.naf_instances)->check(CLI::PositiveNumber);
  sim->add_flag("--overlap-naf", acfg.overlap_naf, "Drain tiles through the NAF while the next tile computes");
  sim->add_option("--tile-load-cycles", acfg.tile_load_cycles)->check(CLI::NonNegativeNumber);
  sim->add_option("--trace-out", trace_out, "Trace JSON path");
  sim->add_option("--report-out", report_out, "Metric report path (.csv for comma-separated)");
  sim->add_option("--config-id", config_id, "Label for the report row");
  platform.add_options(sim, true);

  // sweep
  int t_min = 1;
  std::optional<int> t_max;
  std::string sweep_precision = "fxp8";
  auto* sweep = app.add_subcommand("sweep", "Exhaustive multiply error versus T");
  sweep->add_option("--precision", sweep_precision)->check(CLI::IsMember({"fxp4", "fxp4_simd", "fxp8"}));
  sweep->add_option("--iterations", t_max, "Largest T (default F)");
  sweep->add_option("--min-iterations", t_min, "Smallest T");
  sweep->add_option("--out", out_path, "Also write the table here");

  // check
  bool inject_fault = false;
  auto* check = app.add_subcommand("check", "Self-contained verification gate");
  check->add_flag("--inject-fault", inject_fault, "Corrupt the shift datapath (gate self-test)");

  // report
  std::vector<std::string> traces;
  std::vector<std::string> labels;
  std::string format = "text";
  auto* report = app.add_subcommand("report", "Metric comparison table from trace files");
  report->add_option("--trace", traces, "Trace JSON from simulate (repeatable)")->check(CLI::ExistingFile);
  report->add_option("--label", labels, "Config id per trace (repeatable)");
  report->add_option("--format", format)->check(CLI::IsMember({"text", "csv"}));
  report->add_option("--report-out", report_out);
  platform.add_options(report, false);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (!out_path.empty()) check_output_path(out_path);
    if (!trace_out.empty()) check_output_path(trace_out);
    if (!report_out.empty()) check_output_path(report_out);

    if (*gen) {
      save_recipe(ds, out_path);
      out << "wrote dataset recipe " << out_path << " (seed " << ds.seed << ")\n";
      return kOk;
    }
    if (*train) {
      const Dataset data = load_recipe(data_path);
      const NetworkDescriptor m = train_reference(default_arch(data.spec.classes), data, topts);
      save_model(m, out_path);
      out << "float test accuracy " << accuracy_float(m, data.test) << "\n";
      return kOk;
    }
    if (*quant) {
      NetworkDescriptor m = load_model(model_path);
      if (precision == "auto") {
        if (data_path.empty()) throw UsageError("--precision auto needs --data");
        const Dataset data = load_recipe(data_path);
        PrecisionAssignment a;
        m = quantize_model(m, data, epsilon, &a);
        for (std::size_t i = 0; i < a.modes.size(); ++i) {
          out << "layer " << i << " " << to_string(a.modes[i]) << " running accuracy " << a.accuracy_trace[i] << "\n";
        }
      } else {
        PrecisionAssignment a;
        a.modes.assign(m.layers.size(), parse_mac_mode(precision));
        m = apply_assignment(std::move(m), a);
      }
      save_model(m, out_path);
      return kOk;
    }
    if (*prune) {
      const NetworkDescriptor m = prune_network(load_model(model_path));
      for (std::size_t i = 0; i < m.layers.size(); ++i) {
        out << "layer " << i << " retained " << m.layers[i].mask->retained_per_window << "/"
            << m.layers[i].window_size() << " per window\n";
      }
      save_model(m, out_path);
      return kOk;
    }
    if (*tune) {
      const Dataset data = load_recipe(data_path);
      const NetworkDescriptor m = fine_tune(load_model(model_path), data, fopts);
      save_model(m, out_path);
      out << "quantised test accuracy " << accuracy_quant(m, data.test) << "\n";
      return kOk;
    }
    if (*eval) {
      const Dataset data = load_recipe(data_path);
      const NetworkDescriptor m = load_model(model_path);
      out << "float " << accuracy_float(m, data.test) << "\n";
      out << "quant " << accuracy_quant(m, data.test, quant_options(iterations)) << "\n";
      return kOk;
    }
    if (*sim) {
      const NetworkDescriptor m = load_model(model_path);
      const PlatformNumbers pn = platform.numbers(platform.clock_hz);
      acfg.clock_hz = platform.clock_hz;
      std::vector<double> frame(m.input_shape.size(), 0.0);
      if (!data_path.empty()) {
        const Dataset data = load_recipe(data_path);
        if (static_cast<std::size_t>(sample) >= data.test.size()) throw UsageError("--sample beyond the test split");
        frame = data.test[static_cast<std::size_t>(sample)].input;
      }
      const QuantOptions q = quant_options(iterations);
      const SimResult r = simulate(m, frame, acfg, q);
      const std::string problem = r.trace.check();
      const std::int64_t analytic = cpfi_analytic(m, acfg);
      const std::vector<double> reference = forward_quant(m, frame, q);
      if (config_id.empty()) config_id = precision_summary(m) + "-m" + std::to_string(acfg.mac_units);
      const MetricReport rep = make_report(m.name, config_id, r.trace.cpfi, pn);
      if (!trace_out.empty()) {
        auto j = nlohmann::json::parse(trace_to_json(r.trace, acfg));
        j["workload"] = m.name;
        j["config"] = config_id;
        write_text(trace_out, j.dump(2) + "\n");
      }
      if (!report_out.empty()) {
        const bool csv = fs::path(report_out).extension() == ".csv";
        write_text(report_out, emit_report({rep}, csv ? ReportFormat::kCsv : ReportFormat::kText));
      }
      out << "cpfi " << r.trace.cpfi << "\n";
      out << "mac_cycles " << r.trace.total_mac_cycles() << "\n";
      out << "sfil_ms " << rep.sfil_s * 1e3 << "\n";
      out << "predicted " << argmax(r.scores) << "\n";
      int rc = kOk;
      if (!problem.empty()) {
        err << "trace check failed: " << problem << "\n";
        rc = kVerifyFailed;
      }
      if (analytic != r.trace.cpfi) {
        err << "analytic cpfi " << analytic << " differs from simulated " << r.trace.cpfi << "\n";
        rc = kVerifyFailed;
      }
      if (reference != r.scores) {
        err << "simulated scores differ from the functional model\n";
        rc = kVerifyFailed;
      }
      return rc;
    }
    if (*sweep) {
      const MacMode mode = parse_mac_mode(sweep_precision);
      const FxPFormat fmt = mode_format(mode);
      const int hi = t_max.value_or(fmt.frac_bits);
      if (t_min < 1 || hi < 1) throw UsageError("iterations must be >= 1");
      if (hi < t_min) throw UsageError("--iterations below --min-iterations");
      const std::string table = sweep_to_text(error_sweep(fmt, t_min, hi), fmt);
      out << table;
      if (!out_path.empty()) write_text(out_path, table);
      return kOk;
    }
    if (*check) {
      const GateResult g = run_check(inject_fault);
      for (const auto& line : g.lines) out << line << "\n";
      out << (g.failures ? "check FAILED" : "check passed") << "\n";
      return g.failures ? kVerifyFailed : kOk;
    }
    if (*report) {
      if (!labels.empty() && labels.size() != traces.size()) throw UsageError("--label count differs from --trace count");
      std::vector<MetricReport> rows;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(read_text(traces[i]));
        } catch (const nlohmann::json::parse_error& e) {
          throw FormatError(traces[i] + ": " + e.what());
        }
        if (!j.contains("cpfi") || !j.contains("clock_hz")) throw FormatError(traces[i] + ": missing cpfi or clock_hz");
        const std::string workload = j.value("workload", std::string("unknown"));
        const std::string label = labels.empty() ? j.value("config", fs::path(traces[i]).stem().string()) : labels[i];
        rows.push_back(make_report(workload, label, j["cpfi"].get<std::int64_t>(),
                                   platform.numbers(j["clock_hz"].get<double>())));
      }
      const std::string doc = emit_report(rows, format == "csv" ? ReportFormat::kCsv : ReportFormat::kText);
      out << doc;
      if (!report_out.empty()) write_text(report_out, doc);
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kVerifyFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
  return kUsage;
}

}  // namespace trea::cli
