#include "trea/flow.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "trea/errors.hpp"

namespace trea {

std::int64_t faulty_shift_add_raw(std::int64_t x_raw, std::span<const PoTTerm> terms) {
  std::int64_t acc = 0;
  for (const auto& t : terms) {
    const std::int64_t shifted = x_raw >> (t.shift - 1);
    acc += t.sign > 0 ? shifted : -shifted;
  }
  return acc;
}

namespace {

template <class Fn>
void for_each_pair(FxPFormat format, Fn&& fn) {
  const std::int64_t one = std::int64_t{1} << format.frac_bits;
  for (std::int64_t w = format.min_raw(); w <= format.max_raw(); ++w) {
    if (w <= -one || w >= one) continue;
    for (std::int64_t x = format.min_raw(); x <= format.max_raw(); ++x) fn(x, w);
  }
}

}  // namespace

std::vector<SweepRow> error_sweep(FxPFormat format, int t_min, int t_max) {
  if (t_min < 1 || t_max < t_min) throw DomainError("iteration range must satisfy 1 <= min <= max");
  const double ulp = format.ulp();
  std::vector<SweepRow> rows;
  for (int t = t_min; t <= t_max; ++t) {
    SweepRow row;
    row.iterations = t;
    double sum = 0.0;
    for_each_pair(format, [&](std::int64_t x, std::int64_t w) {
      const auto d = msd_decompose(FxPValue(w, format), t);
      const double approx = static_cast<double>(shift_add_raw(x, d.terms)) * ulp;
      const double err = std::abs(static_cast<double>(x) * ulp * static_cast<double>(w) * ulp - approx);
      row.max_error = std::max(row.max_error, err);
      sum += err;
      ++row.pairs;
    });
    row.mean_error = row.pairs ? sum / static_cast<double>(row.pairs) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_text(const std::vector<SweepRow>& rows, FxPFormat format) {
  std::ostringstream os;
  os << "# format N=" << format.total_bits << " F=" << format.frac_bits << "\n";
  os << "T  max_error   mean_error  pairs\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-2d %-11.8f %-11.8f %lld\n", r.iterations, r.max_error, r.mean_error,
                  static_cast<long long>(r.pairs));
    os << buf;
  }
  return os.str();
}

BoundCheck check_error_bound(FxPFormat format, int iterations, const ShiftAddFn& shift_add,
                             std::size_t max_examples) {
  BoundCheck out;
  const double ulp = format.ulp();
  for_each_pair(format, [&](std::int64_t x, std::int64_t w) {
    const auto d = msd_decompose(FxPValue(w, format), iterations);
    const double approx = static_cast<double>(shift_add(x, d.terms)) * ulp;
    const double exact = static_cast<double>(x) * ulp * static_cast<double>(w) * ulp;
    const double err = std::abs(exact - approx);
    const double bound = error_bound(FxPValue(x, format), iterations, format.frac_bits);
    ++out.pairs;
    if (err > bound) {
      ++out.violations;
      if (out.examples.size() < max_examples) out.examples.push_back(BoundViolation{x, w, err, bound});
    }
  });
  return out;
}

GateResult run_check(bool inject_fault) {
  GateResult g;
  auto report = [&](bool ok, const std::string& what) {
    g.lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    if (!ok) ++g.failures;
  };

  const ShiftAddFn mul = inject_fault ? ShiftAddFn(faulty_shift_add_raw) : ShiftAddFn(shift_add_raw);
  const BoundCheck b = check_error_bound(kFxP4, 3, mul);
  report(b.violations == 0, "fxp4 T=3 multiply bound: " + std::to_string(b.pairs) + " pairs, " +
                                std::to_string(b.violations) + " violations");
  char buf[160];
  for (const auto& v : b.examples) {
    std::snprintf(buf, sizeof buf, "     counterexample x_raw=%lld w_raw=%lld error=%.6f bound=%.6f",
                  static_cast<long long>(v.x_raw), static_cast<long long>(v.w_raw), v.error, v.bound);
    g.lines.emplace_back(buf);
  }

  struct Golden {
    const char* row;
    bool sharp;
    MacMode mode;
    int k3, k5;
  };
  const Golden table[] = {
      {"fxp8", false, MacMode::kFxP8, 9, 25},
      {"fxp4", false, MacMode::kFxP4Simd, 3, 7},
      {"fxp8+sharp", true, MacMode::kFxP8, 4, 12},
      {"fxp4+sharp", true, MacMode::kFxP4Simd, 1, 3},
  };
  for (const auto& row : table) {
    const std::int64_t ops3 = row.sharp ? retained_count(3, 3) : 9;
    const std::int64_t ops5 = row.sharp ? retained_count(5, 5) : 25;
    const std::int64_t c3 = kernel_cycles(ops3, row.mode);
    const std::int64_t c5 = kernel_cycles(ops5, row.mode);
    report(c3 == row.k3 && c5 == row.k5, std::string("kernel cycles ") + row.row + ": 3x3=" + std::to_string(c3) +
                                             " 5x5=" + std::to_string(c5) + " (expect " + std::to_string(row.k3) +
                                             "/" + std::to_string(row.k5) + ")");
  }
  return g;
}

void save_recipe(const DatasetSpec& spec, const std::filesystem::path& path) {
  const Dataset data = synth_dataset(spec);
  nlohmann::json j;
  j["kind"] = "trea-dataset-recipe";
  j["seed"] = spec.seed;
  j["n_train"] = spec.n_train;
  j["n_test"] = spec.n_test;
  j["classes"] = spec.classes;
  j["image_size"] = spec.image_size;
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(dataset_digest(data)));
  j["digest"] = digest;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("write failed for " + path.string());
}

Dataset load_recipe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json j;
  DatasetSpec spec;
  std::string digest;
  try {
    j = nlohmann::json::parse(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.n_train = j.at("n_train").get<int>();
    spec.n_test = j.at("n_test").get<int>();
    spec.classes = j.at("classes").get<int>();
    spec.image_size = j.at("image_size").get<int>();
    digest = j.at("digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset recipe " + path.string() + ": " + e.what());
  }
  Dataset data = synth_dataset(spec);
  char actual[32];
  std::snprintf(actual, sizeof actual, "%016llx", static_cast<unsigned long long>(dataset_digest(data)));
  if (digest != actual) throw FormatError("dataset recipe digest " + digest + " does not match regenerated " + actual);
  return data;
}

NetworkDescriptor quantize_model(const NetworkDescriptor& model, const Dataset& data, double epsilon,
                                 PrecisionAssignment* assignment) {
  const AccuracyFn eval = [&](const NetworkDescriptor& m) { return accuracy_quant(m, data.train); };
  const PrecisionAssignment a = assign_precision(model, eval, epsilon);
  if (assignment) *assignment = a;
  return apply_assignment(model, a);
}

PipelineResult run_pipeline(const PipelineOptions& opts) {
  const Dataset data = synth_dataset(opts.data);
  PipelineResult r;
  r.reference = train_reference(default_arch(opts.data.classes), data, opts.train);
  r.reference_accuracy = accuracy_float(r.reference, data.test);
  NetworkDescriptor m = quantize_model(r.reference, data, opts.epsilon, &r.assignment);
  m = prune_network(std::move(m));
  r.final_model = fine_tune(std::move(m), data, opts.tune);
  r.final_accuracy = accuracy_quant(r.final_model, data.test, opts.tune.quant);
  return r;
}

}  // namespace trea
