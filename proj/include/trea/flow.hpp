#pragma once

// Orchestration shared by the CLI, the acceptance binary and the bindings:
// operand sweeps, the verification gate, dataset recipes and the
// assign / prune / fine-tune pipeline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trea/dataset.hpp"
#include "trea/fxp.hpp"
#include "trea/sharp.hpp"
#include "trea/train.hpp"

namespace trea {

using ShiftAddFn = std::function<std::int64_t(std::int64_t, std::span<const PoTTerm>)>;

// Shifts every term one place short; used to prove the gate catches a
// broken datapath.
std::int64_t faulty_shift_add_raw(std::int64_t x_raw, std::span<const PoTTerm> terms);

struct SweepRow {
  int iterations = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  std::int64_t pairs = 0;
};

// Exhaustive over every x and every w with |w| < 1 in `format`.
// Throws DomainError unless 1 <= t_min <= t_max.
std::vector<SweepRow> error_sweep(FxPFormat format, int t_min, int t_max);
std::string sweep_to_text(const std::vector<SweepRow>& rows, FxPFormat format);

struct BoundViolation {
  std::int64_t x_raw = 0;
  std::int64_t w_raw = 0;
  double error = 0.0;
  double bound = 0.0;
};

struct BoundCheck {
  std::int64_t pairs = 0;
  std::int64_t violations = 0;
  std::vector<BoundViolation> examples;  // first few violations
};

// |x*w - product| <= |x| 2^-T + T 2^-F over all pairs with |w| < 1.
BoundCheck check_error_bound(FxPFormat format, int iterations, const ShiftAddFn& shift_add = shift_add_raw,
                             std::size_t max_examples = 8);

struct GateResult {
  std::vector<std::string> lines;
  int failures = 0;
};

// Exhaustive FxP4 multiply bound plus the kernel-cycle golden table.
GateResult run_check(bool inject_fault = false);

// Dataset recipe file: the DatasetSpec fields plus a digest of the generated samples.
void save_recipe(const DatasetSpec& spec, const std::filesystem::path& path);
// Regenerates the dataset and verifies the digest (FormatError on mismatch).
Dataset load_recipe(const std::filesystem::path& path);

// Precision assignment judged by quantised accuracy on the training split.
NetworkDescriptor quantize_model(const NetworkDescriptor& model, const Dataset& data, double epsilon,
                                 PrecisionAssignment* assignment = nullptr);

struct PipelineOptions {
  DatasetSpec data;
  TrainOptions train;
  double epsilon = 0.01;
  FineTuneOptions tune;
};

struct PipelineResult {
  NetworkDescriptor reference;
  NetworkDescriptor final_model;
  PrecisionAssignment assignment;
  double reference_accuracy = 0.0;  // float, test split
  double final_accuracy = 0.0;      // bit-accurate, test split
};

// train -> assign precision -> prune -> fine-tune.
PipelineResult run_pipeline(const PipelineOptions& opts);

}  // namespace trea
