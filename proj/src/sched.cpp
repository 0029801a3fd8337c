#include "trea/sched.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "trea/errors.hpp"
#include "trea/naf.hpp"

namespace trea {

void ArrayConfig::validate() const {
  if (mac_units < 1) throw DomainError("array needs at least one MAC unit");
  if (naf_instances < 1) throw DomainError("array needs at least one NAF instance");
  if (!(clock_hz > 0.0)) throw DomainError("clock frequency must be positive");
  if (tile_load_cycles < 0) throw DomainError("tile load cost must be nonnegative");
}

std::int64_t TileSchedule::mac_cycles() const {
  std::int64_t sum = 0;
  for (const auto& t : tiles) sum += t.mac_cycles;
  return sum;
}

TileSchedule plan_layer(const LayerDescriptor& layer, const Shape& in, const ArrayConfig& cfg) {
  cfg.validate();
  TileSchedule plan;
  plan.outputs = layer.output_shape(in).size();
  plan.cycles_per_output = output_dot_cycles(layer);
  const auto units = static_cast<std::size_t>(cfg.mac_units);
  for (std::size_t first = 0; first < plan.outputs; first += units) {
    plan.tiles.push_back(Tile{first, std::min(units, plan.outputs - first), cfg.tile_load_cycles + plan.cycles_per_output});
  }
  return plan;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kComputeDone: return "Compute_Done";
    case EventKind::kLayerDone: return "Layer_Done";
    case EventKind::kDnnDone: return "DNN_Done";
  }
  return "?";
}

std::int64_t CycleTrace::total_mac_cycles() const {
  std::int64_t sum = 0;
  for (const auto& l : layers) sum += l.mac_cycles;
  return sum;
}

std::string CycleTrace::check() const {
  int dnn = 0;
  std::int64_t max_stamp = 0;
  std::int64_t dnn_stamp = -1;
  std::int64_t last_layer_done = -1;
  int last_layer = -1;
  for (const auto& e : events) {
    max_stamp = std::max(max_stamp, e.cycle);
    if (e.kind == EventKind::kDnnDone) {
      ++dnn;
      dnn_stamp = e.cycle;
    } else if (e.kind == EventKind::kLayerDone) {
      if (e.layer <= last_layer) return "Layer_Done events out of layer order";
      if (e.cycle < last_layer_done) return "Layer_Done stamps decrease";
      last_layer = e.layer;
      last_layer_done = e.cycle;
    }
  }
  if (dnn != 1) return "expected exactly one DNN_Done, found " + std::to_string(dnn);
  if (dnn_stamp != max_stamp) return "DNN_Done is not the latest event";
  if (cpfi != dnn_stamp) return "CPFI differs from the DNN_Done stamp";
  return {};
}

namespace {

// NAF stream state: entries accepted one per cycle per instance group, each
// output leaves kPipelineStages + 1 cycles after its entry cycle.
struct NafStream {
  std::int64_t last_entry = -1;
  bool busy = false;

  // Feeds `outputs` results that become ready at `ready`; returns the cycle
  // the last one leaves the pipeline.
  std::int64_t feed(std::int64_t ready, std::int64_t outputs, int instances) {
    const std::int64_t slots = (outputs + instances - 1) / instances;
    const std::int64_t first = busy ? std::max(ready, last_entry + 1) : ready;
    last_entry = first + slots - 1;
    busy = true;
    return last_entry + naf::kPipelineStages + 1;
  }
};

}  // namespace

SimResult simulate(const NetworkDescriptor& model, std::span<const double> input, const ArrayConfig& cfg,
                   const QuantOptions& opts) {
  cfg.validate();
  model.validate();
  if (input.size() != model.input_shape.size()) throw ShapeMismatch("input does not match the network input shape");
  SimResult r;
  std::vector<FxPValue> x = quantize_input(input, opts);
  Shape shape = model.input_shape;
  std::int64_t now = 0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const LayerDescriptor& layer = model.layers[li];
    const QuantLayer ql(layer, shape, opts);
    const TileSchedule plan = plan_layer(layer, shape, cfg);
    LayerTiming timing;
    timing.start = now;
    std::vector<FxPValue> wide(ql.output_count(), FxPValue(0, wide_format(opts)));
    NafStream naf;
    std::int64_t naf_done = now;
    std::int64_t mac_clock = now;
    for (std::size_t t = 0; t < plan.tiles.size(); ++t) {
      const Tile& tile = plan.tiles[t];
      // Units of the tile work in parallel; the order here is irrelevant to the result.
      for (std::size_t u = 0; u < tile.count; ++u) {
        wide[tile.first_output + u] = ql.activated(x, tile.first_output + u);
      }
      mac_clock += tile.mac_cycles;
      timing.mac_cycles += tile.mac_cycles;
      r.trace.events.push_back(TraceEvent{mac_clock, EventKind::kComputeDone, static_cast<int>(li), static_cast<int>(t)});
      if (cfg.overlap_naf) naf_done = naf.feed(mac_clock, static_cast<std::int64_t>(tile.count), cfg.naf_instances);
    }
    if (!cfg.overlap_naf) {
      naf_done = naf.feed(mac_clock, static_cast<std::int64_t>(plan.outputs), cfg.naf_instances);
    }
    now = std::max(naf_done, mac_clock);
    timing.done = now;
    r.trace.layers.push_back(timing);
    r.trace.events.push_back(TraceEvent{now, EventKind::kLayerDone, static_cast<int>(li), -1});

    std::vector<FxPValue> next;
    next.reserve(wide.size());
    for (const auto& w : wide) next.push_back(narrow_to_boundary(w, opts));
    if (li + 1 == model.layers.size()) {
      r.scores.reserve(wide.size());
      for (const auto& w : wide) r.scores.push_back(decode(w));
    }
    x = std::move(next);
    shape = ql.output_shape();
  }
  r.trace.cpfi = now;
  r.trace.events.push_back(TraceEvent{now, EventKind::kDnnDone, static_cast<int>(model.layers.size()) - 1, -1});
  return r;
}

std::int64_t cpfi_analytic(const NetworkDescriptor& model, const ArrayConfig& cfg) {
  cfg.validate();
  const auto shapes = model.shapes();
  std::int64_t total = 0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const TileSchedule plan = plan_layer(model.layers[li], shapes[li], cfg);
    const std::int64_t mac = plan.mac_cycles();
    if (!cfg.overlap_naf) {
      const auto n = static_cast<std::int64_t>(plan.outputs);
      total += mac + piso_latency((n + cfg.naf_instances - 1) / cfg.naf_instances);
      continue;
    }
    // Overlapped: the NAF finishes max over tiles of (tile ready + its queue).
    std::int64_t ready = 0;
    std::int64_t last_entry = -1;
    for (const auto& tile : plan.tiles) {
      ready += tile.mac_cycles;
      const std::int64_t slots = (static_cast<std::int64_t>(tile.count) + cfg.naf_instances - 1) / cfg.naf_instances;
      last_entry = std::max(ready, last_entry + 1) + slots - 1;
    }
    total += std::max(last_entry + naf::kPipelineStages + 1, mac);
  }
  return total;
}

std::string trace_to_text(const CycleTrace& trace) {
  std::ostringstream os;
  for (const auto& e : trace.events) {
    os << e.cycle << ' ' << to_string(e.kind) << ' ' << e.layer << ' ' << e.tile << '\n';
  }
  return os.str();
}

std::string trace_to_json(const CycleTrace& trace, const ArrayConfig& cfg) {
  nlohmann::json j;
  j["cpfi"] = trace.cpfi;
  j["clock_hz"] = cfg.clock_hz;
  j["mac_units"] = cfg.mac_units;
  j["naf_instances"] = cfg.naf_instances;
  j["total_mac_cycles"] = trace.total_mac_cycles();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : trace.layers) {
    layers.push_back({{"start", l.start}, {"mac_cycles", l.mac_cycles}, {"done", l.done}});
  }
  j["layers"] = std::move(layers);
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : trace.events) {
    events.push_back({{"cycle", e.cycle}, {"kind", std::string(to_string(e.kind))}, {"layer", e.layer}, {"tile", e.tile}});
  }
  j["events"] = std::move(events);
  return j.dump(2) + "\n";
}

}  // namespace trea
