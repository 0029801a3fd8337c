#pragma once

// Cycle-accurate time-multiplexed execution on a 1D array of DQ-MAC units
// sharing one PISO-fed RQ-NAF.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "trea/netmodel.hpp"

namespace trea {

struct ArrayConfig {
  int mac_units = 100;
  int naf_instances = 1;
  double clock_hz = 100e6;
  // Let the NAF drain tile t while tile t+1 is in the MAC array.
  bool overlap_naf = false;
  // Fixed per-tile weight/bias load cost; zero models on-chip BRAM.
  std::int64_t tile_load_cycles = 0;

  // Throws DomainError on a non-positive field.
  void validate() const;
};

struct Tile {
  std::size_t first_output = 0;
  std::size_t count = 0;
  std::int64_t mac_cycles = 0;  // load + per-output dot-product cycles
};

struct TileSchedule {
  std::size_t outputs = 0;
  std::int64_t cycles_per_output = 0;
  std::vector<Tile> tiles;

  std::int64_t mac_cycles() const;
};

// Outputs in row-major (channel, y, x) order, cut into tiles of at most
// mac_units; each unit computes one output of a tile.
TileSchedule plan_layer(const LayerDescriptor& layer, const Shape& in, const ArrayConfig& cfg);

enum class EventKind { kComputeDone, kLayerDone, kDnnDone };
std::string_view to_string(EventKind kind);

struct TraceEvent {
  std::int64_t cycle = 0;
  EventKind kind = EventKind::kComputeDone;
  int layer = 0;
  int tile = 0;  // -1 for layer / network events

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct LayerTiming {
  std::int64_t start = 0;
  std::int64_t mac_cycles = 0;  // sum over tiles
  std::int64_t done = 0;        // Layer_Done stamp
};

struct CycleTrace {
  std::vector<TraceEvent> events;
  std::vector<LayerTiming> layers;
  std::int64_t cpfi = 0;

  std::int64_t total_mac_cycles() const;
  // One DnnDone at the maximum stamp, LayerDone nondecreasing in layer
  // order, cpfi equal to the DnnDone stamp. Returns a description of the
  // first violation, empty when the trace is sound.
  std::string check() const;
};

struct SimResult {
  std::vector<double> scores;
  CycleTrace trace;
};

// Runs the network tile by tile; scores equal forward_quant bit for bit.
SimResult simulate(const NetworkDescriptor& model, std::span<const double> input, const ArrayConfig& cfg,
                   const QuantOptions& opts = {});

// Closed-form cycle count from the tile plans alone.
std::int64_t cpfi_analytic(const NetworkDescriptor& model, const ArrayConfig& cfg);

// "cycle kind layer tile" per line.
std::string trace_to_text(const CycleTrace& trace);
// JSON document with events, per-layer timing, cpfi and clock.
std::string trace_to_json(const CycleTrace& trace, const ArrayConfig& cfg);

}  // namespace trea
