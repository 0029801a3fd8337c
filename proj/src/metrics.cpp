#include "trea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "trea/errors.hpp"

namespace trea {

double nfpci(const PlatformNumbers& p) {
  if (!(p.luts_total > 0.0) || !(p.ffs_total > 0.0)) throw DomainError("nFPCI needs positive LUT and FF totals");
  if (p.luts < 0.0 || p.ffs < 0.0 || p.luts > p.luts_total || p.ffs > p.ffs_total) {
    throw DomainError("LUT/FF usage outside [0, total]");
  }
  return (p.luts / p.luts_total) * (p.ffs / p.ffs_total) * 1000.0;
}

double sfil(std::int64_t cpfi, double clock_hz) {
  if (!(clock_hz > 0.0)) throw DomainError("clock frequency must be positive");
  if (cpfi < 0) throw DomainError("cycle count must be nonnegative");
  return static_cast<double>(cpfi) / clock_hz;
}

double ecpi(double power_w, double sfil_s) {
  if (power_w < 0.0 || sfil_s < 0.0) throw DomainError("power and latency must be nonnegative");
  return power_w * sfil_s;
}

MetricReport make_report(std::string workload, std::string config, std::int64_t cpfi, const PlatformNumbers& p) {
  MetricReport r;
  r.workload = std::move(workload);
  r.config = std::move(config);
  r.nfpci = p.luts_total > 0.0 && p.ffs_total > 0.0 ? nfpci(p) : 0.0;
  r.cpfi = cpfi;
  r.sfil_s = sfil(cpfi, p.clock_hz);
  r.ecpi_j = ecpi(p.power_w, r.sfil_s);
  return r;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string emit_report(const std::vector<MetricReport>& reports, ReportFormat format) {
  const std::vector<std::string> header{"workload", "config", "nfpci", "cpfi", "sfil_ms", "ecpi_uj_ext_power",
                                        "latency_gain"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    const double base = reports.front().sfil_s;
    const std::string gain = r.sfil_s > 0.0 ? num(base / r.sfil_s) : "inf";
    rows.push_back({r.workload, r.config, num(r.nfpci), std::to_string(r.cpfi), num(r.sfil_s * 1e3),
                    num(r.ecpi_j * 1e6), gain});
  }

  std::ostringstream os;
  if (format == ReportFormat::kCsv) {
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_field(row[c]);
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      os << (c ? "  " : "") << cells[c];
      if (c + 1 < cells.size()) os << std::string(width[c] - cells[c].size(), ' ');
    }
    os << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  os << "# ecpi uses externally supplied average power\n";
  return os.str();
}

std::vector<DeviceProfile> parse_device_profiles(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("device profile: invalid JSON: ") + e.what());
  }
  if (!j.contains("devices") || !j["devices"].is_array()) throw FormatError("device profile: .devices missing");
  std::vector<DeviceProfile> out;
  for (std::size_t i = 0; i < j["devices"].size(); ++i) {
    const auto& d = j["devices"][i];
    const std::string p = "device profile: .devices[" + std::to_string(i) + "]";
    try {
      DeviceProfile dp{d.at("name").get<std::string>(), d.at("luts_total").get<double>(),
                       d.at("ffs_total").get<double>()};
      if (!(dp.luts_total > 0.0) || !(dp.ffs_total > 0.0)) throw FormatError(p + ": totals must be positive");
      out.push_back(std::move(dp));
    } catch (const nlohmann::json::exception&) {
      throw FormatError(p + ": needs name, luts_total, ffs_total");
    }
  }
  return out;
}

std::vector<DeviceProfile> load_device_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_device_profiles(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

const DeviceProfile& find_device(const std::vector<DeviceProfile>& profiles, const std::string& name) {
  for (const auto& p : profiles) {
    if (p.name == name) return p;
  }
  throw FormatError("unknown device '" + name + "'");
}

const std::vector<DeviceProfile>& builtin_device_profiles() {
  static const std::vector<DeviceProfile> table{
      {"xc7vx485t", 303600.0, 607200.0},
      {"xc7z020", 53200.0, 106400.0},
      {"xczu9eg", 274080.0, 548160.0},
  };
  return table;
}

}  // namespace trea
