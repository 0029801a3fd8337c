#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace trea {

// Fabric usage, power and clock for one implementation. Power is supplied by
// the caller (implementation tools); nothing here estimates it.
struct PlatformNumbers {
  double luts = 0.0;
  double luts_total = 0.0;
  double ffs = 0.0;
  double ffs_total = 0.0;
  double power_w = 0.0;
  double clock_hz = 0.0;
};

// (L / L_total) * (FF / FF_total) * 1000.
double nfpci(const PlatformNumbers& p);
// Seconds per frame.
double sfil(std::int64_t cpfi, double clock_hz);
// Joules per frame.
double ecpi(double power_w, double sfil_s);

struct MetricReport {
  std::string workload;
  std::string config;
  double nfpci = 0.0;
  std::int64_t cpfi = 0;
  double sfil_s = 0.0;
  double ecpi_j = 0.0;
};

MetricReport make_report(std::string workload, std::string config, std::int64_t cpfi, const PlatformNumbers& p);

enum class ReportFormat { kText, kCsv };

// One row per report; the last column is SFIL(first row) / SFIL(row).
// An empty list yields the header alone.
std::string emit_report(const std::vector<MetricReport>& reports, ReportFormat format);

struct DeviceProfile {
  std::string name;
  double luts_total = 0.0;
  double ffs_total = 0.0;
};

// JSON: {"devices": [{"name":..., "luts_total":..., "ffs_total":...}, ...]}
std::vector<DeviceProfile> load_device_profiles(const std::filesystem::path& path);
std::vector<DeviceProfile> parse_device_profiles(const std::string& text);
const DeviceProfile& find_device(const std::vector<DeviceProfile>& profiles, const std::string& name);
// Built-in fallback table.
const std::vector<DeviceProfile>& builtin_device_profiles();

}  // namespace trea
