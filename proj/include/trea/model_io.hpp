#pragma once

// Model file: a text header, a JSON manifest and a little-endian blob.
//
//   TREA-MODEL\n
//   manifest-bytes: <n>\n
//   <n bytes of JSON manifest>
//   <blob: float64 tensors row-major, masks as LSB-first packed bits>
//
// The manifest names every tensor by byte offset and element count into the
// blob. version must be 1.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trea/netmodel.hpp"

namespace trea {

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const NetworkDescriptor& model);
// Throws FormatError naming the offending field path.
NetworkDescriptor deserialize_model(const std::string& bytes);

void save_model(const NetworkDescriptor& model, const std::filesystem::path& path);
NetworkDescriptor load_model(const std::filesystem::path& path);

// Raw helpers for externally produced blobs in the same layout.
void append_f64_le(std::string& out, double v);
double read_f64_le(const std::string& in, std::size_t offset);

}  // namespace trea
