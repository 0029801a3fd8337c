#include <gtest/gtest.h>

#include <filesystem>

#include "trea/errors.hpp"
#include "trea/model_io.hpp"
#include "trea/sharp.hpp"
#include "trea/train.hpp"

using namespace trea;

namespace {

NetworkDescriptor sample_model() {
  ArchSpec arch;
  arch.layers = {{LayerKind::kConv2d, 3, 3, 1, Padding::kSame, AfSelect::kSigmoid},
                 {LayerKind::kConv2d, 2, 3, 2, Padding::kValid, AfSelect::kRelu},
                 {LayerKind::kDense, 4, 1, 1, Padding::kValid, std::nullopt}};
  NetworkDescriptor m = init_network(arch, Shape{1, 9, 9}, 77);
  m.name = "io-sample";
  PrecisionAssignment a;
  a.modes = {MacMode::kFxP4Simd, MacMode::kFxP8, MacMode::kFxP4Simd};
  m = apply_assignment(std::move(m), a);
  m.layers[0].mask = make_layer_mask(m.layers[0]);
  refresh_mn_scale(m.layers[0]);
  return m;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST(ModelIo, RoundTripIsStructurallyIdentical) {
  const NetworkDescriptor m = sample_model();
  const std::string bytes = serialize_model(m);
  const NetworkDescriptor back = deserialize_model(bytes);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_model(back), bytes);
}

TEST(ModelIo, SaveLoad) {
  const auto path = std::filesystem::temp_directory_path() / "trea_io_test.trm";
  const NetworkDescriptor m = sample_model();
  save_model(m, path);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), FormatError);
}

TEST(ModelIo, TruncatedFile) {
  const std::string bytes = serialize_model(sample_model());
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_model(bytes.substr(0, cut)), FormatError) << cut;
  }
}

TEST(ModelIo, UnknownVersionIsNamed) {
  const std::string bytes = serialize_model(sample_model());
  const std::string bad = replace(bytes, "\"version\": 1", "\"version\": 7");
  try {
    deserialize_model(bad);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version 7"), std::string::npos) << e.what();
  }
}

TEST(ModelIo, FieldErrorsNameThePath) {
  const std::string bytes = serialize_model(sample_model());
  try {
    deserialize_model(replace(bytes, "\"padding\": \"valid\"", "\"padding\": \"wrap!\""));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(".layers[1].padding"), std::string::npos) << e.what();
  }
  EXPECT_THROW(deserialize_model(replace(bytes, "TREA-MODEL", "TREA-MODEX")), FormatError);
  EXPECT_THROW(deserialize_model(replace(bytes, "\"precision\": \"fxp8\"", "\"precision\": \"fxp9\"")), FormatError);
}

TEST(ModelIo, EmptyLayerListRejected) {
  NetworkDescriptor m;
  m.input_shape = {1, 4, 4};
  EXPECT_THROW(deserialize_model(serialize_model(m)), FormatError);
}

TEST(ModelIo, LittleEndianHelpers) {
  std::string s;
  append_f64_le(s, 1.0);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(static_cast<unsigned char>(s[7]), 0x3f);
  EXPECT_EQ(static_cast<unsigned char>(s[6]), 0xf0);
  EXPECT_EQ(read_f64_le(s, 0), 1.0);
}
