#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "oracles.hpp"
#include "tabletop/checkpoint.hpp"
#include "tabletop/models.hpp"

using namespace tabletop;

namespace {

Checkpoint sample_checkpoint(std::uint64_t seed = 1) {
  Network<float> net(recognition_net(8, 8), seed);
  CheckpointMetadata meta;
  meta.epoch = 3;
  meta.val_accuracy = 0.875;
  meta.seed = seed;
  meta.task = "recognition";
  meta.halvings = 1;
  meta.config.batch_size = 16;
  return Checkpoint::capture(net, meta);
}

CheckpointError::Kind decode_error_kind(std::string_view bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode succeeded";
  return CheckpointError::Kind::io;
}

}  // namespace

TEST(Checkpoint, LayoutMagicHeaderLengthPayload) {
  const auto c = sample_checkpoint();
  const auto bytes = encode_checkpoint(c);
  ASSERT_GT(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "TTOPNET1");
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= std::uint32_t(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  EXPECT_EQ(bytes.size(), 12 + n + 4 * c.spec.parameter_count());
  EXPECT_EQ(bytes[12], '{');
  EXPECT_NE(bytes.find("\"architecture\""), std::string::npos);

  // First payload float is the first weight, little-endian.
  float first;
  std::memcpy(&first, bytes.data() + 12 + n, 4);
  EXPECT_EQ(first, c.parameters[0].value[0]);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  const auto c = sample_checkpoint();
  const auto bytes = encode_checkpoint(c);
  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(back, c);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  const auto path = std::filesystem::temp_directory_path() / "tabletop_ckpt_test" / "c.ckpt";
  save_checkpoint(c, path);
  EXPECT_EQ(load_checkpoint(path), c);
  std::filesystem::remove_all(path.parent_path());
}

TEST(Checkpoint, RestoredNetworkReproducesOutputs) {
  Network<float> net(recognition_net(8, 8), 2);
  const auto c = Checkpoint::capture(net, {});
  auto restored = decode_checkpoint(encode_checkpoint(c)).restore();
  Rng rng(2);
  const auto x = oracle::random_tensor<float>({1, 8, 8}, rng, 0, 1);
  EXPECT_EQ(restored.forward(x, Mode::eval), net.forward(x, Mode::eval));
}

TEST(Checkpoint, CorruptMagic) {
  auto bytes = encode_checkpoint(sample_checkpoint());
  bytes[0] = 'X';
  EXPECT_EQ(decode_error_kind(bytes), CheckpointError::Kind::bad_magic);
  try {
    decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("bad magic", 0), 0u) << e.what();
  }
  EXPECT_EQ(decode_error_kind("TTOP"), CheckpointError::Kind::bad_magic);
}

TEST(Checkpoint, TruncatedPayload) {
  auto bytes = encode_checkpoint(sample_checkpoint());
  bytes.resize(bytes.size() - 4);
  EXPECT_EQ(decode_error_kind(bytes), CheckpointError::Kind::payload_length_mismatch);
  try {
    decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("payload length mismatch", 0), 0u) << e.what();
  }
  EXPECT_EQ(decode_error_kind(encode_checkpoint(sample_checkpoint()) + "junk"),
            CheckpointError::Kind::payload_length_mismatch);
}

TEST(Checkpoint, TruncatedOrBrokenHeader) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  EXPECT_EQ(decode_error_kind(bytes.substr(0, 10)), CheckpointError::Kind::truncated_header);
  EXPECT_EQ(decode_error_kind(bytes.substr(0, 40)), CheckpointError::Kind::truncated_header);
  auto broken = bytes;
  broken[12] = '[';
  EXPECT_EQ(decode_error_kind(broken), CheckpointError::Kind::bad_header);
}

TEST(Checkpoint, ShapeMismatchOnRestore) {
  auto c = sample_checkpoint();
  c.parameters[0].value = Tensor({3});
  EXPECT_THROW(
      {
        try {
          (void)c.restore();
        } catch (const CheckpointError& e) {
          EXPECT_EQ(e.kind(), CheckpointError::Kind::shape_mismatch);
          throw;
        }
      },
      CheckpointError);
  auto missing = sample_checkpoint();
  missing.parameters.pop_back();
  EXPECT_THROW((void)missing.restore(), CheckpointError);
}

TEST(Checkpoint, MissingFileIsIoError) {
  try {
    load_checkpoint("/nonexistent/dir/x.ckpt");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::io);
  }
}
