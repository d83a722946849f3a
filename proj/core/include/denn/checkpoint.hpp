#pragma once

#include <filesystem>
#include <optional>

#include "denn/encoder.hpp"
#include "denn/trainer.hpp"

namespace denn {

struct ModelCheckpoint {
  EncoderState state;
  std::optional<TrainingSnapshot> training;  // present when the run can be resumed

  friend bool operator==(const ModelCheckpoint&, const ModelCheckpoint&) = default;
};

// Binary layout, little-endian:
//   magic "DENNMODL", u32 version (1), u8 activation, u8 has_training,
//   u16 reserved (0), u64 vocab, u64 hidden, u64 embed, u64 classes,
//   f64 dropout_rate, u64 seed,
//   parameter tensors as f64 in EncoderParams::for_each_tensor order,
//   [training: u64 adam step, first moments, second moments (same order),
//    4 x u64 rng state, u64 order length, u32 order[], u64 cursor,
//    u64 iteration],
//   u64 FNV-1a checksum of every preceding byte.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace denn
