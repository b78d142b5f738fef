#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "strider/model.hpp"
#include "strider/optim.hpp"

namespace strider {

/// Binary checkpoint container (little-endian):
///
///   magic "STRIDCKP" | u32 version
///   model config: u32 task, u64 input_dim, u64 fc1, u64 fc2,
///                 u64 gru_count, u64 gru_width[gru_count],
///                 u64 num_classes, f64 norm_eps
///   u64 iteration | u64 adam_step | u8 has_adam_moments
///   u32 tensor_count, then per tensor:
///       u32 name_len, name bytes, u32 rank, u64 dims[rank],
///       f64 values[n], and when has_adam_moments: f64 m[n], f64 v[n]
///   u64 FNV-1a of every preceding byte
struct Checkpoint {
    static constexpr std::uint32_t version = 1;

    NetParams params;
    AdamState adam;
    std::uint64_t iteration = 0;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the serialized bytes.
std::uint64_t checkpoint_hash(const Checkpoint& checkpoint);

}  // namespace strider
