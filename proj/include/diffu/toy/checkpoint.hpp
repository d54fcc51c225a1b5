#pragma once

#include <string>

#include "diffu/toy/train.hpp"

namespace diffu::toy {

enum class CheckpointFormat { kBinary, kJson };

/// Binary layout: magic "DIFFUCKP", u32 version, u64 metadata length, JSON
/// metadata, u64 parameter count, raw little-endian doubles. The JSON
/// format holds the same metadata plus a "params" array. Both round-trip
/// the weights bit-exactly.
void save_checkpoint(const Checkpoint& ck, const std::string& path, CheckpointFormat format = CheckpointFormat::kBinary);

/// Detects the format from the first bytes. Throws ValidationError on a bad
/// magic, unsupported version or truncated file.
Checkpoint load_checkpoint(const std::string& path);

std::string serialize_checkpoint(const Checkpoint& ck, CheckpointFormat format);
Checkpoint deserialize_checkpoint(const std::string& bytes);

}  // namespace diffu::toy
