#ifndef BIKEINV_CHECKPOINT_HPP
#define BIKEINV_CHECKPOINT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "bikeinv/recurrent.hpp"

namespace bikeinv {

/// Binary container:
///   "BIKECKPT" | u32 version | u64 header bytes | JSON header | f64 payload
/// All integers and doubles little-endian. The header lists every tensor by
/// name and shape in payload order, plus the architecture, scaler,
/// hyperparameters and seed.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  TrainOptions options;
  int best_epoch = -1;
};

void save_checkpoint(std::ostream& out, const RecurrentRateModel& model, const CheckpointMeta& meta);
/// Throws FormatError on a bad magic, unsupported version or shape mismatch.
RecurrentRateModel load_checkpoint(std::istream& in, CheckpointMeta* meta = nullptr);

void save_checkpoint_file(const std::string& path, const RecurrentRateModel& model,
                          const CheckpointMeta& meta);
RecurrentRateModel load_checkpoint_file(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace bikeinv

#endif  // BIKEINV_CHECKPOINT_HPP
