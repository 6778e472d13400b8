#pragma once

#include <cstdint>
#include <string>

#include "gait/train.hpp"

namespace gait {

inline constexpr int kCheckpointVersion = 1;

// Text checkpoint: every parameter is written with its shortest decimal
// representation that parses back to the same bits, so save -> load -> save
// is byte-identical.
void save_checkpoint(const std::string& path, const TrainedAgent& agent,
                     std::uint64_t env_fingerprint);

// Throws VersionError (unsupported version), CompatibilityError (fingerprint
// mismatch unless allow_env_mismatch), MalformedFileError (truncated/broken)
// or IoError (unreadable).
TrainedAgent load_checkpoint(const std::string& path, const AlgoConfigs& configs,
                             std::uint64_t expected_env_fingerprint,
                             bool allow_env_mismatch = false);

// String-level codecs shared by the file API and the tests.
std::string checkpoint_to_text(const TrainedAgent& agent, std::uint64_t env_fingerprint);
TrainedAgent checkpoint_from_text(const std::string& text, const AlgoConfigs& configs,
                                  std::uint64_t expected_env_fingerprint,
                                  bool allow_env_mismatch = false);

// Shortest round-trip decimal formatting used across checkpoints and CSV.
std::string format_double(double v);

}  // namespace gait
