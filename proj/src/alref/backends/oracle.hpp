#pragma once

#include <memory>
#include <string>
#include <vector>

#include "alref/backends/interfaces.hpp"

namespace alref::backends {

struct OracleObject {
  std::string name;  // expression text (RVOS) or category (AVS)
  std::vector<BinaryMask> masks;
};

// Ground truth for one sample. The clip and audio must outlive the backends.
struct OracleTruth {
  std::shared_ptr<const VideoClip> clip;
  std::shared_ptr<const AudioClip> audio;
  std::vector<OracleObject> objects;
};

// Backends that answer from ground truth: the chat model picks the sampled
// frame where the referent is largest and echoes the true categories, the
// detector returns the true box, the segmenter returns the true masks of the
// object its prompts overlap best, and the audio backends report exactly the
// categories visible in each stretch of time.
BackendSet oracle_backends(std::shared_ptr<const OracleTruth> truth);

}  // namespace alref::backends
