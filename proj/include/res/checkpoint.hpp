#pragma once

#include <string>

#include "res/systems.hpp"

namespace res {

// Binary checkpoint: magic + version, system kind, encoder config, tokenizer
// blob, then every named weight matrix. Written atomically; a sidecar
// <path>.manifest.json records prefix_len, hidden width, and the vocabulary
// hash for quick compatibility checks.
void save_checkpoint(const System& system, const std::string& path);

System load_checkpoint(const std::string& path);

std::string manifest_json(const System& system);

}  // namespace res
