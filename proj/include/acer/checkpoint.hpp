#pragma once

#include <filesystem>
#include <string>

#include "acer/td3.hpp"

namespace acer {

struct Checkpoint {
  std::string env_name;
  Td3Agent agent;
};

/// Versioned binary agent checkpoint (all six networks, Adam state,
/// counters, plus the environment name for mismatch detection).
void save_checkpoint(const std::filesystem::path& path, const Td3Agent& agent,
                     const std::string& env_name);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace acer
