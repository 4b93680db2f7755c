#include "acer/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace acer {

namespace {
constexpr char kMagic[8] = {'A', 'C', 'E', 'R', 'C', 'K', 'P', '1'};
}

void save_checkpoint(const std::filesystem::path& path, const Td3Agent& agent,
                     const std::string& env_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const auto len = static_cast<std::uint32_t>(env_name.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(env_name.data(), len);
  agent.save(out);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::string_view(magic, 8) != std::string_view(kMagic, 8)) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string env_name(len, '\0');
  in.read(env_name.data(), len);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  return Checkpoint{std::move(env_name), Td3Agent::load(in)};
}

}  // namespace acer
