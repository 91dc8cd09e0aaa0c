#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "emopred/models.hpp"
#include "emopred/tensor.hpp"

namespace emopred {

// Checkpoint container: "EMOL" magic, u32 format version, length-prefixed
// JSON metadata, named little-endian float64 tensors, trailing CRC-32.
// Written atomically (temp file + rename). Parameters round-trip bit-exactly.
namespace checkpoint {

inline constexpr std::uint32_t kFormatVersion = 1;

void save_raw(const std::string& path, const nlohmann::json& meta,
              const std::vector<std::pair<std::string, const Tensor*>>& params);

struct Loaded {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> params;

  // Throws DataError when the name is missing.
  const Tensor& get(const std::string& name) const;
};

Loaded load_raw(const std::string& path);

std::uint32_t crc32(const void* data, std::size_t len,
                    std::uint32_t seed = 0);

}  // namespace checkpoint

using AnyModel = std::variant<BlstmModel, BowModel, AvgModel>;

// run_config is echoed verbatim into the checkpoint metadata.
void save_model(const std::string& path, AnyModel& model,
                const nlohmann::json& run_config);

struct LoadedModel {
  AnyModel model;
  nlohmann::json meta;
};

LoadedModel load_model(const std::string& path);

const LabelSet& model_labels(const AnyModel& model);
std::vector<double> model_predict(AnyModel& model,
                                  std::span<const std::string> tokens);
const char* model_kind(const AnyModel& model);

}  // namespace emopred
