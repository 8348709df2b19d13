#pragma once

#include <filesystem>
#include <span>

#include "json.hpp"

#include "etv/model/esj_model.hpp"
#include "etv/model/train.hpp"

namespace etv::model {

struct Checkpoint {
  EsjModel model;
  LossKind loss_kind = LossKind::ESJ;
  std::uint64_t seed = 0;
  nlohmann::json config;  // training config echo
};

nlohmann::json to_json(const TrainConfig& config);
// Overrides fields of `base` present in `j`; unknown keys raise ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

// Flat JSON: architecture, one entry per layer with its shape and
// row-major weights, plus the config echo and seed.
nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// CSV with header epoch,train_loss,val_loss.
void write_training_log(const std::filesystem::path& path, std::span<const EpochLog> log);

}  // namespace etv::model
