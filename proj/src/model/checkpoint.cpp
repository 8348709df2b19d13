#include "etv/model/checkpoint.hpp"

#include <fstream>
#include <string>

#include "etv/csv.hpp"
#include "etv/error.hpp"

namespace etv::model {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "etv-esj-model-v1";

const char* layer_name(std::size_t index, std::size_t trunk_layers) {
  if (index < trunk_layers) return "trunk";
  switch (index - trunk_layers) {
    case 0: return "head_p";
    case 1: return "head_mu";
    default: return "head_sigma";
  }
}

}  // namespace

json to_json(const TrainConfig& config) {
  return json{{"learning_rate", config.learning_rate},
              {"momentum", config.momentum},
              {"batch_size", config.batch_size},
              {"max_epochs", config.max_epochs},
              {"early_stop_patience", config.early_stop_patience},
              {"seed", config.seed},
              {"loss_kind", std::string(to_string(config.loss_kind))},
              {"sigma_min", config.sigma_min},
              {"hidden", config.hidden},
              {"validation_fraction", config.validation_fraction},
              {"max_grad_norm", config.max_grad_norm}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "training config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "learning_rate") base.learning_rate = value.get<double>();
      else if (key == "momentum") base.momentum = value.get<double>();
      else if (key == "batch_size") base.batch_size = value.get<std::size_t>();
      else if (key == "max_epochs") base.max_epochs = value.get<std::size_t>();
      else if (key == "early_stop_patience") base.early_stop_patience = value.get<std::size_t>();
      else if (key == "seed") base.seed = value.get<std::uint64_t>();
      else if (key == "loss_kind") base.loss_kind = parse_loss_kind(value.get<std::string>());
      else if (key == "sigma_min") base.sigma_min = value.get<double>();
      else if (key == "hidden") base.hidden = value.get<std::vector<std::size_t>>();
      else if (key == "validation_fraction") base.validation_fraction = value.get<double>();
      else if (key == "max_grad_norm") base.max_grad_norm = value.get<double>();
      else throw Error(ErrorKind::ConfigError, "unknown training config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("training config: ") + e.what());
  }
  base.validate();
  return base;
}

json checkpoint_to_json(const Checkpoint& checkpoint) {
  const EsjModel& model = checkpoint.model;
  const Architecture& arch = model.architecture();
  const auto params = model.parameters();
  json layers = json::array();
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& shape = model.layers()[l];
    layers.push_back({{"name", layer_name(l, arch.hidden.size())},
                      {"rows", shape.rows},
                      {"cols", shape.cols},
                      {"weights", std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(shape.weight_offset),
                                                      params.begin() + static_cast<std::ptrdiff_t>(shape.bias_offset))},
                      {"bias", std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(shape.bias_offset),
                                                   params.begin() + static_cast<std::ptrdiff_t>(shape.bias_offset +
                                                                                                shape.rows))}});
  }
  return json{{"format", kFormat},
              {"user_dim", arch.user_dim},
              {"fund_dim", arch.fund_dim},
              {"hidden", arch.hidden},
              {"sigma_min", arch.sigma_min},
              {"loss_kind", std::string(to_string(checkpoint.loss_kind))},
              {"seed", checkpoint.seed},
              {"config", checkpoint.config},
              {"layers", layers}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorKind::ShapeError, "unsupported checkpoint format");
    }
    Architecture arch;
    arch.user_dim = j.at("user_dim").get<std::size_t>();
    arch.fund_dim = j.at("fund_dim").get<std::size_t>();
    arch.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    arch.sigma_min = j.at("sigma_min").get<double>();
    Checkpoint checkpoint{EsjModel(arch), parse_loss_kind(j.at("loss_kind").get<std::string>()),
                          j.at("seed").get<std::uint64_t>(), j.value("config", json::object())};

    const auto& layers = j.at("layers");
    auto& model = checkpoint.model;
    if (layers.size() != model.layers().size()) throw Error(ErrorKind::ShapeError, "checkpoint layer count mismatch");
    auto params = model.parameters();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& shape = model.layers()[l];
      const auto weights = layers[l].at("weights").get<std::vector<double>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      if (layers[l].at("rows").get<std::size_t>() != shape.rows ||
          layers[l].at("cols").get<std::size_t>() != shape.cols || weights.size() != shape.rows * shape.cols ||
          bias.size() != shape.rows) {
        throw Error(ErrorKind::ShapeError, "checkpoint layer " + std::to_string(l) + " has the wrong shape");
      }
      std::copy(weights.begin(), weights.end(), params.begin() + static_cast<std::ptrdiff_t>(shape.weight_offset));
      std::copy(bias.begin(), bias.end(), params.begin() + static_cast<std::ptrdiff_t>(shape.bias_offset));
    }
    return checkpoint;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ShapeError, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << checkpoint_to_json(checkpoint).dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ShapeError, path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

void write_training_log(const std::filesystem::path& path, std::span<const EpochLog> log) {
  csv::Table table;
  table.header = {"epoch", "train_loss", "val_loss"};
  for (const auto& entry : log) {
    table.rows.push_back(
        {std::to_string(entry.epoch), csv::format_double(entry.train_loss), csv::format_double(entry.val_loss)});
  }
  csv::write_table(path, table);
}

}  // namespace etv::model
