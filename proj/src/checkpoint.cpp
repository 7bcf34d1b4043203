#include "bikeinv/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace bikeinv {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'I', 'K', 'E', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("checkpoint truncated");
  return v;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_checkpoint(std::ostream& out, const RecurrentRateModel& model, const CheckpointMeta& meta) {
  nlohmann::ordered_json header;
  header["kind"] = model_kind_name(model.shape.kind);
  header["target"] = target_name(model.target);
  header["covariate_dim"] = model.shape.covariate_dim;
  header["hidden"] = model.shape.hidden;
  header["carry_state"] = model.carry_state;
  header["seed"] = meta.seed;
  header["config_hash"] = meta.config_hash;
  header["best_epoch"] = meta.best_epoch;
  header["hyperparameters"] = {{"learning_rate", meta.options.learning_rate},
                               {"max_epochs", meta.options.max_epochs},
                               {"patience", meta.options.patience},
                               {"batch_days", meta.options.batch_days},
                               {"clip_norm", meta.options.clip_norm},
                               {"elbo_samples", meta.options.elbo_samples}};
  header["scaler"] = {{"mean", vector_json(model.scaler.mean)}, {"scale", vector_json(model.scaler.scale)}};
  auto tensors = nlohmann::ordered_json::array();
  for (const auto* p : model.parameters())
    tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  header["tensors"] = std::move(tensors);
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : model.parameters())
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p->value.size())));
  if (!out) throw DataError("failed writing checkpoint");
}

RecurrentRateModel load_checkpoint(std::istream& in, CheckpointMeta* meta) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("not a checkpoint file");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto length = read_pod<std::uint64_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw FormatError("checkpoint header truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  try {
    const auto kind = parse_model_kind(header.at("kind").get<std::string>());
    const auto target = parse_target(header.at("target").get<std::string>());
    if (!kind || !target) throw FormatError("checkpoint header: unknown kind or target");
    NetworkShape shape{*kind, header.at("covariate_dim").get<int>(), header.at("hidden").get<int>()};
    RecurrentRateModel model(shape, 0);
    model.target = *target;
    model.carry_state = header.at("carry_state").get<bool>();
    model.scaler.mean = vector_from(header.at("scaler").at("mean"));
    model.scaler.scale = vector_from(header.at("scaler").at("scale"));

    const auto& tensors = header.at("tensors");
    auto params = model.parameters();
    if (tensors.size() != params.size()) throw FormatError("checkpoint tensor count does not match the architecture");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& t = tensors[i];
      auto& value = params[i]->value;
      if (t.at("name").get<std::string>() != params[i]->name || t.at("rows").get<Eigen::Index>() != value.rows() ||
          t.at("cols").get<Eigen::Index>() != value.cols())
        throw FormatError("checkpoint tensor " + t.at("name").get<std::string>() + " does not match the architecture");
      if (!in.read(reinterpret_cast<char*>(value.data()),
                   static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(value.size()))))
        throw FormatError("checkpoint payload truncated");
    }
    if (meta) {
      meta->seed = header.at("seed").get<std::uint64_t>();
      meta->config_hash = header.value("config_hash", std::string());
      meta->best_epoch = header.at("best_epoch").get<int>();
      const auto& h = header.at("hyperparameters");
      meta->options.hidden = shape.hidden;
      meta->options.carry_state = model.carry_state;
      meta->options.learning_rate = h.at("learning_rate").get<double>();
      meta->options.max_epochs = h.at("max_epochs").get<int>();
      meta->options.patience = h.at("patience").get<int>();
      meta->options.batch_days = h.at("batch_days").get<int>();
      meta->options.clip_norm = h.at("clip_norm").get<double>();
      meta->options.elbo_samples = h.at("elbo_samples").get<int>();
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
}

void save_checkpoint_file(const std::string& path, const RecurrentRateModel& model, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_checkpoint(out, model, meta);
}

RecurrentRateModel load_checkpoint_file(const std::string& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_checkpoint(in, meta);
}

}  // namespace bikeinv
