#include "poisonbench/victims/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "poisonbench/victims/network.hpp"

namespace poisonbench {
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "weight blobs are written in native little-endian order");

nlohmann::json arch_to_json(const GnnArch& arch) {
  return {{"kind", to_string(arch.kind)},
          {"layers", arch.layers},
          {"hidden", arch.hidden},
          {"dropout", arch.dropout},
          {"heads_layer1", arch.heads_layer1},
          {"heads_layer2", arch.heads_layer2},
          {"sage_aggregator", arch.sage_aggregator}};
}

GnnArch arch_from_json(const nlohmann::json& j) {
  GnnArch a;
  a.kind = parse_gnn_kind(j.value("kind", std::string("gcn")));
  a.layers = j.value("layers", a.layers);
  a.hidden = j.value("hidden", a.hidden);
  a.dropout = j.value("dropout", a.dropout);
  a.heads_layer1 = j.value("heads_layer1", a.heads_layer1);
  a.heads_layer2 = j.value("heads_layer2", a.heads_layer2);
  a.sage_aggregator = j.value("sage_aggregator", a.sage_aggregator);
  a.validate();
  return a;
}

void save_model(const VictimModel& model, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json tensors = nlohmann::json::array();
  std::ofstream blob(dir / "weights.bin", std::ios::binary);
  if (!blob) throw Error("cannot write " + (dir / "weights.bin").string());
  std::size_t offset = 0;
  for (const auto& p : model.parameters) {
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = p.value;
    const auto bytes = static_cast<std::size_t>(rm.size()) * sizeof(float);
    blob.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(bytes));
    tensors.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}, {"offset", offset}});
    offset += bytes;
  }
  const nlohmann::json manifest = {{"arch", arch_to_json(model.arch)},
                                   {"input_dim", model.input_dim},
                                   {"num_classes", model.num_classes},
                                   {"seed", model.seed},
                                   {"val_accuracy", model.val_accuracy},
                                   {"epochs_trained", model.epochs_trained},
                                   {"dtype", "float32-le"},
                                   {"layout", "row-major, tensors in listed order"},
                                   {"tensors", tensors}};
  std::ofstream(dir / "model.json") << manifest.dump(2) << '\n';
}

VictimModel load_model(const fs::path& dir) {
  std::ifstream mf(dir / "model.json");
  if (!mf) throw Error("cannot open " + (dir / "model.json").string());
  const auto manifest = nlohmann::json::parse(mf);
  VictimModel model;
  model.arch = arch_from_json(manifest.at("arch"));
  model.input_dim = manifest.at("input_dim").get<std::size_t>();
  model.num_classes = manifest.at("num_classes").get<int>();
  model.seed = manifest.at("seed").get<std::uint64_t>();
  model.val_accuracy = manifest.value("val_accuracy", 0.0);
  model.epochs_trained = manifest.value("epochs_trained", 0);

  std::ifstream blob(dir / "weights.bin", std::ios::binary);
  if (!blob) throw Error("cannot open " + (dir / "weights.bin").string());
  std::ostringstream ss;
  ss << blob.rdbuf();
  const std::string bytes = ss.str();

  const auto expected = init_parameters<float>(model.arch, model.input_dim, model.num_classes, 0);
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != expected.size()) throw ValidationError("model: tensor count does not match architecture");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto rows = tensors[i].at("rows").get<Eigen::Index>();
    const auto cols = tensors[i].at("cols").get<Eigen::Index>();
    const auto offset = tensors[i].at("offset").get<std::size_t>();
    if (rows != expected[i].value.rows() || cols != expected[i].value.cols()) {
      throw ValidationError("model: tensor " + tensors[i].at("name").get<std::string>() + " has unexpected shape");
    }
    const auto size = static_cast<std::size_t>(rows * cols) * sizeof(float);
    if (offset + size > bytes.size()) throw ValidationError("model: weight blob is truncated");
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    std::memcpy(rm.data(), bytes.data() + offset, size);
    if (!rm.allFinite()) throw ValidationError("model: non-finite weight in " + tensors[i].at("name").get<std::string>());
    model.parameters.push_back({tensors[i].at("name").get<std::string>(), rm});
  }
  return model;
}

}  // namespace poisonbench
