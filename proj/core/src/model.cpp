// Copyright 2026  The Voxlect Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "voxlect/model.hpp"

#include <map>

namespace voxlect {

namespace {

using nlohmann::json;

constexpr const char* kCheckpointFile = "checkpoint.json";
constexpr const char* kCheckpointFormat = "voxlect-checkpoint";
constexpr int kCheckpointFormatVersion = 1;

json matrix_to_json(const std::string& name, const Matrix& m) {
  return {{"name", name},
          {"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

}  // namespace

DialectClassifier::DialectClassifier(const Taxonomy& taxonomy,
                                     LanguageGroup group,
                                     std::unique_ptr<Backbone> backbone,
                                     const LoraOptions& lora,
                                     ProbeConfig probe)
    : group_(group),
      taxonomy_version_(taxonomy.version()),
      lora_(lora),
      backbone_(std::move(backbone)) {
  if (!backbone_) throw Error("classifier needs a backbone");
  for (const auto& l : taxonomy.canonical_labels(group)) labels_.push_back(l.name);
  apply_lora(*backbone_, lora_);
  probe.num_layers = backbone_->num_layers();
  probe.feature_dim = backbone_->dim();
  if (probe.num_classes != 0 && probe.num_classes != num_classes()) {
    throw Error("probe class count " + std::to_string(probe.num_classes) +
                " does not match the " + std::string(group_id(group)) +
                " taxonomy (" + std::to_string(num_classes()) + " classes)");
  }
  probe.num_classes = num_classes();
  probe_ = Probe(probe);
}

Vector DialectClassifier::logits(std::span<const float> wave) const {
  return probe_.forward(backbone_->forward(wave));
}

Prediction DialectClassifier::predict_proba(std::span<const float> wave,
                                            std::string utterance_id) const {
  return Prediction::from_logits(logits(wave), std::move(utterance_id));
}

std::vector<Prediction> DialectClassifier::predict_batch(
    std::span<const std::span<const float>> waves,
    std::span<const std::string> ids) const {
  if (ids.size() != waves.size()) throw Error("predict_batch: id count mismatch");
  std::vector<LayerStack> stacks;
  stacks.reserve(waves.size());
  for (const auto& w : waves) stacks.push_back(backbone_->forward(w));
  const auto logits = probe_.forward_batch(stacks);
  std::vector<Prediction> out;
  out.reserve(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.push_back(Prediction::from_logits(logits[i], ids[i]));
  }
  return out;
}

double DialectClassifier::loss_and_gradients(std::span<const float> wave,
                                             int label,
                                             std::vector<Matrix>& grads) const {
  std::unique_ptr<BackboneCache> cache;
  const LayerStack stack = backbone_->forward(wave, cache);
  Probe::Gradients g = probe_.loss_and_gradients(stack, label);
  std::vector<Matrix> lora = backbone_->backward(*cache, g.stack);
  grads = std::move(g.params);
  for (auto& m : lora) grads.push_back(std::move(m));
  return g.loss;
}

std::vector<NamedParameter> DialectClassifier::trainable_parameters() {
  auto out = probe_.parameters();
  for (auto& p : backbone_->trainable_parameters()) out.push_back(p);
  return out;
}

std::vector<ConstNamedParameter> DialectClassifier::trainable_parameters() const {
  auto out = probe_.parameters();
  for (auto& p : std::as_const(*backbone_).trainable_parameters()) out.push_back(p);
  return out;
}

void DialectClassifier::save(const std::filesystem::path& dir,
                             const json& extra) const {
  const ProbeConfig& pc = probe_.config();
  json params = json::array();
  for (const auto& p : trainable_parameters()) {
    params.push_back(matrix_to_json(p.name, *p.value));
  }
  json j = {
      {"format", kCheckpointFormat},
      {"format_version", kCheckpointFormatVersion},
      {"group", group_id(group_)},
      {"taxonomy_version", taxonomy_version_},
      {"labels", labels_},
      {"backbone_id", backbone_->id()},
      {"base_weights_hash", backbone_->base_weights_hash()},
      {"lora",
       {{"rank", lora_.rank},
        {"alpha", lora_.alpha},
        {"targets", lora_.targets},
        {"seed", lora_.seed}}},
      {"probe",
       {{"num_layers", pc.num_layers},
        {"feature_dim", pc.feature_dim},
        {"conv_channels", pc.conv_channels},
        {"head_hidden", pc.head_hidden},
        {"num_classes", pc.num_classes},
        {"unconstrained_layer_weights", pc.unconstrained_layer_weights},
        {"seed", pc.seed}}},
      {"extra", extra},
      {"parameters", params},
  };
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / kCheckpointFile, j.dump());
}

json DialectClassifier::read_header(const std::filesystem::path& dir) {
  const auto path = dir / kCheckpointFile;
  if (!std::filesystem::exists(path)) {
    throw Error("checkpoint not found: " + path.string());
  }
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != kCheckpointFormat) {
    throw Error(path.string() + " is not a voxlect checkpoint");
  }
  if (j.value("format_version", 0) != kCheckpointFormatVersion) {
    throw Error("unsupported checkpoint format version in " + path.string());
  }
  return j;
}

DialectClassifier DialectClassifier::load(const std::filesystem::path& dir,
                                          const Taxonomy& taxonomy) {
  const json j = read_header(dir);
  const std::string version = j.at("taxonomy_version").get<std::string>();
  if (version != taxonomy.version()) {
    throw Error("checkpoint taxonomy version " + version +
                " does not match loaded taxonomy version " +
                taxonomy.version() + "; refusing to load");
  }
  const LanguageGroup group = parse_group(j.at("group").get<std::string>());
  std::vector<std::string> expected;
  for (const auto& l : taxonomy.canonical_labels(group)) expected.push_back(l.name);
  if (j.at("labels").get<std::vector<std::string>>() != expected) {
    throw Error("checkpoint label set differs from the taxonomy for group " +
                std::string(group_id(group)));
  }

  LoraOptions lora;
  const auto& jl = j.at("lora");
  lora.rank = jl.at("rank").get<int>();
  lora.alpha = jl.at("alpha").get<double>();
  lora.targets = jl.at("targets").get<std::vector<std::string>>();
  lora.seed = jl.at("seed").get<std::uint64_t>();

  ProbeConfig pc;
  const auto& jp = j.at("probe");
  pc.num_layers = jp.at("num_layers").get<int>();
  pc.feature_dim = jp.at("feature_dim").get<int>();
  pc.conv_channels = jp.at("conv_channels").get<std::vector<int>>();
  pc.head_hidden = jp.at("head_hidden").get<std::vector<int>>();
  pc.num_classes = jp.at("num_classes").get<int>();
  pc.unconstrained_layer_weights = jp.at("unconstrained_layer_weights").get<bool>();
  pc.seed = jp.at("seed").get<std::uint64_t>();

  auto backbone = make_backbone(j.at("backbone_id").get<std::string>());
  if (backbone->base_weights_hash() != j.at("base_weights_hash").get<std::string>()) {
    throw Error("rebuilt backbone weights do not match the checkpoint");
  }
  DialectClassifier model(taxonomy, group, std::move(backbone), lora, pc);

  std::map<std::string, const json*> stored;
  for (const auto& p : j.at("parameters")) {
    stored[p.at("name").get<std::string>()] = &p;
  }
  for (auto& p : model.trainable_parameters()) {
    auto it = stored.find(p.name);
    if (it == stored.end()) throw Error("checkpoint is missing parameter " + p.name);
    const json& sp = *it->second;
    const auto rows = sp.at("rows").get<Eigen::Index>();
    const auto cols = sp.at("cols").get<Eigen::Index>();
    if (rows != p.value->rows() || cols != p.value->cols()) {
      throw Error("checkpoint parameter " + p.name + " has the wrong shape");
    }
    const auto data = sp.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw Error("checkpoint parameter " + p.name + " is truncated");
    }
    std::copy(data.begin(), data.end(), p.value->data());
    stored.erase(it);
  }
  if (!stored.empty()) {
    throw Error("checkpoint has unexpected parameter " + stored.begin()->first);
  }
  return model;
}

}  // namespace voxlect
