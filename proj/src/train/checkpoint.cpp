// Copyright 2026 the dvsdr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dvsdr/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dvsdr/core/errors.hpp"
#include "json.hpp"

namespace dvsdr::train {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic{"DVSDR1\0", 7};
constexpr int kFormatVersion = 1;

json config_to_json(const model::ModelConfig& c) {
  return {{"input_dim", c.input_dim},           {"latent_dim", c.latent_dim},
          {"class_count", c.class_count},       {"encoder_hidden", c.encoder_hidden},
          {"decoder_hidden", c.decoder_hidden}, {"classifier_hidden", c.classifier_hidden}};
}

model::ModelConfig config_from_json(const json& j) {
  model::ModelConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.class_count = j.at("class_count").get<std::size_t>();
  c.encoder_hidden = j.at("encoder_hidden").get<std::vector<std::size_t>>();
  c.decoder_hidden = j.at("decoder_hidden").get<std::vector<std::size_t>>();
  c.classifier_hidden = j.at("classifier_hidden").get<std::vector<std::size_t>>();
  return c;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

double get_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string describe(const model::ModelConfig& c) { return config_to_json(c).dump(); }

}  // namespace

std::string serialize_checkpoint(const model::DvsdrModel& model, const AdamState& adam,
                                 std::uint64_t seed) {
  const auto blocks = model::param_blocks(model.params);
  std::size_t count = 0;
  for (auto b : blocks) count += b.size();
  if (adam.first_moment.size() != blocks.size() || adam.second_moment.size() != blocks.size()) {
    throw ShapeError("serialize_checkpoint: optimizer state does not match model");
  }

  const json header = {{"format_version", kFormatVersion},
                       {"model", config_to_json(model.config)},
                       {"adam",
                        {{"lr", adam.config.lr},
                         {"beta1", adam.config.beta1},
                         {"beta2", adam.config.beta2},
                         {"epsilon", adam.config.epsilon}}},
                       {"t", adam.t},
                       {"seed", seed},
                       {"parameter_count", count}};
  const std::string text = header.dump();

  std::string out;
  out.reserve(kMagic.size() + 4 + text.size() + 3 * count * 8);
  out.append(kMagic);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.append(text);
  for (auto b : blocks) {
    for (double v : b) put_f64(out, v);
  }
  for (const auto* moments : {&adam.first_moment, &adam.second_moment}) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if ((*moments)[i].size() != blocks[i].size()) {
        throw ShapeError("serialize_checkpoint: moment block " + std::to_string(i) +
                         " size mismatch");
      }
      for (double v : (*moments)[i]) put_f64(out, v);
    }
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, const model::ModelConfig* expected) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("checkpoint: bad magic at byte offset 0");
  }
  std::size_t offset = kMagic.size();
  if (bytes.size() < offset + 4) throw FormatError("checkpoint: truncated header length at byte offset 7");
  std::uint32_t header_len = 0;
  for (int i = 0; i < 4; ++i) {
    header_len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  offset += 4;
  if (bytes.size() - offset < header_len) {
    throw FormatError("checkpoint: header of " + std::to_string(header_len) +
                      " bytes truncated at byte offset " + std::to_string(bytes.size()));
  }

  Checkpoint ck;
  std::size_t declared_count = 0;
  try {
    const json header = json::parse(bytes.substr(offset, header_len));
    if (header.at("format_version").get<int>() != kFormatVersion) {
      throw FormatError("checkpoint: unsupported format_version " +
                        header.at("format_version").dump());
    }
    ck.model.config = config_from_json(header.at("model"));
    const json& a = header.at("adam");
    ck.adam.config = {a.at("lr").get<double>(), a.at("beta1").get<double>(),
                      a.at("beta2").get<double>(), a.at("epsilon").get<double>()};
    ck.adam.t = header.at("t").get<std::uint64_t>();
    ck.seed = header.at("seed").get<std::uint64_t>();
    declared_count = header.at("parameter_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  }
  offset += header_len;

  try {
    ck.model.config.validate();
  } catch (const DomainError& e) {
    throw FormatError(std::string("checkpoint: invalid model config: ") + e.what());
  }
  if (expected != nullptr && !(*expected == ck.model.config)) {
    throw ConfigMismatchError("checkpoint was written for model " + describe(ck.model.config) +
                              " but " + describe(*expected) + " was expected");
  }

  // Shapes come from the config; init with a throwaway rng then overwrite.
  Rng shape_rng(0);
  ck.model = model::init_model(ck.model.config, shape_rng);
  auto blocks = model::param_blocks(ck.model.params);
  std::size_t count = 0;
  for (auto b : blocks) count += b.size();
  if (count != declared_count) {
    throw FormatError("checkpoint: header declares " + std::to_string(declared_count) +
                      " parameters but the config implies " + std::to_string(count));
  }
  const std::size_t payload = 3 * count * 8;
  if (bytes.size() - offset != payload) {
    throw FormatError("checkpoint: expected " + std::to_string(payload) +
                      " payload bytes after byte offset " + std::to_string(offset) + ", found " +
                      std::to_string(bytes.size() - offset));
  }

  const char* p = bytes.data() + offset;
  for (auto b : blocks) {
    for (double& v : b) {
      v = get_f64(p);
      p += 8;
    }
  }
  const AdamConfig adam_config = ck.adam.config;
  const std::uint64_t t = ck.adam.t;
  ck.adam = make_adam_state(ck.model.params, adam_config);
  ck.adam.t = t;
  for (auto* moments : {&ck.adam.first_moment, &ck.adam.second_moment}) {
    for (auto& block : *moments) {
      for (double& v : block) {
        v = get_f64(p);
        p += 8;
      }
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const model::DvsdrModel& model,
                     const AdamState& adam, std::uint64_t seed) {
  const std::string bytes = serialize_checkpoint(model, adam, seed);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const model::ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_checkpoint(bytes, expected);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace dvsdr::train
