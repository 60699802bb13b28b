#include "tabletop/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spec_json.hpp"

namespace tabletop {

namespace {

using Kind = CheckpointError::Kind;
using nlohmann::json;

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32_le(std::string_view in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

void put_f32_le(std::string& out, float f) { put_u32_le(out, std::bit_cast<std::uint32_t>(f)); }

json config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"rmsprop_decay", c.rmsprop_decay},
          {"rmsprop_epsilon", c.rmsprop_epsilon},
          {"val_fraction", c.val_fraction},
          {"seed", c.seed},
          {"precision", to_string(c.precision)}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.rmsprop_decay = j.at("rmsprop_decay").get<double>();
  c.rmsprop_epsilon = j.at("rmsprop_epsilon").get<double>();
  c.val_fraction = j.at("val_fraction").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.precision = parse_precision(j.at("precision").get<std::string>());
  return c;
}

}  // namespace

Checkpoint Checkpoint::capture(const Network<float>& net, CheckpointMetadata metadata) {
  Checkpoint c{net.spec(), {}, std::move(metadata)};
  for (const auto* p : net.parameters()) c.parameters.push_back({p->name, p->value});
  return c;
}

Network<float> Checkpoint::restore() const {
  Network<float> net(spec, metadata.seed);
  auto params = net.parameters();
  if (params.size() != parameters.size()) {
    throw CheckpointError(Kind::shape_mismatch, "checkpoint has " + std::to_string(parameters.size()) +
                                                    " parameter tensors, architecture needs " +
                                                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->name != parameters[i].name || params[i]->value.shape() != parameters[i].value.shape()) {
      throw CheckpointError(Kind::shape_mismatch, "parameter " + parameters[i].name + " " +
                                                      shape_string(parameters[i].value.shape()) +
                                                      " does not match " + params[i]->name + " " +
                                                      shape_string(params[i]->value.shape()));
    }
    params[i]->value = parameters[i].value;
  }
  return net;
}

std::string encode_checkpoint(const Checkpoint& c) {
  json table = json::array();
  std::size_t floats = 0;
  for (const auto& p : c.parameters) {
    table.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"dtype", "f32"}});
    floats += p.value.size();
  }
  const auto& m = c.metadata;
  json header{{"architecture", detail::spec_to_json(c.spec)},
              {"parameters", table},
              {"metadata",
               {{"epoch", m.epoch},
                {"val_accuracy", m.val_accuracy},
                {"seed", m.seed},
                {"config", config_to_json(m.config)},
                {"task", m.task},
                {"object", m.object},
                {"halvings", m.halvings}}}};
  const std::string text = header.dump();

  std::string out(kCheckpointMagic);
  put_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + floats * 4);
  for (const auto& p : c.parameters)
    for (float f : p.value.data()) put_f32_le(out, f);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size() || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CheckpointError(Kind::bad_magic, "file does not start with TTOPNET1");
  }
  bytes.remove_prefix(kCheckpointMagic.size());
  if (bytes.size() < 4) throw CheckpointError(Kind::truncated_header, "missing header length");
  const std::uint32_t header_len = get_u32_le(bytes);
  bytes.remove_prefix(4);
  if (bytes.size() < header_len) {
    throw CheckpointError(Kind::truncated_header, "header length " + std::to_string(header_len) + " exceeds file");
  }

  Checkpoint c;
  std::vector<std::pair<std::string, Shape>> table;
  try {
    const auto header = json::parse(bytes.substr(0, header_len));
    c.spec = detail::spec_from_json(header.at("architecture"));
    for (const auto& p : header.at("parameters")) {
      if (p.at("dtype").get<std::string>() != "f32") {
        throw CheckpointError(Kind::bad_header, "unsupported dtype for " + p.at("name").get<std::string>());
      }
      table.emplace_back(p.at("name").get<std::string>(), p.at("shape").get<Shape>());
    }
    const auto& m = header.at("metadata");
    c.metadata.epoch = m.at("epoch").get<std::size_t>();
    c.metadata.val_accuracy = m.at("val_accuracy").get<double>();
    c.metadata.seed = m.at("seed").get<std::uint64_t>();
    c.metadata.config = config_from_json(m.at("config"));
    c.metadata.task = m.value("task", std::string{});
    c.metadata.object = m.value("object", std::string{});
    c.metadata.halvings = m.value("halvings", std::size_t{0});
  } catch (const json::exception& e) {
    throw CheckpointError(Kind::bad_header, e.what());
  } catch (const ParseError& e) {
    throw CheckpointError(Kind::bad_header, e.what());
  } catch (const DimensionError& e) {
    throw CheckpointError(Kind::bad_header, e.what());
  }
  bytes.remove_prefix(header_len);

  std::size_t floats = 0;
  for (const auto& [name, shape] : table) {
    if (shape.empty()) throw CheckpointError(Kind::bad_header, "parameter " + name + " has empty shape");
    floats += shape_volume(shape);
  }
  if (bytes.size() != floats * 4) {
    throw CheckpointError(Kind::payload_length_mismatch, "expected " + std::to_string(floats * 4) +
                                                             " payload bytes, found " + std::to_string(bytes.size()));
  }
  std::size_t off = 0;
  for (auto& [name, shape] : table) {
    const std::size_t n = shape_volume(shape);
    std::vector<float> data(n);
    for (std::size_t i = 0; i < n; ++i, off += 4) data[i] = std::bit_cast<float>(get_u32_le(bytes.substr(off, 4)));
    c.parameters.push_back({name, Tensor(shape, std::move(data))});
  }
  // Validate names and shapes against the architecture.
  (void)c.restore();
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::io, "cannot write " + path.string());
  const auto bytes = encode_checkpoint(c);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(Kind::io, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace tabletop
