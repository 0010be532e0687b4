#include "pccs/checkpoint.hpp"

#include <cstring>

namespace pccs {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'C', 'S'};

void put_array(ByteWriter& w, const std::string& name, const Tensor2& t) {
  w.put_string(name);
  w.put_u64(static_cast<std::uint64_t>(t.rows()));
  w.put_u64(static_cast<std::uint64_t>(t.cols()));
  for (Index r = 0; r < t.rows(); ++r)
    for (Index c = 0; c < t.cols(); ++c) w.put_f64(t(r, c));
}

void put_params(ByteWriter& w, const std::string& prefix, const ParamSet& ps) {
  for (const auto& [name, p] : ps) put_array(w, prefix + name, p.value);
}

// Fills a freshly declared ParamSet; every declared entry must be present with its shape.
void take_params(std::map<std::string, Tensor2>& arrays, const std::string& prefix, ParamSet& ps) {
  for (auto& [name, p] : ps) {
    auto it = arrays.find(prefix + name);
    if (it == arrays.end()) throw FormatError("checkpoint: missing array " + prefix + name);
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols())
      throw FormatError("checkpoint: wrong shape for " + prefix + name);
    p.value = std::move(it->second);
    p.grad.setZero();
    arrays.erase(it);
  }
}

Tensor2 take_array(std::map<std::string, Tensor2>& arrays, const std::string& name) {
  auto it = arrays.find(name);
  if (it == arrays.end()) throw FormatError("checkpoint: missing array " + name);
  Tensor2 out = std::move(it->second);
  arrays.erase(it);
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelBundle& model) {
  model.check_consistency();
  ByteWriter w;
  w.put_raw(std::string_view(kMagic, 4));
  w.put_u32(ModelBundle::kVersion);
  w.put_string(format_key_values(to_key_values(model.config)));

  const int k = model.modalities.k();
  Tensor2 ch(k, kRepDim), cf(k, kRepDim), members(k, 1), weights(1, 2);
  for (int j = 0; j < k; ++j) {
    const Modality& m = model.modalities.modalities[static_cast<std::size_t>(j)];
    ch.row(j) = m.center_h.transpose();
    cf.row(j) = m.center_f.transpose();
    members(j, 0) = static_cast<double>(m.member_count);
  }
  weights << model.modalities.w_h, model.modalities.w_f;

  const std::size_t arrays =
      4 + model.encoders.params.size() + model.classifier_params.size() + model.synthesis_params.size();
  w.put_u32(static_cast<std::uint32_t>(arrays));
  put_array(w, "modality.center_h", ch);
  put_array(w, "modality.center_f", cf);
  put_array(w, "modality.members", members);
  put_array(w, "modality.weights", weights);
  put_params(w, "enc/", model.encoders.params);
  put_params(w, "cls/", model.classifier_params);
  put_params(w, "syn/", model.synthesis_params);

  const std::uint64_t crc = crc64(w.bytes());
  w.put_u64(crc);
  return std::move(w.bytes());
}

ModelBundle deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw FormatError("checkpoint: truncated file");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  ByteReader header(bytes.subspan(4, 4));
  const std::uint32_t version = header.get_u32();
  if (version != ModelBundle::kVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  const auto body = bytes.first(bytes.size() - 8);
  ByteReader tail(bytes.last(8));
  if (crc64(body) != tail.get_u64()) throw FormatError("checkpoint: checksum mismatch");

  ByteReader r(body);
  r.get_raw(8);
  ModelBundle model;
  try {
    model.config = apply_key_values(TrainConfig{}, parse_key_values(r.get_string()));
    model.config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: bad config block: ") + e.what());
  }

  std::map<std::string, Tensor2> arrays;
  const std::uint32_t n_arrays = r.get_u32();
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = r.get_string();
    const std::uint64_t rows = r.get_u64();
    const std::uint64_t cols = r.get_u64();
    if (rows * cols > r.remaining() / 8) throw FormatError("checkpoint: truncated data");
    Tensor2 t(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index a = 0; a < t.rows(); ++a)
      for (Index b = 0; b < t.cols(); ++b) t(a, b) = r.get_f64();
    if (!arrays.emplace(std::move(name), std::move(t)).second)
      throw FormatError("checkpoint: duplicate array");
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes");

  const int k = model.config.k_clusters;
  const Tensor2 ch = take_array(arrays, "modality.center_h");
  const Tensor2 cf = take_array(arrays, "modality.center_f");
  const Tensor2 members = take_array(arrays, "modality.members");
  const Tensor2 weights = take_array(arrays, "modality.weights");
  if (ch.rows() != k || ch.cols() != kRepDim || cf.rows() != k || cf.cols() != kRepDim ||
      members.rows() != k || members.cols() != 1 || weights.size() != 2)
    throw FormatError("checkpoint: modality arrays do not match K");
  model.modalities.w_h = weights(0, 0);
  model.modalities.w_f = weights(0, 1);
  for (int j = 0; j < k; ++j)
    model.modalities.modalities.push_back({j, ch.row(j).transpose(), cf.row(j).transpose(),
                                           static_cast<std::size_t>(members(j, 0))});

  Rng rng(0);
  model.encoders = EncoderBundle::initialize(0);
  model.classifier = Classifier(k);
  model.classifier.declare(model.classifier_params, rng);
  model.synthesizer.declare(model.synthesis_params, rng);
  model.decoder.declare(model.synthesis_params, rng);
  take_params(arrays, "enc/", model.encoders.params);
  take_params(arrays, "cls/", model.classifier_params);
  take_params(arrays, "syn/", model.synthesis_params);
  if (!arrays.empty()) throw FormatError("checkpoint: unexpected array " + arrays.begin()->first);
  try {
    model.check_consistency();
  } catch (const std::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return model;
}

void save_checkpoint(const ModelBundle& model, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_model(model));
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
  return deserialize_model(read_file_bytes(path));
}

// CRC of the payload, trailer excluded.
std::uint64_t model_hash(const ModelBundle& model) {
  const auto bytes = serialize_model(model);
  return crc64(std::span(bytes.data(), bytes.size() - 8));
}

}  // namespace pccs
