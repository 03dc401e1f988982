// Copyright 2026 The povm-ground Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "povm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace povm {

namespace {

constexpr char kMagic[8] = {'P', 'O', 'V', 'M', 'C', 'K', 'P', 'T'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("checkpoint: truncated file");
  return to_little(v);
}

void put_array(std::ostream& os, const std::string& name, const double* data, std::uint64_t rows, std::uint64_t cols) {
  put<std::uint32_t>(os, std::uint32_t(name.size()));
  os.write(name.data(), std::streamsize(name.size()));
  put<std::uint64_t>(os, rows);
  put<std::uint64_t>(os, cols);
  for (std::uint64_t i = 0; i < rows * cols; ++i) put<double>(os, data[i]);
}

}  // namespace

nlohmann::json to_json(const ModelDims& d) {
  return {{"hidden", d.hidden}, {"layers", d.layers}, {"dual_stream", d.dual_stream}};
}

ModelDims model_dims_from_json(const nlohmann::json& j) {
  return ModelDims{j.at("hidden").get<int>(), j.at("layers").get<int>(), j.at("dual_stream").get<bool>()};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
    nlohmann::json meta = ckpt.metadata;
    meta["model"] = to_json(ckpt.model.dims());
    const std::string text = meta.dump();
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kCheckpointVersion);
    put<std::uint64_t>(os, text.size());
    os.write(text.data(), std::streamsize(text.size()));
    std::uint32_t count = std::uint32_t(ckpt.extra.size());
    ckpt.model.visit([&](const std::string&, const auto&) { ++count; });
    put<std::uint32_t>(os, count);
    ckpt.model.visit([&](const std::string& name, const auto& x) {
      put_array(os, "model." + name, x.data(), std::uint64_t(x.rows()), std::uint64_t(x.cols()));
    });
    for (const auto& [name, x] : ckpt.extra)
      put_array(os, "extra." + name, x.data(), std::uint64_t(x.rows()), std::uint64_t(x.cols()));
    if (!os) throw std::runtime_error("checkpoint: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version");
  const auto len = get<std::uint64_t>(is);
  std::string text(len, '\0');
  if (!is.read(text.data(), std::streamsize(len))) throw std::runtime_error("checkpoint: truncated metadata");
  Checkpoint ckpt;
  ckpt.metadata = nlohmann::json::parse(text);
  ckpt.model = DualStreamModel(model_dims_from_json(ckpt.metadata.at("model")));
  std::map<std::string, Eigen::MatrixXd> arrays;
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t a = 0; a < count; ++a) {
    const auto n = get<std::uint32_t>(is);
    std::string name(n, '\0');
    if (!is.read(name.data(), n)) throw std::runtime_error("checkpoint: truncated name");
    const auto rows = get<std::uint64_t>(is), cols = get<std::uint64_t>(is);
    Eigen::MatrixXd x(rows, cols);
    for (std::uint64_t i = 0; i < rows * cols; ++i) x.data()[i] = get<double>(is);
    arrays[name] = std::move(x);
  }
  ckpt.model.visit([&](const std::string& name, auto& x) {
    auto it = arrays.find("model." + name);
    if (it == arrays.end()) throw std::runtime_error("checkpoint: missing array " + name);
    if (it->second.rows() != x.rows() || it->second.cols() != x.cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    std::copy(it->second.data(), it->second.data() + x.size(), x.data());
    arrays.erase(it);
  });
  for (auto& [name, x] : arrays) {
    if (name.rfind("extra.", 0) != 0) throw std::runtime_error("checkpoint: unexpected array " + name);
    ckpt.extra[name.substr(6)] = std::move(x);
  }
  return ckpt;
}

}  // namespace povm
