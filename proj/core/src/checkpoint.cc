// Copyright 2026 The PMA-URL Authors.
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

#include "pma/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pma/errors.h"

namespace pma {
namespace {

constexpr const char* kMagic = "pma-v1";

const char* DTypeName(DType d) { return d == DType::kF32 ? "f32" : "f64"; }

DType ParseDType(const std::string& s) {
  if (s == "f32") return DType::kF32;
  if (s == "f64") return DType::kF64;
  throw Error(ErrorCode::kBadCheckpoint, "unknown dtype '" + s + "'");
}

template <typename T>
constexpr DType DTypeOf() {
  return sizeof(T) == 4 ? DType::kF32 : DType::kF64;
}

std::string FormatShape(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::string out;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out;
}

Shape ParseShape(const std::string& s) {
  Shape shape;
  if (s == "scalar") return shape;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      shape.push_back(std::stoll(part));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kBadCheckpoint, "bad shape '" + s + "'");
    }
  }
  return shape;
}

// Appends the value in little-endian byte order.
template <typename U>
void AppendLittleEndian(std::string& out, U bits) {
  for (size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U ReadLittleEndian(const unsigned char* p) {
  U bits = 0;
  for (size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return bits;
}

}  // namespace

const CheckpointEntry* Checkpoint::Find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

template <typename T>
std::string SerializeCheckpoint(const std::string& config_json,
                                const NamedTensors<T>& tensors) {
  if (config_json.find('\n') != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "config must be a single line");
  }
  std::ostringstream header;
  header << kMagic << "\n";
  header << "config " << config_json << "\n";
  header << "tensors " << tensors.size() << "\n";
  size_t offset = 0;
  for (const auto& [name, t] : tensors) {
    size_t nbytes = t.size() * sizeof(T);
    header << name << " " << DTypeName(DTypeOf<T>()) << " "
           << FormatShape(t.shape()) << " " << offset << " " << nbytes << "\n";
    offset += nbytes;
  }
  header << "end\n";
  std::string out = header.str();
  out.reserve(out.size() + offset);
  using Bits = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
  for (const auto& entry : tensors) {
    for (T v : entry.second.data()) AppendLittleEndian(out, std::bit_cast<Bits>(v));
  }
  return out;
}

Checkpoint ParseCheckpoint(const std::string& bytes) {
  size_t pos = 0;
  auto next_line = [&]() -> std::string {
    size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) {
      throw Error(ErrorCode::kBadCheckpoint, "truncated header");
    }
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kMagic) {
    throw Error(ErrorCode::kBadCheckpoint, "missing pma-v1 version line");
  }
  Checkpoint ckpt;
  std::string config_line = next_line();
  if (config_line.rfind("config ", 0) != 0) {
    throw Error(ErrorCode::kBadCheckpoint, "missing config line");
  }
  ckpt.config_json = config_line.substr(7);
  std::string count_line = next_line();
  size_t count = 0;
  if (std::sscanf(count_line.c_str(), "tensors %zu", &count) != 1) {
    throw Error(ErrorCode::kBadCheckpoint, "missing tensor count");
  }
  struct Manifest {
    size_t offset;
    size_t nbytes;
  };
  std::vector<Manifest> manifest;
  for (size_t i = 0; i < count; ++i) {
    std::istringstream line(next_line());
    CheckpointEntry e;
    std::string dtype, shape;
    Manifest m{};
    if (!(line >> e.name >> dtype >> shape >> m.offset >> m.nbytes)) {
      throw Error(ErrorCode::kBadCheckpoint, "malformed manifest line");
    }
    e.dtype = ParseDType(dtype);
    e.shape = ParseShape(shape);
    size_t width = e.dtype == DType::kF32 ? 4 : 8;
    if (m.nbytes != static_cast<size_t>(NumElements(e.shape)) * width) {
      throw Error(ErrorCode::kBadCheckpoint,
                  "byte count of '" + e.name + "' does not match its shape");
    }
    ckpt.entries.push_back(std::move(e));
    manifest.push_back(m);
  }
  if (next_line() != "end") {
    throw Error(ErrorCode::kBadCheckpoint, "missing end of header");
  }
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  const size_t available = bytes.size() - pos;
  for (size_t i = 0; i < count; ++i) {
    auto& e = ckpt.entries[i];
    const Manifest& m = manifest[i];
    if (m.offset + m.nbytes > available) {
      throw Error(ErrorCode::kBadCheckpoint, "data of '" + e.name + "' truncated");
    }
    size_t n = static_cast<size_t>(NumElements(e.shape));
    e.values.resize(n);
    const unsigned char* p = data + m.offset;
    for (size_t j = 0; j < n; ++j) {
      if (e.dtype == DType::kF32) {
        e.values[j] = std::bit_cast<float>(ReadLittleEndian<uint32_t>(p + 4 * j));
      } else {
        e.values[j] = std::bit_cast<double>(ReadLittleEndian<uint64_t>(p + 8 * j));
      }
    }
  }
  return ckpt;
}

template <typename T>
void SaveCheckpoint(const std::filesystem::path& path,
                    const std::string& config_json,
                    const NamedTensors<T>& tensors) {
  std::string bytes = SerializeCheckpoint(config_json, tensors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCheckpoint(buffer.str());
}

template std::string SerializeCheckpoint(const std::string&,
                                         const NamedTensors<float>&);
template std::string SerializeCheckpoint(const std::string&,
                                         const NamedTensors<double>&);
template void SaveCheckpoint(const std::filesystem::path&, const std::string&,
                             const NamedTensors<float>&);
template void SaveCheckpoint(const std::filesystem::path&, const std::string&,
                             const NamedTensors<double>&);

}  // namespace pma
