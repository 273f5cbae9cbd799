// Copyright 2026 The EVE Authors. All Rights Reserved.
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

#include "eve/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "eve/error.hpp"

namespace eve {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw FormatError(path.string() + ": truncated header");
  return v;
}

void write_floats(std::ostream& out, const std::vector<float>& data) {
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
}

void read_floats(std::istream& in, std::vector<float>& data, const std::filesystem::path& path) {
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(float))))
    throw FormatError(path.string() + ": truncated tensor data");
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

nlohmann::json parse_header(std::istream& in, const std::filesystem::path& path) {
  const std::uint64_t len = read_u64(in, path);
  if (len > (1ULL << 32)) throw FormatError(path.string() + ": implausible header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw FormatError(path.string() + ": truncated header");
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header: " + e.what());
  }
}

void commit(const std::filesystem::path& tmp, const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

}  // namespace

const TensorBlock* CheckpointFile::find(const std::string& name) const {
  for (const TensorBlock& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

const TensorBlock& CheckpointFile::at(const std::string& name) const {
  const TensorBlock* t = find(name);
  if (!t) throw FormatError("checkpoint has no tensor " + name);
  return *t;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointFile& file) {
  nlohmann::json header;
  header["meta"] = file.meta;
  nlohmann::json manifest = nlohmann::json::array();
  for (const TensorBlock& t : file.tensors) {
    if (static_cast<Eigen::Index>(t.data.size()) != t.rows * t.cols)
      throw FormatError("tensor " + t.name + " has inconsistent size");
    manifest.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}});
  }
  header["manifest"] = std::move(manifest);
  const std::string text = header.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_out(tmp);
    out.write(kCheckpointMagic, 8);
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const TensorBlock& t : file.tensors) write_floats(out, t.data);
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  commit(tmp, path);
}

CheckpointFile read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  char magic[8] = {};
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw FormatError(path.string() + ": not an EVECKPT1 checkpoint");
  const nlohmann::json header = parse_header(in, path);
  CheckpointFile file;
  try {
    file.meta = header.at("meta");
    for (const auto& entry : header.at("manifest")) {
      TensorBlock t;
      t.name = entry.at("name").get<std::string>();
      t.rows = entry.at("shape").at(0).get<Eigen::Index>();
      t.cols = entry.at("shape").at(1).get<Eigen::Index>();
      if (t.rows < 0 || t.cols < 0) throw FormatError(path.string() + ": negative shape");
      t.data.resize(static_cast<std::size_t>(t.rows * t.cols));
      file.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad manifest: " + e.what());
  }
  for (TensorBlock& t : file.tensors) read_floats(in, t.data, path);
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(path.string() + ": trailing bytes after tensor data");
  return file;
}

template <class T>
TensorBlock to_block(const std::string& name, const nn::Matrix<T>& m) {
  TensorBlock t;
  t.name = name;
  t.rows = m.rows();
  t.cols = m.cols();
  t.data.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) t.data[i] = static_cast<float>(m.data()[i]);
  return t;
}

template <class T>
void from_block(const TensorBlock& block, nn::Matrix<T>& m) {
  if (block.rows != m.rows() || block.cols != m.cols())
    throw FormatError("tensor " + block.name + " has shape " + std::to_string(block.rows) + "x" +
                      std::to_string(block.cols) + ", expected " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(block.data[i]);
}

template TensorBlock to_block<float>(const std::string&, const nn::Matrix<float>&);
template TensorBlock to_block<double>(const std::string&, const nn::Matrix<double>&);
template void from_block<float>(const TensorBlock&, nn::Matrix<float>&);
template void from_block<double>(const TensorBlock&, nn::Matrix<double>&);

void write_representations(const std::filesystem::path& path, const RepresentationFile& file) {
  nlohmann::json header = file.extra;
  header["n"] = file.rows.rows();
  header["d"] = file.rows.cols();
  header["checkpoint_hash"] = file.checkpoint_hash;
  const std::string text = header.dump();
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_out(tmp);
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    std::vector<float> data(static_cast<std::size_t>(file.rows.size()));
    for (Eigen::Index i = 0; i < file.rows.size(); ++i)
      data[i] = static_cast<float>(file.rows.data()[i]);
    write_floats(out, data);
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  commit(tmp, path);
}

RepresentationFile read_representations(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  nlohmann::json header = parse_header(in, path);
  RepresentationFile file;
  Eigen::Index n = 0, d = 0;
  try {
    n = header.at("n").get<Eigen::Index>();
    d = header.at("d").get<Eigen::Index>();
    file.checkpoint_hash = header.at("checkpoint_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header: " + e.what());
  }
  if (n < 0 || d < 0) throw FormatError(path.string() + ": negative shape");
  header.erase("n");
  header.erase("d");
  header.erase("checkpoint_hash");
  file.extra = std::move(header);
  std::vector<float> data(static_cast<std::size_t>(n * d));
  read_floats(in, data, path);
  file.rows.resize(n, d);
  for (Eigen::Index i = 0; i < n * d; ++i) file.rows.data()[i] = data[i];
  return file;
}

}  // namespace eve
