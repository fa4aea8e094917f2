// Copyright 2026 The MoNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "monet/model_head.hpp"
#include "monet/synth_data.hpp"

namespace monet::harness {

/// Raised for malformed or unreadable files. Messages carry the path and,
/// for binary formats, the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

// MFF1 feature files: "MFF1", u32 n, u32 C (little-endian), then n*C
// little-endian IEEE-754 doubles in row-major order.
inline constexpr char kFeatureMagic[4] = {'M', 'F', 'F', '1'};
inline constexpr std::size_t kFeatureHeaderBytes = 12;

std::string encode_features(const Matrix& x);
Matrix decode_features(const std::string& bytes, const std::string& origin = "<memory>");
void write_features(const std::filesystem::path& path, const Matrix& x);
Matrix read_features(const std::filesystem::path& path);

/// Writes bytes to path via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Dataset manifest (JSON): task echo plus train/test lists of
/// {path, label}, paths relative to the manifest's directory.
inline constexpr const char* kManifestName = "dataset.json";

/// Writes every sample as an MFF1 file under dir and the manifest at
/// dir/dataset.json. Returns the manifest path.
std::filesystem::path save_dataset(const Dataset& data, const std::filesystem::path& dir);
/// Accepts either a manifest path or the directory containing one.
Dataset load_dataset(const std::filesystem::path& path);

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::int64_t epochs = 0;
  std::int64_t warmup_steps = 0;
  double final_loss = 0.0;
};

/// Everything needed to reproduce evaluation outputs.
struct ModelFile {
  static constexpr int kFormatVersion = 1;

  HeadConfig head;
  ClassifierParams classifier;
  Index channels = 0;
  TrainingMetadata metadata;
};

// Model files: the line "MONET-MODEL 1", a one-line JSON header (variant,
// norm config, metadata and a tensor table of name/dtype/shape/offset), then
// the concatenated little-endian tensor blob.
std::string encode_model(const ModelFile& model);
ModelFile decode_model(const std::string& bytes, const std::string& origin = "<memory>");
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace monet::harness
