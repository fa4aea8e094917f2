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

#include "monet/harness/formats.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace monet::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;


namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const std::string& in, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

double get_f64(const std::string& in, std::size_t offset) {
  return std::bit_cast<double>(get_u64(in, offset, 8));
}

[[noreturn]] void fail(const std::string& origin, std::size_t offset, const std::string& msg) {
  std::ostringstream os;
  os << origin << ": " << msg << " (at byte offset " << offset << ")";
  throw FormatError(os.str());
}

}  // namespace

std::string encode_features(const Matrix& x) {
  std::string out;
  out.reserve(kFeatureHeaderBytes + static_cast<std::size_t>(x.size()) * 8);
  out.append(kFeatureMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(x.rows()));
  put_u32(out, static_cast<std::uint32_t>(x.cols()));
  for (Index i = 0; i < x.size(); ++i) put_f64(out, x.data()[i]);
  return out;
}

Matrix decode_features(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < kFeatureHeaderBytes) {
    std::ostringstream os;
    os << "truncated header: expected " << kFeatureHeaderBytes << " bytes, got "
       << bytes.size();
    fail(origin, bytes.size(), os.str());
  }
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) fail(origin, 0, "bad magic, expected MFF1");
  const auto n = static_cast<Index>(get_u64(bytes, 4, 4));
  const auto c = static_cast<Index>(get_u64(bytes, 8, 4));
  const std::size_t expected = kFeatureHeaderBytes + static_cast<std::size_t>(n * c) * 8;
  if (bytes.size() != expected) {
    std::ostringstream os;
    os << (bytes.size() < expected ? "truncated" : "oversized") << " payload for " << n << "x"
       << c << ": expected " << expected << " bytes, got " << bytes.size();
    fail(origin, std::min(bytes.size(), expected), os.str());
  }
  Matrix x(n, c);
  for (Index i = 0; i < n * c; ++i) {
    x.data()[i] = get_f64(bytes, kFeatureHeaderBytes + static_cast<std::size_t>(i) * 8);
  }
  return x;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw FormatError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_features(const fs::path& path, const Matrix& x) {
  write_file_atomic(path, encode_features(x));
}

Matrix read_features(const fs::path& path) { return decode_features(read_file(path), path.string()); }

namespace {

json task_to_json(const TaskSpec& t) {
  return json{{"kind", to_string(t.kind)},
              {"classes", t.classes},
              {"locations", t.locations},
              {"channels", t.channels},
              {"train_per_class", t.train_per_class},
              {"test_per_class", t.test_per_class},
              {"mean_separation", t.mean_separation},
              {"spectrum_lo", t.spectrum_lo},
              {"spectrum_hi", t.spectrum_hi},
              {"seed", t.seed}};
}

TaskSpec task_from_json(const json& j) {
  TaskSpec t;
  t.kind = parse_task_kind(j.at("kind").get<std::string>());
  t.classes = j.at("classes").get<Index>();
  t.locations = j.at("locations").get<Index>();
  t.channels = j.at("channels").get<Index>();
  t.train_per_class = j.at("train_per_class").get<Index>();
  t.test_per_class = j.at("test_per_class").get<Index>();
  t.mean_separation = j.at("mean_separation").get<double>();
  t.spectrum_lo = j.at("spectrum_lo").get<double>();
  t.spectrum_hi = j.at("spectrum_hi").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  return t;
}

}  // namespace

fs::path save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "monet-dataset";
  manifest["version"] = 1;
  manifest["task"] = task_to_json(data.spec);
  auto emit = [&](const std::vector<Sample>& samples, const std::string& split) {
    json list = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::ostringstream name;
      name << split << "/" << split << "_" << i << ".mff";
      write_features(dir / name.str(), samples[i].features);
      list.push_back({{"path", name.str()}, {"label", samples[i].label}});
    }
    manifest[split] = std::move(list);
  };
  emit(data.train, "train");
  emit(data.test, "test");
  const fs::path path = dir / kManifestName;
  write_file_atomic(path, manifest.dump(1) + "\n");
  return path;
}

Dataset load_dataset(const fs::path& path) {
  const fs::path manifest_path = fs::is_directory(path) ? path / kManifestName : path;
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": invalid manifest: " + e.what());
  }
  if (manifest.value("format", "") != "monet-dataset") {
    throw FormatError(manifest_path.string() + ": not a monet-dataset manifest");
  }
  const fs::path base = manifest_path.parent_path();
  Dataset data;
  try {
    data.spec = task_from_json(manifest.at("task"));
    for (const char* split : {"train", "test"}) {
      auto& dest = std::string(split) == "train" ? data.train : data.test;
      for (const auto& entry : manifest.at(split)) {
        Sample s;
        s.features = read_features(base / entry.at("path").get<std::string>());
        s.label = entry.at("label").get<Index>();
        dest.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": invalid manifest: " + e.what());
  }
  return data;
}

namespace {

constexpr const char* kModelMagicLine = "MONET-MODEL 1";

struct TensorEntry {
  std::string name;
  std::string dtype;
  std::vector<Index> shape;
  std::size_t offset = 0;
  std::size_t bytes = 0;
};

}  // namespace

std::string encode_model(const ModelFile& model) {
  const HeadConfig& h = model.head;
  std::string blob;
  json tensors = json::array();
  auto add = [&](const std::string& name, const std::string& dtype, std::vector<Index> shape,
                 auto&& writer) {
    const std::size_t start = blob.size();
    writer();
    tensors.push_back({{"name", name},
                       {"dtype", dtype},
                       {"shape", shape},
                       {"offset", start},
                       {"bytes", blob.size() - start}});
  };
  const auto& w = model.classifier.weights;
  const auto& b = model.classifier.bias;
  add("classifier.weights", "f64", {w.rows(), w.cols()}, [&] {
    for (Index i = 0; i < w.size(); ++i) put_f64(blob, w.data()[i]);
  });
  add("classifier.bias", "f64", {b.size()}, [&] {
    for (Index i = 0; i < b.size(); ++i) put_f64(blob, b(i));
  });
  if (h.sketch) {
    for (int t : {1, 2}) {
      const auto hash = h.sketch->hash(t);
      add("sketch.h" + std::to_string(t), "i64", {static_cast<Index>(hash.size())}, [&] {
        for (auto v : hash) put_u64(blob, static_cast<std::uint64_t>(v));
      });
    }
    for (int t : {1, 2}) {
      const auto signs = h.sketch->signs(t);
      add("sketch.s" + std::to_string(t), "i8", {static_cast<Index>(signs.size())}, [&] {
        for (auto v : signs) blob.push_back(static_cast<char>(static_cast<std::int8_t>(v)));
      });
    }
  }

  json header;
  header["version"] = ModelFile::kFormatVersion;
  header["variant"] = {{"name", h.variant.name()},
                       {"pooling", to_string(h.variant.pooling)},
                       {"sketch_dim", h.variant.sketch_dim}};
  header["channels"] = model.channels;
  header["classes"] = model.classifier.classes();
  header["epsilon"] = h.epsilon;
  header["norm"] = {{"sqrt_guard", h.norm.sqrt_guard}, {"l2_guard", h.norm.l2_guard}};
  header["preprocess_signed_sqrt"] = h.preprocess_signed_sqrt;
  if (h.sketch) header["sketch_seed"] = h.sketch->seed();
  header["metadata"] = {{"seed", model.metadata.seed},
                        {"epochs", model.metadata.epochs},
                        {"warmup_steps", model.metadata.warmup_steps},
                        {"final_loss", model.metadata.final_loss}};
  header["tensors"] = tensors;
  header["blob_bytes"] = blob.size();

  std::string out = kModelMagicLine;
  out += "\n";
  out += header.dump();
  out += "\n";
  out += blob;
  return out;
}

ModelFile decode_model(const std::string& bytes, const std::string& origin) {
  const std::size_t first = bytes.find('\n');
  if (first == std::string::npos || bytes.compare(0, first, kModelMagicLine) != 0) {
    fail(origin, 0, "bad magic, expected \"MONET-MODEL 1\"");
  }
  const std::size_t second = bytes.find('\n', first + 1);
  if (second == std::string::npos) fail(origin, bytes.size(), "truncated header line");
  const std::size_t blob_start = second + 1;

  json header;
  try {
    header = json::parse(bytes.substr(first + 1, second - first - 1));
  } catch (const json::exception& e) {
    fail(origin, first + 1, std::string("invalid header: ") + e.what());
  }

  ModelFile model;
  std::vector<TensorEntry> tensors;
  try {
    if (header.at("version").get<int>() != ModelFile::kFormatVersion) {
      fail(origin, first + 1, "unsupported model version");
    }
    const auto blob_bytes = header.at("blob_bytes").get<std::size_t>();
    if (bytes.size() - blob_start != blob_bytes) {
      std::ostringstream os;
      os << "blob length mismatch: expected " << blob_bytes << " bytes, got "
         << bytes.size() - blob_start;
      fail(origin, bytes.size(), os.str());
    }
    const auto& v = header.at("variant");
    model.head.variant = VariantSpec::from_name(v.at("name").get<std::string>(),
                                                parse_pooling(v.at("pooling").get<std::string>()),
                                                v.at("sketch_dim").get<Index>());
    model.channels = header.at("channels").get<Index>();
    model.head.epsilon = header.at("epsilon").get<double>();
    model.head.norm.sqrt_guard = header.at("norm").at("sqrt_guard").get<double>();
    model.head.norm.l2_guard = header.at("norm").at("l2_guard").get<double>();
    model.head.preprocess_signed_sqrt = header.at("preprocess_signed_sqrt").get<bool>();
    const auto& meta = header.at("metadata");
    model.metadata.seed = meta.at("seed").get<std::uint64_t>();
    model.metadata.epochs = meta.at("epochs").get<std::int64_t>();
    model.metadata.warmup_steps = meta.at("warmup_steps").get<std::int64_t>();
    model.metadata.final_loss = meta.at("final_loss").get<double>();
    for (const auto& t : header.at("tensors")) {
      tensors.push_back(TensorEntry{t.at("name").get<std::string>(),
                                    t.at("dtype").get<std::string>(),
                                    t.at("shape").get<std::vector<Index>>(),
                                    t.at("offset").get<std::size_t>(),
                                    t.at("bytes").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    fail(origin, first + 1, std::string("invalid header: ") + e.what());
  }

  auto find = [&](const std::string& name) -> const TensorEntry& {
    for (const auto& t : tensors) {
      if (t.name == name) {
        if (t.offset + t.bytes > bytes.size() - blob_start) {
          fail(origin, blob_start + t.offset, "tensor " + name + " extends past end of file");
        }
        return t;
      }
    }
    fail(origin, blob_start, "missing tensor " + name);
  };
  auto count_of = [](const TensorEntry& t) {
    Index count = 1;
    for (Index d : t.shape) count *= d;
    return count;
  };
  auto expect_bytes = [&](const TensorEntry& t, std::size_t width) {
    if (t.bytes != static_cast<std::size_t>(count_of(t)) * width) {
      fail(origin, blob_start + t.offset, "tensor " + t.name + " has inconsistent size");
    }
  };

  const auto& tw = find("classifier.weights");
  expect_bytes(tw, 8);
  if (tw.shape.size() != 2) fail(origin, blob_start + tw.offset, "classifier.weights must be 2-D");
  model.classifier.weights.resize(tw.shape[0], tw.shape[1]);
  for (Index i = 0; i < count_of(tw); ++i) {
    model.classifier.weights.data()[i] = get_f64(bytes, blob_start + tw.offset + i * 8);
  }
  const auto& tb = find("classifier.bias");
  expect_bytes(tb, 8);
  model.classifier.bias.resize(count_of(tb));
  for (Index i = 0; i < count_of(tb); ++i) {
    model.classifier.bias(i) = get_f64(bytes, blob_start + tb.offset + i * 8);
  }

  if (model.head.variant.pooling == PoolingKind::kSketch) {
    std::vector<std::int64_t> h[2];
    std::vector<int> s[2];
    for (int t = 0; t < 2; ++t) {
      const auto& th = find("sketch.h" + std::to_string(t + 1));
      expect_bytes(th, 8);
      for (Index i = 0; i < count_of(th); ++i) {
        h[t].push_back(static_cast<std::int64_t>(get_u64(bytes, blob_start + th.offset + i * 8, 8)));
      }
      const auto& ts = find("sketch.s" + std::to_string(t + 1));
      expect_bytes(ts, 1);
      for (Index i = 0; i < count_of(ts); ++i) {
        s[t].push_back(static_cast<std::int8_t>(bytes[blob_start + ts.offset + i]));
      }
    }
    try {
      model.head.sketch = SketchParams(model.head.variant.sketch_dim,
                                       header.at("sketch_seed").get<std::uint64_t>(), h[0], h[1],
                                       s[0], s[1]);
    } catch (const std::exception& e) {
      fail(origin, blob_start, std::string("invalid sketch tables: ") + e.what());
    }
  }
  try {
    model.head.validate(model.channels);
  } catch (const Error& e) {
    fail(origin, first + 1, e.what());
  }
  if (model.classifier.dim() != descriptor_dim(model.head.variant, model.channels) ||
      model.classifier.bias.size() != model.classifier.classes()) {
    fail(origin, blob_start, "classifier shape inconsistent with variant");
  }
  return model;
}

void save_model(const fs::path& path, const ModelFile& model) {
  write_file_atomic(path, encode_model(model));
}

ModelFile load_model(const fs::path& path) { return decode_model(read_file(path), path.string()); }

}  // namespace monet::harness
