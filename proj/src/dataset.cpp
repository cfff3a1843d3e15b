#include "amf/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "amf/binary_io.hpp"
#include "amf/errors.hpp"
#include "amf/json_config.hpp"

namespace amf {

namespace fs = std::filesystem;

namespace {

bool safe_file_stem(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

void check_visual_shape(const Tensor& t, const VisualSpec& spec, const std::string& clip) {
  if (spec.kind == VisualKind::features) {
    if (t.rank() != 2 || t.shape()[0] != 1 || t.shape()[1] != spec.feature_dim) {
      throw DimMismatch("sample '" + clip + "': visual features " + shape_string(t.shape()) +
                        ", manifest declares [1x" + std::to_string(spec.feature_dim) + "]");
    }
  } else if (t.rank() != 3 || t.shape()[0] < 2 || t.shape()[1] != spec.frame_height ||
             t.shape()[2] != spec.frame_width) {
    throw DimMismatch("sample '" + clip + "': visual frames " + shape_string(t.shape()) +
                      ", manifest declares [N_f>=2 x " + std::to_string(spec.frame_height) + "x" +
                      std::to_string(spec.frame_width) + "]");
  }
}

void check_audio_shape(const Tensor& t, std::size_t dim, const std::string& clip) {
  if (t.rank() != 2 || t.shape()[0] == 0 || t.shape()[1] != dim) {
    throw DimMismatch("sample '" + clip + "': audio features " + shape_string(t.shape()) +
                      ", manifest declares [T_a x " + std::to_string(dim) + "]");
  }
}

Json visual_spec_json(const VisualSpec& v) {
  if (v.kind == VisualKind::features) return {{"kind", "features"}, {"dim", v.feature_dim}};
  return {{"kind", "frames"}, {"height", v.frame_height}, {"width", v.frame_width}};
}

template <class T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw MalformedFile(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedFile(where + ": field '" + key + "' has the wrong type");
  }
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  try {
    check_known_keys(j, allowed, where);
  } catch (const InvalidConfig& e) {
    throw MalformedFile(e.what());
  }
}

}  // namespace

void write_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir / "visual");
  fs::create_directories(dir / "audio");
  Json samples = Json::array();
  for (const auto& s : dataset.samples) {
    if (!safe_file_stem(s.clip_id)) {
      throw InvalidSpec("clip_id '" + s.clip_id + "' cannot be used as a file name");
    }
    if (s.label >= dataset.class_names.size()) {
      throw BadLabel("sample '" + s.clip_id + "': label " + std::to_string(s.label) +
                     " has no class name");
    }
    Json entry;
    entry["clip_id"] = s.clip_id;
    entry["subject_id"] = s.subject_id;
    entry["label"] = dataset.class_names[s.label];
    entry["visual"] = nullptr;
    entry["audio"] = nullptr;
    if (s.visual) {
      const std::string rel = "visual/" + s.clip_id + ".feat";
      write_feature_file(dir / rel, s.visual->data);
      entry["visual"] = rel;
    }
    if (s.audio) {
      const std::string rel = "audio/" + s.clip_id + ".feat";
      write_feature_file(dir / rel, s.audio->features);
      entry["audio"] = rel;
    }
    samples.push_back(std::move(entry));
  }
  Json manifest;
  manifest["format"] = "amf-manifest";
  manifest["version"] = kManifestVersion;
  manifest["class_names"] = dataset.class_names;
  manifest["visual"] = visual_spec_json(dataset.visual);
  manifest["audio"] = {{"dim", dataset.audio_dim}};
  manifest["samples"] = samples;
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error("cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << '\n';
}

Dataset load_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw MissingFile("manifest not found: '" + manifest_path.string() + "'");
  const std::string where = manifest_path.string();
  Json m;
  try {
    m = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(where + ": " + e.what());
  }
  check_keys(m, {"format", "version", "class_names", "visual", "audio", "samples"}, where);
  if (field<std::string>(m, "format", where) != "amf-manifest") {
    throw MalformedFile(where + ": not an amf-manifest");
  }
  const int version = field<int>(m, "version", where);
  if (version != kManifestVersion) {
    throw UnknownVersion(where + ": manifest version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kManifestVersion) + ")");
  }

  Dataset ds;
  ds.class_names = field<std::vector<std::string>>(m, "class_names", where);
  if (ds.class_names.size() < 1) throw MalformedFile(where + ": class_names is empty");
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
    if (!label_index.emplace(ds.class_names[i], i).second) {
      throw MalformedFile(where + ": duplicate class name '" + ds.class_names[i] + "'");
    }
  }

  const Json visual = field<Json>(m, "visual", where);
  const std::string kind = field<std::string>(visual, "kind", where + " visual");
  if (kind == "features") {
    check_keys(visual, {"kind", "dim"}, where + " visual");
    ds.visual.feature_dim = field<std::size_t>(visual, "dim", where + " visual");
  } else if (kind == "frames") {
    check_keys(visual, {"kind", "height", "width"}, where + " visual");
    ds.visual.kind = VisualKind::frames;
    ds.visual.frame_height = field<std::size_t>(visual, "height", where + " visual");
    ds.visual.frame_width = field<std::size_t>(visual, "width", where + " visual");
  } else {
    throw MalformedFile(where + ": visual.kind must be 'features' or 'frames'");
  }
  const Json audio = field<Json>(m, "audio", where);
  check_keys(audio, {"dim"}, where + " audio");
  ds.audio_dim = field<std::size_t>(audio, "dim", where + " audio");

  const fs::path base = manifest_path.parent_path();
  std::set<std::string> clip_ids;
  for (const auto& entry : field<Json>(m, "samples", where)) {
    check_keys(entry, {"clip_id", "subject_id", "label", "visual", "audio"}, where + " sample");
    AVSample s;
    s.clip_id = field<std::string>(entry, "clip_id", where + " sample");
    const std::string at = where + " sample '" + s.clip_id + "'";
    if (s.clip_id.empty() || !clip_ids.insert(s.clip_id).second) {
      throw MalformedFile(at + ": clip_id is empty or duplicated");
    }
    s.subject_id = field<std::string>(entry, "subject_id", at);
    if (s.subject_id.empty()) throw MalformedFile(at + ": subject_id is empty");
    s.label_name = field<std::string>(entry, "label", at);
    const auto label = label_index.find(s.label_name);
    if (label == label_index.end()) {
      throw BadLabel(at + ": label '" + s.label_name + "' is not a declared class");
    }
    s.label = label->second;

    auto load = [&](const char* key) -> std::optional<Tensor> {
      if (!entry.contains(key) || entry[key].is_null()) return std::nullopt;
      const fs::path file = base / field<std::string>(entry, key, at);
      if (!fs::exists(file)) {
        throw MissingFile("sample '" + s.clip_id + "': " + key + " feature file '" +
                          file.string() + "' does not exist");
      }
      return read_feature_file(file);
    };
    if (auto v = load("visual")) {
      check_visual_shape(*v, ds.visual, s.clip_id);
      s.visual = VisualInput{ds.visual.kind, std::move(*v)};
    }
    if (auto a = load("audio")) {
      check_audio_shape(*a, ds.audio_dim, s.clip_id);
      s.audio = AudioInput{std::move(*a)};
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset select_classes(const Dataset& dataset, const std::vector<std::string>& names) {
  std::vector<std::size_t> remap(dataset.class_names.size(), SIZE_MAX);
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::size_t found = SIZE_MAX;
    for (std::size_t j = 0; j < dataset.class_names.size(); ++j) {
      if (dataset.class_names[j] == names[i]) found = j;
    }
    if (found == SIZE_MAX) throw BadLabel("class '" + names[i] + "' is not in the dataset");
    remap[found] = i;
  }
  Dataset out = dataset;
  out.class_names = names;
  out.samples.clear();
  for (const auto& s : dataset.samples) {
    if (remap[s.label] == SIZE_MAX) continue;
    AVSample copy = s;
    copy.label = remap[s.label];
    out.samples.push_back(std::move(copy));
  }
  return out;
}

ClassDistribution class_distribution(std::span<const AVSample> samples,
                                     const std::vector<std::string>& class_names) {
  ClassDistribution d;
  d.class_names = class_names;
  d.counts.assign(class_names.size(), 0);
  d.fractions.assign(class_names.size(), 0.0);
  for (const auto& s : samples) {
    if (s.label >= class_names.size()) {
      throw BadLabel("sample '" + s.clip_id + "': label " + std::to_string(s.label) +
                     " out of range");
    }
    ++d.counts[s.label];
  }
  d.total = samples.size();
  if (d.total) {
    for (std::size_t c = 0; c < d.counts.size(); ++c) {
      d.fractions[c] = static_cast<double>(d.counts[c]) / static_cast<double>(d.total);
    }
  }
  return d;
}

std::string format_distribution(const ClassDistribution& d) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %8s %9s\n", "class", "count", "fraction");
  out += line;
  for (std::size_t c = 0; c < d.counts.size(); ++c) {
    std::snprintf(line, sizeof line, "%-12s %8zu %9.4f\n", d.class_names[c].c_str(), d.counts[c],
                  d.fractions[c]);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-12s %8zu\n", "total", d.total);
  return out + line;
}

}  // namespace amf
