#pragma once

#include <cmath>
#include <functional>

#include "amf/autodiff.hpp"
#include "amf/gradcheck.hpp"
#include "amf/random.hpp"

namespace amf::testing {

inline Tensor random_tensor(Rng& rng, Shape shape, Real scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = scale * rng.normal();
  return t;
}

/// Scalar probe: sum(out ∘ weights) with fixed random weights, so every
/// output coordinate contributes a distinct gradient.
inline Var weighted_sum(const Var& out, const Tensor& weights) {
  return sum(hadamard(out, Var::constant(weights)));
}

}  // namespace amf::testing

#include "amf/model.hpp"

namespace amf::testing {

/// Small fused model: D_c=8, h=2, C=3, with the requested visual kind.
inline ModelConfig small_config(VisualKind kind = VisualKind::features) {
  ModelConfig c;
  c.visual.kind = kind;
  c.visual.feature_dim = 6;
  c.visual.frame_height = 8;
  c.visual.frame_width = 8;
  c.visual.conv_channels = 3;
  c.visual.kernel_size = 3;
  c.visual.output_dim = 5;
  c.audio.input_dim = 4;
  c.audio.layers = {{6, 2, 1}};
  c.common_dim = 8;
  c.heads = 2;
  c.num_classes = 3;
  return c;
}

inline AVSample random_sample(Rng& rng, const ModelConfig& c, std::size_t audio_steps,
                              std::size_t label, std::size_t n_frames = 3) {
  AVSample s;
  s.clip_id = "clip" + std::to_string(rng.index(1000000));
  s.subject_id = "s0";
  if (c.visual.kind == VisualKind::features) {
    s.visual = VisualInput::features(random_tensor(rng, {1, c.visual.feature_dim}));
  } else {
    s.visual = VisualInput::frames(
        random_tensor(rng, {n_frames, c.visual.frame_height, c.visual.frame_width}));
  }
  s.audio = AudioInput{random_tensor(rng, {audio_steps, c.audio.input_dim})};
  s.label = label;
  return s;
}

}  // namespace amf::testing

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <unistd.h>

namespace amf::testing {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("amf_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Relative path -> file bytes, for whole-tree comparisons.
inline std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), root).string()] = read_bytes(e.path());
    }
  }
  return out;
}

}  // namespace amf::testing
