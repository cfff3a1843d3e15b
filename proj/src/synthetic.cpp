#include "amf/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "amf/errors.hpp"
#include "amf/random.hpp"

namespace amf {

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidSpec(msg); };
  if (subjects == 0) fail("subjects must be at least 1");
  if (samples_per_subject == 0) fail("samples_per_subject must be at least 1");
  const std::size_t c = class_names.size();
  if (c < 1) fail("class_names is empty");
  for (std::size_t i = 0; i < c; ++i) {
    if (class_names[i].empty()) fail("class_names[" + std::to_string(i) + "] is empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (class_names[i] == class_names[j]) fail("class_names has duplicate '" + class_names[i] + "'");
    }
  }
  if (class_weights.size() != c) {
    fail("class_weights has " + std::to_string(class_weights.size()) + " entries for " +
         std::to_string(c) + " classes");
  }
  double total = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (!(class_weights[i] >= 0) || !std::isfinite(class_weights[i])) {
      fail("class_weights[" + std::to_string(i) + "] must be finite and non-negative");
    }
    total += class_weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "class_weights must sum to 1, got %.6g", total);
    fail(buf);
  }
  if (visual_groups.size() != c) fail("visual_groups must have one entry per class");
  if (audio_groups.size() != c) fail("audio_groups must have one entry per class");
  if (visual_kind == VisualKind::features) {
    if (visual_dim == 0) fail("visual_dim must be positive");
  } else {
    if (frames < 2) fail("frames must be at least 2");
    if (frame_height < 8 || frame_width < 8) fail("frame_height and frame_width must be at least 8");
  }
  if (audio_steps == 0) fail("audio_steps must be positive");
  if (audio_dim == 0) fail("audio_dim must be positive");
  for (auto [name, v] : {std::pair{"visual_signal", visual_signal}, {"audio_signal", audio_signal},
                         {"noise", noise}, {"subject_shift", subject_shift}}) {
    if (!(v >= 0) || !std::isfinite(v)) fail(std::string(name) + " must be finite and non-negative");
  }
}

Json to_json(const SyntheticSpec& s) {
  Json j;
  j["subjects"] = s.subjects;
  j["samples_per_subject"] = s.samples_per_subject;
  j["class_names"] = s.class_names;
  j["class_weights"] = s.class_weights;
  j["visual_groups"] = s.visual_groups;
  j["audio_groups"] = s.audio_groups;
  j["visual_kind"] = s.visual_kind == VisualKind::frames ? "frames" : "features";
  j["visual_dim"] = s.visual_dim;
  j["frames"] = s.frames;
  j["frame_height"] = s.frame_height;
  j["frame_width"] = s.frame_width;
  j["audio_steps"] = s.audio_steps;
  j["audio_dim"] = s.audio_dim;
  j["visual_signal"] = s.visual_signal;
  j["audio_signal"] = s.audio_signal;
  j["noise"] = s.noise;
  j["subject_shift"] = s.subject_shift;
  j["seed"] = s.seed;
  return j;
}

namespace {

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  const Json& v = j.at(key);
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw InvalidSpec(std::string(key) + " must be a non-negative integer");
  }
  try {
    out = v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidSpec(std::string(key) + " has the wrong type");
  }
}

}  // namespace

SyntheticSpec synthetic_spec_from_json(const Json& j) {
  try {
    check_known_keys(j, {"subjects", "samples_per_subject", "class_names", "class_weights",
                         "visual_groups", "audio_groups", "visual_kind", "visual_dim", "frames",
                         "frame_height", "frame_width", "audio_steps", "audio_dim", "visual_signal",
                         "audio_signal", "noise", "subject_shift", "seed"},
                     "synthetic spec");
  } catch (const InvalidConfig& e) {
    throw InvalidSpec(e.what());
  }
  SyntheticSpec s;
  read(j, "subjects", s.subjects);
  read(j, "samples_per_subject", s.samples_per_subject);
  read(j, "class_names", s.class_names);
  read(j, "class_weights", s.class_weights);
  read(j, "visual_groups", s.visual_groups);
  read(j, "audio_groups", s.audio_groups);
  std::string kind = "features";
  read(j, "visual_kind", kind);
  if (kind == "frames") {
    s.visual_kind = VisualKind::frames;
  } else if (kind != "features") {
    throw InvalidSpec("visual_kind must be 'features' or 'frames'");
  }
  read(j, "visual_dim", s.visual_dim);
  read(j, "frames", s.frames);
  read(j, "frame_height", s.frame_height);
  read(j, "frame_width", s.frame_width);
  read(j, "audio_steps", s.audio_steps);
  read(j, "audio_dim", s.audio_dim);
  read(j, "visual_signal", s.visual_signal);
  read(j, "audio_signal", s.audio_signal);
  read(j, "noise", s.noise);
  read(j, "subject_shift", s.subject_shift);
  read(j, "seed", s.seed);
  return s;
}

namespace {

std::vector<Real> gaussian_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<Real> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

std::size_t group_count(const std::vector<std::size_t>& groups) {
  std::size_t n = 0;
  for (auto g : groups) n = std::max(n, g + 1);
  return n;
}

// Action units loosely associated with each emotion, plus AU50 for speech.
const std::vector<std::vector<std::string>>& au_pools() {
  static const std::vector<std::vector<std::string>> pools{
      {"AU6", "AU12", "AU25"}, {"AU4", "AU7", "AU15"}, {"AU1", "AU2", "AU5"}, {"AU10", "AU14"}};
  return pools;
}

Emotion emotion_for(const std::string& name) {
  for (Emotion e : {Emotion::positive, Emotion::negative, Emotion::surprise, Emotion::others}) {
    if (name == to_string(e)) return e;
  }
  return Emotion::others;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const bool frames = spec.visual_kind == VisualKind::frames;
  const std::size_t visual_size =
      frames ? spec.frame_height * spec.frame_width : spec.visual_dim;

  Rng template_rng(derive_seed(spec.seed, "synth/templates"));
  std::vector<std::vector<Real>> visual_templates, audio_templates;
  for (std::size_t g = 0; g < group_count(spec.visual_groups); ++g) {
    visual_templates.push_back(gaussian_vector(template_rng, visual_size, spec.visual_signal));
  }
  for (std::size_t g = 0; g < group_count(spec.audio_groups); ++g) {
    audio_templates.push_back(gaussian_vector(template_rng, spec.audio_dim, spec.audio_signal));
  }

  SyntheticDataset out;
  Dataset& ds = out.dataset;
  ds.class_names = spec.class_names;
  ds.visual.kind = spec.visual_kind;
  ds.visual.feature_dim = frames ? 0 : spec.visual_dim;
  ds.visual.frame_height = frames ? spec.frame_height : 0;
  ds.visual.frame_width = frames ? spec.frame_width : 0;
  ds.audio_dim = spec.audio_dim;

  const std::size_t T = spec.audio_steps;
  const double bump_width = std::max(1.0, static_cast<double>(T) / 8);
  for (std::size_t subj = 0; subj < spec.subjects; ++subj) {
    Rng subject_rng(derive_seed(spec.seed, "synth/subject", subj));
    const auto visual_offset = gaussian_vector(subject_rng, visual_size, spec.subject_shift);
    const auto audio_offset = gaussian_vector(subject_rng, spec.audio_dim, spec.subject_shift);
    char subject_id[16];
    std::snprintf(subject_id, sizeof subject_id, "S%02zu", subj + 1);

    for (std::size_t k = 0; k < spec.samples_per_subject; ++k) {
      Rng rng(derive_seed(spec.seed, "synth/sample", subj * spec.samples_per_subject + k));
      AVSample s;
      char clip_id[32];
      std::snprintf(clip_id, sizeof clip_id, "S%02zu_%03zu", subj + 1, k + 1);
      s.clip_id = clip_id;
      s.subject_id = subject_id;
      s.label = rng.categorical(spec.class_weights);
      s.label_name = spec.class_names[s.label];

      const auto& vt = visual_templates[spec.visual_groups[s.label]];
      if (frames) {
        // Signal ramps in from onset (frame 0, no signal) to apex (last frame).
        Tensor clip({spec.frames, spec.frame_height, spec.frame_width});
        for (std::size_t f = 0; f < spec.frames; ++f) {
          const double ramp = static_cast<double>(f) / static_cast<double>(spec.frames - 1);
          for (std::size_t p = 0; p < visual_size; ++p) {
            clip[f * visual_size + p] = visual_offset[p] + ramp * vt[p] + spec.noise * rng.normal();
          }
        }
        s.visual = VisualInput::frames(std::move(clip));
      } else {
        Tensor v({1, spec.visual_dim});
        for (std::size_t p = 0; p < visual_size; ++p) {
          v[p] = visual_offset[p] + vt[p] + spec.noise * rng.normal();
        }
        s.visual = VisualInput::features(std::move(v));
      }

      // A short acoustic burst centred somewhere in the middle half of the clip.
      const auto& at = audio_templates[spec.audio_groups[s.label]];
      const double centre = static_cast<double>(T - 1) * rng.uniform(0.25, 0.75);
      Tensor a({T, spec.audio_dim});
      for (std::size_t t = 0; t < T; ++t) {
        const double d = (static_cast<double>(t) - centre) / bump_width;
        const double envelope = std::exp(-0.5 * d * d);
        for (std::size_t f = 0; f < spec.audio_dim; ++f) {
          a(t, f) = audio_offset[f] + envelope * at[f] + spec.noise * rng.normal();
        }
      }
      s.audio = AudioInput{std::move(a)};

      AnnotationRecord rec;
      rec.clip_id = s.clip_id;
      rec.subject_id = s.subject_id;
      rec.fps = 30;
      rec.onset_frame = static_cast<std::int64_t>(rng.index(300));
      const auto length = static_cast<std::int64_t>(2 + rng.index(14));  // <= 15 frames = 0.5 s
      rec.apex_frame = rec.onset_frame + static_cast<std::int64_t>(rng.index(length));
      rec.offset_frame = rec.onset_frame + length - 1;
      rec.emotion = emotion_for(s.label_name);
      const auto& pool = au_pools()[static_cast<std::size_t>(rec.emotion)];
      rec.au_codes.insert(pool[rng.index(pool.size())]);
      rec.au_codes.insert(pool[rng.index(pool.size())]);
      rec.au_codes.insert("AU50");

      ds.samples.push_back(std::move(s));
      out.annotations.push_back(std::move(rec));
    }
  }
  return out;
}

SyntheticDataset synthesize_dataset(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  SyntheticDataset data = generate_synthetic(spec);
  write_dataset(dir, data.dataset);
  write_annotations(dir / "annotations.jsonl", data.annotations);
  return data;
}

}  // namespace amf
