#include "amf/model.hpp"

#include <cmath>

#include "amf/errors.hpp"
#include "amf/random.hpp"

namespace amf {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::visual: return "visual";
    case Modality::audio: return "audio";
    case Modality::fused: return "fused";
  }
  return "?";
}

Modality parse_modality(std::string_view name) {
  if (name == "visual") return Modality::visual;
  if (name == "audio") return Modality::audio;
  if (name == "fused") return Modality::fused;
  throw InvalidConfig("unknown modality '" + std::string(name) + "' (visual, audio, fused)");
}

std::size_t ModelConfig::head_key_dim() const { return key_dim ? key_dim : common_dim / heads; }
std::size_t ModelConfig::head_value_dim() const { return value_dim ? value_dim : common_dim / heads; }

void ModelConfig::validate() const {
  visual.validate();
  audio.validate();
  if (common_dim == 0) throw InvalidConfig("common_dim must be positive");
  if (heads == 0) throw InvalidConfig("heads must be at least 1");
  if ((key_dim == 0 || value_dim == 0) && common_dim % heads != 0) {
    throw InvalidConfig("common_dim " + std::to_string(common_dim) + " is not divisible by heads " +
                        std::to_string(heads) + "; set key_dim and value_dim explicitly");
  }
  if (num_classes < 2) throw InvalidConfig("num_classes must be at least 2");
}

namespace {

Var xavier(Rng& rng, Shape shape, std::size_t fan_in, std::size_t fan_out) {
  Tensor t(std::move(shape));
  const Real limit = std::sqrt(Real(6) / static_cast<Real>(fan_in + fan_out));
  for (auto& x : t.data()) x = rng.uniform(-limit, limit);
  return Var::parameter(std::move(t));
}

Linear make_linear(Rng& rng, std::size_t in, std::size_t out) {
  return {xavier(rng, {in, out}, in, out), Var::parameter(Tensor({1, out}))};
}

AttentionParams make_attention(Rng& rng, const ModelConfig& c) {
  const std::size_t dk = c.head_key_dim(), dv = c.head_value_dim(), dc = c.common_dim;
  AttentionParams p;
  for (std::size_t i = 0; i < c.heads; ++i) {
    HeadParams head;
    head.query = xavier(rng, {dc, dk}, dc, dk);
    head.key = xavier(rng, {dc, dk}, dc, dk);
    head.value = xavier(rng, {dc, dv}, dc, dv);
    p.heads.push_back(std::move(head));
  }
  p.output = xavier(rng, {c.heads * dv, dc}, c.heads * dv, dc);
  return p;
}

void add_linear(std::vector<NamedParameter>& out, const std::string& name, const Linear& l) {
  out.push_back({name + ".weight", l.weight});
  out.push_back({name + ".bias", l.bias});
}

void add_attention(std::vector<NamedParameter>& out, const std::string& name,
                   const AttentionParams& p) {
  for (std::size_t i = 0; i < p.heads.size(); ++i) {
    const std::string head = name + ".head" + std::to_string(i);
    out.push_back({head + ".query", p.heads[i].query});
    out.push_back({head + ".key", p.heads[i].key});
    out.push_back({head + ".value", p.heads[i].value});
  }
  out.push_back({name + ".output", p.output});
}

}  // namespace

FusionModel::FusionModel(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(derive_seed(init_seed, "init"));
  const ModelConfig& c = config_;

  encoders.visual.config = c.visual;
  if (c.visual.kind == VisualKind::frames) {
    const std::size_t k = c.visual.kernel_size, ch = c.visual.conv_channels;
    encoders.visual.conv_kernels = xavier(rng, {ch, k, k}, k * k, ch * k * k);
    encoders.visual.conv_bias = Var::parameter(Tensor({1, ch}));
    encoders.visual.fc = make_linear(rng, ch, c.visual.output_dim);
  }

  encoders.audio.config = c.audio;
  std::size_t in = c.audio.input_dim;
  for (const auto& layer : c.audio.layers) {
    ConvLayer conv;
    conv.kernels = xavier(rng, {layer.channels, layer.width, in}, layer.width * in,
                          layer.width * layer.channels);
    conv.bias = Var::parameter(Tensor({1, layer.channels}));
    conv.stride = layer.stride;
    encoders.audio.layers.push_back(std::move(conv));
    in = layer.channels;
  }

  fusion.project_visual = make_linear(rng, c.visual.out_dim(), c.common_dim);
  fusion.project_audio = make_linear(rng, c.audio.out_dim(), c.common_dim);
  fusion.va = make_attention(rng, c);
  fusion.av = make_attention(rng, c);
  fusion.classifier = make_linear(rng, 2 * c.common_dim, c.num_classes);
  visual_head = make_linear(rng, c.common_dim, c.num_classes);
  audio_head = make_linear(rng, c.common_dim, c.num_classes);
}

FusionModel::FusionModel(const FusionModel& other) : FusionModel(other.config_, 0) {
  copy_values_from(other);
}

FusionModel& FusionModel::operator=(const FusionModel& other) {
  if (this != &other) *this = FusionModel(other);
  return *this;
}

std::vector<NamedParameter> FusionModel::named_parameters() const {
  std::vector<NamedParameter> out;
  if (config_.visual.kind == VisualKind::frames) {
    out.push_back({"visual.conv.kernels", encoders.visual.conv_kernels});
    out.push_back({"visual.conv.bias", encoders.visual.conv_bias});
    add_linear(out, "visual.fc", encoders.visual.fc);
  }
  for (std::size_t i = 0; i < encoders.audio.layers.size(); ++i) {
    const std::string name = "audio.conv" + std::to_string(i);
    out.push_back({name + ".kernels", encoders.audio.layers[i].kernels});
    out.push_back({name + ".bias", encoders.audio.layers[i].bias});
  }
  add_linear(out, "fusion.project_visual", fusion.project_visual);
  add_linear(out, "fusion.project_audio", fusion.project_audio);
  add_attention(out, "fusion.va", fusion.va);
  add_attention(out, "fusion.av", fusion.av);
  add_linear(out, "fusion.classifier", fusion.classifier);
  add_linear(out, "visual_head", visual_head);
  add_linear(out, "audio_head", audio_head);
  return out;
}

std::vector<NamedParameter> FusionModel::named_parameters(Modality modality) const {
  auto starts_with = [](const std::string& s, std::string_view prefix) {
    return s.compare(0, prefix.size(), prefix) == 0;
  };
  std::vector<NamedParameter> out;
  for (auto& p : named_parameters()) {
    const std::string& n = p.name;
    bool keep = false;
    switch (modality) {
      case Modality::visual:
        keep = starts_with(n, "visual.") || starts_with(n, "fusion.project_visual.") ||
               starts_with(n, "visual_head.");
        break;
      case Modality::audio:
        keep = starts_with(n, "audio.") || starts_with(n, "fusion.project_audio.") ||
               starts_with(n, "audio_head.");
        break;
      case Modality::fused:
        keep = starts_with(n, "visual.") || starts_with(n, "audio.") || starts_with(n, "fusion.");
        break;
    }
    if (keep) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Var> FusionModel::parameters(Modality modality) const {
  std::vector<Var> out;
  for (auto& p : named_parameters(modality)) out.push_back(std::move(p.var));
  return out;
}

void FusionModel::zero_grad() {
  for (auto& p : named_parameters()) p.var.zero_grad();
}

void FusionModel::copy_values_from(const FusionModel& other) {
  auto mine = named_parameters();
  auto theirs = other.named_parameters();
  if (mine.size() != theirs.size()) throw ShapeMismatch("copy_values_from: parameter sets differ");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].name != theirs[i].name || mine[i].var.shape() != theirs[i].var.shape()) {
      throw ShapeMismatch("copy_values_from: parameter " + mine[i].name + " does not match " +
                          theirs[i].name);
    }
    mine[i].var.mutable_value() = theirs[i].var.value();
  }
}

namespace {

const VisualInput& require_visual(const AVSample& s) {
  if (!s.visual) throw MissingModality("sample '" + s.clip_id + "' has no visual input");
  return *s.visual;
}

const AudioInput& require_audio(const AVSample& s) {
  if (!s.audio) throw MissingModality("sample '" + s.clip_id + "' has no audio input");
  return *s.audio;
}

}  // namespace

Var forward(const AVSample& sample, const FusionModel& model, Modality modality) {
  switch (modality) {
    case Modality::visual: {
      Var v = encode_visual(require_visual(sample), model.encoders.visual);
      return apply_linear(apply_linear(v, model.fusion.project_visual), model.visual_head);
    }
    case Modality::audio: {
      Var a = encode_audio(require_audio(sample), model.encoders.audio);
      Var pooled = mean_pool_time(apply_linear(a, model.fusion.project_audio));
      return apply_linear(pooled, model.audio_head);
    }
    case Modality::fused: {
      Var v = encode_visual(require_visual(sample), model.encoders.visual);
      Var a = encode_audio(require_audio(sample), model.encoders.audio);
      ProjectedFeatures p = project_features(v, a, model.fusion);
      Var enriched_visual = va_attention(p.visual, p.audio, model.fusion.va).output;
      Var grounded_audio = av_attention(p.audio, p.visual, model.fusion.av).output;
      return fuse_and_classify(enriched_visual, grounded_audio, model.fusion);
    }
  }
  throw InvalidConfig("unknown modality");
}

std::size_t argmax(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

std::size_t predict(const AVSample& sample, const FusionModel& model, Modality modality) {
  return argmax(forward(sample, model, modality).value());
}

}  // namespace amf
