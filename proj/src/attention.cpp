#include "amf/attention.hpp"

#include <cmath>
#include <string>

#include "amf/errors.hpp"

namespace amf {

HeadResult attention_head(const Var& query, const Var& key, const Var& value,
                          const HeadParams& params) {
  if (key.value().rank() != 2 || key.value().rows() == 0) {
    throw EmptyKeys("attention_head: key sequence is empty");
  }
  if (key.value().rows() != value.value().rows()) {
    throw ShapeMismatch("attention_head: " + std::to_string(key.value().rows()) + " keys but " +
                        std::to_string(value.value().rows()) + " values");
  }
  Var q = matmul(query, params.query);
  Var k = matmul(key, params.key);
  Var v = matmul(value, params.value);
  const Real d_k = static_cast<Real>(params.key.value().cols());
  Var scores = scale(matmul(q, transpose(k)), Real(1) / std::sqrt(d_k));
  Var weights = softmax_rows(scores);
  return {matmul(weights, v), weights};
}

MultiHeadResult multi_head(const Var& query, const Var& key, const Var& value,
                           const AttentionParams& params) {
  if (params.heads.empty()) throw InvalidConfig("multi_head: no attention heads");
  MultiHeadResult result;
  std::vector<Var> outputs;
  outputs.reserve(params.heads.size());
  for (const auto& head : params.heads) {
    HeadResult r = attention_head(query, key, value, head);
    outputs.push_back(std::move(r.output));
    result.weights.push_back(std::move(r.weights));
  }
  result.output = matmul(concat_cols(outputs), params.output);
  return result;
}

MultiHeadResult va_attention(const Var& visual, const Var& audio, const AttentionParams& params) {
  if (visual.value().rank() != 2 || visual.value().rows() != 1) {
    throw ShapeMismatch("va_attention: visual query must be 1xD_c, got " +
                        shape_string(visual.shape()));
  }
  return multi_head(visual, audio, audio, params);
}

MultiHeadResult av_attention(const Var& audio, const Var& visual, const AttentionParams& params) {
  if (visual.value().rank() != 2 || visual.value().rows() != 1) {
    throw ShapeMismatch("av_attention: visual key must be 1xD_c, got " +
                        shape_string(visual.shape()));
  }
  return multi_head(audio, visual, visual, params);
}

ProjectedFeatures project_features(const Var& visual, const Var& audio, const FusionParams& params) {
  return {apply_linear(visual, params.project_visual), apply_linear(audio, params.project_audio)};
}

Var fuse_and_classify(const Var& visual, const Var& audio, const FusionParams& params) {
  const std::vector<Var> parts{visual, mean_pool_time(audio)};
  return apply_linear(concat_cols(parts), params.classifier);
}

}  // namespace amf
