#pragma once

#include <vector>

#include "amf/autodiff.hpp"
#include "amf/encoders.hpp"

namespace amf {

/// Learnable projections of one head. No biases.
struct HeadParams {
  Var query;  // [D_c×d_k]
  Var key;    // [D_c×d_k]
  Var value;  // [D_c×d_v]
};

struct AttentionParams {
  std::vector<HeadParams> heads;
  Var output;  // W^O: [(h·d_v)×D_c]
};

struct HeadResult {
  Var output;   // [n_q×d_v]
  Var weights;  // [n_q×n_k], row-stochastic
};

struct MultiHeadResult {
  Var output;                // [n_q×D_c]
  std::vector<Var> weights;  // one [n_q×n_k] matrix per head
};

/// softmax((Q·W^Q)(K·W^K)^T / sqrt(d_k)) · (V·W^V)
HeadResult attention_head(const Var& query, const Var& key, const Var& value,
                          const HeadParams& params);

/// Concat(head_1, ..., head_h) · W^O, heads in index order.
MultiHeadResult multi_head(const Var& query, const Var& key, const Var& value,
                           const AttentionParams& params);

/// Visual vector [1×D_c] queries the audio sequence [T_a×D_c]; result is 1×D_c.
MultiHeadResult va_attention(const Var& visual, const Var& audio, const AttentionParams& params);

/// Each audio step [T_a×D_c] queries the visual vector [1×D_c]; result is T_a×D_c.
/// With a single key every row equals Concat_i(v'·W_i^V)·W^O.
MultiHeadResult av_attention(const Var& audio, const Var& visual, const AttentionParams& params);

struct FusionParams {
  Linear project_visual;  // [D_v×D_c]
  Linear project_audio;   // [D_a×D_c]
  AttentionParams va;
  AttentionParams av;
  Linear classifier;      // [(2·D_c)×C]
};

struct ProjectedFeatures {
  Var visual;  // [1×D_c]
  Var audio;   // [T_a×D_c]
};

ProjectedFeatures project_features(const Var& visual, const Var& audio, const FusionParams& params);

/// Mean-pools the audio stream over time, concatenates [visual | pooled audio]
/// and applies the classifier: logits [1×C].
Var fuse_and_classify(const Var& visual, const Var& audio, const FusionParams& params);

}  // namespace amf
