// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Early-fusion classifier: text stack and image stack concatenated into a
// joint vector, then dense 256 → ReLU → dense 5 → softmax. The unimodal
// baselines reuse the same stacks with their own heads.

#ifndef MMPHASE_FUSION_HPP
#define MMPHASE_FUSION_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "image_encoder.hpp"
#include "phase.hpp"
#include "text_encoder.hpp"

namespace mmphase {

enum class ModelKind { TextOnly, ImageOnly, Fusion };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct FusionConfig {
    TextEncoderConfig text;
    BackboneSpec image;
    int post_fusion_dense = 256;
    int num_classes = kNumClasses;

    int joint_dim() const { return text.projection_dim + image.projection_dim; }
};

void validate(const FusionConfig& config);

std::string fusion_config_to_json(ModelKind kind, const FusionConfig& config);
std::pair<ModelKind, FusionConfig> fusion_config_from_json(const std::string& text);

// Frozen-encoder outputs for one record; the trainable layers consume these.
struct EncodedExample {
    Mat text_embeddings;  // (seq_len, width); empty for image-only models
    Vec image_features;   // pooled backbone features; empty for text-only
};

struct ModelForwardCache {
    TextStackCache text;
    ImageStackCache image;
    Vec text_vec, image_vec;
    Vec head_in;      // joint vector (fusion), or the single modality's vector
    Vec dense1_out;   // pre-ReLU, two-layer heads only
    Vec relu_out;
    Vec logits;
};

class PhaseModel {
  public:
    PhaseModel(ModelKind kind, const FusionConfig& config, std::uint64_t init_seed);

    ModelKind kind() const { return kind_; }
    const FusionConfig& config() const { return config_; }

    // Frozen feature extraction (no trainable parameters involved).
    EncodedExample encode(const std::string& text, const std::filesystem::path& image_path) const;

    // Trainable forward pass from frozen features to logits.
    Vec logits(const EncodedExample& example, bool training, Rng& dropout_rng,
               ModelForwardCache& cache);

    // Accumulates parameter gradients for the trainable layers.
    void backward(const ModelForwardCache& cache, const Vec& grad_logits);

    // Concatenation, text first. Dimension-checked against the config.
    Vec fuse(const Vec& text_vec, const Vec& image_vec) const;

    // Two-layer head on a joint vector: dense → ReLU → dense → softmax.
    // Returns (probabilities, logits). The head has no stochastic layers, so
    // training mode only affects validation of the call.
    std::pair<Vec, Vec> classify_joint(const Vec& joint, bool training);

    std::pair<PhaseLabel, Vec> predict(const std::string& text,
                                       const std::filesystem::path& image_path);
    std::pair<PhaseLabel, Vec> predict_encoded(const EncodedExample& example);

    std::vector<ParamRef> params();
    static std::size_t head_param_count(const FusionConfig& config, ModelKind kind);

    void save(const std::filesystem::path& dir);
    static std::unique_ptr<PhaseModel> load(const std::filesystem::path& dir);

    TextStack* text_stack() { return text_.get(); }
    ImageStack* image_stack() { return image_.get(); }

  private:
    ModelKind kind_;
    FusionConfig config_;
    std::unique_ptr<TextStack> text_;
    std::unique_ptr<ImageStack> image_;
    DenseLayer head1_;  // absent for text-only models
    DenseLayer head2_;
};

// Argmax in canonical class order; ties resolved to the lowest index.
PhaseLabel argmax_label(const Vec& probs);

}  // namespace mmphase

#endif
