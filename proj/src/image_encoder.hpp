// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Image side of the pipeline: pluggable frozen convolutional backbones with
// fixed preprocessing (resize, [0,1] scaling, per-channel normalization),
// spatial average pooling, dropout and a trainable dense projection.

#ifndef MMPHASE_IMAGE_ENCODER_HPP
#define MMPHASE_IMAGE_ENCODER_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "image_io.hpp"
#include "nn.hpp"
#include "rng.hpp"

namespace mmphase {

enum class BackboneKind { Vgg19, Resnet50, InceptionV3, InceptionV4, TinyTest };

std::string to_string(BackboneKind kind);
BackboneKind backbone_kind_from_string(const std::string& s);

struct BackboneSpec {
    BackboneKind kind = BackboneKind::TinyTest;
    int input_size = 32;
    int pool_window = 8;
    double dropout_rate = 0.4;
    int projection_dim = 128;
    bool pretrained = false;
    // Channel statistics of the pretraining corpus; configuration, not code.
    std::array<double, 3> channel_mean = {0.485, 0.456, 0.406};
    std::array<double, 3> channel_std = {0.229, 0.224, 0.225};
    // The published weights were trained end to end; this build keeps the
    // backbone frozen, so any nonzero value is rejected at validation.
    int unfreeze_last_n_blocks = 0;
    std::string model_id;

    static BackboneSpec for_kind(BackboneKind kind);
};

void validate(const BackboneSpec& spec);

// Decode, bilinear-resize to input_size², replicate grayscale, drop alpha,
// scale to [0,1]. Throws with the path on undecodable files.
ImageTensor load_and_resize(const std::filesystem::path& path, const BackboneSpec& spec);

// Per-channel (x - mean) / std.
ImageTensor normalize(const ImageTensor& img, const BackboneSpec& spec);

// Non-overlapping window average; stride equals the window. Requires exact
// divisibility.
ImageTensor spatial_avg_pool(const ImageTensor& map, int window);

class ImageBackbone {
  public:
    virtual ~ImageBackbone() = default;

    // Normalized input_size² image in, spatial feature map out.
    virtual ImageTensor features(const ImageTensor& normalized) const = 0;

    virtual int input_size() const = 0;
    virtual int feature_extent() const = 0;    // spatial side of the output map
    virtual int feature_channels() const = 0;
};

std::unique_ptr<ImageBackbone> make_image_backbone(const BackboneSpec& spec);

// --- Conv-graph executor ----------------------------------------------------
//
// Pretrained backbones are described by a graph.json + weights.mmpw pair under
// $MMPHASE_WEIGHTS_DIR/<model_id>/. Supported ops: conv (with bias),
// scale_shift (folded batch norm), relu, maxpool, avgpool, concat, add.

struct ConvGraphNode {
    std::string name;
    std::string op;
    std::vector<std::string> inputs;
    std::string weights;  // tensor names for conv / scale_shift
    std::string bias;
    int kernel = 0;
    int stride = 1;
    int pad = 0;
};

struct ConvGraph {
    int input_size = 0;
    std::vector<ConvGraphNode> nodes;
    std::string output;
};

ConvGraph parse_conv_graph(const std::string& json_text);

ImageTensor conv2d(const ImageTensor& in, const std::vector<double>& weights,
                   const std::vector<double>& bias, int out_channels, int kernel, int stride,
                   int pad);
ImageTensor maxpool2d(const ImageTensor& in, int kernel, int stride, int pad);
ImageTensor avgpool2d(const ImageTensor& in, int kernel, int stride, int pad);

// --- Trainable head on top of the frozen backbone ---------------------------

struct ImageStackCache {
    Vec features;         // pooled + flattened backbone output
    DropoutMask dropout;
    Vec dropped;          // projection input
};

class ImageStack {
  public:
    ImageStack(const BackboneSpec& spec, Rng& init_rng);

    const BackboneSpec& spec() const { return spec_; }
    const ImageBackbone& backbone() const { return *backbone_; }
    int feature_dim() const { return feature_dim_; }

    // Frozen part: preprocess + backbone + average pool + flatten.
    Vec extract_features(const std::filesystem::path& image_path) const;

    // Trainable part: dropout (training mode only) + dense projection.
    Vec forward(const Vec& features, bool training, Rng& dropout_rng, ImageStackCache& cache);
    Vec infer(const std::filesystem::path& image_path);

    void backward(const ImageStackCache& cache, const Vec& grad_out);
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

    DenseLayer& projection() { return projection_; }

  private:
    BackboneSpec spec_;
    std::unique_ptr<ImageBackbone> backbone_;
    int feature_dim_ = 0;
    DenseLayer projection_;
};

}  // namespace mmphase

#endif
