// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "image_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "text_encoder.hpp"  // weights_root
#include "util.hpp"
#include "weights_io.hpp"

namespace mmphase {

std::string to_string(BackboneKind kind) {
    switch (kind) {
        case BackboneKind::Vgg19: return "vgg19";
        case BackboneKind::Resnet50: return "resnet50";
        case BackboneKind::InceptionV3: return "inception-v3";
        case BackboneKind::InceptionV4: return "inception-v4";
        case BackboneKind::TinyTest: return "tiny-test";
    }
    throw std::logic_error("bad backbone kind");
}

BackboneKind backbone_kind_from_string(const std::string& s) {
    if (s == "vgg19") return BackboneKind::Vgg19;
    if (s == "resnet50") return BackboneKind::Resnet50;
    if (s == "inception-v3") return BackboneKind::InceptionV3;
    if (s == "inception-v4") return BackboneKind::InceptionV4;
    if (s == "tiny-test") return BackboneKind::TinyTest;
    throw ConfigError("unknown backbone kind '" + s + "'");
}

BackboneSpec BackboneSpec::for_kind(BackboneKind kind) {
    BackboneSpec spec;
    spec.kind = kind;
    switch (kind) {
        case BackboneKind::Vgg19:
            spec.input_size = 224;
            spec.pool_window = 7;  // final 7x7 map, pooled to 1x1
            spec.pretrained = true;
            spec.model_id = "vgg19";
            break;
        case BackboneKind::Resnet50:
            spec.input_size = 224;
            spec.pool_window = 7;  // global: the final map at 224 input is 7x7
            spec.pretrained = true;
            spec.model_id = "resnet50";
            break;
        case BackboneKind::InceptionV3:
            spec.input_size = 299;
            spec.pool_window = 8;
            spec.pretrained = true;
            spec.model_id = "inception-v3";
            break;
        case BackboneKind::InceptionV4:
            spec.input_size = 299;
            spec.pool_window = 8;
            spec.pretrained = true;
            spec.model_id = "inception-v4";
            break;
        case BackboneKind::TinyTest:
            spec.input_size = 32;
            spec.pool_window = 8;  // tiny backbone emits an 8x8 map
            spec.pretrained = false;
            break;
    }
    return spec;
}

void validate(const BackboneSpec& spec) {
    if (spec.pretrained && spec.input_size != 224 && spec.input_size != 299)
        throw ConfigError("pretrained backbones accept input_size 224 or 299");
    if (spec.input_size <= 0) throw ConfigError("input_size must be positive");
    if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
        throw ConfigError("dropout_rate must lie in [0, 1)");
    if (spec.projection_dim <= 0) throw ConfigError("image projection_dim must be positive");
    if (spec.pool_window <= 0) throw ConfigError("pool_window must be positive");
    if (spec.unfreeze_last_n_blocks != 0)
        throw ConfigError(
            "unfreeze_last_n_blocks is reserved; this build trains only the post-pool layers "
            "(backbones stay frozen)");
    if (spec.pretrained && spec.model_id.empty())
        throw ConfigError("pretrained backbone needs a model_id");
    for (double s : spec.channel_std)
        if (s <= 0.0) throw ConfigError("channel_std entries must be positive");
}

ImageTensor load_and_resize(const std::filesystem::path& path, const BackboneSpec& spec) {
    ImageTensor rgb = to_float_rgb(decode_image(path));
    return bilinear_resize(rgb, spec.input_size, spec.input_size);
}

ImageTensor normalize(const ImageTensor& img, const BackboneSpec& spec) {
    if (img.channels != 3) throw std::runtime_error("normalize expects 3 channels");
    if (img.height != spec.input_size || img.width != spec.input_size)
        throw std::runtime_error("normalize expects a " + std::to_string(spec.input_size) +
                                 "-pixel square image");
    ImageTensor out(img.height, img.width, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = (img.at(y, x, c) - spec.channel_mean[static_cast<std::size_t>(c)]) /
                                  spec.channel_std[static_cast<std::size_t>(c)];
    return out;
}

ImageTensor spatial_avg_pool(const ImageTensor& map, int window) {
    if (window <= 0) throw std::runtime_error("pool window must be positive");
    if (map.height % window != 0 || map.width % window != 0)
        throw std::runtime_error("feature map " + std::to_string(map.height) + "x" +
                                 std::to_string(map.width) + " not divisible by pool window " +
                                 std::to_string(window));
    ImageTensor out(map.height / window, map.width / window, map.channels);
    const double norm = 1.0 / (static_cast<double>(window) * window);
    for (int oy = 0; oy < out.height; ++oy)
        for (int ox = 0; ox < out.width; ++ox)
            for (int c = 0; c < map.channels; ++c) {
                double sum = 0.0;
                for (int dy = 0; dy < window; ++dy)
                    for (int dx = 0; dx < window; ++dx)
                        sum += map.at(oy * window + dy, ox * window + dx, c);
                out.at(oy, ox, c) = sum * norm;
            }
    return out;
}

// --- Conv ops ---------------------------------------------------------------

ImageTensor conv2d(const ImageTensor& in, const std::vector<double>& weights,
                   const std::vector<double>& bias, int out_channels, int kernel, int stride,
                   int pad) {
    if (kernel <= 0 || stride <= 0 || pad < 0) throw std::runtime_error("bad conv geometry");
    const std::size_t expected =
        static_cast<std::size_t>(out_channels) * in.channels * kernel * kernel;
    if (weights.size() != expected)
        throw std::runtime_error("conv weight count " + std::to_string(weights.size()) +
                                 " does not match geometry (" + std::to_string(expected) + ")");
    if (bias.size() != static_cast<std::size_t>(out_channels))
        throw std::runtime_error("conv bias count mismatch");
    const int oh = (in.height + 2 * pad - kernel) / stride + 1;
    const int ow = (in.width + 2 * pad - kernel) / stride + 1;
    if (oh <= 0 || ow <= 0) throw std::runtime_error("conv output would be empty");
    ImageTensor out(oh, ow, out_channels);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            for (int oc = 0; oc < out_channels; ++oc) {
                double sum = bias[static_cast<std::size_t>(oc)];
                for (int ic = 0; ic < in.channels; ++ic) {
                    for (int ky = 0; ky < kernel; ++ky) {
                        const int y = oy * stride + ky - pad;
                        if (y < 0 || y >= in.height) continue;
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int x = ox * stride + kx - pad;
                            if (x < 0 || x >= in.width) continue;
                            const std::size_t widx =
                                ((static_cast<std::size_t>(oc) * in.channels + ic) * kernel + ky) *
                                    kernel +
                                kx;
                            sum += weights[widx] * in.at(y, x, ic);
                        }
                    }
                }
                out.at(oy, ox, oc) = sum;
            }
        }
    }
    return out;
}

namespace {

template <class Reduce>
ImageTensor window_pool(const ImageTensor& in, int kernel, int stride, int pad, double init,
                        Reduce reduce, bool average) {
    if (kernel <= 0 || stride <= 0 || pad < 0) throw std::runtime_error("bad pool geometry");
    const int oh = (in.height + 2 * pad - kernel) / stride + 1;
    const int ow = (in.width + 2 * pad - kernel) / stride + 1;
    if (oh <= 0 || ow <= 0) throw std::runtime_error("pool output would be empty");
    ImageTensor out(oh, ow, in.channels);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
            for (int c = 0; c < in.channels; ++c) {
                double acc = init;
                int count = 0;
                for (int ky = 0; ky < kernel; ++ky) {
                    const int y = oy * stride + ky - pad;
                    if (y < 0 || y >= in.height) continue;
                    for (int kx = 0; kx < kernel; ++kx) {
                        const int x = ox * stride + kx - pad;
                        if (x < 0 || x >= in.width) continue;
                        acc = reduce(acc, in.at(y, x, c));
                        ++count;
                    }
                }
                if (count == 0) throw std::runtime_error("pool window fell outside the map");
                out.at(oy, ox, c) = average ? acc / count : acc;
            }
    return out;
}

}  // namespace

ImageTensor maxpool2d(const ImageTensor& in, int kernel, int stride, int pad) {
    return window_pool(
        in, kernel, stride, pad, -std::numeric_limits<double>::infinity(),
        [](double a, double b) { return std::max(a, b); }, false);
}

ImageTensor avgpool2d(const ImageTensor& in, int kernel, int stride, int pad) {
    return window_pool(
        in, kernel, stride, pad, 0.0, [](double a, double b) { return a + b; }, true);
}

ConvGraph parse_conv_graph(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    ConvGraph graph;
    graph.input_size = j.at("input_size").get<int>();
    graph.output = j.at("output").get<std::string>();
    for (const auto& n : j.at("nodes")) {
        ConvGraphNode node;
        node.name = n.at("name").get<std::string>();
        node.op = n.at("op").get<std::string>();
        if (n.contains("input")) node.inputs.push_back(n.at("input").get<std::string>());
        if (n.contains("inputs"))
            for (const auto& i : n.at("inputs")) node.inputs.push_back(i.get<std::string>());
        node.weights = n.value("weights", std::string());
        node.bias = n.value("bias", std::string());
        node.kernel = n.value("kernel", 0);
        node.stride = n.value("stride", 1);
        node.pad = n.value("pad", 0);
        graph.nodes.push_back(std::move(node));
    }
    return graph;
}

// --- Backbones --------------------------------------------------------------

namespace {

// Fixed seeded two-layer convolution: 32x32x3 -> 16x16x8 -> 8x8x16.
class TinyBackbone final : public ImageBackbone {
  public:
    TinyBackbone() {
        make_layer(3, 8, 0x696d'6701, w1_, b1_);
        make_layer(8, 16, 0x696d'6702, w2_, b2_);
    }

    ImageTensor features(const ImageTensor& normalized) const override {
        if (normalized.height != 32 || normalized.width != 32 || normalized.channels != 3)
            throw std::runtime_error("tiny backbone expects a normalized 32x32x3 input");
        ImageTensor a = conv2d(normalized, w1_, b1_, 8, 3, 2, 1);
        relu_inplace(a);
        ImageTensor b = conv2d(a, w2_, b2_, 16, 3, 2, 1);
        relu_inplace(b);
        return b;
    }

    int input_size() const override { return 32; }
    int feature_extent() const override { return 8; }
    int feature_channels() const override { return 16; }

  private:
    static void make_layer(int in_c, int out_c, std::uint64_t seed, std::vector<double>& w,
                           std::vector<double>& b) {
        Rng rng(seed);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in_c) * 9);
        w.resize(static_cast<std::size_t>(out_c) * in_c * 9);
        for (double& v : w) v = scale * rng.next_normal();
        b.assign(static_cast<std::size_t>(out_c), 0.0);
    }

    static void relu_inplace(ImageTensor& t) {
        for (double& v : t.values) v = std::max(v, 0.0);
    }

    std::vector<double> w1_, b1_, w2_, b2_;
};

class GraphBackbone final : public ImageBackbone {
  public:
    GraphBackbone(ConvGraph graph, std::vector<NamedTensor> tensors, std::string model_id)
        : graph_(std::move(graph)), tensors_(std::move(tensors)), model_id_(std::move(model_id)) {
        index_ = index_tensors(tensors_);
        // Probe once with a zero image to learn the output geometry and fail
        // fast on malformed graphs.
        ImageTensor probe = run(ImageTensor(graph_.input_size, graph_.input_size, 3));
        extent_ = probe.height;
        channels_ = probe.channels;
        if (probe.height != probe.width)
            throw std::runtime_error("backbone '" + model_id_ + "' emits a non-square map");
    }

    ImageTensor features(const ImageTensor& normalized) const override {
        if (normalized.height != graph_.input_size || normalized.width != graph_.input_size ||
            normalized.channels != 3)
            throw std::runtime_error("backbone '" + model_id_ + "' expects a normalized " +
                                     std::to_string(graph_.input_size) + "-pixel square input");
        return run(normalized);
    }

    int input_size() const override { return graph_.input_size; }
    int feature_extent() const override { return extent_; }
    int feature_channels() const override { return channels_; }

  private:
    const std::vector<double>& tensor_data(const std::string& name) const {
        return require_tensor(index_, name).data;
    }

    ImageTensor run(const ImageTensor& input) const {
        std::map<std::string, ImageTensor> values;
        values.emplace("input", input);
        auto value_of = [&](const std::string& name) -> const ImageTensor& {
            auto it = values.find(name);
            if (it == values.end())
                throw std::runtime_error("graph node references unknown value '" + name + "'");
            return it->second;
        };
        for (const ConvGraphNode& node : graph_.nodes) {
            if (node.inputs.empty())
                throw std::runtime_error("graph node '" + node.name + "' has no inputs");
            const ImageTensor& a = value_of(node.inputs.front());
            ImageTensor result;
            if (node.op == "conv") {
                const std::vector<double>& w = tensor_data(node.weights);
                const std::vector<double>& b = tensor_data(node.bias);
                result = conv2d(a, w, b, static_cast<int>(b.size()), node.kernel, node.stride,
                                node.pad);
            } else if (node.op == "scale_shift") {
                const std::vector<double>& s = tensor_data(node.weights);
                const std::vector<double>& sh = tensor_data(node.bias);
                if (s.size() != static_cast<std::size_t>(a.channels) || s.size() != sh.size())
                    throw std::runtime_error("scale_shift size mismatch at '" + node.name + "'");
                result = a;
                for (int y = 0; y < result.height; ++y)
                    for (int x = 0; x < result.width; ++x)
                        for (int c = 0; c < result.channels; ++c)
                            result.at(y, x, c) = result.at(y, x, c) * s[static_cast<std::size_t>(c)] +
                                                 sh[static_cast<std::size_t>(c)];
            } else if (node.op == "relu") {
                result = a;
                for (double& v : result.values) v = std::max(v, 0.0);
            } else if (node.op == "maxpool") {
                result = maxpool2d(a, node.kernel, node.stride, node.pad);
            } else if (node.op == "avgpool") {
                result = avgpool2d(a, node.kernel, node.stride, node.pad);
            } else if (node.op == "concat") {
                result = a;
                for (std::size_t i = 1; i < node.inputs.size(); ++i) {
                    const ImageTensor& b = value_of(node.inputs[i]);
                    if (b.height != result.height || b.width != result.width)
                        throw std::runtime_error("concat spatial mismatch at '" + node.name + "'");
                    ImageTensor merged(result.height, result.width, result.channels + b.channels);
                    for (int y = 0; y < merged.height; ++y)
                        for (int x = 0; x < merged.width; ++x) {
                            for (int c = 0; c < result.channels; ++c)
                                merged.at(y, x, c) = result.at(y, x, c);
                            for (int c = 0; c < b.channels; ++c)
                                merged.at(y, x, result.channels + c) = b.at(y, x, c);
                        }
                    result = std::move(merged);
                }
            } else if (node.op == "add") {
                result = a;
                for (std::size_t i = 1; i < node.inputs.size(); ++i) {
                    const ImageTensor& b = value_of(node.inputs[i]);
                    if (b.size() != result.size() || b.channels != result.channels)
                        throw std::runtime_error("add shape mismatch at '" + node.name + "'");
                    for (std::size_t v = 0; v < result.values.size(); ++v)
                        result.values[v] += b.values[v];
                }
            } else {
                throw std::runtime_error("unsupported graph op '" + node.op + "' at '" +
                                         node.name + "'");
            }
            values[node.name] = std::move(result);
        }
        return value_of(graph_.output);
    }

    ConvGraph graph_;
    std::vector<NamedTensor> tensors_;
    std::map<std::string, const NamedTensor*> index_;
    std::string model_id_;
    int extent_ = 0;
    int channels_ = 0;
};

}  // namespace

std::unique_ptr<ImageBackbone> make_image_backbone(const BackboneSpec& spec) {
    validate(spec);
    if (spec.kind == BackboneKind::TinyTest) return std::make_unique<TinyBackbone>();
    std::filesystem::path dir = weights_root() / spec.model_id;
    std::filesystem::path graph_file = dir / "graph.json";
    std::filesystem::path weight_file = dir / "weights.mmpw";
    if (!std::filesystem::exists(graph_file) || !std::filesystem::exists(weight_file))
        throw std::runtime_error(
            "pretrained backbone assets not found under " + dir.string() +
            " (need graph.json and weights.mmpw); set MMPHASE_WEIGHTS_DIR to your asset "
            "directory or convert weights as described in the README");
    ConvGraph graph = parse_conv_graph(read_text_file(graph_file));
    if (graph.input_size != spec.input_size)
        throw std::runtime_error("backbone asset input size " + std::to_string(graph.input_size) +
                                 " does not match configured " + std::to_string(spec.input_size));
    auto backbone = std::make_unique<GraphBackbone>(std::move(graph),
                                                    read_tensor_file(weight_file), spec.model_id);
    if (backbone->feature_extent() != spec.pool_window)
        throw std::runtime_error("backbone map extent " +
                                 std::to_string(backbone->feature_extent()) +
                                 " does not match configured pool_window " +
                                 std::to_string(spec.pool_window));
    return backbone;
}

// --- Trainable head ---------------------------------------------------------

ImageStack::ImageStack(const BackboneSpec& spec, Rng& init_rng)
    : spec_(spec), backbone_(make_image_backbone(spec)) {
    if (backbone_->feature_extent() % spec.pool_window != 0)
        throw ConfigError("pool_window " + std::to_string(spec.pool_window) +
                          " does not divide the backbone map extent " +
                          std::to_string(backbone_->feature_extent()));
    const int pooled_extent = backbone_->feature_extent() / spec.pool_window;
    feature_dim_ = pooled_extent * pooled_extent * backbone_->feature_channels();
    projection_ = DenseLayer(spec.projection_dim, feature_dim_);
    projection_.init(init_rng);
}

Vec ImageStack::extract_features(const std::filesystem::path& image_path) const {
    ImageTensor normalized = normalize(load_and_resize(image_path, spec_), spec_);
    ImageTensor map = backbone_->features(normalized);
    ImageTensor pooled = spatial_avg_pool(map, spec_.pool_window);
    Vec flat(static_cast<std::int64_t>(pooled.size()));
    for (std::size_t i = 0; i < pooled.values.size(); ++i)
        flat(static_cast<std::int64_t>(i)) = pooled.values[i];
    return flat;
}

Vec ImageStack::forward(const Vec& features, bool training, Rng& dropout_rng,
                        ImageStackCache& cache) {
    if (features.size() != feature_dim_)
        throw std::runtime_error("image feature size " + std::to_string(features.size()) +
                                 " does not match backbone output " +
                                 std::to_string(feature_dim_));
    cache.features = features;
    cache.dropped = dropout_forward(features, spec_.dropout_rate, training, dropout_rng,
                                    &cache.dropout);
    return projection_.forward(cache.dropped);
}

Vec ImageStack::infer(const std::filesystem::path& image_path) {
    ImageStackCache cache;
    Rng unused(0);
    return forward(extract_features(image_path), false, unused, cache);
}

void ImageStack::backward(const ImageStackCache& cache, const Vec& grad_out) {
    Vec grad_dropped = projection_.backward(cache.dropped, grad_out);
    dropout_backward(cache.dropout, grad_dropped);  // frozen upstream; gradient discarded
}

void ImageStack::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    projection_.collect(prefix + ".proj", out);
}

}  // namespace mmphase
