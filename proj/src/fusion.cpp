// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "fusion.hpp"

#include <stdexcept>

#include "json.hpp"

#include "util.hpp"
#include "weights_io.hpp"

namespace mmphase {

using nlohmann::json;

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::TextOnly: return "text-only";
        case ModelKind::ImageOnly: return "image-only";
        case ModelKind::Fusion: return "fusion";
    }
    throw std::logic_error("bad model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "text-only") return ModelKind::TextOnly;
    if (s == "image-only") return ModelKind::ImageOnly;
    if (s == "fusion") return ModelKind::Fusion;
    throw ConfigError("unknown model kind '" + s + "'");
}

void validate(const FusionConfig& config) {
    validate(config.text);
    validate(config.image);
    if (config.num_classes != kNumClasses)
        throw ConfigError("num_classes is fixed at " + std::to_string(kNumClasses));
    if (config.post_fusion_dense <= 0) throw ConfigError("post_fusion_dense must be positive");
}

namespace {

json text_config_to_json(const TextEncoderConfig& c) {
    return json{{"kind", to_string(c.kind)},
                {"hidden_size", c.hidden_size},
                {"num_layers", c.num_layers},
                {"num_attention_heads", c.num_attention_heads},
                {"cased", c.cased},
                {"max_sequence_length", c.max_sequence_length},
                {"recurrent_hidden", c.recurrent_hidden},
                {"projection_dim", c.projection_dim},
                {"pooling", to_string(c.pooling)},
                {"freeze_encoder", c.freeze_encoder},
                {"model_id", c.model_id},
                {"tiny_vocab", c.tiny_vocab},
                {"tiny_hidden", c.tiny_hidden}};
}

TextEncoderConfig text_config_from_json(const json& j) {
    TextEncoderConfig c;
    if (j.contains("kind")) c.kind = text_encoder_kind_from_string(j.at("kind").get<std::string>());
    c.hidden_size = j.value("hidden_size", c.hidden_size);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.num_attention_heads = j.value("num_attention_heads", c.num_attention_heads);
    c.cased = j.value("cased", c.cased);
    c.max_sequence_length = j.value("max_sequence_length", c.max_sequence_length);
    c.recurrent_hidden = j.value("recurrent_hidden", c.recurrent_hidden);
    c.projection_dim = j.value("projection_dim", c.projection_dim);
    if (j.contains("pooling")) c.pooling = pooling_from_string(j.at("pooling").get<std::string>());
    c.freeze_encoder = j.value("freeze_encoder", c.freeze_encoder);
    c.model_id = j.value("model_id", c.model_id);
    c.tiny_vocab = j.value("tiny_vocab", c.tiny_vocab);
    c.tiny_hidden = j.value("tiny_hidden", c.tiny_hidden);
    return c;
}

json backbone_spec_to_json(const BackboneSpec& s) {
    return json{{"kind", to_string(s.kind)},
                {"input_size", s.input_size},
                {"pool_window", s.pool_window},
                {"dropout_rate", s.dropout_rate},
                {"projection_dim", s.projection_dim},
                {"pretrained", s.pretrained},
                {"channel_mean", s.channel_mean},
                {"channel_std", s.channel_std},
                {"unfreeze_last_n_blocks", s.unfreeze_last_n_blocks},
                {"model_id", s.model_id}};
}

BackboneSpec backbone_spec_from_json(const json& j) {
    BackboneSpec s;
    if (j.contains("kind")) s.kind = backbone_kind_from_string(j.at("kind").get<std::string>());
    s = BackboneSpec::for_kind(s.kind);
    s.input_size = j.value("input_size", s.input_size);
    s.pool_window = j.value("pool_window", s.pool_window);
    s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
    s.projection_dim = j.value("projection_dim", s.projection_dim);
    s.pretrained = j.value("pretrained", s.pretrained);
    if (j.contains("channel_mean")) s.channel_mean = j.at("channel_mean").get<std::array<double, 3>>();
    if (j.contains("channel_std")) s.channel_std = j.at("channel_std").get<std::array<double, 3>>();
    s.unfreeze_last_n_blocks = j.value("unfreeze_last_n_blocks", s.unfreeze_last_n_blocks);
    s.model_id = j.value("model_id", s.model_id);
    return s;
}

}  // namespace

std::string fusion_config_to_json(ModelKind kind, const FusionConfig& config) {
    json j{{"format_version", 1},
           {"model_kind", to_string(kind)},
           {"text", text_config_to_json(config.text)},
           {"image", backbone_spec_to_json(config.image)},
           {"post_fusion_dense", config.post_fusion_dense},
           {"num_classes", config.num_classes}};
    return j.dump(2) + "\n";
}

std::pair<ModelKind, FusionConfig> fusion_config_from_json(const std::string& text) {
    json j = json::parse(text);
    FusionConfig config;
    ModelKind kind = model_kind_from_string(j.at("model_kind").get<std::string>());
    if (j.contains("text")) config.text = text_config_from_json(j.at("text"));
    if (j.contains("image")) config.image = backbone_spec_from_json(j.at("image"));
    config.post_fusion_dense = j.value("post_fusion_dense", config.post_fusion_dense);
    config.num_classes = j.value("num_classes", config.num_classes);
    return {kind, config};
}

PhaseModel::PhaseModel(ModelKind kind, const FusionConfig& config, std::uint64_t init_seed)
    : kind_(kind), config_(config) {
    validate(config);
    Rng rng = Rng::stream(init_seed, {0x696e'6974});
    if (kind != ModelKind::ImageOnly) text_ = std::make_unique<TextStack>(config.text, rng);
    if (kind != ModelKind::TextOnly) image_ = std::make_unique<ImageStack>(config.image, rng);
    switch (kind) {
        case ModelKind::TextOnly:
            head2_ = DenseLayer(config.num_classes, config.text.projection_dim);
            break;
        case ModelKind::ImageOnly:
            head1_ = DenseLayer(config.post_fusion_dense, config.image.projection_dim);
            head2_ = DenseLayer(config.num_classes, config.post_fusion_dense);
            break;
        case ModelKind::Fusion:
            head1_ = DenseLayer(config.post_fusion_dense, config.joint_dim());
            head2_ = DenseLayer(config.num_classes, config.post_fusion_dense);
            break;
    }
    if (head1_.out_dim() > 0) head1_.init(rng);
    head2_.init(rng);
}

EncodedExample PhaseModel::encode(const std::string& text,
                                  const std::filesystem::path& image_path) const {
    EncodedExample example;
    if (text_) example.text_embeddings = text_->embed(text);
    if (image_) example.image_features = image_->extract_features(image_path);
    return example;
}

Vec PhaseModel::logits(const EncodedExample& example, bool training, Rng& dropout_rng,
                       ModelForwardCache& cache) {
    switch (kind_) {
        case ModelKind::TextOnly: {
            cache.text_vec = text_->forward(example.text_embeddings, cache.text);
            cache.head_in = cache.text_vec;
            cache.logits = head2_.forward(cache.head_in);
            return cache.logits;
        }
        case ModelKind::ImageOnly: {
            cache.image_vec =
                image_->forward(example.image_features, training, dropout_rng, cache.image);
            cache.head_in = cache.image_vec;
            break;
        }
        case ModelKind::Fusion: {
            cache.text_vec = text_->forward(example.text_embeddings, cache.text);
            cache.image_vec =
                image_->forward(example.image_features, training, dropout_rng, cache.image);
            cache.head_in = fuse(cache.text_vec, cache.image_vec);
            break;
        }
    }
    cache.dense1_out = head1_.forward(cache.head_in);
    cache.relu_out = relu(cache.dense1_out);
    cache.logits = head2_.forward(cache.relu_out);
    return cache.logits;
}

void PhaseModel::backward(const ModelForwardCache& cache, const Vec& grad_logits) {
    if (kind_ == ModelKind::TextOnly) {
        Vec grad_text = head2_.backward(cache.head_in, grad_logits);
        text_->backward(cache.text, grad_text);
        return;
    }
    Vec grad_relu = head2_.backward(cache.relu_out, grad_logits);
    Vec grad_dense1 = relu_backward(cache.dense1_out, grad_relu);
    Vec grad_in = head1_.backward(cache.head_in, grad_dense1);
    if (kind_ == ModelKind::ImageOnly) {
        image_->backward(cache.image, grad_in);
        return;
    }
    const int text_dim = config_.text.projection_dim;
    text_->backward(cache.text, grad_in.head(text_dim));
    image_->backward(cache.image, grad_in.tail(config_.image.projection_dim));
}

Vec PhaseModel::fuse(const Vec& text_vec, const Vec& image_vec) const {
    if (text_vec.size() != config_.text.projection_dim)
        throw std::runtime_error("text vector has " + std::to_string(text_vec.size()) +
                                 " dims, expected " + std::to_string(config_.text.projection_dim));
    if (image_vec.size() != config_.image.projection_dim)
        throw std::runtime_error("image vector has " + std::to_string(image_vec.size()) +
                                 " dims, expected " +
                                 std::to_string(config_.image.projection_dim));
    Vec joint(config_.joint_dim());
    joint << text_vec, image_vec;
    return joint;
}

std::pair<Vec, Vec> PhaseModel::classify_joint(const Vec& joint, bool training) {
    (void)training;  // the head has no stochastic layers
    if (kind_ == ModelKind::TextOnly)
        throw std::runtime_error("text-only models have no joint classifier head");
    if (joint.size() != head1_.in_dim())
        throw std::runtime_error("joint vector has " + std::to_string(joint.size()) +
                                 " dims, head expects " + std::to_string(head1_.in_dim()));
    if (!joint.allFinite()) throw std::runtime_error("non-finite joint vector");
    Vec logits = head2_.forward(relu(head1_.forward(joint)));
    return {softmax(logits), logits};
}

std::pair<PhaseLabel, Vec> PhaseModel::predict(const std::string& text,
                                               const std::filesystem::path& image_path) {
    return predict_encoded(encode(text, image_path));
}

std::pair<PhaseLabel, Vec> PhaseModel::predict_encoded(const EncodedExample& example) {
    ModelForwardCache cache;
    Rng unused(0);
    Vec probs = softmax(logits(example, false, unused, cache));
    return {argmax_label(probs), probs};
}

PhaseLabel argmax_label(const Vec& probs) {
    if (probs.size() != kNumClasses) throw std::runtime_error("expected 5 class probabilities");
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i)
        if (probs(i) > probs(best)) best = i;
    return phase_from_index(best);
}

std::vector<ParamRef> PhaseModel::params() {
    std::vector<ParamRef> out;
    if (text_) text_->collect_params("text", out);
    if (image_) image_->collect_params("image", out);
    if (head1_.out_dim() > 0) head1_.collect("head.dense1", out);
    head2_.collect("head.dense2", out);
    return out;
}

std::size_t PhaseModel::head_param_count(const FusionConfig& config, ModelKind kind) {
    const std::size_t d = static_cast<std::size_t>(config.post_fusion_dense);
    const std::size_t k = static_cast<std::size_t>(config.num_classes);
    switch (kind) {
        case ModelKind::TextOnly:
            return k * static_cast<std::size_t>(config.text.projection_dim) + k;
        case ModelKind::ImageOnly:
            return d * static_cast<std::size_t>(config.image.projection_dim) + d + k * d + k;
        case ModelKind::Fusion:
            return d * static_cast<std::size_t>(config.joint_dim()) + d + k * d + k;
    }
    throw std::logic_error("bad model kind");
}

void PhaseModel::save(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "config.json", fusion_config_to_json(kind_, config_));
    std::vector<NamedTensor> tensors;
    for (const ParamRef& p : params()) tensors.push_back(tensor_from_mat(p.name, *p.value));
    write_tensor_file(dir / "weights.mmpw", tensors);
}

std::unique_ptr<PhaseModel> PhaseModel::load(const std::filesystem::path& dir) {
    std::filesystem::path config_file = dir / "config.json";
    if (!std::filesystem::exists(config_file))
        throw std::runtime_error("not a model directory (no config.json): " + dir.string());
    auto [kind, config] = fusion_config_from_json(read_text_file(config_file));
    auto model = std::make_unique<PhaseModel>(kind, config, 0);
    std::vector<NamedTensor> tensors = read_tensor_file(dir / "weights.mmpw");
    auto index = index_tensors(tensors);
    std::vector<ParamRef> params = model->params();
    if (params.size() != tensors.size())
        throw std::runtime_error("weight file has " + std::to_string(tensors.size()) +
                                 " tensors, model expects " + std::to_string(params.size()));
    for (ParamRef& p : params) {
        Mat loaded = mat_from_tensor(require_tensor(index, p.name));
        if (loaded.rows() != p.value->rows() || loaded.cols() != p.value->cols())
            throw std::runtime_error("tensor '" + p.name + "' shape mismatch on load");
        *p.value = std::move(loaded);
    }
    return model;
}

}  // namespace mmphase
