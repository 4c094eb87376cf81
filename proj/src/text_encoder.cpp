// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors

#include "text_encoder.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "util.hpp"
#include "weights_io.hpp"

namespace mmphase {
namespace {

// Special ids of the tiny encoder; real vocabulary ids start after these.
constexpr int kTinyPad = 0;
constexpr int kTinyCls = 1;
constexpr int kTinySep = 2;
constexpr int kTinyUnk = 3;
constexpr int kTinyReserved = 4;

}  // namespace

std::string to_string(TextEncoderKind kind) {
    return kind == TextEncoderKind::PretrainedTransformer ? "pretrained-transformer" : "tiny-test";
}

TextEncoderKind text_encoder_kind_from_string(const std::string& s) {
    if (s == "pretrained-transformer") return TextEncoderKind::PretrainedTransformer;
    if (s == "tiny-test") return TextEncoderKind::TinyTest;
    throw ConfigError("unknown text encoder kind '" + s + "'");
}

std::string to_string(RecurrentPooling pooling) {
    switch (pooling) {
        case RecurrentPooling::FinalState: return "final-state";
        case RecurrentPooling::Mean: return "mean";
        case RecurrentPooling::Max: return "max";
    }
    throw std::logic_error("bad pooling");
}

RecurrentPooling pooling_from_string(const std::string& s) {
    if (s == "final-state") return RecurrentPooling::FinalState;
    if (s == "mean") return RecurrentPooling::Mean;
    if (s == "max") return RecurrentPooling::Max;
    throw ConfigError("unknown recurrent pooling '" + s + "'");
}

int TextEncoderConfig::embedding_size() const {
    return kind == TextEncoderKind::TinyTest ? tiny_hidden : hidden_size;
}

TextEncoderConfig pretrained_text_config() {
    TextEncoderConfig c;
    c.kind = TextEncoderKind::PretrainedTransformer;
    return c;
}

void validate(const TextEncoderConfig& config) {
    if (config.projection_dim <= 0) throw ConfigError("text projection_dim must be positive");
    if (config.max_sequence_length < 2)
        throw ConfigError("max_sequence_length must be at least 2 (boundary tokens)");
    if (config.recurrent_hidden <= 0) throw ConfigError("recurrent_hidden must be positive");
    if (config.cased) throw ConfigError("only uncased text encoders are supported");
    if (config.kind == TextEncoderKind::PretrainedTransformer) {
        if (config.num_layers != 12 || config.hidden_size != 768 ||
            config.num_attention_heads != 12)
            throw ConfigError(
                "pretrained-transformer kind is pinned to 12 layers, 768 hidden, 12 heads "
                "(uncased base)");
        if (config.model_id.empty()) throw ConfigError("pretrained encoder needs a model_id");
    } else {
        if (config.tiny_hidden <= 0) throw ConfigError("tiny_hidden must be positive");
        if (config.tiny_vocab <= kTinyReserved)
            throw ConfigError("tiny_vocab must exceed the reserved special ids");
    }
}

std::filesystem::path weights_root() {
    if (const char* env = std::getenv("MMPHASE_WEIGHTS_DIR"); env && *env)
        return std::filesystem::path(env);
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".cache" / "mmphase" / "weights";
    return std::filesystem::path(".mmphase-weights");
}

// --- Tiny deterministic stand-in -------------------------------------------

namespace {

class TinyTextEncoder final : public TextEncoder {
  public:
    explicit TinyTextEncoder(const TextEncoderConfig& config) : config_(config) {
        const int h = config.tiny_hidden;
        // Fixed tables: the stand-in has no learned weights, only a
        // reproducible embedding per (token id, position).
        Rng tok_rng = Rng::stream(0x7469'6e79, {1, static_cast<std::uint64_t>(h),
                                                static_cast<std::uint64_t>(config.tiny_vocab)});
        token_table_ = Mat(h, config.tiny_vocab);
        const double scale = 1.0 / std::sqrt(static_cast<double>(h));
        for (std::int64_t c = 0; c < token_table_.cols(); ++c)
            for (std::int64_t r = 0; r < token_table_.rows(); ++r)
                token_table_(r, c) = scale * tok_rng.next_normal();
        Rng pos_rng = Rng::stream(0x7469'6e79, {2, static_cast<std::uint64_t>(h),
                                                static_cast<std::uint64_t>(
                                                    config.max_sequence_length)});
        position_table_ = Mat(h, config.max_sequence_length);
        for (std::int64_t c = 0; c < position_table_.cols(); ++c)
            for (std::int64_t r = 0; r < position_table_.rows(); ++r)
                position_table_(r, c) = scale * pos_rng.next_normal();
    }

    TokenSequence tokenize(const std::string& text) const override {
        std::vector<std::string> words = word_tokens(text);
        if (words.empty()) throw std::runtime_error("empty after normalization");
        TokenSequence seq;
        seq.ids.push_back(kTinyCls);
        const std::size_t body_limit =
            static_cast<std::size_t>(config_.max_sequence_length) - 2;
        for (const std::string& w : words) {
            if (seq.ids.size() - 1 >= body_limit) break;
            seq.ids.push_back(word_id(w));
        }
        seq.ids.push_back(kTinySep);
        seq.mask.assign(seq.ids.size(), 1);
        return seq;
    }

    Mat encode_sequence(const TokenSequence& tokens) const override {
        if (tokens.ids.empty()) throw std::runtime_error("empty token sequence");
        if (tokens.ids.size() != tokens.mask.size())
            throw std::runtime_error("token/mask length mismatch");
        if (tokens.ids.size() > static_cast<std::size_t>(config_.max_sequence_length))
            throw std::runtime_error("token sequence exceeds max_sequence_length");
        Mat out(static_cast<std::int64_t>(tokens.ids.size()), config_.tiny_hidden);
        for (std::size_t t = 0; t < tokens.ids.size(); ++t) {
            int id = tokens.ids[t];
            if (id < 0 || id >= config_.tiny_vocab)
                throw std::runtime_error("token id " + std::to_string(id) +
                                         " outside vocabulary of " +
                                         std::to_string(config_.tiny_vocab));
            out.row(static_cast<std::int64_t>(t)) =
                (token_table_.col(id) + position_table_.col(static_cast<std::int64_t>(t)))
                    .transpose();
        }
        return out;
    }

    int hidden_size() const override { return config_.tiny_hidden; }
    int vocab_size() const override { return config_.tiny_vocab; }
    TextEncoderKind kind() const override { return TextEncoderKind::TinyTest; }

  private:
    int word_id(const std::string& word) const {
        std::uint64_t h = fnv1a64(word);
        return kTinyReserved +
               static_cast<int>(h % static_cast<std::uint64_t>(config_.tiny_vocab - kTinyReserved));
    }

    TextEncoderConfig config_;
    Mat token_table_;
    Mat position_table_;
};

}  // namespace

// --- WordPiece vocabulary ---------------------------------------------------

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& vocab_file) {
    std::ifstream in(vocab_file);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + vocab_file.string());
    WordPieceVocab vocab;
    std::string line;
    int id = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.id_of_.emplace(line, id++);
    }
    auto special = [&](const char* token) {
        auto it = vocab.id_of_.find(token);
        if (it == vocab.id_of_.end())
            throw std::runtime_error("vocabulary lacks required token " + std::string(token) +
                                     ": " + vocab_file.string());
        return it->second;
    };
    vocab.pad_ = special("[PAD]");
    vocab.unk_ = special("[UNK]");
    vocab.cls_ = special("[CLS]");
    vocab.sep_ = special("[SEP]");
    return vocab;
}

std::vector<int> WordPieceVocab::piece_ids(const std::string& word) const {
    constexpr std::size_t kMaxWordChars = 100;
    if (word.empty() || word.size() > kMaxWordChars) return {unk_};
    std::vector<int> out;
    std::size_t start = 0;
    while (start < word.size()) {
        std::size_t end = word.size();
        int match = -1;
        while (end > start) {
            std::string piece = word.substr(start, end - start);
            if (start > 0) piece = "##" + piece;
            auto it = id_of_.find(piece);
            if (it != id_of_.end()) {
                match = it->second;
                break;
            }
            --end;
        }
        if (match < 0) return {unk_};
        out.push_back(match);
        start = end;
    }
    return out;
}

std::vector<std::string> basic_word_split(const std::string& text) {
    // Lowercase, split on whitespace, isolate ASCII punctuation. Multi-byte
    // characters pass through grouped with their word.
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            out.push_back(current);
            current.clear();
        }
    };
    for (unsigned char ch : text) {
        if (ch < 0x80 && std::isspace(ch)) {
            flush();
        } else if (ch < 0x80 && std::ispunct(ch)) {
            flush();
            out.push_back(std::string(1, static_cast<char>(ch)));
        } else {
            char c = static_cast<char>(ch);
            if (ch < 0x80) c = static_cast<char>(std::tolower(ch));
            current.push_back(c);
        }
    }
    flush();
    return out;
}

// --- Generic transformer forward -------------------------------------------

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Mat layer_norm_rows(const Mat& x, const Vec& gamma, const Vec& beta) {
    constexpr double kEps = 1e-12;
    Mat out(x.rows(), x.cols());
    for (std::int64_t r = 0; r < x.rows(); ++r) {
        double mean = x.row(r).mean();
        double var = (x.row(r).array() - mean).square().mean();
        out.row(r) = (((x.row(r).array() - mean) / std::sqrt(var + kEps)) *
                          gamma.transpose().array() +
                      beta.transpose().array())
                         .matrix();
    }
    return out;
}

Mat transformer_encode(const TransformerWeights& w, const TokenSequence& tokens) {
    const std::int64_t len = static_cast<std::int64_t>(tokens.ids.size());
    if (len == 0) throw std::runtime_error("empty token sequence");
    if (tokens.mask.size() != tokens.ids.size())
        throw std::runtime_error("token/mask length mismatch");
    if (len > w.max_positions())
        throw std::runtime_error("sequence length exceeds encoder position table");
    const int hidden = w.hidden();
    if (w.num_heads <= 0 || hidden % w.num_heads != 0)
        throw std::runtime_error("hidden size not divisible by head count");
    const int head_dim = hidden / w.num_heads;

    Mat x(len, hidden);
    for (std::int64_t t = 0; t < len; ++t) {
        int id = tokens.ids[static_cast<std::size_t>(t)];
        if (id < 0 || id >= w.vocab())
            throw std::runtime_error("token id " + std::to_string(id) +
                                     " outside vocabulary of " + std::to_string(w.vocab()));
        x.row(t) = w.word_embeddings.row(id) + w.position_embeddings.row(t) +
                   w.type_embeddings.row(0);
    }
    x = layer_norm_rows(x, w.embedding_gamma, w.embedding_beta);

    Vec key_bias = Vec::Zero(len);
    for (std::int64_t t = 0; t < len; ++t)
        if (tokens.mask[static_cast<std::size_t>(t)] == 0) key_bias(t) = -1e30;

    for (const TransformerLayerWeights& layer : w.layers) {
        Mat q = x * layer.q_w.transpose();
        q.rowwise() += layer.q_b.transpose();
        Mat k = x * layer.k_w.transpose();
        k.rowwise() += layer.k_b.transpose();
        Mat v = x * layer.v_w.transpose();
        v.rowwise() += layer.v_b.transpose();

        Mat context(len, hidden);
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
        for (int h = 0; h < w.num_heads; ++h) {
            auto qh = q.middleCols(h * head_dim, head_dim);
            auto kh = k.middleCols(h * head_dim, head_dim);
            auto vh = v.middleCols(h * head_dim, head_dim);
            Mat scores = (qh * kh.transpose()) * scale;
            scores.rowwise() += key_bias.transpose();
            for (std::int64_t r = 0; r < len; ++r) {
                Vec row = scores.row(r).transpose();
                double m = row.maxCoeff();
                Vec e = (row.array() - m).exp();
                scores.row(r) = (e / e.sum()).transpose();
            }
            context.middleCols(h * head_dim, head_dim) = scores * vh;
        }
        Mat attn_out = context * layer.o_w.transpose();
        attn_out.rowwise() += layer.o_b.transpose();
        x = layer_norm_rows(x + attn_out, layer.attn_gamma, layer.attn_beta);

        Mat inner = x * layer.ffn_in_w.transpose();
        inner.rowwise() += layer.ffn_in_b.transpose();
        inner = inner.unaryExpr([](double v_) { return gelu(v_); });
        Mat ffn_out = inner * layer.ffn_out_w.transpose();
        ffn_out.rowwise() += layer.ffn_out_b.transpose();
        x = layer_norm_rows(x + ffn_out, layer.ffn_gamma, layer.ffn_beta);
    }
    return x;
}

namespace {

NamedTensor tensor_from_vec(const std::string& name, const Vec& v) {
    NamedTensor t;
    t.name = name;
    t.dims = {static_cast<std::uint64_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
}

std::string layer_key(std::size_t i, const char* suffix) {
    return "layers." + std::to_string(i) + "." + suffix;
}

}  // namespace

void write_transformer_weights(const std::filesystem::path& path, const TransformerWeights& w) {
    std::vector<NamedTensor> tensors;
    NamedTensor meta;
    meta.name = "meta.num_heads";
    meta.dims = {1};
    meta.data = {static_cast<double>(w.num_heads)};
    tensors.push_back(std::move(meta));
    tensors.push_back(tensor_from_mat("embeddings.word", w.word_embeddings));
    tensors.push_back(tensor_from_mat("embeddings.position", w.position_embeddings));
    tensors.push_back(tensor_from_mat("embeddings.token_type", w.type_embeddings));
    tensors.push_back(tensor_from_vec("embeddings.ln.gamma", w.embedding_gamma));
    tensors.push_back(tensor_from_vec("embeddings.ln.beta", w.embedding_beta));
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        const TransformerLayerWeights& l = w.layers[i];
        tensors.push_back(tensor_from_mat(layer_key(i, "attn.q.w"), l.q_w));
        tensors.push_back(tensor_from_vec(layer_key(i, "attn.q.b"), l.q_b));
        tensors.push_back(tensor_from_mat(layer_key(i, "attn.k.w"), l.k_w));
        tensors.push_back(tensor_from_vec(layer_key(i, "attn.k.b"), l.k_b));
        tensors.push_back(tensor_from_mat(layer_key(i, "attn.v.w"), l.v_w));
        tensors.push_back(tensor_from_vec(layer_key(i, "attn.v.b"), l.v_b));
        tensors.push_back(tensor_from_mat(layer_key(i, "attn.o.w"), l.o_w));
        tensors.push_back(tensor_from_vec(layer_key(i, "attn.o.b"), l.o_b));
        tensors.push_back(tensor_from_vec(layer_key(i, "attn.ln.gamma"), l.attn_gamma));
        tensors.push_back(tensor_from_vec(layer_key(i, "attn.ln.beta"), l.attn_beta));
        tensors.push_back(tensor_from_mat(layer_key(i, "ffn.in.w"), l.ffn_in_w));
        tensors.push_back(tensor_from_vec(layer_key(i, "ffn.in.b"), l.ffn_in_b));
        tensors.push_back(tensor_from_mat(layer_key(i, "ffn.out.w"), l.ffn_out_w));
        tensors.push_back(tensor_from_vec(layer_key(i, "ffn.out.b"), l.ffn_out_b));
        tensors.push_back(tensor_from_vec(layer_key(i, "ffn.ln.gamma"), l.ffn_gamma));
        tensors.push_back(tensor_from_vec(layer_key(i, "ffn.ln.beta"), l.ffn_beta));
    }
    write_tensor_file(path, tensors);
}

TransformerWeights read_transformer_weights(const std::filesystem::path& path) {
    std::vector<NamedTensor> tensors = read_tensor_file(path);
    auto index = index_tensors(tensors);
    TransformerWeights w;
    const NamedTensor& heads = require_tensor(index, "meta.num_heads");
    w.num_heads = static_cast<int>(heads.data.at(0));
    w.word_embeddings = mat_from_tensor(require_tensor(index, "embeddings.word"));
    const int hidden = static_cast<int>(w.word_embeddings.cols());
    w.position_embeddings = mat_from_tensor(require_tensor(index, "embeddings.position"));
    w.type_embeddings = mat_from_tensor(require_tensor(index, "embeddings.token_type"));
    w.embedding_gamma = require_vec(index, "embeddings.ln.gamma", hidden);
    w.embedding_beta = require_vec(index, "embeddings.ln.beta", hidden);
    for (std::size_t i = 0;; ++i) {
        if (index.find(layer_key(i, "attn.q.w")) == index.end()) break;
        TransformerLayerWeights l;
        l.q_w = require_mat(index, layer_key(i, "attn.q.w"), hidden, hidden);
        l.q_b = require_vec(index, layer_key(i, "attn.q.b"), hidden);
        l.k_w = require_mat(index, layer_key(i, "attn.k.w"), hidden, hidden);
        l.k_b = require_vec(index, layer_key(i, "attn.k.b"), hidden);
        l.v_w = require_mat(index, layer_key(i, "attn.v.w"), hidden, hidden);
        l.v_b = require_vec(index, layer_key(i, "attn.v.b"), hidden);
        l.o_w = require_mat(index, layer_key(i, "attn.o.w"), hidden, hidden);
        l.o_b = require_vec(index, layer_key(i, "attn.o.b"), hidden);
        l.attn_gamma = require_vec(index, layer_key(i, "attn.ln.gamma"), hidden);
        l.attn_beta = require_vec(index, layer_key(i, "attn.ln.beta"), hidden);
        const NamedTensor& fin = require_tensor(index, layer_key(i, "ffn.in.w"));
        const std::int64_t intermediate = static_cast<std::int64_t>(fin.dims.at(0));
        l.ffn_in_w = require_mat(index, layer_key(i, "ffn.in.w"), intermediate, hidden);
        l.ffn_in_b = require_vec(index, layer_key(i, "ffn.in.b"), intermediate);
        l.ffn_out_w = require_mat(index, layer_key(i, "ffn.out.w"), hidden, intermediate);
        l.ffn_out_b = require_vec(index, layer_key(i, "ffn.out.b"), hidden);
        l.ffn_gamma = require_vec(index, layer_key(i, "ffn.ln.gamma"), hidden);
        l.ffn_beta = require_vec(index, layer_key(i, "ffn.ln.beta"), hidden);
        w.layers.push_back(std::move(l));
    }
    if (w.layers.empty())
        throw std::runtime_error("encoder weight file has no transformer layers: " +
                                 path.string());
    return w;
}

TransformerWeights random_transformer_weights(int vocab, int max_positions, int hidden,
                                              int num_layers, int num_heads, int intermediate,
                                              std::uint64_t seed) {
    Rng rng(seed);
    auto mat = [&](int r, int c) {
        Mat m(r, c);
        const double scale = 1.0 / std::sqrt(static_cast<double>(c));
        for (std::int64_t j = 0; j < m.cols(); ++j)
            for (std::int64_t i = 0; i < m.rows(); ++i) m(i, j) = scale * rng.next_normal();
        return m;
    };
    TransformerWeights w;
    w.num_heads = num_heads;
    w.word_embeddings = mat(vocab, hidden);
    w.position_embeddings = mat(max_positions, hidden);
    w.type_embeddings = mat(2, hidden);
    w.embedding_gamma = Vec::Ones(hidden);
    w.embedding_beta = Vec::Zero(hidden);
    for (int i = 0; i < num_layers; ++i) {
        TransformerLayerWeights l;
        l.q_w = mat(hidden, hidden);
        l.q_b = Vec::Zero(hidden);
        l.k_w = mat(hidden, hidden);
        l.k_b = Vec::Zero(hidden);
        l.v_w = mat(hidden, hidden);
        l.v_b = Vec::Zero(hidden);
        l.o_w = mat(hidden, hidden);
        l.o_b = Vec::Zero(hidden);
        l.attn_gamma = Vec::Ones(hidden);
        l.attn_beta = Vec::Zero(hidden);
        l.ffn_in_w = mat(intermediate, hidden);
        l.ffn_in_b = Vec::Zero(intermediate);
        l.ffn_out_w = mat(hidden, intermediate);
        l.ffn_out_b = Vec::Zero(hidden);
        l.ffn_gamma = Vec::Ones(hidden);
        l.ffn_beta = Vec::Zero(hidden);
        w.layers.push_back(std::move(l));
    }
    return w;
}

// --- Pretrained adapter ----------------------------------------------------

namespace {

class PretrainedTextEncoder final : public TextEncoder {
  public:
    PretrainedTextEncoder(const TextEncoderConfig& config, WordPieceVocab vocab,
                          TransformerWeights weights)
        : config_(config), vocab_(std::move(vocab)), weights_(std::move(weights)) {
        if (weights_.hidden() != config.hidden_size)
            throw std::runtime_error("encoder asset hidden size " +
                                     std::to_string(weights_.hidden()) +
                                     " does not match configured " +
                                     std::to_string(config.hidden_size));
        if (static_cast<int>(weights_.layers.size()) != config.num_layers)
            throw std::runtime_error("encoder asset has " +
                                     std::to_string(weights_.layers.size()) +
                                     " layers, configured " + std::to_string(config.num_layers));
        if (weights_.num_heads != config.num_attention_heads)
            throw std::runtime_error("encoder asset head count mismatch");
    }

    TokenSequence tokenize(const std::string& text) const override {
        std::vector<std::string> words = basic_word_split(text);
        if (words.empty()) throw std::runtime_error("empty after normalization");
        TokenSequence seq;
        seq.ids.push_back(vocab_.cls_id());
        const std::size_t body_limit =
            static_cast<std::size_t>(config_.max_sequence_length) - 2;
        for (const std::string& w : words) {
            for (int id : vocab_.piece_ids(w)) {
                if (seq.ids.size() - 1 >= body_limit) break;
                seq.ids.push_back(id);
            }
            if (seq.ids.size() - 1 >= body_limit) break;
        }
        seq.ids.push_back(vocab_.sep_id());
        seq.mask.assign(seq.ids.size(), 1);
        return seq;
    }

    Mat encode_sequence(const TokenSequence& tokens) const override {
        if (tokens.ids.size() > static_cast<std::size_t>(config_.max_sequence_length))
            throw std::runtime_error("token sequence exceeds max_sequence_length");
        return transformer_encode(weights_, tokens);
    }

    int hidden_size() const override { return config_.hidden_size; }
    int vocab_size() const override { return vocab_.size(); }
    TextEncoderKind kind() const override { return TextEncoderKind::PretrainedTransformer; }

  private:
    TextEncoderConfig config_;
    WordPieceVocab vocab_;
    TransformerWeights weights_;
};

}  // namespace

std::unique_ptr<TextEncoder> make_text_encoder(const TextEncoderConfig& config) {
    validate(config);
    if (config.kind == TextEncoderKind::TinyTest)
        return std::make_unique<TinyTextEncoder>(config);
    std::filesystem::path dir = weights_root() / config.model_id;
    std::filesystem::path vocab_file = dir / "vocab.txt";
    std::filesystem::path weight_file = dir / "encoder.mmpw";
    if (!std::filesystem::exists(vocab_file) || !std::filesystem::exists(weight_file))
        throw std::runtime_error(
            "pretrained text encoder assets not found under " + dir.string() +
            " (need vocab.txt and encoder.mmpw); set MMPHASE_WEIGHTS_DIR to your asset "
            "directory or convert weights as described in the README");
    return std::make_unique<PretrainedTextEncoder>(config, WordPieceVocab::load(vocab_file),
                                                   read_transformer_weights(weight_file));
}

// --- Trainable head ---------------------------------------------------------

TextStack::TextStack(const TextEncoderConfig& config, Rng& init_rng)
    : config_(config),
      encoder_(make_text_encoder(config)),
      lstm_(config.embedding_size(), config.recurrent_hidden),
      projection_(config.projection_dim, config.recurrent_hidden) {
    lstm_.init(init_rng);
    projection_.init(init_rng);
}

Mat TextStack::embed(const std::string& text) const { return encoder_->encode_text(text); }

Vec TextStack::recurrent_pool(const Mat& embeddings, TextStackCache* cache) const {
    if (embeddings.rows() == 0) throw std::runtime_error("empty embedding matrix");
    if (embeddings.cols() != config_.embedding_size())
        throw std::runtime_error("embedding width " + std::to_string(embeddings.cols()) +
                                 " does not match encoder width " +
                                 std::to_string(config_.embedding_size()));
    Mat inputs = embeddings.transpose();
    Mat h = lstm_.forward(inputs, cache ? &cache->lstm : nullptr);
    Vec pooled;
    std::vector<int> max_index;
    switch (config_.pooling) {
        case RecurrentPooling::FinalState:
            pooled = h.col(h.cols() - 1);
            break;
        case RecurrentPooling::Mean:
            pooled = h.rowwise().mean();
            break;
        case RecurrentPooling::Max: {
            pooled = Vec(h.rows());
            max_index.resize(static_cast<std::size_t>(h.rows()));
            for (std::int64_t r = 0; r < h.rows(); ++r) {
                std::int64_t best = 0;
                h.row(r).maxCoeff(&best);
                max_index[static_cast<std::size_t>(r)] = static_cast<int>(best);
                pooled(r) = h(r, best);
            }
            break;
        }
    }
    if (cache) {
        cache->inputs = std::move(inputs);
        cache->hidden_states = h;
        cache->pooled = pooled;
        cache->max_index = std::move(max_index);
    }
    return pooled;
}

Vec TextStack::forward(const Mat& embeddings, TextStackCache& cache) {
    Vec pooled = recurrent_pool(embeddings, &cache);
    return projection_.forward(pooled);
}

Vec TextStack::infer(const std::string& text) {
    TextStackCache cache;
    return forward(embed(text), cache);
}

void TextStack::backward(const TextStackCache& cache, const Vec& grad_out) {
    Vec grad_pooled = projection_.backward(cache.pooled, grad_out);
    const Mat& h = cache.hidden_states;
    Mat grad_h = Mat::Zero(h.rows(), h.cols());
    switch (config_.pooling) {
        case RecurrentPooling::FinalState:
            grad_h.col(h.cols() - 1) = grad_pooled;
            break;
        case RecurrentPooling::Mean:
            grad_h.colwise() += grad_pooled / static_cast<double>(h.cols());
            break;
        case RecurrentPooling::Max:
            for (std::int64_t r = 0; r < h.rows(); ++r)
                grad_h(r, cache.max_index[static_cast<std::size_t>(r)]) = grad_pooled(r);
            break;
    }
    lstm_.backward(cache.lstm, grad_h, nullptr);
}

void TextStack::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    lstm_.collect(prefix + ".lstm", out);
    projection_.collect(prefix + ".proj", out);
}

}  // namespace mmphase
