// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the mmphase authors
//
// Text side of the pipeline: a frozen contextual encoder behind an adapter
// (pretrained bidirectional transformer, or a tiny deterministic stand-in for
// tests), followed by a trainable recurrent head and dense projection.

#ifndef MMPHASE_TEXT_ENCODER_HPP
#define MMPHASE_TEXT_ENCODER_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nn.hpp"
#include "rng.hpp"

namespace mmphase {

enum class TextEncoderKind { PretrainedTransformer, TinyTest };

enum class RecurrentPooling { FinalState, Mean, Max };

std::string to_string(TextEncoderKind kind);
TextEncoderKind text_encoder_kind_from_string(const std::string& s);
std::string to_string(RecurrentPooling pooling);
RecurrentPooling pooling_from_string(const std::string& s);

struct TextEncoderConfig {
    TextEncoderKind kind = TextEncoderKind::TinyTest;
    int hidden_size = 768;
    int num_layers = 12;
    int num_attention_heads = 12;
    bool cased = false;
    int max_sequence_length = 128;
    int recurrent_hidden = 128;
    int projection_dim = 128;
    RecurrentPooling pooling = RecurrentPooling::FinalState;
    bool freeze_encoder = true;
    std::string model_id = "bert-base-uncased";
    int tiny_vocab = 4096;
    int tiny_hidden = 32;

    // Effective contextual width: the pretrained kind uses hidden_size, the
    // tiny stand-in uses its own small width.
    int embedding_size() const;
};

// Architecture defaults for the pretrained kind (12 layers, 768 wide, 12
// heads, uncased).
TextEncoderConfig pretrained_text_config();

void validate(const TextEncoderConfig& config);

struct TokenSequence {
    std::vector<int> ids;
    std::vector<int> mask;
};

class TextEncoder {
  public:
    virtual ~TextEncoder() = default;

    // Throws "empty after normalization" when no tokens survive.
    virtual TokenSequence tokenize(const std::string& text) const = 0;

    // One row per token position, hidden_size() columns.
    virtual Mat encode_sequence(const TokenSequence& tokens) const = 0;

    virtual int hidden_size() const = 0;
    virtual int vocab_size() const = 0;
    virtual TextEncoderKind kind() const = 0;

    Mat encode_text(const std::string& text) const { return encode_sequence(tokenize(text)); }
};

// Resolves pretrained assets under $MMPHASE_WEIGHTS_DIR (default
// ~/.cache/mmphase/weights). Throws with setup instructions when missing.
std::unique_ptr<TextEncoder> make_text_encoder(const TextEncoderConfig& config);

std::filesystem::path weights_root();

// --- Generic transformer encoder (inference only) -------------------------

struct TransformerLayerWeights {
    Mat q_w, k_w, v_w, o_w;      // each (hidden, hidden), applied as x * w^T
    Vec q_b, k_b, v_b, o_b;
    Vec attn_gamma, attn_beta;
    Mat ffn_in_w;                // (intermediate, hidden)
    Vec ffn_in_b;
    Mat ffn_out_w;               // (hidden, intermediate)
    Vec ffn_out_b;
    Vec ffn_gamma, ffn_beta;
};

struct TransformerWeights {
    Mat word_embeddings;         // (vocab, hidden)
    Mat position_embeddings;     // (max_positions, hidden)
    Mat type_embeddings;         // (type_vocab, hidden)
    Vec embedding_gamma, embedding_beta;
    std::vector<TransformerLayerWeights> layers;
    int num_heads = 0;

    int hidden() const { return static_cast<int>(word_embeddings.cols()); }
    int vocab() const { return static_cast<int>(word_embeddings.rows()); }
    int max_positions() const { return static_cast<int>(position_embeddings.rows()); }
};

Mat transformer_encode(const TransformerWeights& w, const TokenSequence& tokens);

double gelu(double x);
Mat layer_norm_rows(const Mat& x, const Vec& gamma, const Vec& beta);

void write_transformer_weights(const std::filesystem::path& path, const TransformerWeights& w);
TransformerWeights read_transformer_weights(const std::filesystem::path& path);

// Small random transformer for tests and for exercising the inference path.
TransformerWeights random_transformer_weights(int vocab, int max_positions, int hidden,
                                              int num_layers, int num_heads, int intermediate,
                                              std::uint64_t seed);

// --- WordPiece vocabulary --------------------------------------------------

class WordPieceVocab {
  public:
    static WordPieceVocab load(const std::filesystem::path& vocab_file);

    // Greedy longest-match split of one lowercased word; unknown → [UNK].
    std::vector<int> piece_ids(const std::string& word) const;

    int pad_id() const { return pad_; }
    int unk_id() const { return unk_; }
    int cls_id() const { return cls_; }
    int sep_id() const { return sep_; }
    int size() const { return static_cast<int>(id_of_.size()); }

  private:
    std::map<std::string, int> id_of_;
    int pad_ = -1, unk_ = -1, cls_ = -1, sep_ = -1;
};

// Lowercase + whitespace split + ASCII punctuation isolation, ahead of the
// WordPiece pass. Exposed for tests.
std::vector<std::string> basic_word_split(const std::string& text);

// --- Trainable head on top of the frozen encoder ---------------------------

struct TextStackCache {
    Mat inputs;          // (embedding_size, seq_len), LSTM layout
    LstmCache lstm;
    Mat hidden_states;   // (recurrent_hidden, seq_len)
    Vec pooled;
    std::vector<int> max_index;  // per-dim argmax column, Max pooling only
};

class TextStack {
  public:
    TextStack(const TextEncoderConfig& config, Rng& init_rng);

    const TextEncoderConfig& config() const { return config_; }
    const TextEncoder& encoder() const { return *encoder_; }

    Mat embed(const std::string& text) const;  // tokenize + encode, (len, width)

    // Gated recurrent pass + pooling; output has recurrent_hidden dims.
    Vec recurrent_pool(const Mat& embeddings, TextStackCache* cache) const;

    // Full trainable head: recurrent_pool → dense projection.
    Vec forward(const Mat& embeddings, TextStackCache& cache);
    Vec infer(const std::string& text);

    void backward(const TextStackCache& cache, const Vec& grad_out);
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

    LstmLayer& lstm() { return lstm_; }
    DenseLayer& projection() { return projection_; }

  private:
    TextEncoderConfig config_;
    std::unique_ptr<TextEncoder> encoder_;
    LstmLayer lstm_;
    DenseLayer projection_;
};

}  // namespace mmphase

#endif
