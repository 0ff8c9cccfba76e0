#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sift/rng.hpp"
#include "sift/tensor.hpp"

namespace sift::data {

// Lowercases, splits on whitespace, and breaks the punctuation characters
// . , ; : ! ? ' " ( ) - out as single-character tokens. Idempotent on its
// own output joined by single spaces.
std::vector<std::string> tokenize(const std::string& text);

struct Vocab {
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kBos = 2;
  static constexpr std::size_t kEos = 3;

  std::vector<std::string> tokens;  // id -> token, specials at 0..3
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return tokens.size(); }
  std::size_t id(const std::string& tok) const {
    auto it = index.find(tok);
    return it == index.end() ? kUnk : it->second;
  }
  const std::string& token(std::size_t i) const;
  bool contains(const std::string& tok) const { return index.count(tok) > 0; }

  std::vector<std::size_t> encode(const std::vector<std::string>& toks) const;
  std::vector<std::string> decode(const std::vector<std::size_t>& ids) const;

  // Content hash over the ordered token list.
  std::string hash() const;

  // Most frequent max_size-4 tokens (ties lexicographic) plus the specials.
  static Vocab build(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size);
  // Reconstructs a vocabulary from an explicit ordered token list (as stored
  // in checkpoints). The list must already start with the four specials.
  static Vocab from_tokens(std::vector<std::string> toks);
};

// Raw (string-level) dataset rows; analysis works at this level.
struct RawExample {
  std::string label;
  std::vector<std::string> text;
  std::vector<std::string> text2;  // pair tasks only
  bool has_pair = false;
};

struct RawDataset {
  std::vector<RawExample> rows;
  bool pair_task = false;
};

// Id-level dataset used by training.
struct Example {
  std::size_t label = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> ids2;
  bool has_pair = false;
};

struct LabeledDataset {
  std::vector<Example> examples;
  std::vector<std::string> labels;  // class id -> name, first-seen order
  bool pair_task = false;
};

// TSV reader: "label<TAB>text" or "label<TAB>text1<TAB>text2"; column count
// must be uniform and every text must tokenize to at least one token.
RawDataset load_raw_dataset(const std::string& path);
void save_raw_dataset(const RawDataset& ds, const std::string& path);

// Maps labels (optionally against a fixed table) and tokens to ids.
LabeledDataset encode_dataset(const RawDataset& raw, const Vocab& vocab,
                              const std::vector<std::string>* label_table = nullptr);
LabeledDataset load_dataset(const std::string& path, const Vocab& vocab,
                            const std::vector<std::string>* label_table = nullptr);

// One sentence per line.
std::vector<std::vector<std::string>> load_corpus(const std::string& path);
void save_corpus(const std::vector<std::vector<std::string>>& corpus, const std::string& path);

// All sentences of a dataset in row order (both sides of a pair).
std::vector<std::vector<std::string>> corpus_from_dataset(const RawDataset& ds);

// Synthetic corpus with planted class artifacts.
struct ArtifactSpec {
  std::string token;
  std::size_t cls = 0;    // class the artifact marks
  double p_in = 0.9;      // injection probability within cls
  double p_cross = 0.05;  // injection probability in other classes
};

struct SyntheticSpec {
  std::size_t vocab_size = 100;  // base content words w000..w(N-1)
  std::size_t num_classes = 2;
  std::size_t num_examples = 1000;
  std::size_t min_len = 3;
  std::size_t max_len = 10;
  std::uint64_t seed = 1;
  std::vector<std::string> class_names;  // defaults to c0..c(K-1)
  std::vector<ArtifactSpec> artifacts;
};

struct SyntheticResult {
  RawDataset dataset;
  // class name -> planted artifact tokens (the ground-truth manifest)
  std::vector<std::pair<std::string, std::vector<std::string>>> manifest;
};

SyntheticResult generate_synthetic(const SyntheticSpec& spec);

// Embedding table from "token v1 ... vd" lines. Rows for tokens absent from
// the file (and always the UNK row, which is never read from disk) are drawn
// uniform[-0.1, 0.1]. The UNK row is meant to stay frozen during training.
struct EmbeddingTable {
  ad::Tensor weights;  // {V, d}
  std::vector<std::uint8_t> from_file;
  std::size_t dim = 0;
};

EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab, Rng& rng);

}  // namespace sift::data
