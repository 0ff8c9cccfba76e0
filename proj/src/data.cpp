#include "sift/data.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sift/error.hpp"
#include "sift/sha256.hpp"

namespace sift::data {

namespace {
constexpr const char* kPunct = ".,;:!?'\"()-";
const std::vector<std::string> kSpecials = {"<pad>", "<unk>", "<s>", "</s>"};
}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
      continue;
    }
    const char c = static_cast<char>(std::tolower(ch));
    if (std::strchr(kPunct, c) != nullptr) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

const std::string& Vocab::token(std::size_t i) const {
  require(i < tokens.size(), errkind::index, "vocab id out of range");
  return tokens[i];
}

std::vector<std::size_t> Vocab::encode(const std::vector<std::string>& toks) const {
  std::vector<std::size_t> ids;
  ids.reserve(toks.size());
  for (const std::string& t : toks) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<std::size_t>& ids) const {
  std::vector<std::string> toks;
  toks.reserve(ids.size());
  for (std::size_t i : ids) toks.push_back(token(i));
  return toks;
}

std::string Vocab::hash() const {
  std::string joined;
  for (const std::string& t : tokens) {
    joined += t;
    joined += '\n';
  }
  return sha256_hex(joined);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size) {
  require(!corpus.empty(), errkind::degenerate_data, "build_vocab: empty corpus");
  require(max_size > kSpecials.size(), errkind::config,
          "build_vocab: max_size must exceed the special-token count");
  std::map<std::string, std::size_t> freq;  // ordered map gives lexicographic ties for free
  for (const auto& sent : corpus)
    for (const std::string& t : sent) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  v.tokens = kSpecials;
  const std::size_t keep = std::min(items.size(), max_size - kSpecials.size());
  for (std::size_t i = 0; i < keep; ++i) v.tokens.push_back(items[i].first);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.index[v.tokens[i]] = i;
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> toks) {
  require(toks.size() >= kSpecials.size(), errkind::format, "vocab token list too short");
  for (std::size_t i = 0; i < kSpecials.size(); ++i)
    require(toks[i] == kSpecials[i], errkind::format, "vocab specials out of order");
  Vocab v;
  v.tokens = std::move(toks);
  for (std::size_t i = 0; i < v.tokens.size(); ++i) v.index[v.tokens[i]] = i;
  require(v.index.size() == v.tokens.size(), errkind::format, "vocab has duplicate tokens");
  return v;
}

namespace {

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

}  // namespace

RawDataset load_raw_dataset(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errkind::io, "cannot open dataset file: " + path);
  RawDataset ds;
  std::string line;
  std::size_t lineno = 0;
  std::size_t expected_cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols = split_tab(line);
    require(cols.size() == 2 || cols.size() == 3, errkind::format,
            "dataset line " + std::to_string(lineno) + ": expected 2 or 3 tab-separated columns");
    if (expected_cols == 0) {
      expected_cols = cols.size();
      ds.pair_task = (expected_cols == 3);
    }
    require(cols.size() == expected_cols, errkind::format,
            "dataset line " + std::to_string(lineno) + ": ragged column count");
    RawExample ex;
    ex.label = cols[0];
    require(!ex.label.empty(), errkind::format,
            "dataset line " + std::to_string(lineno) + ": empty label");
    ex.text = tokenize(cols[1]);
    require(!ex.text.empty(), errkind::degenerate_data,
            "dataset line " + std::to_string(lineno) + ": text tokenizes to nothing");
    if (ds.pair_task) {
      ex.text2 = tokenize(cols[2]);
      require(!ex.text2.empty(), errkind::degenerate_data,
              "dataset line " + std::to_string(lineno) + ": second text tokenizes to nothing");
      ex.has_pair = true;
    }
    ds.rows.push_back(std::move(ex));
  }
  require(!ds.rows.empty(), errkind::degenerate_data, "dataset is empty: " + path);
  return ds;
}

void save_raw_dataset(const RawDataset& ds, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), errkind::io, "cannot write dataset file: " + path);
  auto join = [](const std::vector<std::string>& toks) {
    std::string s;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i) s += ' ';
      s += toks[i];
    }
    return s;
  };
  for (const RawExample& ex : ds.rows) {
    out << ex.label << '\t' << join(ex.text);
    if (ex.has_pair) out << '\t' << join(ex.text2);
    out << '\n';
  }
  require(out.good(), errkind::io, "write failed: " + path);
}

LabeledDataset encode_dataset(const RawDataset& raw, const Vocab& vocab,
                              const std::vector<std::string>* label_table) {
  LabeledDataset ds;
  ds.pair_task = raw.pair_task;
  std::unordered_map<std::string, std::size_t> label_ids;
  if (label_table != nullptr) {
    ds.labels = *label_table;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) label_ids[ds.labels[i]] = i;
  }
  for (const RawExample& row : raw.rows) {
    auto it = label_ids.find(row.label);
    std::size_t lid;
    if (it == label_ids.end()) {
      require(label_table == nullptr, errkind::degenerate_data,
              "label '" + row.label + "' not in the fixed label table");
      lid = ds.labels.size();
      ds.labels.push_back(row.label);
      label_ids[row.label] = lid;
    } else {
      lid = it->second;
    }
    Example ex;
    ex.label = lid;
    ex.ids = vocab.encode(row.text);
    if (row.has_pair) {
      ex.ids2 = vocab.encode(row.text2);
      ex.has_pair = true;
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

LabeledDataset load_dataset(const std::string& path, const Vocab& vocab,
                            const std::vector<std::string>* label_table) {
  return encode_dataset(load_raw_dataset(path), vocab, label_table);
}

std::vector<std::vector<std::string>> load_corpus(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errkind::io, "cannot open corpus file: " + path);
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> toks = tokenize(line);
    if (!toks.empty()) corpus.push_back(std::move(toks));
  }
  require(!corpus.empty(), errkind::degenerate_data, "corpus is empty: " + path);
  return corpus;
}

void save_corpus(const std::vector<std::vector<std::string>>& corpus, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), errkind::io, "cannot write corpus file: " + path);
  for (const auto& sent : corpus) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      if (i) out << ' ';
      out << sent[i];
    }
    out << '\n';
  }
  require(out.good(), errkind::io, "write failed: " + path);
}

std::vector<std::vector<std::string>> corpus_from_dataset(const RawDataset& ds) {
  std::vector<std::vector<std::string>> corpus;
  for (const RawExample& row : ds.rows) {
    corpus.push_back(row.text);
    if (row.has_pair) corpus.push_back(row.text2);
  }
  return corpus;
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  require(spec.num_classes >= 2, errkind::config, "synthetic: need at least two classes");
  require(spec.vocab_size >= 1, errkind::config, "synthetic: empty base vocabulary");
  require(spec.num_examples >= 1, errkind::config, "synthetic: need at least one example");
  require(spec.min_len >= 1 && spec.min_len <= spec.max_len, errkind::config,
          "synthetic: invalid length range");
  std::vector<std::string> class_names = spec.class_names;
  if (class_names.empty()) {
    for (std::size_t c = 0; c < spec.num_classes; ++c)
      class_names.push_back("c" + std::to_string(c));
  }
  require(class_names.size() == spec.num_classes, errkind::config,
          "synthetic: class name count mismatch");
  for (const ArtifactSpec& a : spec.artifacts) {
    require(a.cls < spec.num_classes, errkind::config, "synthetic: artifact class out of range");
    require(a.p_in >= 0.0 && a.p_in <= 1.0 && a.p_cross >= 0.0 && a.p_cross <= 1.0,
            errkind::config, "synthetic: artifact probabilities must lie in [0,1]");
    require(!a.token.empty(), errkind::config, "synthetic: empty artifact token");
  }

  int width = 1;
  for (std::size_t n = spec.vocab_size; n >= 10; n /= 10) ++width;
  std::vector<std::string> base(spec.vocab_size);
  for (std::size_t i = 0; i < spec.vocab_size; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%0*zu", width, i);
    base[i] = buf;
  }

  Rng rng(spec.seed);
  SyntheticResult out;
  out.dataset.pair_task = false;
  for (std::size_t i = 0; i < spec.num_examples; ++i) {
    const std::size_t label = i % spec.num_classes;
    const std::size_t len = spec.min_len + rng.integer(spec.max_len - spec.min_len + 1);
    RawExample ex;
    ex.label = class_names[label];
    ex.text.reserve(len + spec.artifacts.size());
    for (std::size_t t = 0; t < len; ++t) ex.text.push_back(base[rng.integer(spec.vocab_size)]);
    for (const ArtifactSpec& a : spec.artifacts) {
      const double p = (a.cls == label) ? a.p_in : a.p_cross;
      if (rng.uniform() < p) {
        const std::size_t pos = rng.integer(ex.text.size() + 1);
        ex.text.insert(ex.text.begin() + static_cast<std::ptrdiff_t>(pos), a.token);
      }
    }
    out.dataset.rows.push_back(std::move(ex));
  }
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    std::vector<std::string> planted;
    for (const ArtifactSpec& a : spec.artifacts)
      if (a.cls == c) planted.push_back(a.token);
    out.manifest.emplace_back(class_names[c], std::move(planted));
  }
  return out;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab, Rng& rng) {
  std::ifstream in(path);
  require(in.good(), errkind::io, "cannot open embeddings file: " + path);
  EmbeddingTable table;
  table.from_file.assign(vocab.size(), 0);
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> row;
  std::vector<std::vector<double>> file_rows(vocab.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    require(!tok.empty(), errkind::format,
            "embeddings line " + std::to_string(lineno) + ": missing token");
    row.clear();
    double v;
    while (ss >> v) row.push_back(v);
    require(!ss.fail() || ss.eof(), errkind::format,
            "embeddings line " + std::to_string(lineno) + ": malformed number");
    require(!row.empty(), errkind::format,
            "embeddings line " + std::to_string(lineno) + ": no values");
    if (table.dim == 0) table.dim = row.size();
    require(row.size() == table.dim, errkind::format,
            "embeddings line " + std::to_string(lineno) + ": dimension " +
                std::to_string(row.size()) + " != " + std::to_string(table.dim));
    if (!vocab.contains(tok)) continue;
    const std::size_t id = vocab.id(tok);
    if (id == Vocab::kUnk) continue;  // UNK stays random by design
    file_rows[id] = row;
    table.from_file[id] = 1;
  }
  require(table.dim > 0, errkind::format, "embeddings file has no data lines: " + path);
  table.weights = ad::Tensor::zeros({vocab.size(), table.dim});
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    double* dst = table.weights.data.data() + i * table.dim;
    if (table.from_file[i]) {
      std::copy(file_rows[i].begin(), file_rows[i].end(), dst);
    } else {
      for (std::size_t j = 0; j < table.dim; ++j) dst[j] = rng.uniform(-0.1, 0.1);
    }
  }
  return table;
}

}  // namespace sift::data
