#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "sift/data.hpp"
#include "sift/error.hpp"

using namespace sift;
using namespace sift::data;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("sift_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("tokenize rules") {
  CHECK(tokenize("A good film.") == std::vector<std::string>{"a", "good", "film", "."});
  CHECK(tokenize("it's") == std::vector<std::string>{"it", "'", "s"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("  \t \n ") == std::vector<std::string>{});
  CHECK(tokenize("well-known (really)!") ==
        std::vector<std::string>{"well", "-", "known", "(", "really", ")", "!"});
  SUBCASE("idempotent on its own output") {
    auto toks = tokenize("Don't stop; it's GREAT, truly (no?)...");
    std::string joined;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i) joined += ' ';
      joined += toks[i];
    }
    CHECK(tokenize(joined) == toks);
  }
}

TEST_CASE("vocabulary construction") {
  std::vector<std::vector<std::string>> corpus{{"b", "a", "b"}, {"c", "b", "a"}};
  SUBCASE("specials occupy ids 0..3 and counts rank the rest") {
    Vocab v = Vocab::build(corpus, 10);
    REQUIRE(v.size() == 7);
    CHECK(v.tokens[0] == "<pad>");
    CHECK(v.tokens[1] == "<unk>");
    CHECK(v.tokens[2] == "<s>");
    CHECK(v.tokens[3] == "</s>");
    CHECK(v.tokens[4] == "b");  // freq 3
    CHECK(v.tokens[5] == "a");  // freq 2
    CHECK(v.tokens[6] == "c");  // freq 1
    CHECK(v.id("b") == 4);
    CHECK(v.id("zzz") == Vocab::kUnk);
  }
  SUBCASE("frequency ties break lexicographically") {
    Vocab v = Vocab::build({{"beta", "alpha", "gamma"}}, 6);
    REQUIRE(v.size() == 6);
    CHECK(v.tokens[4] == "alpha");
    CHECK(v.tokens[5] == "beta");
  }
  SUBCASE("truncation keeps the most frequent") {
    Vocab v = Vocab::build(corpus, 5);
    REQUIRE(v.size() == 5);
    CHECK(v.tokens[4] == "b");
  }
  SUBCASE("same corpus gives identical hash, different corpus differs") {
    CHECK(Vocab::build(corpus, 10).hash() == Vocab::build(corpus, 10).hash());
    CHECK(Vocab::build(corpus, 10).hash() != Vocab::build(corpus, 5).hash());
  }
  SUBCASE("empty corpus is rejected") {
    try {
      Vocab::build({}, 10);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == errkind::degenerate_data);
    }
  }
  SUBCASE("encode/decode round-trip with UNK fixed point") {
    Vocab v = Vocab::build(corpus, 10);
    std::vector<std::string> toks{"a", "zzz", "c", "<unk>"};
    auto ids = v.encode(toks);
    CHECK(ids == std::vector<std::size_t>{5, Vocab::kUnk, 6, Vocab::kUnk});
    auto back = v.decode(ids);
    CHECK(back == std::vector<std::string>{"a", "<unk>", "c", "<unk>"});
    CHECK(v.encode(back) == ids);  // second round-trip is a fixed point
  }
  SUBCASE("from_tokens validates the specials") {
    Vocab v = Vocab::build(corpus, 10);
    Vocab w = Vocab::from_tokens(v.tokens);
    CHECK(w.hash() == v.hash());
    CHECK_THROWS_AS(Vocab::from_tokens({"<pad>", "<s>"}), Error);
  }
}

TEST_CASE("dataset TSV round trip") {
  TempDir tmp;
  SUBCASE("two columns make a sentence task") {
    write_file(tmp.file("d.tsv"), "pos\tA good film.\nneg\tit was bad\n");
    RawDataset ds = load_raw_dataset(tmp.file("d.tsv"));
    REQUIRE(ds.rows.size() == 2);
    CHECK_FALSE(ds.pair_task);
    CHECK(ds.rows[0].label == "pos");
    CHECK(ds.rows[0].text == std::vector<std::string>{"a", "good", "film", "."});
    save_raw_dataset(ds, tmp.file("d2.tsv"));
    RawDataset ds2 = load_raw_dataset(tmp.file("d2.tsv"));
    REQUIRE(ds2.rows.size() == 2);
    CHECK(ds2.rows[0].text == ds.rows[0].text);
    CHECK(ds2.rows[1].text == ds.rows[1].text);
  }
  SUBCASE("three columns make a pair task") {
    write_file(tmp.file("p.tsv"), "entail\ta dog runs\tan animal moves\n");
    RawDataset ds = load_raw_dataset(tmp.file("p.tsv"));
    CHECK(ds.pair_task);
    CHECK(ds.rows[0].text2 == std::vector<std::string>{"an", "animal", "moves"});
  }
  SUBCASE("ragged rows name the line") {
    write_file(tmp.file("r.tsv"), "pos\ta b\nneg\ta\tb\tc\n");
    try {
      load_raw_dataset(tmp.file("r.tsv"));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == errkind::format);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("empty text is rejected") {
    write_file(tmp.file("e.tsv"), "pos\t ... \n");
    // "..." tokenizes to punctuation, not nothing; use genuinely empty text
    write_file(tmp.file("e2.tsv"), "pos\t  \n");
    CHECK_NOTHROW(load_raw_dataset(tmp.file("e.tsv")));
    try {
      load_raw_dataset(tmp.file("e2.tsv"));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == errkind::degenerate_data);
    }
  }
  SUBCASE("label table enforcement") {
    write_file(tmp.file("t.tsv"), "pos\ta b\nneg\tc d\nmeh\te f\n");
    RawDataset raw = load_raw_dataset(tmp.file("t.tsv"));
    Vocab v = Vocab::build(corpus_from_dataset(raw), 100);
    LabeledDataset free = encode_dataset(raw, v);
    CHECK(free.labels == std::vector<std::string>{"pos", "neg", "meh"});
    std::vector<std::string> fixed{"pos", "neg"};
    try {
      encode_dataset(raw, v, &fixed);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == errkind::degenerate_data);
    }
  }
}

TEST_CASE("corpus file round trip") {
  TempDir tmp;
  std::vector<std::vector<std::string>> corpus{{"a", "b"}, {"c"}};
  save_corpus(corpus, tmp.file("c.txt"));
  CHECK(load_corpus(tmp.file("c.txt")) == corpus);
}

TEST_CASE("synthetic corpus generation") {
  SyntheticSpec spec;
  spec.vocab_size = 50;
  spec.num_classes = 2;
  spec.num_examples = 4000;
  spec.min_len = 4;
  spec.max_len = 9;
  spec.seed = 77;
  spec.class_names = {"neg", "pos"};
  spec.artifacts = {{"glint", 1, 0.9, 0.05}, {"murk", 0, 0.8, 0.1}};

  SyntheticResult r = generate_synthetic(spec);
  REQUIRE(r.dataset.rows.size() == 4000);

  SUBCASE("labels are balanced and lengths respect the range") {
    std::size_t pos = 0;
    for (const RawExample& ex : r.dataset.rows) {
      if (ex.label == "pos") ++pos;
      CHECK(ex.text.size() >= spec.min_len);
      CHECK(ex.text.size() <= spec.max_len + spec.artifacts.size());
    }
    CHECK(pos == 2000);
  }
  SUBCASE("artifact frequencies track the spec within 0.03") {
    auto rate = [&](const std::string& tok, const std::string& cls) {
      std::size_t hit = 0, total = 0;
      for (const RawExample& ex : r.dataset.rows) {
        if (ex.label != cls) continue;
        ++total;
        for (const std::string& t : ex.text)
          if (t == tok) {
            ++hit;
            break;
          }
      }
      return static_cast<double>(hit) / static_cast<double>(total);
    };
    CHECK(rate("glint", "pos") == doctest::Approx(0.9).epsilon(0.04));
    CHECK(rate("glint", "neg") == doctest::Approx(0.05).scale(1).epsilon(0.6));
    CHECK(std::fabs(rate("glint", "neg") - 0.05) < 0.03);
    CHECK(std::fabs(rate("murk", "neg") - 0.8) < 0.03);
    CHECK(std::fabs(rate("murk", "pos") - 0.1) < 0.03);
  }
  SUBCASE("manifest lists planted tokens per class") {
    REQUIRE(r.manifest.size() == 2);
    CHECK(r.manifest[0].first == "neg");
    CHECK(r.manifest[0].second == std::vector<std::string>{"murk"});
    CHECK(r.manifest[1].second == std::vector<std::string>{"glint"});
  }
  SUBCASE("fixed seed reproduces bit-identical data") {
    SyntheticResult r2 = generate_synthetic(spec);
    REQUIRE(r2.dataset.rows.size() == r.dataset.rows.size());
    for (std::size_t i = 0; i < r.dataset.rows.size(); ++i) {
      CHECK(r2.dataset.rows[i].label == r.dataset.rows[i].label);
      CHECK(r2.dataset.rows[i].text == r.dataset.rows[i].text);
    }
    SyntheticSpec other = spec;
    other.seed = 78;
    SyntheticResult r3 = generate_synthetic(other);
    bool any_diff = false;
    for (std::size_t i = 0; i < r.dataset.rows.size() && !any_diff; ++i)
      any_diff = r3.dataset.rows[i].text != r.dataset.rows[i].text;
    CHECK(any_diff);
  }
  SUBCASE("invalid specs are rejected") {
    SyntheticSpec bad = spec;
    bad.artifacts[0].p_in = 1.5;
    CHECK_THROWS_AS(generate_synthetic(bad), Error);
    bad = spec;
    bad.min_len = 0;
    CHECK_THROWS_AS(generate_synthetic(bad), Error);
    bad = spec;
    bad.artifacts[0].cls = 7;
    CHECK_THROWS_AS(generate_synthetic(bad), Error);
  }
}

TEST_CASE("embedding loading") {
  TempDir tmp;
  std::vector<std::vector<std::string>> corpus{{"dog", "cat", "dog"}, {"bird"}};
  Vocab v = Vocab::build(corpus, 10);  // dog=4 cat/bird 5,6? freq: dog2,bird1,cat1 -> bird,cat lex
  SUBCASE("rows come from the file, absences get random init") {
    write_file(tmp.file("emb.txt"), "dog 1 2 3\ncat -1 0.5 0\n");
    Rng rng(5);
    EmbeddingTable t = load_embeddings(tmp.file("emb.txt"), v, rng);
    CHECK(t.dim == 3);
    const std::size_t dog = v.id("dog"), cat = v.id("cat"), bird = v.id("bird");
    CHECK(t.from_file[dog] == 1);
    CHECK(t.from_file[cat] == 1);
    CHECK(t.from_file[bird] == 0);
    CHECK(t.weights.at(dog, 0) == 1.0);
    CHECK(t.weights.at(dog, 2) == 3.0);
    CHECK(t.weights.at(cat, 1) == 0.5);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(t.weights.at(bird, j) >= -0.1);
      CHECK(t.weights.at(bird, j) <= 0.1);
    }
  }
  SUBCASE("the UNK row is never read from the file") {
    write_file(tmp.file("emb.txt"), "<unk> 9 9\ndog 1 2\n");
    Rng rng(5);
    EmbeddingTable t = load_embeddings(tmp.file("emb.txt"), v, rng);
    CHECK(t.from_file[Vocab::kUnk] == 0);
    CHECK(t.weights.at(Vocab::kUnk, 0) != 9.0);
    CHECK(std::fabs(t.weights.at(Vocab::kUnk, 0)) <= 0.1);
  }
  SUBCASE("inconsistent dimension names the line") {
    write_file(tmp.file("emb.txt"), "dog 1 2 3\ncat 1 2\n");
    Rng rng(5);
    try {
      load_embeddings(tmp.file("emb.txt"), v, rng);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == errkind::format);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("malformed number names the line") {
    write_file(tmp.file("emb.txt"), "dog 1 2\ncat 1 x\n");
    Rng rng(5);
    try {
      load_embeddings(tmp.file("emb.txt"), v, rng);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == errkind::format);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("deterministic random rows under a fixed seed") {
    write_file(tmp.file("emb.txt"), "dog 1 2\n");
    Rng r1(9), r2(9);
    EmbeddingTable a = load_embeddings(tmp.file("emb.txt"), v, r1);
    EmbeddingTable b = load_embeddings(tmp.file("emb.txt"), v, r2);
    CHECK(a.weights.data == b.weights.data);
  }
}
