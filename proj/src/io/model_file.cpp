#include "snlm/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace snlm {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    written_ += n;
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  std::uint64_t written() const { return written_; }

 private:
  std::ostream& out_;
  std::uint64_t written_ = 0;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw Error("model file: truncated");
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::istream& in_;
};

}  // namespace

Model make_model(const ModelConfig& config, const Vocabulary& vocab, std::shared_ptr<const WordClassing> classing,
                 std::shared_ptr<const VocabularyTree> tree) {
  ModelConfig c = config;
  c.start_symbol = kStartId;
  return Model(c, vocab.size(), std::move(classing), std::move(tree));
}

ModelFileLayout write_model(std::ostream& out, const Vocabulary& vocab, const Model& model) {
  if (model.vocab_size() != vocab.size()) throw Error("model file: vocabulary and model sizes differ");
  Writer w(out);
  w.bytes(kModelMagic, 4);
  w.u32(kModelFormatVersion);

  const auto& cfg = model.config();
  w.u32(static_cast<std::uint32_t>(cfg.order));
  w.u32(static_cast<std::uint32_t>(cfg.dim));
  w.u32(static_cast<std::uint32_t>(cfg.regime));
  w.u8(cfg.diagonal_contexts ? 1 : 0);
  w.u8(cfg.start_symbol ? 1 : 0);
  w.i32(cfg.start_symbol.value_or(-1));

  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& tok = vocab.token(static_cast<WordId>(i));
    w.u32(static_cast<std::uint32_t>(tok.size()));
    w.bytes(tok.data(), tok.size());
    w.u64(vocab.count(static_cast<WordId>(i)));
  }

  if (const auto* classing = model.classing()) {
    w.u32(static_cast<std::uint32_t>(classing->num_classes()));
    for (ClassId c : classing->assignment()) w.u32(static_cast<std::uint32_t>(c));
  } else if (const auto* tree = model.tree()) {
    w.u32(static_cast<std::uint32_t>(tree->nodes().size()));
    for (const auto& n : tree->nodes()) {
      w.i32(n.parent);
      w.i32(n.word);
    }
  }

  std::uint64_t payload = 0;
  model.params().for_each_family([&](std::string_view, std::span<const float> d) { payload += 4 * d.size(); });
  w.u64(payload);
  ModelFileLayout layout;
  layout.header_bytes = w.written();
  model.params().for_each_family([&](std::string_view, std::span<const float> d) {
    for (float x : d) w.f32(x);
  });
  layout.payload_bytes = w.written() - layout.header_bytes;
  if (!out) throw Error("model file: write failed");
  return layout;
}

LanguageModel read_model(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0) throw Error("model file: bad magic (not an SNLM model)");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw Error("model file: format version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kModelFormatVersion) + ")");

  ModelConfig cfg;
  cfg.order = static_cast<int>(r.u32());
  cfg.dim = static_cast<int>(r.u32());
  const std::uint32_t regime = r.u32();
  if (regime > 2) throw Error("model file: unknown regime " + std::to_string(regime));
  cfg.regime = static_cast<Regime>(regime);
  cfg.diagonal_contexts = r.u8() != 0;
  const bool has_start = r.u8() != 0;
  const std::int32_t start = r.i32();
  if (has_start) cfg.start_symbol = start;

  const std::uint32_t vocab_size = r.u32();
  if (vocab_size < 3) throw Error("model file: vocabulary too small");
  Vocabulary vocab;
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const std::uint32_t len = r.u32();
    if (len > (1u << 20)) throw Error("model file: implausible token length");
    std::string tok(len, '\0');
    r.bytes(tok.data(), len);
    const std::uint64_t count = r.u64();
    if (i < 3) {
      if (tok != vocab.token(static_cast<WordId>(i))) throw Error("model file: special tokens out of place");
      vocab.set_count(static_cast<WordId>(i), count);
    } else {
      vocab.add(tok, count);
    }
  }

  std::shared_ptr<const WordClassing> classing;
  std::shared_ptr<const VocabularyTree> tree;
  if (cfg.regime == Regime::class_factored) {
    const auto K = static_cast<int>(r.u32());
    std::vector<ClassId> class_of(vocab_size);
    for (auto& c : class_of) c = static_cast<ClassId>(r.u32());
    classing = std::make_shared<WordClassing>(std::move(class_of), K);
  } else if (cfg.regime == Regime::tree_factored) {
    const std::uint32_t n = r.u32();
    if (n != 2 * vocab_size - 1) throw Error("model file: tree node count does not match the vocabulary");
    std::vector<std::pair<int, WordId>> entries(n);
    for (auto& [parent, word] : entries) {
      parent = r.i32();
      word = r.i32();
    }
    tree = std::make_shared<VocabularyTree>(VocabularyTree::from_preorder(entries, vocab_size));
  }

  Model model(cfg, vocab_size, classing, tree);
  const std::uint64_t payload = r.u64();
  std::uint64_t expected = 0;
  model.params().for_each_family([&](std::string_view, std::span<const float> d) { expected += 4 * d.size(); });
  if (payload != expected) throw Error("model file: payload size does not match the configuration");
  model.params().for_each_family([&](std::string_view, std::span<float> d) {
    for (float& x : d) x = r.f32();
  });
  if (!model.params().all_finite()) throw Error("model file: non-finite parameters");
  return LanguageModel{std::move(vocab), std::move(model)};
}

ModelFileLayout save_model(const std::string& path, const Vocabulary& vocab, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return write_model(out, vocab, model);
}

LanguageModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  return read_model(in);
}

}  // namespace snlm
