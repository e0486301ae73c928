#include <bit>
#include <cstring>

#include "sentinel/embedding.hpp"
#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel::embedding {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model file IO assumes a little-endian host");

constexpr char kMagic[4] = {'S', 'N', 'T', 'L'};

struct Writer {
  std::string buf;

  template <typename T>
  void raw(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
  }
  void u32(std::uint32_t v) { raw(v); }
  void u64(std::uint64_t v) { raw(v); }
  void i32(std::int32_t v) { raw(v); }
  void f64(double v) { raw(v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf.append(s);
  }
  void floats(const std::vector<float>& m) {
    u64(m.size());
    buf.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(float));
  }
};

struct Reader {
  std::string_view data;
  std::size_t pos = 0;

  void need(std::size_t n) {
    if (pos + n > data.size()) throw Error("format", "truncated model file");
  }
  template <typename T>
  T raw() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
  }
  std::uint32_t u32() { return raw<std::uint32_t>(); }
  std::uint64_t u64() { return raw<std::uint64_t>(); }
  std::int32_t i32() { return raw<std::int32_t>(); }
  double f64() { return raw<double>(); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(data.substr(pos, n));
    pos += n;
    return s;
  }
  std::vector<float> floats() {
    const std::uint64_t n = u64();
    need(n * sizeof(float));
    std::vector<float> m(n);
    std::memcpy(m.data(), data.data() + pos, n * sizeof(float));
    pos += n * sizeof(float);
    return m;
  }
};

}  // namespace

void save_model(const EmbeddingModel& model, const std::filesystem::path& path) {
  Writer w;
  w.buf.append(kMagic, sizeof(kMagic));
  w.u32(kModelFormatVersion);

  const Hyperparameters& p = model.params;
  w.i32(p.dim);
  w.i32(p.window);
  w.i32(p.epochs);
  w.f64(p.lr_start);
  w.f64(p.lr_end);
  w.i32(p.negative_samples);
  w.i32(p.min_count);
  w.i32(p.inference_epochs);
  w.u64(p.seed);

  w.u64(model.vocab.size());
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    w.str(model.vocab.tokens[i]);
    w.u64(model.vocab.counts[i]);
  }
  w.i32(model.vocab.min_count);

  w.u64(model.doc_ids.size());
  for (const std::string& id : model.doc_ids) w.str(id);

  w.floats(model.word_vectors);
  w.floats(model.doc_vectors);
  w.floats(model.output_weights);

  const std::uint32_t crc = util::crc32c(w.buf);
  w.u32(crc);
  util::write_file(path, w.buf);
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  const std::string raw = util::read_file(path);
  if (raw.size() < sizeof(kMagic) + 2 * sizeof(std::uint32_t)) {
    throw Error("format", "truncated model file: " + path.string());
  }
  if (std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error("format", "not a model file (bad magic): " + path.string());
  }

  Reader header{std::string_view(raw).substr(sizeof(kMagic), sizeof(std::uint32_t))};
  const std::uint32_t version = header.u32();
  if (version > kModelFormatVersion) {
    throw Error("format", "model file format version " + std::to_string(version) +
                              " is newer than supported version " +
                              std::to_string(kModelFormatVersion));
  }

  const std::string_view payload(raw.data(), raw.size() - sizeof(std::uint32_t));
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, raw.data() + raw.size() - sizeof(std::uint32_t), sizeof(stored_crc));
  if (util::crc32c(payload) != stored_crc) {
    throw Error("checksum", "model file checksum mismatch: " + path.string());
  }

  Reader r{payload, sizeof(kMagic) + sizeof(std::uint32_t)};
  EmbeddingModel model;
  Hyperparameters& p = model.params;
  p.dim = r.i32();
  p.window = r.i32();
  p.epochs = r.i32();
  p.lr_start = r.f64();
  p.lr_end = r.f64();
  p.negative_samples = r.i32();
  p.min_count = r.i32();
  p.inference_epochs = r.i32();
  p.seed = r.u64();

  const std::uint64_t vocab_size = r.u64();
  model.vocab.tokens.reserve(vocab_size);
  model.vocab.counts.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    model.vocab.tokens.push_back(r.str());
    model.vocab.counts.push_back(r.u64());
    model.vocab.index.emplace(model.vocab.tokens.back(), static_cast<int>(i));
  }
  model.vocab.min_count = r.i32();

  const std::uint64_t doc_count = r.u64();
  model.doc_ids.reserve(doc_count);
  for (std::uint64_t i = 0; i < doc_count; ++i) model.doc_ids.push_back(r.str());

  model.word_vectors = r.floats();
  model.doc_vectors = r.floats();
  model.output_weights = r.floats();

  const std::size_t dim = static_cast<std::size_t>(p.dim);
  if (model.word_vectors.size() != vocab_size * dim ||
      model.output_weights.size() != vocab_size * dim ||
      model.doc_vectors.size() != doc_count * dim) {
    throw Error("format", "model file matrix sizes are inconsistent: " + path.string());
  }
  return model;
}

}  // namespace sentinel::embedding
