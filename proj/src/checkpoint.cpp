#include "emopred/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "emopred/errors.hpp"
#include "emopred/version.hpp"

namespace emopred {

using nlohmann::json;

namespace checkpoint {

namespace {

const char kMagic[4] = {'E', 'M', 'O', 'L'};

const std::uint32_t* crc_table() {
  static std::uint32_t table[256];
  static bool built = false;
  if (!built) {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int b = 0; b < 8; ++b)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
      table[i] = c;
    }
    built = true;
  }
  return table;
}

class Sink {
 public:
  explicit Sink(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw DataError("cannot write checkpoint '" + path + "'");
  }

  void bytes(const void* data, std::size_t len) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(len));
    crc_ = crc32(data, len, crc_);
  }
  void u16(std::uint16_t v) { uint_le(v, 2); }
  void u32(std::uint32_t v) { uint_le(v, 4); }
  void u64(std::uint64_t v) { uint_le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  std::uint32_t crc() const { return crc_; }
  void finish() {
    out_.flush();
    if (!out_) throw DataError("write failure on '" + path_ + "'");
    out_.close();
  }

 private:
  void uint_le(std::uint64_t v, int n) {
    unsigned char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, static_cast<std::size_t>(n));
  }

  std::string path_;
  std::ofstream out_;
  std::uint32_t crc_ = 0;
};

class Source {
 public:
  Source(std::vector<unsigned char> data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  void bytes(void* out, std::size_t len) {
    if (pos_ + len > data_.size())
      throw DataError("truncated checkpoint '" + path_ + "'");
    std::memcpy(out, data_.data() + pos_, len);
    pos_ += len;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint_le(4)); }
  std::uint64_t u64() { return uint_le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t uint_le(int n) {
    if (pos_ + static_cast<std::size_t>(n) > data_.size())
      throw DataError("truncated checkpoint '" + path_ + "'");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(i)])
           << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::vector<unsigned char> data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed) {
  const std::uint32_t* table = crc_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_raw(const std::string& path, const json& meta,
              const std::vector<std::pair<std::string, const Tensor*>>& params) {
  std::string tmp = path + ".tmp";
  {
    Sink sink(tmp);
    sink.bytes(kMagic, 4);
    sink.u32(kFormatVersion);

    std::string meta_text = meta.dump();
    sink.u64(meta_text.size());
    sink.bytes(meta_text.data(), meta_text.size());

    sink.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, tensor] : params) {
      sink.u16(static_cast<std::uint16_t>(name.size()));
      sink.bytes(name.data(), name.size());
      sink.u32(static_cast<std::uint32_t>(tensor->ndim()));
      for (std::size_t d : tensor->shape()) sink.u64(d);
      for (std::size_t i = 0; i < tensor->size(); ++i) sink.f64((*tensor)[i]);
    }
    sink.u32(sink.crc());
    sink.finish();
  }
  std::filesystem::rename(tmp, path);
}

Loaded load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 12) throw DataError("truncated checkpoint '" + path + "'");

  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= static_cast<std::uint32_t>(data[data.size() - 4 +
                                              static_cast<std::size_t>(i)])
              << (8 * i);
  if (crc32(data.data(), data.size() - 4) != stored)
    throw DataError("checkpoint '" + path + "' is corrupted (CRC mismatch)");

  data.resize(data.size() - 4);
  Source src(std::move(data), path);

  char magic[4];
  src.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("'" + path + "' is not an emopred checkpoint");
  std::uint32_t version = src.u32();
  if (version != kFormatVersion)
    throw DataError("unsupported checkpoint version " +
                    std::to_string(version) + " in '" + path + "'");

  std::uint64_t meta_len = src.u64();
  std::string meta_text(meta_len, '\0');
  src.bytes(meta_text.data(), meta_len);
  Loaded loaded;
  loaded.meta = json::parse(meta_text, nullptr, false);
  if (loaded.meta.is_discarded())
    throw DataError("checkpoint '" + path + "' has malformed metadata");

  std::uint32_t count = src.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t name_len = src.u16();
    std::string name(name_len, '\0');
    src.bytes(name.data(), name_len);
    std::uint32_t ndim = src.u32();
    std::vector<std::size_t> shape(ndim);
    std::size_t total = ndim == 0 ? 0 : 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<std::size_t>(src.u64());
      total *= shape[d];
    }
    Tensor t(shape);
    for (std::size_t j = 0; j < total; ++j) t[j] = src.f64();
    loaded.params.emplace_back(std::move(name), std::move(t));
  }
  if (src.remaining() != 0)
    throw DataError("checkpoint '" + path + "' has trailing bytes");
  return loaded;
}

const Tensor& Loaded::get(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw DataError("checkpoint is missing parameter '" + name + "'");
}

}  // namespace checkpoint

namespace {

json labels_to_json(const LabelSet& labels) { return labels.emojis(); }

LabelSet labels_from_json(const json& j) {
  return LabelSet(j.get<std::vector<std::string>>());
}

json pretrained_meta(const PretrainedVectors& v) {
  json j;
  j["tokens"] = v.tokens();
  j["dim"] = v.dim();
  return j;
}

Tensor pretrained_tensor(const PretrainedVectors& v) {
  Tensor t({v.size(), v.dim()});
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto row = v.at(i);
    std::copy(row.begin(), row.end(), t.row(i).begin());
  }
  return t;
}

PretrainedVectors pretrained_from(const json& meta, const Tensor& t) {
  std::vector<std::string> tokens = meta["tokens"].get<std::vector<std::string>>();
  PretrainedVectors v(meta["dim"].get<std::size_t>());
  if (t.rows() != tokens.size() || t.cols() != v.dim())
    throw DataError("pretrained tensor shape does not match metadata");
  for (std::size_t i = 0; i < tokens.size(); ++i) v.insert(tokens[i], t.row(i));
  return v;
}

json blstm_config_meta(const BlstmConfig& c) {
  return {{"word_dim", c.word_dim},       {"hidden", c.hidden},
          {"char_dim", c.char_dim},       {"char_hidden", c.char_hidden},
          {"s_dim", c.s_dim},             {"max_tokens", c.max_tokens},
          {"max_chars", c.max_chars},     {"oov_replace_prob", c.oov_replace_prob}};
}

BlstmConfig blstm_config_from(const json& j) {
  BlstmConfig c;
  c.word_dim = j["word_dim"].get<std::size_t>();
  c.hidden = j["hidden"].get<std::size_t>();
  c.char_dim = j["char_dim"].get<std::size_t>();
  c.char_hidden = j["char_hidden"].get<std::size_t>();
  c.s_dim = j["s_dim"].get<std::size_t>();
  c.max_tokens = j["max_tokens"].get<std::size_t>();
  c.max_chars = j["max_chars"].get<std::size_t>();
  c.oov_replace_prob = j["oov_replace_prob"].get<double>();
  return c;
}

void save_blstm(const std::string& path, BlstmModel& m, json meta) {
  meta["kind"] = "blstm";
  meta["variant"] = variant_name(m.variant);
  meta["config"] = blstm_config_meta(m.config);
  meta["labels"] = labels_to_json(m.labels);

  std::vector<std::string> vocab_tokens;
  std::vector<std::int64_t> vocab_counts;
  for (std::size_t id = Vocabulary::kFirstTokenId; id < m.vocab.size(); ++id) {
    vocab_tokens.push_back(m.vocab.token(id));
    vocab_counts.push_back(m.vocab.count(id));
  }
  meta["vocab"] = {{"tokens", vocab_tokens}, {"counts", vocab_counts}};

  if (m.composer) {
    std::vector<std::uint32_t> cps;
    for (char32_t cp : m.composer->chars.codepoints())
      cps.push_back(static_cast<std::uint32_t>(cp));
    meta["char_vocab"] = cps;
  }
  if (variant_uses_pretrained(m.variant))
    meta["pretrained"] = pretrained_meta(m.pretrained);

  std::vector<std::pair<std::string, const Tensor*>> params;
  for (Parameter* p : m.parameters()) params.emplace_back(p->name, &p->value);
  Tensor pre;
  if (variant_uses_pretrained(m.variant)) {
    pre = pretrained_tensor(m.pretrained);
    params.emplace_back("pretrained.vectors", &pre);
  }
  checkpoint::save_raw(path, meta, params);
}

BlstmModel load_blstm(const checkpoint::Loaded& loaded) {
  const json& meta = loaded.meta;
  Variant variant = variant_from_name(meta["variant"].get<std::string>());
  BlstmConfig config = blstm_config_from(meta["config"]);
  LabelSet labels = labels_from_json(meta["labels"]);
  Vocabulary vocab = Vocabulary::from_entries(
      meta["vocab"]["tokens"].get<std::vector<std::string>>(),
      meta["vocab"]["counts"].get<std::vector<std::int64_t>>());
  CharVocab chars;
  if (meta.contains("char_vocab")) {
    std::vector<char32_t> cps;
    for (std::uint32_t cp : meta["char_vocab"].get<std::vector<std::uint32_t>>())
      cps.push_back(static_cast<char32_t>(cp));
    chars = CharVocab::from_codepoints(std::move(cps));
  }
  PretrainedVectors pretrained;
  if (meta.contains("pretrained"))
    pretrained =
        pretrained_from(meta["pretrained"], loaded.get("pretrained.vectors"));

  Rng throwaway(0);
  BlstmModel m =
      BlstmModel::init(variant, config, std::move(vocab), std::move(chars),
                       std::move(labels), std::move(pretrained), throwaway);
  for (Parameter* p : m.parameters()) {
    const Tensor& stored = loaded.get(p->name);
    if (!stored.same_shape(p->value))
      throw DataError("checkpoint parameter '" + p->name +
                      "' has shape " + stored.shape_str() + ", expected " +
                      p->value.shape_str());
    p->value = stored;
  }
  return m;
}

void save_bow(const std::string& path, const BowModel& m, json meta) {
  meta["kind"] = "bow";
  meta["labels"] = labels_to_json(m.labels);
  meta["feature_tokens"] = m.features.feature_tokens;
  meta["l2"] = m.l2;
  meta["tol"] = m.tol;

  Tensor idf = Tensor::vector(m.features.idf);
  std::vector<std::pair<std::string, const Tensor*>> params = {
      {"bow.idf", &idf}, {"bow.w", &m.w}, {"bow.b", &m.b}};
  checkpoint::save_raw(path, meta, params);
}

BowModel load_bow(const checkpoint::Loaded& loaded) {
  const json& meta = loaded.meta;
  BowModel m;
  m.labels = labels_from_json(meta["labels"]);
  m.features.feature_tokens =
      meta["feature_tokens"].get<std::vector<std::string>>();
  const Tensor& idf = loaded.get("bow.idf");
  m.features.idf.assign(idf.values().begin(), idf.values().end());
  if (m.features.idf.size() != m.features.feature_tokens.size())
    throw DataError("checkpoint idf/feature count mismatch");
  for (std::size_t i = 0; i < m.features.feature_tokens.size(); ++i)
    m.features.index.emplace(m.features.feature_tokens[i], static_cast<int>(i));
  m.w = loaded.get("bow.w");
  m.b = loaded.get("bow.b");
  m.l2 = meta["l2"].get<double>();
  m.tol = meta["tol"].get<double>();
  return m;
}

void save_avg(const std::string& path, const AvgModel& m, json meta) {
  meta["kind"] = "avg";
  meta["labels"] = labels_to_json(m.labels);
  meta["pretrained"] = pretrained_meta(m.vectors);
  meta["l2"] = m.l2;
  meta["tol"] = m.tol;

  Tensor pre = pretrained_tensor(m.vectors);
  std::vector<std::pair<std::string, const Tensor*>> params = {
      {"pretrained.vectors", &pre}, {"avg.w", &m.w}, {"avg.b", &m.b}};
  checkpoint::save_raw(path, meta, params);
}

AvgModel load_avg(const checkpoint::Loaded& loaded) {
  const json& meta = loaded.meta;
  AvgModel m;
  m.labels = labels_from_json(meta["labels"]);
  m.vectors =
      pretrained_from(meta["pretrained"], loaded.get("pretrained.vectors"));
  m.w = loaded.get("avg.w");
  m.b = loaded.get("avg.b");
  m.l2 = meta["l2"].get<double>();
  m.tol = meta["tol"].get<double>();
  return m;
}

}  // namespace

void save_model(const std::string& path, AnyModel& model,
                const json& run_config) {
  json meta;
  meta["tool_version"] = kToolVersion;
  meta["format_version"] = checkpoint::kFormatVersion;
  if (!run_config.is_null()) meta["run_config"] = run_config;

  if (auto* blstm = std::get_if<BlstmModel>(&model)) {
    save_blstm(path, *blstm, std::move(meta));
  } else if (auto* bow = std::get_if<BowModel>(&model)) {
    save_bow(path, *bow, std::move(meta));
  } else {
    save_avg(path, std::get<AvgModel>(model), std::move(meta));
  }
}

LoadedModel load_model(const std::string& path) {
  checkpoint::Loaded loaded = checkpoint::load_raw(path);
  if (!loaded.meta.contains("kind"))
    throw DataError("checkpoint '" + path + "' is missing the model kind");
  std::string kind = loaded.meta["kind"].get<std::string>();
  if (kind == "blstm") return {load_blstm(loaded), loaded.meta};
  if (kind == "bow") return {load_bow(loaded), loaded.meta};
  if (kind == "avg") return {load_avg(loaded), loaded.meta};
  throw DataError("checkpoint '" + path + "' has unknown model kind '" + kind +
                  "'");
}

const LabelSet& model_labels(const AnyModel& model) {
  return std::visit([](const auto& m) -> const LabelSet& { return m.labels; },
                    model);
}

std::vector<double> model_predict(AnyModel& model,
                                  std::span<const std::string> tokens) {
  return std::visit(
      [&](auto& m) -> std::vector<double> {
        return m.predict_distribution(tokens);
      },
      model);
}

const char* model_kind(const AnyModel& model) {
  if (std::holds_alternative<BlstmModel>(model)) return "blstm";
  if (std::holds_alternative<BowModel>(model)) return "bow";
  return "avg";
}

}  // namespace emopred
