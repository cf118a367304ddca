#include "truecase/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "truecase/error.hpp"

namespace truecase {
namespace {

static_assert(sizeof(float) == 4);

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += 4;
    return v;
  }

  std::string string() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void raw(char* dst, size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw ModelFormatError("model file is truncated");
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const Model& model) {
  std::string out(kModelMagic, 4);
  put_u32(out, kModelFormatVersion);
  put_string(out, model.config().to_json());
  const auto& params = model.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (size_t t = 0; t < params.size(); ++t) {
    put_string(out, params.name(t));
    const auto& tensor = params[t];
    put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
    for (auto d : tensor.dims) put_u32(out, d);
    for (float v : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Model deserialize_model(const std::string& bytes) {
  Reader in(bytes);
  char magic[4];
  in.raw(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0) throw ModelFormatError("not an HTRC model file");
  const std::uint32_t version = in.u32();
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  Model model(ModelConfig::from_json(in.string()));
  auto& params = model.parameters();
  const std::uint32_t count = in.u32();
  if (count != params.size()) {
    throw ModelFormatError("expected " + std::to_string(params.size()) + " tensors, found " +
                           std::to_string(count));
  }
  for (size_t t = 0; t < params.size(); ++t) {
    const std::string name = in.string();
    if (name != params.name(t)) {
      throw ModelFormatError("unexpected tensor '" + name + "', wanted '" + params.name(t) + "'");
    }
    auto& tensor = params[t];
    const std::uint32_t rank = in.u32();
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = in.u32();
    if (dims != tensor.dims) throw ModelFormatError("shape mismatch for tensor " + name);
    for (float& v : tensor.data) v = in.f32();
  }
  if (!in.done()) throw ModelFormatError("trailing bytes after tensor table");
  return model;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace truecase
