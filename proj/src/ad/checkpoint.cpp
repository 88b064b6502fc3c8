#include "dsnt/ad/checkpoint.hpp"

#include <bit>
#include <cstring>

namespace dsnt::ad {
namespace {

constexpr std::string_view kMagic = "DSNT1";
constexpr std::uint8_t kDtypeF32 = 1;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  bool done() const { return pos_ == bytes_.size(); }

  template <typename T>
  T get_le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error("checkpoint: truncated data");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const ParameterSet& params) {
  std::string out(kMagic);
  for (ParamId id = 0; id < params.size(); ++id) {
    const auto& name = params.name(id);
    const auto& t = params.value(id);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    out.push_back(static_cast<char>(kDtypeF32));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

ParameterSet decode_tensors(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) throw Error("checkpoint: bad magic (expected DSNT1)");
  Reader r(bytes);
  r.get_bytes(kMagic.size());
  ParameterSet params;
  while (!r.done()) {
    auto name_len = r.get_le<std::uint32_t>();
    auto name = r.get_bytes(name_len);
    auto dtype = r.get_le<std::uint8_t>();
    if (dtype != kDtypeF32) throw Error("checkpoint: unsupported dtype for " + name);
    auto rank = r.get_le<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get_le<std::uint64_t>());
    Tensor t(shape);
    for (auto& v : t.data()) v = std::bit_cast<float>(r.get_le<std::uint32_t>());
    params.add(std::move(name), std::move(t));
  }
  return params;
}

void write_tensors(const std::filesystem::path& path, const ParameterSet& params) {
  io::write_atomic(path, encode_tensors(params));
}

ParameterSet read_tensors(const std::filesystem::path& path) {
  return decode_tensors(io::read_file(path));
}

void round_to_f32(ParameterSet& params) {
  for (ParamId id = 0; id < params.size(); ++id)
    for (auto& v : params.value(id).data()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace dsnt::ad
