#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "adaptgen/params.hpp"

namespace adaptgen {

// Checkpoint layout, all integers little-endian:
//   magic "ADPGCKPT", version u32,
//   tensor_count u32,
//   per tensor: name_len u32, name bytes, rows u32, cols u32, trainable u8,
//               row-major float32 data,
//   fnv1a-64 checksum of every byte after the version field.
inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'P', 'G', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, std::size_t offset,
             std::size_t limit = std::string::npos)
      : data_(data), pos_(offset), limit_(limit == std::string::npos ? data.size() : limit) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw std::runtime_error("truncated checkpoint");
  }
  const std::string& data_;
  std::size_t pos_;
  std::size_t limit_;
};

}  // namespace detail

template <class Scalar>
void save_checkpoint(const ParamStore<Scalar>& params, const std::string& path) {
  std::string payload;
  detail::put_u32(payload, static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& t : params.tensors()) {
    detail::put_u32(payload, static_cast<std::uint32_t>(t.name.size()));
    payload += t.name;
    detail::put_u32(payload, static_cast<std::uint32_t>(t.value.rows()));
    detail::put_u32(payload, static_cast<std::uint32_t>(t.value.cols()));
    payload.push_back(t.trainable ? 1 : 0);
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        const float f = static_cast<float>(t.value(r, c));
        char raw[4];
        std::memcpy(raw, &f, 4);
        payload.append(raw, 4);
      }
    }
  }

  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_u32(out, kCheckpointVersion);
  out += payload;
  detail::put_u64(out, fnv1a(payload.data(), payload.size()));

  // write-temp-then-rename so readers never see a partial file
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("checkpoint write failed: " + path);
  }
  std::filesystem::rename(tmp, target);
}

template <class Scalar>
ParamStore<Scalar> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof(kCheckpointMagic) + 4 ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  detail::ByteReader header(data, sizeof(kCheckpointMagic));
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint version mismatch: file has " + std::to_string(version) +
                             ", expected " + std::to_string(kCheckpointVersion));
  }
  if (data.size() < header.pos() + 8) throw std::runtime_error("truncated checkpoint");
  const std::size_t payload_begin = header.pos();
  const std::size_t payload_end = data.size() - 8;

  // Parse structure first so a short file reads as "truncated" rather than as
  // a checksum failure; the checksum is verified once the layout is sound.
  detail::ByteReader r(data, payload_begin, payload_end);
  const std::uint32_t count = r.u32();
  ParamStore<Scalar> store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.bytes(name_len);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    const bool trainable = r.u8() != 0;
    auto& m = store.add(name, rows, cols);
    for (std::uint32_t rr = 0; rr < rows; ++rr) {
      for (std::uint32_t cc = 0; cc < cols; ++cc) {
        const std::string raw = r.bytes(4);
        float fv;
        std::memcpy(&fv, raw.data(), 4);
        m(rr, cc) = static_cast<Scalar>(fv);
      }
    }
    store.tensors().back().trainable = trainable;
  }
  if (r.pos() != payload_end) throw std::runtime_error("checkpoint has trailing bytes: " + path);

  detail::ByteReader footer(data, payload_end);
  const std::uint64_t stored = footer.u64();
  const std::uint64_t actual = fnv1a(data.data() + payload_begin, payload_end - payload_begin);
  if (stored != actual) throw std::runtime_error("checkpoint checksum failure: " + path);
  return store;
}

// Loads into an existing store, validating that every tensor matches by name
// and shape. The error names the offending tensor.
template <class Scalar>
void load_checkpoint_into(ParamStore<Scalar>& params, const std::string& path) {
  ParamStore<Scalar> loaded = load_checkpoint<Scalar>(path);
  if (loaded.tensors().size() != params.tensors().size()) {
    throw std::runtime_error("checkpoint tensor count mismatch: file has " +
                             std::to_string(loaded.tensors().size()) + ", model has " +
                             std::to_string(params.tensors().size()));
  }
  for (auto& t : params.tensors()) {
    if (!loaded.has(t.name)) throw std::runtime_error("checkpoint missing tensor: " + t.name);
    const auto& src = loaded.at(t.name);
    if (src.rows() != t.value.rows() || src.cols() != t.value.cols()) {
      throw std::runtime_error("shape mismatch for tensor " + t.name + ": checkpoint " +
                               std::to_string(src.rows()) + "x" + std::to_string(src.cols()) +
                               ", model " + std::to_string(t.value.rows()) + "x" +
                               std::to_string(t.value.cols()));
    }
    t.value = src;
    t.trainable = loaded.trainable(t.name);
  }
}

inline std::uint64_t file_checksum(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file for checksum: " + path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return fnv1a(data.data(), data.size());
}

}  // namespace adaptgen
