#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trn/any_model.hpp"
#include "trn/data.hpp"
#include "trn/error.hpp"

namespace trn {

// TRN1 checkpoint format, byte-exact round trip:
//   magic "TRN1", version u32
//   config: model_kind u32, D u32, K u32, H u32, ld u32, le u32, E u32,
//           alpha f64 (as two u32 words, little-endian low first)
//   block_count u32
//   per block: name_len u32, name bytes, rows u32, cols u32,
//              rows*cols little-endian f32
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_f64(std::string& out, double d) {
  static_assert(sizeof(double) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u32(out, static_cast<std::uint32_t>(bits & 0xffffffffull));
  put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

inline double get_f64(ByteReader& r) {
  std::uint64_t lo = r.u32();
  std::uint64_t hi = r.u32();
  std::uint64_t bits = lo | (hi << 32);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace detail

template <typename S>
std::string serialize_checkpoint(const AnyModel<S>& model) {
  std::string out;
  out += "TRN1";
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(model.kind()));
  const TrnConfig& c = model.config();
  detail::put_u32(out, static_cast<std::uint32_t>(c.feature_dim));
  detail::put_u32(out, static_cast<std::uint32_t>(c.num_actions));
  detail::put_u32(out, static_cast<std::uint32_t>(c.hidden_dim));
  detail::put_u32(out, static_cast<std::uint32_t>(c.decoder_steps));
  detail::put_u32(out, static_cast<std::uint32_t>(c.sequence_len));
  detail::put_u32(out, static_cast<std::uint32_t>(c.score_embed_dim));
  detail::put_f64(out, c.alpha);
  auto blocks = model.blocks();
  detail::put_u32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    detail::put_u32(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    detail::put_u32(out, static_cast<std::uint32_t>(b.rows));
    detail::put_u32(out, static_cast<std::uint32_t>(b.cols));
    for (std::size_t i = 0; i < b.size(); ++i)
      detail::put_f32(out, static_cast<float>(b.data[i]));
  }
  return out;
}

template <typename S>
AnyModel<S> parse_checkpoint(const std::string& bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.bytes(4) != "TRN1") throw FormatError("checkpoint: bad magic (expected \"TRN1\")");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  const std::uint32_t kind_raw = r.u32();
  if (kind_raw > static_cast<std::uint32_t>(ModelKind::rnn_offline))
    throw FormatError("checkpoint: unknown model kind " + std::to_string(kind_raw));
  TrnConfig cfg;
  cfg.feature_dim = r.u32();
  cfg.num_actions = r.u32();
  cfg.hidden_dim = r.u32();
  cfg.decoder_steps = r.u32();
  cfg.sequence_len = r.u32();
  cfg.score_embed_dim = r.u32();
  cfg.alpha = detail::get_f64(r);

  Rng dummy(0);
  AnyModel<S> model = AnyModel<S>::init(static_cast<ModelKind>(kind_raw), cfg, dummy);
  auto blocks = model.blocks();
  const std::uint32_t count = r.u32();
  if (count != blocks.size())
    throw FormatError("checkpoint: has " + std::to_string(count) + " parameter blocks but " +
                      std::string(to_string(model.kind())) + " expects " +
                      std::to_string(blocks.size()));
  for (auto& b : blocks) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.bytes(name_len);
    if (name != b.name)
      throw FormatError("checkpoint: expected block '" + b.name + "', found '" + name + "'");
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != b.rows || cols != b.cols)
      throw FormatError("checkpoint: block '" + name + "' is " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " but model expects " + std::to_string(b.rows) +
                        "x" + std::to_string(b.cols));
    for (std::size_t i = 0; i < b.size(); ++i) b.data[i] = static_cast<S>(r.f32());
  }
  if (r.pos != bytes.size())
    throw FormatError("checkpoint: " + std::to_string(bytes.size() - r.pos) +
                      " trailing bytes after last block");
  return model;
}

template <typename S>
void save_checkpoint(const AnyModel<S>& model, const std::string& path) {
  detail::write_file(path, serialize_checkpoint(model), "checkpoint");
}

template <typename S>
AnyModel<S> load_checkpoint(const std::string& path) {
  return parse_checkpoint<S>(detail::read_file(path, "checkpoint"));
}

}  // namespace trn
