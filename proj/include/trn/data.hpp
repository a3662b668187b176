#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "trn/error.hpp"
#include "trn/matrix.hpp"
#include "trn/rng.hpp"

namespace trn {

// One labeled feature stream. Features are stored as 32-bit floats, the
// unit of the OADS file format; labels are 0 (background) .. K.
struct Video {
  std::string id;
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<float> features;        // frames x dim, row-major
  std::vector<std::uint8_t> labels;   // frames

  const float* frame(std::size_t t) const { return features.data() + t * dim; }
};

struct StreamDataset {
  std::size_t num_actions = 0;  // K
  std::size_t feature_dim = 0;  // D
  std::vector<Video> videos;

  std::size_t total_frames() const {
    std::size_t n = 0;
    for (const auto& v : videos) n += v.frames;
    return n;
  }
};

template <typename S>
std::vector<Vector<S>> frames_as(const Video& v) {
  std::vector<Vector<S>> out(v.frames, Vector<S>(v.dim));
  for (std::size_t t = 0; t < v.frames; ++t)
    for (std::size_t d = 0; d < v.dim; ++d)
      out[t][d] = static_cast<S>(v.features[t * v.dim + d]);
  return out;
}

inline std::vector<int> labels_as_int(const Video& v) {
  return std::vector<int>(v.labels.begin(), v.labels.end());
}

// ---------------------------------------------------------------------------
// Synthetic stream generator. Labels follow a Markov chain over segments
// with geometric durations; features are the class mean plus Gaussian
// noise, except that the last precursor_len frames before a segment
// boundary blend in the upcoming class mean with weight precursor_strength.
// That blend is what makes the future partially predictable from the
// present.
// ---------------------------------------------------------------------------
struct GeneratorConfig {
  std::size_t num_videos = 1;
  std::size_t frames_per_video = 100;
  std::size_t num_actions = 1;   // K; labels run 0..K
  std::size_t feature_dim = 2;
  Matrix<double> transition;     // (K+1) x (K+1), row-stochastic
  double mean_segment_len = 10;  // geometric mean duration
  std::vector<std::vector<double>> class_means;  // (K+1) x D
  double noise_sigma = 0.1;
  double precursor_strength = 0.0;  // rho in [0,1]
  std::size_t precursor_len = 0;    // m
  std::uint64_t seed = 1;

  void validate() const {
    const std::size_t n = num_actions + 1;
    if (num_actions < 1 || num_actions > 255)
      throw ConfigError("generator: num_actions must be in [1, 255]");
    if (transition.rows != n || transition.cols != n)
      throw ConfigError("generator: transition matrix is " + transition.shape_str() +
                        " but needs " + std::to_string(n) + "x" + std::to_string(n));
    for (std::size_t r = 0; r < n; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        if (transition(r, c) < 0.0)
          throw ConfigError("generator: negative transition probability");
        sum += transition(r, c);
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("generator: transition row " + std::to_string(r) + " sums to " +
                          std::to_string(sum) + ", not 1");
    }
    if (class_means.size() != n)
      throw ConfigError("generator: need " + std::to_string(n) + " class means, got " +
                        std::to_string(class_means.size()));
    for (const auto& m : class_means)
      if (m.size() != feature_dim)
        throw ConfigError("generator: class mean length " + std::to_string(m.size()) +
                          " != feature_dim " + std::to_string(feature_dim));
    if (noise_sigma < 0.0) throw ConfigError("generator: noise_sigma must be >= 0");
    if (precursor_strength < 0.0 || precursor_strength > 1.0)
      throw ConfigError("generator: precursor_strength must be in [0, 1]");
    if (mean_segment_len < 1.0)
      throw ConfigError("generator: mean_segment_len must be >= 1");
  }
};

// Stationary distribution of a row-stochastic matrix by fixed-point
// iteration from the uniform distribution.
inline std::vector<double> stationary_distribution(const Matrix<double>& p,
                                                   std::size_t iters = 2000) {
  const std::size_t n = p.rows;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r) acc += pi[r] * p(r, c);
      next[c] = acc;
    }
    pi.swap(next);
  }
  return pi;
}

namespace detail {

inline std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline std::size_t sample_geometric_len(double mean, Rng& rng) {
  if (mean <= 1.0) return 1;
  const double q = 1.0 / mean;  // success probability, support 1, 2, ...
  double u = rng.uniform();
  while (u >= 1.0) u = rng.uniform();
  return 1 + static_cast<std::size_t>(std::floor(std::log1p(-u) / std::log1p(-q)));
}

}  // namespace detail

inline StreamDataset generate(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng = Rng::stream(cfg.seed, "datagen");
  const std::size_t n_classes = cfg.num_actions + 1;
  std::vector<double> start = stationary_distribution(cfg.transition);

  StreamDataset ds;
  ds.num_actions = cfg.num_actions;
  ds.feature_dim = cfg.feature_dim;
  ds.videos.resize(cfg.num_videos);

  for (std::size_t v = 0; v < cfg.num_videos; ++v) {
    Video& vid = ds.videos[v];
    char name[32];
    std::snprintf(name, sizeof(name), "v%04zu", v);
    vid.id = name;
    vid.frames = cfg.frames_per_video;
    vid.dim = cfg.feature_dim;
    vid.features.resize(vid.frames * vid.dim);
    vid.labels.resize(vid.frames);

    // Segment plan covering the video exactly; the last segment truncates.
    std::vector<std::pair<std::size_t, std::size_t>> segs;  // (class, len)
    std::size_t total = 0;
    std::size_t cur = detail::sample_index(start, rng);
    while (total < vid.frames) {
      std::size_t len = detail::sample_geometric_len(cfg.mean_segment_len, rng);
      len = std::min(len, vid.frames - total);
      segs.emplace_back(cur, len);
      total += len;
      std::vector<double> row(n_classes);
      for (std::size_t c = 0; c < n_classes; ++c) row[c] = cfg.transition(cur, c);
      cur = detail::sample_index(row, rng);
    }

    std::size_t t = 0;
    for (std::size_t j = 0; j < segs.size(); ++j) {
      const auto [cls, len] = segs[j];
      const bool has_next = j + 1 < segs.size();
      const std::size_t next_cls = has_next ? segs[j + 1].first : 0;
      for (std::size_t k = 0; k < len; ++k, ++t) {
        vid.labels[t] = static_cast<std::uint8_t>(cls);
        const bool in_precursor = has_next && (len - 1 - k) < cfg.precursor_len;
        const double rho = in_precursor ? cfg.precursor_strength : 0.0;
        for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
          double mean = (1.0 - rho) * cfg.class_means[cls][d] +
                        rho * cfg.class_means[next_cls][d];
          vid.features[t * vid.dim + d] =
              static_cast<float>(mean + cfg.noise_sigma * rng.gaussian());
        }
      }
    }
  }
  return ds;
}

// Default chain: the background row keeps `bg_self` mass on itself and
// spreads the rest over actions with geometric skew `action_skew` (1 =
// uniform, smaller = rarer high-numbered actions); action rows return to
// background with `act_to_bg` and spread the rest over the other actions.
inline Matrix<double> make_default_transition(std::size_t num_actions, double bg_self,
                                              double act_to_bg, double action_skew = 1.0) {
  const std::size_t n = num_actions + 1;
  Matrix<double> p(n, n);
  p(0, 0) = bg_self;
  std::vector<double> w(num_actions);
  double wsum = 0.0;
  for (std::size_t c = 0; c < num_actions; ++c) {
    w[c] = std::pow(action_skew, static_cast<double>(c));
    wsum += w[c];
  }
  for (std::size_t c = 1; c < n; ++c) p(0, c) = (1.0 - bg_self) * w[c - 1] / wsum;
  for (std::size_t r = 1; r < n; ++r) {
    double to_bg = num_actions == 1 ? 1.0 : act_to_bg;
    p(r, 0) = to_bg;
    double rsum = 0.0;
    for (std::size_t c = 1; c < n; ++c)
      if (c != r) rsum += w[c - 1];
    for (std::size_t c = 1; c < n; ++c)
      p(r, c) = (r == c || num_actions == 1) ? 0.0 : (1.0 - to_bg) * w[c - 1] / rsum;
  }
  return p;
}

// Class means drawn from the unit sphere scaled by `scale`; the world seed
// fixes them independently of which videos get sampled.
inline std::vector<std::vector<double>> make_class_means(std::size_t num_actions,
                                                         std::size_t feature_dim,
                                                         std::uint64_t world_seed,
                                                         double scale = 1.0) {
  Rng rng = Rng::stream(world_seed, "world/means");
  std::vector<std::vector<double>> means(num_actions + 1, std::vector<double>(feature_dim));
  for (auto& m : means) {
    double norm2 = 0.0;
    for (double& x : m) {
      x = rng.gaussian();
      norm2 += x * x;
    }
    const double inv = scale / std::sqrt(std::max(norm2, 1e-300));
    for (double& x : m) x *= inv;
  }
  return means;
}

// ---------------------------------------------------------------------------
// OADS binary format.
//   header:   magic "OADS", version u32, num_videos u32, K u32, D u32
//   video:    id_len u32, id bytes, T u32, T*D little-endian f32, T label bytes
// ---------------------------------------------------------------------------
namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_f32(std::string& out, float f) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;
  std::string what;

  ByteReader(const std::string& b, std::string context) : buf(b), what(std::move(context)) {}

  void need(std::size_t n) {
    if (pos + n > buf.size())
      throw FormatError(what + ": truncated file (need " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos) + ", have " +
                        std::to_string(buf.size() - pos) + ")");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)]);
    pos += 4;
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

inline std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(std::string(what) + ": cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes, const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(std::string(what) + ": cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(std::string(what) + ": write to '" + path + "' failed");
}

}  // namespace detail

inline constexpr std::uint32_t kOadsVersion = 1;

inline std::string serialize_dataset(const StreamDataset& ds) {
  std::string out;
  out += "OADS";
  detail::put_u32(out, kOadsVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(ds.videos.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(ds.num_actions));
  detail::put_u32(out, static_cast<std::uint32_t>(ds.feature_dim));
  for (const auto& v : ds.videos) {
    detail::put_u32(out, static_cast<std::uint32_t>(v.id.size()));
    out += v.id;
    detail::put_u32(out, static_cast<std::uint32_t>(v.frames));
    for (float f : v.features) detail::put_f32(out, f);
    for (std::uint8_t b : v.labels) out.push_back(static_cast<char>(b));
  }
  return out;
}

inline StreamDataset parse_dataset(const std::string& bytes) {
  detail::ByteReader r(bytes, "oads");
  if (r.bytes(4) != "OADS") throw FormatError("oads: bad magic (expected \"OADS\")");
  const std::uint32_t version = r.u32();
  if (version != kOadsVersion)
    throw FormatError("oads: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kOadsVersion) + ")");
  StreamDataset ds;
  const std::uint32_t num_videos = r.u32();
  ds.num_actions = r.u32();
  ds.feature_dim = r.u32();
  ds.videos.resize(num_videos);
  for (auto& v : ds.videos) {
    const std::uint32_t id_len = r.u32();
    v.id = r.bytes(id_len);
    v.frames = r.u32();
    v.dim = ds.feature_dim;
    v.features.resize(v.frames * v.dim);
    for (float& f : v.features) f = r.f32();
    v.labels.resize(v.frames);
    for (std::size_t t = 0; t < v.frames; ++t) {
      std::uint8_t lab = static_cast<std::uint8_t>(r.bytes(1)[0]);
      if (lab > ds.num_actions)
        throw FormatError("oads: label " + std::to_string(lab) + " exceeds K=" +
                          std::to_string(ds.num_actions));
      v.labels[t] = lab;
    }
  }
  if (r.pos != bytes.size())
    throw FormatError("oads: " + std::to_string(bytes.size() - r.pos) +
                      " trailing bytes after last video");
  return ds;
}

inline void save_dataset(const StreamDataset& ds, const std::string& path) {
  detail::write_file(path, serialize_dataset(ds), "oads");
}

inline StreamDataset load_dataset(const std::string& path) {
  return parse_dataset(detail::read_file(path, "oads"));
}

// CSV import: one row per frame, `video_id,frame,label,<D feature columns>`,
// frames contiguous from 0 within each video. K is the largest label seen.
inline StreamDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("csv: cannot open '" + path + "'");
  StreamDataset ds;
  std::vector<std::string> order;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  std::vector<Video> videos;
  auto find_video = [&](const std::string& id) -> Video& {
    for (auto& v : videos)
      if (v.id == id) return v;
    videos.emplace_back();
    videos.back().id = id;
    return videos.back();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() < 4)
      throw FormatError("csv:" + std::to_string(lineno) + ": need at least 4 columns");
    if (dim == 0) dim = fields.size() - 3;
    if (fields.size() - 3 != dim)
      throw FormatError("csv:" + std::to_string(lineno) + ": row has " +
                        std::to_string(fields.size() - 3) + " feature columns, expected " +
                        std::to_string(dim));
    try {
      Video& v = find_video(fields[0]);
      long frame = std::stol(fields[1]);
      long label = std::stol(fields[2]);
      if (frame < 0 || static_cast<std::size_t>(frame) != v.frames)
        throw FormatError("csv:" + std::to_string(lineno) + ": frame " + fields[1] +
                          " out of order for video '" + fields[0] + "' (expected " +
                          std::to_string(v.frames) + ")");
      if (label < 0 || label > 255)
        throw FormatError("csv:" + std::to_string(lineno) + ": label out of range");
      v.labels.push_back(static_cast<std::uint8_t>(label));
      ds.num_actions = std::max<std::size_t>(ds.num_actions, static_cast<std::size_t>(label));
      for (std::size_t d = 0; d < dim; ++d)
        v.features.push_back(std::stof(fields[3 + d]));
      v.frames += 1;
      v.dim = dim;
    } catch (const std::invalid_argument&) {
      throw FormatError("csv:" + std::to_string(lineno) + ": malformed number");
    } catch (const std::out_of_range&) {
      throw FormatError("csv:" + std::to_string(lineno) + ": number out of range");
    }
  }
  if (videos.empty()) throw FormatError("csv: no rows in '" + path + "'");
  ds.feature_dim = dim;
  ds.videos = std::move(videos);
  return ds;
}

}  // namespace trn
