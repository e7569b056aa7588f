#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infobound/errors.hpp"
#include "infobound/model.hpp"
#include "infobound/rng.hpp"

namespace infobound {

// Synthetic isotropic Gaussian blobs, one mean per class. cov_scale is the
// isotropic standard deviation.
struct BlobsSpec {
  std::vector<std::vector<double>> means;
  double cov_scale = 1.0;
  std::vector<double> priors;  // empty = uniform
  std::uint64_t seed = 0;
};

// IDX image/label file pair (big-endian magics 0x00000803 / 0x00000801).
struct IdxSpec {
  std::string images_path;
  std::string labels_path;
  bool normalize = true;     // bytes scaled to [0,1]
  std::size_t subset = 0;    // 0 = keep everything
  std::uint64_t seed = 0;    // subset selection stream
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw io_error("idx: truncated header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::vector<DataPoint> load_idx_pair(const IdxSpec& spec) {
  std::ifstream img(spec.images_path, std::ios::binary);
  if (!img) throw io_error("idx: cannot open " + spec.images_path);
  std::ifstream lab(spec.labels_path, std::ios::binary);
  if (!lab) throw io_error("idx: cannot open " + spec.labels_path);

  if (read_be32(img, spec.images_path) != 0x00000803u)
    throw io_error("idx: bad image magic in " + spec.images_path);
  const std::uint32_t count = read_be32(img, spec.images_path);
  const std::uint32_t rows = read_be32(img, spec.images_path);
  const std::uint32_t cols = read_be32(img, spec.images_path);

  if (read_be32(lab, spec.labels_path) != 0x00000801u)
    throw io_error("idx: bad label magic in " + spec.labels_path);
  if (read_be32(lab, spec.labels_path) != count)
    throw io_error("idx: image/label count mismatch");

  const std::size_t dim = std::size_t(rows) * cols;
  std::vector<DataPoint> points(count);
  std::vector<unsigned char> pixel(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixel.data()), std::streamsize(dim)))
      throw io_error("idx: truncated image data in " + spec.images_path);
    char l;
    if (!lab.get(l)) throw io_error("idx: truncated label data in " + spec.labels_path);
    points[i].features.resize(dim);
    for (std::size_t d = 0; d < dim; ++d)
      points[i].features[d] =
          spec.normalize ? pixel[d] / 255.0 : static_cast<double>(pixel[d]);
    points[i].label = static_cast<unsigned char>(l);
  }

  if (spec.subset > 0 && spec.subset < points.size()) {
    SplitMix64 rng(derive_seed(spec.seed, stream::kData));
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i-- > 1;)
      std::swap(order[i], order[rng.next_below(i + 1)]);
    std::vector<DataPoint> kept;
    kept.reserve(spec.subset);
    for (std::size_t i = 0; i < spec.subset; ++i)
      kept.push_back(std::move(points[order[i]]));
    points = std::move(kept);
  }
  return points;
}

}  // namespace detail

// A data distribution the experiments can draw from. Blob sources generate
// unboundedly; IDX sources hold a finite corpus and draw without replacement
// within a single request.
class DataSource {
 public:
  static DataSource blobs(BlobsSpec spec) {
    if (spec.means.empty()) throw validation_error("blobs: need at least one class mean");
    const std::size_t dim = spec.means.front().size();
    if (dim == 0) throw validation_error("blobs: zero-dimensional means");
    for (const auto& m : spec.means)
      if (m.size() != dim) throw validation_error("blobs: inconsistent mean dimensions");
    if (!(spec.cov_scale > 0.0)) throw validation_error("blobs: cov_scale must be > 0");
    if (spec.priors.empty())
      spec.priors.assign(spec.means.size(), 1.0 / double(spec.means.size()));
    if (spec.priors.size() != spec.means.size())
      throw validation_error("blobs: priors/means size mismatch");
    double sum = 0.0;
    for (double p : spec.priors) {
      if (!(p >= 0.0)) throw validation_error("blobs: negative prior");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw validation_error("blobs: priors must sum to 1");
    DataSource s;
    s.blobs_ = std::move(spec);
    s.is_blobs_ = true;
    return s;
  }

  static DataSource idx(IdxSpec spec) {
    DataSource s;
    s.corpus_ = detail::load_idx_pair(spec);
    if (s.corpus_.empty()) throw validation_error("idx: empty data set");
    int max_label = 0;
    for (const auto& p : s.corpus_) max_label = std::max(max_label, p.label);
    s.idx_classes_ = std::size_t(max_label) + 1;
    s.idx_ = std::move(spec);
    s.is_blobs_ = false;
    return s;
  }

  std::size_t feature_dim() const {
    return is_blobs_ ? blobs_.means.front().size() : corpus_.front().features.size();
  }

  std::size_t num_classes() const {
    return is_blobs_ ? blobs_.means.size() : idx_classes_;
  }

  // Deterministic given (source spec, seed).
  std::vector<DataPoint> sample(std::size_t count, std::uint64_t seed) const {
    std::vector<DataPoint> out;
    out.reserve(count);
    if (is_blobs_) {
      SplitMix64 rng(derive_seed(blobs_.seed, stream::kData, seed));
      const std::size_t dim = feature_dim();
      for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.next_double();
        std::size_t c = 0;
        double acc = 0.0;
        for (; c + 1 < blobs_.priors.size(); ++c) {
          acc += blobs_.priors[c];
          if (u < acc) break;
        }
        DataPoint p;
        p.label = static_cast<int>(c);
        p.features.resize(dim);
        for (std::size_t d = 0; d < dim; ++d)
          p.features[d] = blobs_.means[c][d] + blobs_.cov_scale * rng.next_gaussian();
        out.push_back(std::move(p));
      }
      return out;
    }
    if (count > corpus_.size())
      throw validation_error("idx source: requested " + std::to_string(count) +
                             " points but only " + std::to_string(corpus_.size()) +
                             " are available");
    SplitMix64 rng(derive_seed(idx_.seed, stream::kData, seed));
    std::vector<std::size_t> order(corpus_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i-- > 1;)
      std::swap(order[i], order[rng.next_below(i + 1)]);
    for (std::size_t i = 0; i < count; ++i) out.push_back(corpus_[order[i]]);
    return out;
  }

  // {"kind":"blobs", "means":[[..],[..]], "cov_scale":1.0, "priors":[..], "seed":N}
  // {"kind":"idx", "images":"path", "labels":"path", "normalize":true,
  //  "subset":N, "seed":N}
  static DataSource from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", "blobs");
    if (kind == "blobs") {
      BlobsSpec spec;
      if (!j.contains("means")) throw validation_error("blobs config needs \"means\"");
      spec.means = j.at("means").get<std::vector<std::vector<double>>>();
      spec.cov_scale = j.value("cov_scale", 1.0);
      if (j.contains("priors")) spec.priors = j.at("priors").get<std::vector<double>>();
      spec.seed = j.value("seed", std::uint64_t{0});
      return blobs(std::move(spec));
    }
    if (kind == "idx") {
      IdxSpec spec;
      spec.images_path = j.at("images").get<std::string>();
      spec.labels_path = j.at("labels").get<std::string>();
      spec.normalize = j.value("normalize", true);
      spec.subset = j.value("subset", std::size_t{0});
      spec.seed = j.value("seed", std::uint64_t{0});
      return idx(std::move(spec));
    }
    throw validation_error("unknown data source kind: " + kind);
  }

 private:
  DataSource() = default;

  bool is_blobs_ = true;
  BlobsSpec blobs_;
  IdxSpec idx_;
  std::vector<DataPoint> corpus_;
  std::size_t idx_classes_ = 0;
};

}  // namespace infobound
