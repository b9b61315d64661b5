#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedgala/core_math.hpp"

namespace fedgala {

struct Layer {
  std::string name;
  RealVec values;

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Per-layer flat parameter vectors of one model. Layer names are unique
/// and each layer's width is fixed once added.
class LayeredParams {
 public:
  LayeredParams() = default;

  void add_layer(std::string name, RealVec values);

  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t total_size() const noexcept;

  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  std::span<double> values(std::size_t i) { return layers_.at(i).values; }
  std::span<const double> values(std::size_t i) const { return layers_.at(i).values; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Index of the named layer; throws DimensionError if absent.
  std::size_t index_of(std::string_view name) const;

  bool same_shape(const LayeredParams& other) const noexcept;
  /// Throws DimensionError naming `what` when shapes differ.
  void require_same_shape(const LayeredParams& other, const char* what) const;

  /// All layers concatenated in order.
  RealVec flatten() const;
  /// Zero-valued copy with the same layout.
  LayeredParams zeros_like() const;

  bool all_finite() const noexcept;
  double l2_norm() const noexcept;
  /// FNV-1a over names, widths and the raw value bytes.
  std::uint64_t hash() const noexcept;

  friend bool operator==(const LayeredParams&, const LayeredParams&) = default;

 private:
  std::vector<Layer> layers_;
};

/// A per-layer difference of two LayeredParams (client update, global
/// update, batch gradient or reference direction).
struct UpdateDelta {
  LayeredParams delta;
  std::size_t round = 0;

  friend bool operator==(const UpdateDelta&, const UpdateDelta&) = default;
};

/// a - b, layer by layer.
UpdateDelta subtract(const LayeredParams& a, const LayeredParams& b, std::size_t round = 0);
/// params + update, layer by layer.
LayeredParams add(const LayeredParams& params, const UpdateDelta& update);
/// y += a * x, layer by layer.
void axpy(double a, const LayeredParams& x, LayeredParams& y);

/// Cosine of the two models flattened into single vectors, without
/// materializing the concatenation.
double flat_cosine(const LayeredParams& u, const LayeredParams& v);

/// Flat binary checkpoint: u64 layer count; per layer u64 name length,
/// name bytes, u64 width; then every value as little-endian IEEE-754
/// binary64 in layer order.
void write_checkpoint(std::ostream& out, const LayeredParams& params);
LayeredParams read_checkpoint(std::istream& in);

}  // namespace fedgala
