#include "fedgala/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "fedgala/errors.hpp"

namespace fedgala {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("checkpoint: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

}  // namespace

void LayeredParams::add_layer(std::string name, RealVec values) {
  for (const auto& l : layers_) {
    if (l.name == name) throw DimensionError("duplicate layer name: " + name);
  }
  layers_.push_back(Layer{std::move(name), std::move(values)});
}

std::size_t LayeredParams::total_size() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.values.size();
  return n;
}

std::size_t LayeredParams::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].name == name) return i;
  throw DimensionError("no layer named " + std::string(name));
}

bool LayeredParams::same_shape(const LayeredParams& other) const noexcept {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].name != other.layers_[i].name ||
        layers_[i].values.size() != other.layers_[i].values.size())
      return false;
  }
  return true;
}

void LayeredParams::require_same_shape(const LayeredParams& other, const char* what) const {
  if (!same_shape(other)) throw DimensionError(std::string(what) + ": layer layouts differ");
}

RealVec LayeredParams::flatten() const {
  RealVec out;
  out.reserve(total_size());
  for (const auto& l : layers_) out.insert(out.end(), l.values.begin(), l.values.end());
  return out;
}

LayeredParams LayeredParams::zeros_like() const {
  LayeredParams z;
  for (const auto& l : layers_) z.add_layer(l.name, RealVec(l.values.size(), 0.0));
  return z;
}

bool LayeredParams::all_finite() const noexcept {
  for (const auto& l : layers_)
    if (!fedgala::all_finite(l.values)) return false;
  return true;
}

double LayeredParams::l2_norm() const noexcept {
  double acc = 0.0;
  for (const auto& l : layers_)
    for (double v : l.values) acc += v * v;
  return std::sqrt(acc);
}

std::uint64_t LayeredParams::hash() const noexcept {
  std::uint64_t h = kFnvOffset;
  for (const auto& l : layers_) {
    fnv_bytes(h, l.name.data(), l.name.size());
    const std::uint64_t width = l.values.size();
    fnv_bytes(h, &width, sizeof width);
    fnv_bytes(h, l.values.data(), l.values.size() * sizeof(double));
  }
  return h;
}

UpdateDelta subtract(const LayeredParams& a, const LayeredParams& b, std::size_t round) {
  a.require_same_shape(b, "subtract");
  UpdateDelta out{a, round};
  for (std::size_t i = 0; i < a.layer_count(); ++i) {
    auto dst = out.delta.values(i);
    const auto src = b.values(i);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
  }
  return out;
}

LayeredParams add(const LayeredParams& params, const UpdateDelta& update) {
  params.require_same_shape(update.delta, "add");
  LayeredParams out = params;
  for (std::size_t i = 0; i < out.layer_count(); ++i) {
    auto dst = out.values(i);
    const auto src = update.delta.values(i);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return out;
}

void axpy(double a, const LayeredParams& x, LayeredParams& y) {
  x.require_same_shape(y, "axpy");
  for (std::size_t i = 0; i < x.layer_count(); ++i) fedgala::axpy(a, x.values(i), y.values(i));
}

double flat_cosine(const LayeredParams& u, const LayeredParams& v) {
  u.require_same_shape(v, "flat_cosine");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.layer_count(); ++i) {
    const auto a = u.values(i);
    const auto b = v.values(i);
    for (std::size_t k = 0; k < a.size(); ++k) {
      uv += a[k] * b[k];
      uu += a[k] * a[k];
      vv += b[k] * b[k];
    }
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu < kZeroNormEps || nv < kZeroNormEps) return 0.0;
  return std::clamp(uv / (nu * nv), -1.0, 1.0);
}

void write_checkpoint(std::ostream& out, const LayeredParams& params) {
  put_u64(out, params.layer_count());
  for (const auto& l : params.layers()) {
    put_u64(out, l.name.size());
    out.write(l.name.data(), static_cast<std::streamsize>(l.name.size()));
    put_u64(out, l.values.size());
  }
  for (const auto& l : params.layers())
    for (double v : l.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("checkpoint: write failed");
}

LayeredParams read_checkpoint(std::istream& in) {
  const std::uint64_t count = get_u64(in);
  std::vector<std::pair<std::string, std::uint64_t>> header;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = get_u64(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len)))
      throw Error("checkpoint: truncated layer name");
    header.emplace_back(std::move(name), get_u64(in));
  }
  LayeredParams params;
  for (auto& [name, width] : header) {
    RealVec values(width);
    for (auto& v : values) v = std::bit_cast<double>(get_u64(in));
    params.add_layer(std::move(name), std::move(values));
  }
  return params;
}

}  // namespace fedgala
