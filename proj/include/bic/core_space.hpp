#pragma once

#include <cstddef>
#include <functional>
#include <iterator>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

namespace bic {

inline constexpr std::size_t kDefaultConfigurationCap = 10'000'000;

/// One coordinate space Omega_k: a finite point set {0, ..., size-1} carrying
/// a probability vector.
class FiniteAxis {
 public:
  explicit FiniteAxis(std::vector<double> weights);
  static FiniteAxis uniform(std::size_t size);

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t point) const { return weights_.at(point); }
  std::span<const double> weights() const { return weights_; }

  bool operator==(const FiniteAxis&) const = default;

 private:
  std::vector<double> weights_;
};

/// indices[k] is the point chosen on axis k.
using Configuration = std::vector<std::size_t>;

class FiniteProductSpace;

/// Forward range over all configurations in row-major order (last axis fastest).
class ConfigurationRange {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Configuration;
    using difference_type = std::ptrdiff_t;
    using pointer = const Configuration*;
    using reference = const Configuration&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator& other) const { return index_ == other.index_; }

   private:
    friend class ConfigurationRange;
    iterator(const FiniteProductSpace* space, std::size_t index);

    const FiniteProductSpace* space_ = nullptr;
    std::size_t index_ = 0;
    Configuration current_;
  };

  explicit ConfigurationRange(const FiniteProductSpace& space) : space_(&space) {}
  iterator begin() const;
  iterator end() const;

 private:
  const FiniteProductSpace* space_;
};

/// Omega = prod_k Omega_k with the product measure. Immutable; the
/// probability of every configuration is tabulated at construction.
class FiniteProductSpace {
 public:
  /// Throws CapacityError when prod_k size_k exceeds `cap`.
  explicit FiniteProductSpace(std::vector<FiniteAxis> axes,
                              std::size_t cap = kDefaultConfigurationCap);

  static std::shared_ptr<const FiniteProductSpace> make(
      std::vector<FiniteAxis> axes, std::size_t cap = kDefaultConfigurationCap) {
    return std::make_shared<const FiniteProductSpace>(std::move(axes), cap);
  }
  /// n axes of the given size, uniform weights.
  static std::shared_ptr<const FiniteProductSpace> uniform(
      std::size_t n, std::size_t size, std::size_t cap = kDefaultConfigurationCap);

  std::size_t num_axes() const { return axes_.size(); }
  const FiniteAxis& axis(std::size_t k) const { return axes_.at(k); }
  std::span<const FiniteAxis> axes() const { return axes_; }
  std::size_t configuration_count() const { return count_; }
  std::size_t cap() const { return cap_; }

  /// Distance in the dense table between neighbours along axis k.
  std::size_t stride(std::size_t k) const { return strides_[k]; }
  std::size_t coordinate(std::size_t index, std::size_t k) const {
    return (index / strides_[k]) % axes_[k].size();
  }

  std::size_t index_of(const Configuration& c) const;
  Configuration configuration_at(std::size_t index) const;

  double measure(std::size_t index) const { return measures_[index]; }
  std::span<const double> measures() const { return measures_; }

  ConfigurationRange configurations() const { return ConfigurationRange(*this); }

  /// Same axes and weights (the cap is not part of the identity).
  bool same_as(const FiniteProductSpace& other) const { return axes_ == other.axes_; }

 private:
  std::vector<FiniteAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 1;
  std::size_t cap_;
  std::vector<double> measures_;
};

using SpacePtr = std::shared_ptr<const FiniteProductSpace>;

ConfigurationRange enumerate(const FiniteProductSpace& space);
double measure_of(const FiniteProductSpace& space, const Configuration& c);

/// A real function on a finite product space stored densely in enumeration order.
class TabulatedFunction {
 public:
  TabulatedFunction(SpacePtr space, std::vector<double> values);

  static TabulatedFunction constant(SpacePtr space, double c);
  static TabulatedFunction from(SpacePtr space,
                                const std::function<double(const Configuration&)>& fn);

  const FiniteProductSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t index) const { return values_[index]; }
  double at(const Configuration& c) const { return values_[space_->index_of(c)]; }

  double min() const;
  double max() const;

  template <class F>
  TabulatedFunction map(F&& fn) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = fn(values_[i]);
    return TabulatedFunction(space_, std::move(out));
  }

  TabulatedFunction& operator+=(const TabulatedFunction& other);
  TabulatedFunction& operator-=(const TabulatedFunction& other);
  TabulatedFunction& operator*=(double a);

  friend TabulatedFunction operator+(TabulatedFunction a, const TabulatedFunction& b) { return a += b; }
  friend TabulatedFunction operator-(TabulatedFunction a, const TabulatedFunction& b) { return a -= b; }
  friend TabulatedFunction operator*(TabulatedFunction a, double s) { return a *= s; }
  friend TabulatedFunction operator*(double s, TabulatedFunction a) { return a *= s; }
  friend TabulatedFunction operator+(TabulatedFunction a, double c) {
    for (double& v : a.values_) v += c;
    return a;
  }
  friend TabulatedFunction operator-(TabulatedFunction a, double c) { return std::move(a) + (-c); }
  /// Pointwise product.
  friend TabulatedFunction operator*(const TabulatedFunction& a, const TabulatedFunction& b);

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

/// Throws std::invalid_argument unless both functions live on the same space.
void require_same_space(const TabulatedFunction& a, const TabulatedFunction& b);

/// E f = sum_c mu(c) f(c).
double expectation(const TabulatedFunction& f);
/// E[(f - Ef)^2], two-pass with compensated sums.
double variance(const TabulatedFunction& f);

/// {"axes":[{"weights":[...]},...], "values":[...]}, values in enumeration order.
TabulatedFunction function_from_json(const nlohmann::json& doc,
                                     std::size_t cap = kDefaultConfigurationCap);
nlohmann::json function_to_json(const TabulatedFunction& f);

}  // namespace bic
