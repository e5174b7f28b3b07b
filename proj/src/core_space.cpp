#include "bic/core_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bic/errors.hpp"
#include "bic/summation.hpp"

namespace bic {

FiniteAxis::FiniteAxis(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("FiniteAxis: size must be at least 1");
  CompensatedSum total;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("FiniteAxis: weights must be finite and nonnegative");
    }
    total.add(w);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw std::invalid_argument("FiniteAxis: weights must sum to 1 (got " +
                                std::to_string(total.value()) + ")");
  }
}

FiniteAxis FiniteAxis::uniform(std::size_t size) {
  if (size == 0) throw std::invalid_argument("FiniteAxis: size must be at least 1");
  return FiniteAxis(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

FiniteProductSpace::FiniteProductSpace(std::vector<FiniteAxis> axes, std::size_t cap)
    : axes_(std::move(axes)), cap_(cap) {
  if (axes_.empty()) throw std::invalid_argument("FiniteProductSpace: needs at least one axis");
  for (const auto& a : axes_) {
    if (count_ > cap_ / a.size()) {
      throw CapacityError("FiniteProductSpace: configuration count exceeds cap " +
                          std::to_string(cap_));
    }
    count_ *= a.size();
  }
  if (count_ > cap_) {
    throw CapacityError("FiniteProductSpace: configuration count exceeds cap " +
                        std::to_string(cap_));
  }
  const std::size_t n = axes_.size();
  strides_.assign(n, 1);
  for (std::size_t k = n - 1; k-- > 0;) strides_[k] = strides_[k + 1] * axes_[k + 1].size();

  measures_.assign(count_, 1.0);
  for (std::size_t i = 0; i < count_; ++i) {
    double p = 1.0;
    for (std::size_t k = 0; k < n; ++k) p *= axes_[k].weight(coordinate(i, k));
    measures_[i] = p;
  }
}

std::shared_ptr<const FiniteProductSpace> FiniteProductSpace::uniform(std::size_t n,
                                                                      std::size_t size,
                                                                      std::size_t cap) {
  return make(std::vector<FiniteAxis>(n, FiniteAxis::uniform(size)), cap);
}

std::size_t FiniteProductSpace::index_of(const Configuration& c) const {
  if (c.size() != axes_.size()) {
    throw std::out_of_range("configuration length " + std::to_string(c.size()) +
                            " does not match " + std::to_string(axes_.size()) + " axes");
  }
  std::size_t index = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] >= axes_[k].size()) {
      throw std::out_of_range("configuration index " + std::to_string(c[k]) +
                              " out of range on axis " + std::to_string(k));
    }
    index += c[k] * strides_[k];
  }
  return index;
}

Configuration FiniteProductSpace::configuration_at(std::size_t index) const {
  if (index >= count_) throw std::out_of_range("configuration index out of range");
  Configuration c(axes_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = coordinate(index, k);
  return c;
}

ConfigurationRange::iterator::iterator(const FiniteProductSpace* space, std::size_t index)
    : space_(space), index_(index) {
  if (index_ < space_->configuration_count()) current_ = space_->configuration_at(index_);
}

ConfigurationRange::iterator& ConfigurationRange::iterator::operator++() {
  ++index_;
  // Odometer increment, last axis fastest.
  for (std::size_t k = current_.size(); k-- > 0;) {
    if (++current_[k] < space_->axis(k).size()) return *this;
    current_[k] = 0;
  }
  return *this;
}

ConfigurationRange::iterator ConfigurationRange::begin() const { return iterator(space_, 0); }
ConfigurationRange::iterator ConfigurationRange::end() const {
  return iterator(space_, space_->configuration_count());
}

ConfigurationRange enumerate(const FiniteProductSpace& space) { return space.configurations(); }

double measure_of(const FiniteProductSpace& space, const Configuration& c) {
  return space.measure(space.index_of(c));
}

TabulatedFunction::TabulatedFunction(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw std::invalid_argument("TabulatedFunction: null space");
  if (values_.size() != space_->configuration_count()) {
    throw std::invalid_argument("TabulatedFunction: expected " +
                                std::to_string(space_->configuration_count()) +
                                " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("TabulatedFunction: non-finite value");
  }
}

TabulatedFunction TabulatedFunction::constant(SpacePtr space, double c) {
  const std::size_t count = space->configuration_count();
  return TabulatedFunction(std::move(space), std::vector<double>(count, c));
}

TabulatedFunction TabulatedFunction::from(
    SpacePtr space, const std::function<double(const Configuration&)>& fn) {
  std::vector<double> values;
  values.reserve(space->configuration_count());
  for (const auto& c : space->configurations()) values.push_back(fn(c));
  return TabulatedFunction(std::move(space), std::move(values));
}

double TabulatedFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double TabulatedFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

TabulatedFunction& TabulatedFunction::operator+=(const TabulatedFunction& other) {
  require_same_space(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

TabulatedFunction& TabulatedFunction::operator-=(const TabulatedFunction& other) {
  require_same_space(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

TabulatedFunction& TabulatedFunction::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

TabulatedFunction operator*(const TabulatedFunction& a, const TabulatedFunction& b) {
  require_same_space(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return TabulatedFunction(a.space_ptr(), std::move(out));
}

void require_same_space(const TabulatedFunction& a, const TabulatedFunction& b) {
  if (a.space_ptr() != b.space_ptr() && !a.space().same_as(b.space())) {
    throw std::invalid_argument("functions are defined on different spaces");
  }
}

double expectation(const TabulatedFunction& f) {
  const auto& space = f.space();
  CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) s.add(space.measure(i) * f[i]);
  return s.value();
}

double variance(const TabulatedFunction& f) {
  const double mean = expectation(f);
  const auto& space = f.space();
  CompensatedSum s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - mean;
    s.add(space.measure(i) * d * d);
  }
  return std::max(0.0, s.value());
}

TabulatedFunction function_from_json(const nlohmann::json& doc, std::size_t cap) {
  if (!doc.is_object()) throw std::invalid_argument("function document must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "axes" && key != "values") {
      throw std::invalid_argument("function document: unknown field '" + key + "'");
    }
  }
  std::vector<FiniteAxis> axes;
  for (const auto& a : doc.at("axes")) {
    axes.emplace_back(a.at("weights").get<std::vector<double>>());
  }
  auto space = FiniteProductSpace::make(std::move(axes), cap);
  return TabulatedFunction(space, doc.at("values").get<std::vector<double>>());
}

nlohmann::json function_to_json(const TabulatedFunction& f) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : f.space().axes()) {
    axes.push_back({{"weights", std::vector<double>(a.weights().begin(), a.weights().end())}});
  }
  return {{"axes", axes},
          {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

}  // namespace bic
