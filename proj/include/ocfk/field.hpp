#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>

#include "ocfk/geometry.hpp"

namespace ocfk {

// A queryable occupancy probability field over a bounded box. Queries must
// be deterministic: the value at a point cannot depend on what else is in
// the batch.
class OccupancyField {
 public:
  virtual ~OccupancyField() = default;
  virtual Aabb bounds() const { return world_bounds(); }
  virtual void evaluate(std::span<const Vec3> points, std::span<double> out) const = 0;

  double evaluate_one(const Vec3& p) const {
    double v = 0.0;
    evaluate({&p, 1}, {&v, 1});
    return v;
  }
};

class ConstantField : public OccupancyField {
 public:
  explicit ConstantField(double value) : value_(value) {}
  void evaluate(std::span<const Vec3> points, std::span<double> out) const override {
    (void)points;
    for (double& v : out) v = value_;
  }

 private:
  double value_;
};

class LambdaField : public OccupancyField {
 public:
  explicit LambdaField(std::function<double(const Vec3&)> fn, Aabb box = world_bounds())
      : fn_(std::move(fn)), box_(box) {}
  Aabb bounds() const override { return box_; }
  void evaluate(std::span<const Vec3> points, std::span<double> out) const override {
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = fn_(points[i]);
  }

 private:
  std::function<double(const Vec3&)> fn_;
  Aabb box_;
};

// Forwards queries and counts them; used to compare evaluation budgets.
class CountingField : public OccupancyField {
 public:
  explicit CountingField(const OccupancyField& inner) : inner_(inner) {}
  Aabb bounds() const override { return inner_.bounds(); }
  void evaluate(std::span<const Vec3> points, std::span<double> out) const override {
    count_.fetch_add(points.size(), std::memory_order_relaxed);
    inner_.evaluate(points, out);
  }
  std::uint64_t count() const { return count_.load(); }

 private:
  const OccupancyField& inner_;
  mutable std::atomic<std::uint64_t> count_{0};
};

}  // namespace ocfk
