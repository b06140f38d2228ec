#pragma once

#include <Eigen/Dense>

#include "asim/rl/mlp.hpp"

namespace asim::rl {

// Running per-dimension mean/variance (population) with a numerically stable
// online update. apply() is (x - mean) / sqrt(var + 1e-8) clipped to [-5, 5];
// stats change only through update(), so evaluation can keep them frozen.
class ObsNormalizer {
public:
    explicit ObsNormalizer(int dim)
        : mean_(Vector::Zero(dim)), m2_(Vector::Zero(dim)) {}
    ObsNormalizer(Vector mean, Vector m2, double count)
        : mean_(std::move(mean)), m2_(std::move(m2)), count_(count) {}

    int dim() const { return static_cast<int>(mean_.size()); }
    double count() const { return count_; }
    const Vector& mean() const { return mean_; }
    Vector variance() const {
        return count_ > 0 ? Vector(m2_ / count_) : Vector(Vector::Zero(mean_.size()));
    }
    const Vector& m2() const { return m2_; }

    void update(const Vector& x) {
        count_ += 1.0;
        const Vector delta = x - mean_;
        mean_ += delta / count_;
        m2_ += delta.cwiseProduct(x - mean_);
    }

    Vector apply(const Vector& x) const {
        const Vector sd = (variance().array() + 1e-8).sqrt();
        return (x - mean_).cwiseQuotient(sd).cwiseMax(-5.0).cwiseMin(5.0);
    }

private:
    Vector mean_;
    Vector m2_;  // sum of squared deviations
    double count_ = 0.0;
};

}  // namespace asim::rl
