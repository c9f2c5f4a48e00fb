#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace statmanifold {

// Dense rank-3 array with independent extents per axis (model and
// ambient index groups may differ in size).
class Tensor3 {
public:
    Tensor3() : n1_(0), n2_(0), n3_(0) {}
    Tensor3(int n1, int n2, int n3)
        : n1_(n1), n2_(n2), n3_(n3),
          data_(static_cast<std::size_t>(n1) * n2 * n3, 0.0) {}

    double& operator()(int i, int j, int k) {
        return data_[(static_cast<std::size_t>(i) * n2_ + j) * n3_ + k];
    }
    double operator()(int i, int j, int k) const {
        return data_[(static_cast<std::size_t>(i) * n2_ + j) * n3_ + k];
    }

    int extent1() const { return n1_; }
    int extent2() const { return n2_; }
    int extent3() const { return n3_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    const std::vector<double>& data() const { return data_; }

private:
    int n1_, n2_, n3_;
    std::vector<double> data_;
};

class Tensor4 {
public:
    Tensor4() : n_{0, 0, 0, 0} {}
    Tensor4(int n1, int n2, int n3, int n4)
        : n_{n1, n2, n3, n4},
          data_(static_cast<std::size_t>(n1) * n2 * n3 * n4, 0.0) {}

    double& operator()(int i, int j, int k, int l) {
        return data_[((static_cast<std::size_t>(i) * n_[1] + j) * n_[2] + k) * n_[3] + l];
    }
    double operator()(int i, int j, int k, int l) const {
        return data_[((static_cast<std::size_t>(i) * n_[1] + j) * n_[2] + k) * n_[3] + l];
    }

    int extent(int axis) const { return n_[axis]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    int n_[4];
    std::vector<double> data_;
};

}  // namespace statmanifold
