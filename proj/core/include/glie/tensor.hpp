#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace glie {

// Dense row-major tensor of doubles, rank 1 to 4. All model math runs on
// doubles in memory; the on-disk parameter format narrows to f32.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        std::size_t n = 1;
        for (int d : shape_) {
            assert(d >= 0);
            n *= static_cast<std::size_t>(d);
        }
        data_.assign(n, 0.0);
        rebuild_strides();
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double& operator()(int i) {
        assert(rank() == 1);
        return data_[idx1(i)];
    }
    double operator()(int i) const {
        assert(rank() == 1);
        return data_[idx1(i)];
    }
    double& operator()(int i, int j) {
        assert(rank() == 2);
        return data_[idx2(i, j)];
    }
    double operator()(int i, int j) const {
        assert(rank() == 2);
        return data_[idx2(i, j)];
    }
    double& operator()(int i, int j, int k) {
        assert(rank() == 3);
        return data_[idx3(i, j, k)];
    }
    double operator()(int i, int j, int k) const {
        assert(rank() == 3);
        return data_[idx3(i, j, k)];
    }
    double& operator()(int i, int j, int k, int l) {
        assert(rank() == 4);
        return data_[idx4(i, j, k, l)];
    }
    double operator()(int i, int j, int k, int l) const {
        assert(rank() == 4);
        return data_[idx4(i, j, k, l)];
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const;

    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape()); }

private:
    void rebuild_strides() {
        strides_.assign(shape_.size(), 1);
        for (int i = static_cast<int>(shape_.size()) - 2; i >= 0; --i) {
            strides_[static_cast<std::size_t>(i)] =
                strides_[static_cast<std::size_t>(i) + 1] *
                static_cast<std::size_t>(shape_[static_cast<std::size_t>(i) + 1]);
        }
    }

    std::size_t idx1(int i) const {
        assert(i >= 0 && i < shape_[0]);
        return static_cast<std::size_t>(i);
    }
    std::size_t idx2(int i, int j) const {
        assert(i >= 0 && i < shape_[0] && j >= 0 && j < shape_[1]);
        return static_cast<std::size_t>(i) * strides_[0] + static_cast<std::size_t>(j);
    }
    std::size_t idx3(int i, int j, int k) const {
        assert(i >= 0 && i < shape_[0] && j >= 0 && j < shape_[1] && k >= 0 && k < shape_[2]);
        return static_cast<std::size_t>(i) * strides_[0] +
               static_cast<std::size_t>(j) * strides_[1] + static_cast<std::size_t>(k);
    }
    std::size_t idx4(int i, int j, int k, int l) const {
        assert(i >= 0 && i < shape_[0] && j >= 0 && j < shape_[1] && k >= 0 && k < shape_[2] &&
               l >= 0 && l < shape_[3]);
        return static_cast<std::size_t>(i) * strides_[0] +
               static_cast<std::size_t>(j) * strides_[1] +
               static_cast<std::size_t>(k) * strides_[2] + static_cast<std::size_t>(l);
    }

    std::vector<int> shape_;
    std::vector<std::size_t> strides_;
    std::vector<double> data_;
};

} // namespace glie
