#pragma once

#include <cstddef>
#include <vector>

namespace shadowlab {

// Dense row-major tensor.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), T(0)) {}

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }

    std::size_t numel() const { return data.size(); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    bool operator==(const TensorT&) const = default;
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace shadowlab
