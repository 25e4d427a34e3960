#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "parkcast/error.hpp"

namespace parkcast {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of doubles. Rank is dynamic; most of the library
// works with rank-2 (matrices) and rank-3 (filter banks).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);                       // zero-filled
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor identity(std::size_t n);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const;

    // Rank-2 helpers; throw ShapeError on other ranks.
    std::size_t rows() const;
    std::size_t cols() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& flat() { return data_; }
    const std::vector<double>& flat() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;
    double& at(std::size_t i, std::size_t j, std::size_t k);
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    bool empty() const { return data_.empty(); }

    // Same data, new shape; element count must match.
    Tensor reshaped(Shape shape) const;

    Tensor& operator+=(const Tensor& o);
    Tensor& operator-=(const Tensor& o);
    Tensor& operator*=(double s);

private:
    Shape shape_;
    std::vector<double> data_;
};

void require_rank(const Tensor& t, std::size_t rank, const char* what);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

namespace linalg {

// C = A(m,k) * B(k,n); with accumulate, C += A*B (C must be preshaped).
void gemm(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = A^T * B where A is (k,m), B is (k,n).
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = A * B^T where A is (m,k), B is (n,k).
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

Tensor matmul(const Tensor& a, const Tensor& b);

} // namespace linalg

} // namespace parkcast
