#include "parkcast/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#ifdef PARKCAST_USE_EIGEN
#include <Eigen/Dense>
#endif

namespace parkcast {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << ")";
    return os.str();
}

namespace {

std::size_t shape_count(const Shape& s) {
    if (s.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t d : s) {
        if (d == 0) throw ShapeError("tensor shape has a zero dimension: " + shape_str(s));
        n *= d;
    }
    return n;
}

} // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_count(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_count(shape_) != data_.size()) {
        throw ShapeError("tensor data size " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::full(Shape shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

std::size_t Tensor::dim(std::size_t i) const {
    if (i >= shape_.size()) {
        throw ShapeError("dim " + std::to_string(i) + " out of range for shape " + shape_str(shape_));
    }
    return shape_[i];
}

std::size_t Tensor::rows() const {
    require_rank(*this, 2, "rows()");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    require_rank(*this, 2, "cols()");
    return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    require_rank(*this, 2, "at(r,c)");
    return data_[r * shape_[1] + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    require_rank(*this, 2, "at(r,c)");
    return data_[r * shape_[1] + c];
}

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
    require_rank(*this, 3, "at(i,j,k)");
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
    require_rank(*this, 3, "at(i,j,k)");
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_count(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    }
    return Tensor(std::move(shape), data_);
}

Tensor& Tensor::operator+=(const Tensor& o) {
    require_same_shape(*this, o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
    require_same_shape(*this, o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
}

namespace linalg {

namespace {

void check_gemm_shapes(const Tensor& a, const Tensor& b, std::size_t m, std::size_t k,
                       std::size_t kb, std::size_t n, const char* what) {
    if (k != kb) {
        throw ShapeError(std::string(what) + ": inner dimensions disagree, " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    (void)m;
    (void)n;
}

#ifdef PARKCAST_USE_EIGEN
using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
#else
// Fallback kernel: blocked i-k-j loop, good enough for small problems.
void gemm_ref(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n, bool acc) {
    if (!acc) std::fill(c, c + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}
#endif

void ensure_out(Tensor& c, std::size_t m, std::size_t n, bool acc, const char* what) {
    if (acc) {
        if (c.rank() != 2 || c.rows() != m || c.cols() != n) {
            throw ShapeError(std::string(what) + ": accumulate target has shape " +
                             shape_str(c.shape()) + ", expected (" + std::to_string(m) + "," +
                             std::to_string(n) + ")");
        }
    } else {
        c = Tensor({m, n});
    }
}

} // namespace

void gemm(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    require_rank(a, 2, "gemm lhs");
    require_rank(b, 2, "gemm rhs");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    check_gemm_shapes(a, b, m, k, b.rows(), n, "gemm");
    ensure_out(c, m, n, accumulate, "gemm");
#ifdef PARKCAST_USE_EIGEN
    MatMap am(a.data(), m, k), bm(b.data(), k, n);
    MutMap cm(c.data(), m, n);
    if (accumulate) {
        cm.noalias() += am * bm;
    } else {
        cm.noalias() = am * bm;
    }
#else
    gemm_ref(a.data(), b.data(), c.data(), m, k, n, accumulate);
#endif
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    require_rank(a, 2, "gemm_tn lhs");
    require_rank(b, 2, "gemm_tn rhs");
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    check_gemm_shapes(a, b, m, k, b.rows(), n, "gemm_tn");
    ensure_out(c, m, n, accumulate, "gemm_tn");
#ifdef PARKCAST_USE_EIGEN
    MatMap am(a.data(), k, m), bm(b.data(), k, n);
    MutMap cm(c.data(), m, n);
    if (accumulate) {
        cm.noalias() += am.transpose() * bm;
    } else {
        cm.noalias() = am.transpose() * bm;
    }
#else
    if (!accumulate) std::fill(c.data(), c.data() + m * n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a.data()[p * m + i];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c.data()[i * n + j] += av * b.data()[p * n + j];
        }
    }
#endif
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    require_rank(a, 2, "gemm_nt lhs");
    require_rank(b, 2, "gemm_nt rhs");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    check_gemm_shapes(a, b, m, k, b.cols(), n, "gemm_nt");
    ensure_out(c, m, n, accumulate, "gemm_nt");
#ifdef PARKCAST_USE_EIGEN
    MatMap am(a.data(), m, k), bm(b.data(), n, k);
    MutMap cm(c.data(), m, n);
    if (accumulate) {
        cm.noalias() += am * bm.transpose();
    } else {
        cm.noalias() = am * bm.transpose();
    }
#else
    if (!accumulate) std::fill(c.data(), c.data() + m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a.data()[i * k + p] * b.data()[j * k + p];
            c.data()[i * n + j] += s;
        }
    }
#endif
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    Tensor c;
    gemm(a, b, c);
    return c;
}

} // namespace linalg

} // namespace parkcast
