#ifndef PHONET_MATRIX_HPP
#define PHONET_MATRIX_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace phonet {

/// Row-major dense matrix with value semantics.
template <class T>
class DenseMatrix {
public:
    using value_type = T;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    const T& operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const T> data() const noexcept { return data_; }

    template <class U>
    DenseMatrix<U> cast() const {
        DenseMatrix<U> out(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                out(i, j) = static_cast<U>((*this)(i, j));
        return out;
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <class T>
double frobenius_norm(const DenseMatrix<T>& m) {
    double sum = 0.0;
    for (const T& v : m.data())
        sum += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(sum);
}

template <class T>
T trace(const DenseMatrix<T>& m) {
    T sum{};
    for (std::size_t i = 0; i < m.rows() && i < m.cols(); ++i)
        sum += m(i, i);
    return sum;
}

template <class T>
bool is_symmetric(const DenseMatrix<T>& m) {
    if (!m.square())
        return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (m(i, j) != m(j, i))
                return false;
    return true;
}

} // namespace phonet

#endif // PHONET_MATRIX_HPP
