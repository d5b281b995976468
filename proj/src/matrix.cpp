#include "nrlb/matrix.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nrlb {

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_shape(a.cols == b.rows, "matmul inner dims");
    Matrix c(a.rows, b.cols);
#ifdef _OPENMP
#pragma omp parallel for if (a.rows * a.cols * b.cols > 1u << 18)
#endif
    for (long long i = 0; i < static_cast<long long>(a.rows); ++i) {
        double* crow = c.data.data() + i * c.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(static_cast<std::size_t>(i), k);
            const double* brow = b.data.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require_shape(a.rows == b.rows, "matmul_tn inner dims");
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.data.data() + k * a.cols;
        const double* brow = b.data.data() + k * b.cols;
        for (std::size_t i = 0; i < a.cols; ++i) {
            double* crow = c.data.data() + i * c.cols;
            const double aki = arow[i];
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require_shape(a.cols == b.cols, "matmul_nt inner dims");
    Matrix c(a.rows, b.rows);
#ifdef _OPENMP
#pragma omp parallel for if (a.rows * a.cols * b.rows > 1u << 18)
#endif
    for (long long i = 0; i < static_cast<long long>(a.rows); ++i) {
        const double* arow = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.data.data() + j * b.cols;
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            c(static_cast<std::size_t>(i), j) = s;
        }
    }
    return c;
}

void add_row_vector(Matrix& m, std::span<const double> v) {
    require_shape(m.cols == v.size(), "add_row_vector length");
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += v[j];
    }
}

std::vector<double> col_sum(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) s[j] += row[j];
    }
    return s;
}

}  // namespace nrlb
