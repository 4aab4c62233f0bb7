#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace becmode::banded {

using Complex = std::complex<double>;

/// Square band matrix with `lower` sub- and `upper` super-diagonals,
/// stored by diagonals: at(i, j) valid for -lower <= j - i <= upper.
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(std::size_t n, int lower, int upper);

    std::size_t size() const { return n_; }
    int lower() const { return lower_; }
    int upper() const { return upper_; }

    Complex& at(std::size_t i, std::size_t j);
    Complex at(std::size_t i, std::size_t j) const;
    bool in_band(std::size_t i, std::size_t j) const;

    /// Row i of the diagonal storage: row(i)[lower + j - i] = A(i, j).
    const Complex* row(std::size_t i) const { return d_.data() + i * width(); }
    std::size_t width() const { return static_cast<std::size_t>(lower_ + upper_ + 1); }

    /// a * A + b * B for matrices of equal shape.
    static BandMatrix combine(Complex a, const BandMatrix& A, Complex b, const BandMatrix& B);

    /// y = A x on many vectors. Unknown k of system s lives at
    /// data[k * unknown_stride + s * system_stride].
    void multiply(const Complex* x, Complex* y, std::size_t unknown_stride, std::size_t system_stride,
                  std::size_t systems) const;

private:
    std::size_t n_ = 0;
    int lower_ = 0;
    int upper_ = 0;
    std::vector<Complex> d_;  // row-major (n, lower + upper + 1)
};

/// LU without pivoting. Fine for the matrices used here (real part
/// symmetric positive definite); a zero pivot throws NumericalInstabilityError.
class BandLU {
public:
    BandLU() = default;
    explicit BandLU(BandMatrix a);

    std::size_t size() const { return a_.size(); }

    /// Solves in place, same layout convention as BandMatrix::multiply.
    void solve(Complex* data, std::size_t unknown_stride, std::size_t system_stride, std::size_t systems) const;

private:
    BandMatrix a_;  // L (unit, below) and U (on and above) packed
};

}  // namespace becmode::banded
