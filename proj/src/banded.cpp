#include "becmode/banded.hpp"

#include <algorithm>

#include "becmode/errors.hpp"

namespace becmode::banded {

BandMatrix::BandMatrix(std::size_t n, int lower, int upper)
    : n_(n), lower_(lower), upper_(upper), d_(n * static_cast<std::size_t>(lower + upper + 1))
{
    if (lower < 0 || upper < 0)
        throw ParameterError("band widths must be non-negative");
}

bool BandMatrix::in_band(std::size_t i, std::size_t j) const
{
    const auto off = static_cast<long>(j) - static_cast<long>(i);
    return i < n_ && j < n_ && off >= -lower_ && off <= upper_;
}

Complex& BandMatrix::at(std::size_t i, std::size_t j)
{
    const auto off = static_cast<long>(j) - static_cast<long>(i);
    return d_[i * static_cast<std::size_t>(lower_ + upper_ + 1) + static_cast<std::size_t>(off + lower_)];
}

Complex BandMatrix::at(std::size_t i, std::size_t j) const
{
    if (!in_band(i, j))
        return 0.0;
    const auto off = static_cast<long>(j) - static_cast<long>(i);
    return d_[i * static_cast<std::size_t>(lower_ + upper_ + 1) + static_cast<std::size_t>(off + lower_)];
}

BandMatrix BandMatrix::combine(Complex a, const BandMatrix& A, Complex b, const BandMatrix& B)
{
    if (A.n_ != B.n_ || A.lower_ != B.lower_ || A.upper_ != B.upper_)
        throw ParameterError("band matrices differ in shape");
    BandMatrix out(A.n_, A.lower_, A.upper_);
    for (std::size_t k = 0; k < out.d_.size(); ++k)
        out.d_[k] = a * A.d_[k] + b * B.d_[k];
    return out;
}

void BandMatrix::multiply(const Complex* x, Complex* y, std::size_t us, std::size_t ss, std::size_t systems) const
{
    const std::size_t w = static_cast<std::size_t>(lower_ + upper_ + 1);
    if (us == 1) {
        for (std::size_t s = 0; s < systems; ++s) {
            const Complex* xs = x + s * ss;
            Complex* ys = y + s * ss;
            for (std::size_t i = 0; i < n_; ++i) {
                const std::size_t jlo = i >= static_cast<std::size_t>(lower_) ? i - lower_ : 0;
                const std::size_t jhi = std::min(n_ - 1, i + static_cast<std::size_t>(upper_));
                const Complex* r = d_.data() + i * w + static_cast<std::size_t>(lower_) - i;
                Complex acc = 0.0;
                for (std::size_t j = jlo; j <= jhi; ++j)
                    acc += r[j] * xs[j];
                ys[i] = acc;
            }
        }
        return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t jlo = i >= static_cast<std::size_t>(lower_) ? i - lower_ : 0;
        const std::size_t jhi = std::min(n_ - 1, i + static_cast<std::size_t>(upper_));
        Complex* yi = y + i * us;
        for (std::size_t s = 0; s < systems; ++s)
            yi[s * ss] = 0.0;
        for (std::size_t j = jlo; j <= jhi; ++j) {
            const Complex c = d_[i * w + (j + static_cast<std::size_t>(lower_) - i)];
            const Complex* xj = x + j * us;
            for (std::size_t s = 0; s < systems; ++s)
                yi[s * ss] += c * xj[s * ss];
        }
    }
}

BandLU::BandLU(BandMatrix a) : a_(std::move(a))
{
    const std::size_t n = a_.size();
    const auto p = static_cast<std::size_t>(a_.lower());
    const auto q = static_cast<std::size_t>(a_.upper());
    for (std::size_t k = 0; k < n; ++k) {
        const Complex piv = a_.at(k, k);
        if (std::abs(piv) == 0.0)
            throw NumericalInstabilityError("zero pivot in banded LU");
        const std::size_t imax = std::min(n - 1, k + p);
        const std::size_t jmax = std::min(n - 1, k + q);
        for (std::size_t i = k + 1; i <= imax; ++i) {
            const Complex l = a_.at(i, k) / piv;
            a_.at(i, k) = l;
            for (std::size_t j = k + 1; j <= jmax; ++j)
                a_.at(i, j) -= l * a_.at(k, j);
        }
    }
}

void BandLU::solve(Complex* data, std::size_t us, std::size_t ss, std::size_t systems) const
{
    const std::size_t n = a_.size();
    const auto p = static_cast<std::size_t>(a_.lower());
    const auto q = static_cast<std::size_t>(a_.upper());
    if (us == 1) {
        // contiguous unknowns: interleave blocks of systems so the
        // recurrences of neighbouring lines overlap
        constexpr std::size_t kBlock = 8;
        for (std::size_t s0 = 0; s0 < systems; s0 += kBlock) {
            const std::size_t nb = std::min(kBlock, systems - s0);
            Complex* x = data + s0 * ss;
            for (std::size_t i = 1; i < n; ++i) {
                const Complex* r = a_.row(i);
                const std::size_t jlo = i > p ? i - p : 0;
                for (std::size_t b = 0; b < nb; ++b) {
                    Complex* xb = x + b * ss;
                    Complex acc = xb[i];
                    for (std::size_t j = jlo; j < i; ++j)
                        acc -= r[p + j - i] * xb[j];
                    xb[i] = acc;
                }
            }
            for (std::size_t i = n; i-- > 0;) {
                const Complex* r = a_.row(i);
                const std::size_t jhi = std::min(n - 1, i + q);
                const Complex inv = 1.0 / r[p];
                for (std::size_t b = 0; b < nb; ++b) {
                    Complex* xb = x + b * ss;
                    Complex acc = xb[i];
                    for (std::size_t j = i + 1; j <= jhi; ++j)
                        acc -= r[p + j - i] * xb[j];
                    xb[i] = acc * inv;
                }
            }
        }
        return;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const Complex* r = a_.row(i);
        const std::size_t jlo = i > p ? i - p : 0;
        Complex* xi = data + i * us;
        for (std::size_t j = jlo; j < i; ++j) {
            const Complex l = r[p + j - i];
            const Complex* xj = data + j * us;
            for (std::size_t s = 0; s < systems; ++s)
                xi[s * ss] -= l * xj[s * ss];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        const Complex* r = a_.row(i);
        const std::size_t jhi = std::min(n - 1, i + q);
        Complex* xi = data + i * us;
        for (std::size_t j = i + 1; j <= jhi; ++j) {
            const Complex u = r[p + j - i];
            const Complex* xj = data + j * us;
            for (std::size_t s = 0; s < systems; ++s)
                xi[s * ss] -= u * xj[s * ss];
        }
        const Complex inv = 1.0 / r[p];
        for (std::size_t s = 0; s < systems; ++s)
            xi[s * ss] *= inv;
    }
}

}  // namespace becmode::banded
