#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mpsim/errors.hpp"

namespace mpsim {

using Complex = std::complex<double>;
using Index = std::int64_t;

/// Dense complex tensor of arbitrary rank.
///
/// Entries are stored row-major: the last axis is contiguous, and the
/// linear offset of multi-index (i_0, ..., i_{r-1}) is
/// ((i_0 * e_1 + i_1) * e_2 + ...) + i_{r-1}. A rank-0 tensor holds a
/// single scalar. All operations are value-semantic.
class Tensor {
public:
    Tensor() = default;

    /// Zero-initialized tensor of the given shape.
    explicit Tensor(std::vector<Index> shape);

    /// Takes ownership of `data`, which must match product(shape) and be
    /// finite everywhere.
    Tensor(std::vector<Index> shape, std::vector<Complex> data);

    static Tensor scalar(Complex value);

    /// n x n identity matrix.
    static Tensor identity(Index n);

    Index rank() const { return static_cast<Index>(shape_.size()); }
    const std::vector<Index>& shape() const { return shape_; }
    Index extent(Index axis) const;
    Index size() const { return static_cast<Index>(data_.size()); }

    std::span<const Complex> data() const { return data_; }
    std::span<Complex> data() { return data_; }

    Complex& operator[](Index linear) { return data_[static_cast<std::size_t>(linear)]; }
    const Complex& operator[](Index linear) const { return data_[static_cast<std::size_t>(linear)]; }

    Complex& at(std::initializer_list<Index> idx);
    const Complex& at(std::initializer_list<Index> idx) const;

    /// Same data, new shape; product of extents must be unchanged.
    Tensor reshape(std::vector<Index> new_shape) const;

    /// Axis permutation: result axis i is input axis perm[i].
    Tensor transpose(const std::vector<Index>& perm) const;

    Tensor conj() const;

    double norm() const;  // Frobenius

    Tensor& operator*=(Complex alpha);
    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    friend Tensor operator*(Complex alpha, Tensor t) { return t *= alpha; }
    friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
    friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }

    bool all_finite() const;

    /// Throws FactorizationError unless every entry is finite.
    void require_finite(const char* context) const;

private:
    std::vector<Index> shape_;
    std::vector<Complex> data_;
};

/// Contraction over the listed (axis-of-a, axis-of-b) pairs. Paired axes
/// must have equal extents; free axes of `a` precede free axes of `b` in
/// the result, each group in original order. An empty pair list yields the
/// outer product.
Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<Index, Index>>& pairs);

/// Euclidean inner product sum(conj(a) * b) over all entries; shapes must
/// match entrywise.
Complex dot(const Tensor& a, const Tensor& b);

enum class Side { Left, Right };

struct QrResult {
    Tensor orthonormal;  ///< Q (Left) or Q of L*Q (Right)
    Tensor triangular;   ///< R (Left) or L (Right)
};

/// QR factorization of a rank-2 tensor with a deterministic sign fix:
/// the triangular factor has a real, non-negative diagonal.
///   Side::Left:  m = Q * R,  Q^H Q = I, R upper-triangular.
///   Side::Right: m = L * Q,  Q Q^H = I, L lower-triangular.
QrResult qr_positive(const Tensor& m, Side side);

constexpr Index kUnboundedBond = INT64_MAX;

struct SvdResult {
    Tensor u;                      ///< (rows x k), orthonormal columns
    std::vector<double> singular;  ///< descending, length k
    Tensor vh;                     ///< (k x cols), orthonormal rows
    double discarded_weight = 0;   ///< sum of squares of dropped values
};

/// Thin SVD with truncation: keeps the smallest k such that every
/// discarded singular value is < epsilon * ||s||_2 and k <= d_max, but at
/// least one value is always kept.
SvdResult svd_truncate(const Tensor& m, double epsilon, Index d_max = kUnboundedBond);

/// Text dump: header line "shape: e1 e2 ...", then one "re im" pair per
/// entry in layout order. Round-trips exactly.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

}  // namespace mpsim
