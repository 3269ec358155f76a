#include "mpsim/tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace mpsim {

namespace {

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMatrix = Eigen::MatrixXcd;

Index shape_product(const std::vector<Index>& shape) {
    Index p = 1;
    for (Index e : shape) {
        if (e < 0) throw DimensionError("negative tensor extent");
        p *= e;
    }
    return p;
}

std::vector<Index> row_major_strides(const std::vector<Index>& shape) {
    std::vector<Index> strides(shape.size(), 1);
    for (Index i = static_cast<Index>(shape.size()) - 2; i >= 0; --i)
        strides[i] = strides[i + 1] * shape[i + 1];
    return strides;
}

std::string shape_string(const std::vector<Index>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

}  // namespace

Tensor::Tensor(std::vector<Index> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_product(shape_))) {}

Tensor::Tensor(std::vector<Index> shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != static_cast<Index>(data_.size()))
        throw DimensionError("tensor data length does not match shape " + shape_string(shape_));
    require_finite("tensor construction");
}

Tensor Tensor::scalar(Complex value) { return Tensor({}, {value}); }

Tensor Tensor::identity(Index n) {
    Tensor t({n, n});
    for (Index i = 0; i < n; ++i) t[i * n + i] = 1.0;
    return t;
}

Index Tensor::extent(Index axis) const {
    if (axis < 0 || axis >= rank()) throw IndexError("tensor axis out of range");
    return shape_[static_cast<std::size_t>(axis)];
}

Complex& Tensor::at(std::initializer_list<Index> idx) {
    return const_cast<Complex&>(std::as_const(*this).at(idx));
}

const Complex& Tensor::at(std::initializer_list<Index> idx) const {
    if (static_cast<Index>(idx.size()) != rank())
        throw IndexError("index rank mismatch in Tensor::at");
    Index linear = 0;
    Index axis = 0;
    for (Index i : idx) {
        Index e = shape_[static_cast<std::size_t>(axis)];
        if (i < 0 || i >= e) throw IndexError("tensor index out of range");
        linear = linear * e + i;
        ++axis;
    }
    return data_[static_cast<std::size_t>(linear)];
}

Tensor Tensor::reshape(std::vector<Index> new_shape) const {
    if (shape_product(new_shape) != size())
        throw DimensionError("reshape " + shape_string(shape_) + " -> " +
                             shape_string(new_shape) + " changes element count");
    Tensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
}

Tensor Tensor::transpose(const std::vector<Index>& perm) const {
    const auto r = static_cast<std::size_t>(rank());
    if (perm.size() != r) throw DimensionError("permutation rank mismatch");
    std::vector<bool> seen(r, false);
    std::vector<Index> new_shape(r);
    for (std::size_t i = 0; i < r; ++i) {
        Index p = perm[i];
        if (p < 0 || p >= rank() || seen[static_cast<std::size_t>(p)])
            throw DimensionError("invalid axis permutation");
        seen[static_cast<std::size_t>(p)] = true;
        new_shape[i] = shape_[static_cast<std::size_t>(p)];
    }
    bool is_id = true;
    for (std::size_t i = 0; i < r; ++i) is_id = is_id && perm[i] == static_cast<Index>(i);
    if (is_id) return *this;

    Tensor out;
    out.shape_ = new_shape;
    out.data_.resize(data_.size());
    if (data_.empty()) return out;
    if (r == 0) {
        out.data_ = data_;
        return out;
    }

    const std::vector<Index> in_strides = row_major_strides(shape_);
    // stride in the input for a unit step of output axis i
    std::vector<Index> step(r);
    for (std::size_t i = 0; i < r; ++i) step[i] = in_strides[static_cast<std::size_t>(perm[i])];

    std::vector<Index> counter(r, 0);
    Index src = 0;
    const Index n = size();
    for (Index dst = 0; dst < n; ++dst) {
        out.data_[static_cast<std::size_t>(dst)] = data_[static_cast<std::size_t>(src)];
        // odometer increment over the output multi-index
        for (Index axis = static_cast<Index>(r) - 1; axis >= 0; --axis) {
            auto a = static_cast<std::size_t>(axis);
            src += step[a];
            if (++counter[a] < new_shape[a]) break;
            src -= step[a] * new_shape[a];
            counter[a] = 0;
        }
    }
    return out;
}

Tensor Tensor::conj() const {
    Tensor out = *this;
    for (auto& v : out.data_) v = std::conj(v);
    return out;
}

double Tensor::norm() const {
    double s = 0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

Tensor& Tensor::operator*=(Complex alpha) {
    for (auto& v : data_) v *= alpha;
    return *this;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (shape_ != other.shape_) throw DimensionError("tensor addition shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    if (shape_ != other.shape_) throw DimensionError("tensor subtraction shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

bool Tensor::all_finite() const {
    for (const auto& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

void Tensor::require_finite(const char* context) const {
    if (!all_finite())
        throw FactorizationError(std::string("non-finite tensor entries in ") + context);
}

Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<Index, Index>>& pairs) {
    const Index ra = a.rank();
    const Index rb = b.rank();
    std::vector<bool> used_a(static_cast<std::size_t>(ra), false);
    std::vector<bool> used_b(static_cast<std::size_t>(rb), false);
    Index k = 1;
    for (const auto& [ia, ib] : pairs) {
        if (ia < 0 || ia >= ra || ib < 0 || ib >= rb)
            throw DimensionError("contraction axis out of range");
        if (used_a[static_cast<std::size_t>(ia)] || used_b[static_cast<std::size_t>(ib)])
            throw DimensionError("contraction axis listed twice");
        used_a[static_cast<std::size_t>(ia)] = true;
        used_b[static_cast<std::size_t>(ib)] = true;
        if (a.extent(ia) != b.extent(ib)) {
            std::ostringstream os;
            os << "contraction extent mismatch: axis " << ia << " of " << shape_string(a.shape())
               << " vs axis " << ib << " of " << shape_string(b.shape());
            throw DimensionError(os.str());
        }
        k *= a.extent(ia);
    }

    std::vector<Index> perm_a, perm_b, out_shape;
    for (Index i = 0; i < ra; ++i)
        if (!used_a[static_cast<std::size_t>(i)]) {
            perm_a.push_back(i);
            out_shape.push_back(a.extent(i));
        }
    for (const auto& p : pairs) perm_a.push_back(p.first);
    for (const auto& p : pairs) perm_b.push_back(p.second);
    for (Index i = 0; i < rb; ++i)
        if (!used_b[static_cast<std::size_t>(i)]) {
            perm_b.push_back(i);
            out_shape.push_back(b.extent(i));
        }

    const Tensor ta = a.transpose(perm_a);
    const Tensor tb = b.transpose(perm_b);
    const Index m = ta.size() / std::max<Index>(k, 1);
    const Index n = tb.size() / std::max<Index>(k, 1);

    Tensor out(out_shape);
    if (m == 0 || n == 0 || k == 0) return out;
    Eigen::Map<const RowMatrix> ma(ta.data().data(), m, k);
    Eigen::Map<const RowMatrix> mb(tb.data().data(), k, n);
    Eigen::Map<RowMatrix> mo(out.data().data(), m, n);
    mo.noalias() = ma * mb;
    return out;
}

Complex dot(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("dot: shape mismatch");
    Complex s = 0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) s += std::conj(da[i]) * db[i];
    return s;
}

namespace {

// Scales Q columns / R rows so diag(R) is real and non-negative.
void fix_qr_signs(ColMatrix& q, ColMatrix& r) {
    const Index k = q.cols();
    for (Index i = 0; i < k; ++i) {
        const Complex d = r(i, i);
        const double mag = std::abs(d);
        if (mag < std::numeric_limits<double>::min()) continue;
        const Complex phase = d / mag;
        q.col(i) *= phase;
        r.row(i) *= std::conj(phase);
        r(i, i) = mag;  // clear rounding residue on the diagonal
    }
}

}  // namespace

QrResult qr_positive(const Tensor& m, Side side) {
    if (m.rank() != 2) throw DimensionError("qr_positive expects a rank-2 tensor");
    const Index rows = m.extent(0);
    const Index cols = m.extent(1);
    if (rows < 1 || cols < 1) throw DimensionError("qr_positive on empty matrix");

    if (side == Side::Right) {
        // m = L Q from the QR of m^H: m^H = Q~ R~  =>  m = R~^H Q~^H.
        Tensor mh = m.transpose({1, 0}).conj();
        QrResult t = qr_positive(mh, Side::Left);
        QrResult out;
        out.triangular = t.triangular.transpose({1, 0}).conj();
        out.orthonormal = t.orthonormal.transpose({1, 0}).conj();
        return out;
    }

    Eigen::Map<const RowMatrix> mapped(m.data().data(), rows, cols);
    ColMatrix a = mapped;
    const Index k = std::min(rows, cols);
    Eigen::HouseholderQR<ColMatrix> qr(a);
    ColMatrix q = qr.householderQ() * ColMatrix::Identity(rows, k);
    ColMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    fix_qr_signs(q, r);

    QrResult out;
    out.orthonormal = Tensor({rows, k});
    out.triangular = Tensor({k, cols});
    Eigen::Map<RowMatrix>(out.orthonormal.data().data(), rows, k) = q;
    Eigen::Map<RowMatrix>(out.triangular.data().data(), k, cols) = r;
    out.orthonormal.require_finite("qr_positive");
    out.triangular.require_finite("qr_positive");
    return out;
}

SvdResult svd_truncate(const Tensor& m, double epsilon, Index d_max) {
    if (m.rank() != 2) throw DimensionError("svd_truncate expects a rank-2 tensor");
    if (epsilon < 0) throw InvalidInputError("svd_truncate epsilon must be >= 0");
    if (d_max < 1) throw InvalidInputError("svd_truncate d_max must be positive");
    const Index rows = m.extent(0);
    const Index cols = m.extent(1);
    if (rows < 1 || cols < 1) throw DimensionError("svd_truncate on empty matrix");

    Eigen::Map<const RowMatrix> mapped(m.data().data(), rows, cols);
    ColMatrix a = mapped;
    ColMatrix u, v;
    Eigen::VectorXd s;
    if (std::min(rows, cols) <= 16) {
        Eigen::JacobiSVD<ColMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    } else {
        Eigen::BDCSVD<ColMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u = svd.matrixU();
        v = svd.matrixV();
        s = svd.singularValues();
    }

    const Index full = s.size();
    const double threshold = epsilon * s.norm();
    Index keep = 0;
    for (Index i = 0; i < full; ++i)
        if (s(i) >= threshold) keep = i + 1;
    keep = std::clamp<Index>(keep, 1, std::min(full, d_max));

    SvdResult out;
    out.singular.assign(s.data(), s.data() + keep);
    for (Index i = keep; i < full; ++i) out.discarded_weight += s(i) * s(i);
    out.u = Tensor({rows, keep});
    out.vh = Tensor({keep, cols});
    Eigen::Map<RowMatrix>(out.u.data().data(), rows, keep) = u.leftCols(keep);
    Eigen::Map<RowMatrix>(out.vh.data().data(), keep, cols) = v.leftCols(keep).adjoint();
    out.u.require_finite("svd_truncate");
    out.vh.require_finite("svd_truncate");
    return out;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    os << "shape:";
    for (Index e : t.shape()) os << ' ' << e;
    os << '\n';
    os.precision(17);
    os << std::scientific;
    for (const auto& v : t.data()) os << v.real() << ' ' << v.imag() << '\n';
}

Tensor read_tensor(std::istream& is) {
    std::string line;
    do {
        if (!std::getline(is, line)) throw InvalidInputError("tensor dump: missing header");
    } while (line.empty());
    std::istringstream header(line);
    std::string tag;
    header >> tag;
    if (tag != "shape:") throw InvalidInputError("tensor dump: bad header '" + line + "'");
    std::vector<Index> shape;
    Index e;
    while (header >> e) shape.push_back(e);

    Index n = 1;
    for (Index x : shape) n *= x;
    std::vector<Complex> data(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        double re, im;
        if (!(is >> re >> im)) throw InvalidInputError("tensor dump: truncated data");
        data[static_cast<std::size_t>(i)] = Complex(re, im);
    }
    is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace mpsim
