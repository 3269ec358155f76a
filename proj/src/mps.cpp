#include "mpsim/mps.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace mpsim {

namespace {

using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kZeroNormTol = 1e-300;

/// Deterministic standard-normal stream: explicit Box-Muller on top of
/// mt19937_64 so results do not depend on the stdlib's distribution.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        const double u1 = to_unit(eng_());
        const double u2 = to_unit(eng_());
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        cached_ = rad * std::sin(ang);
        have_ = true;
        return rad * std::cos(ang);
    }

    Complex next_complex() {
        const double re = next();
        const double im = next();
        return {re, im};
    }

private:
    static double to_unit(std::uint64_t x) {
        return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;  // (0,1)
    }
    std::mt19937_64 eng_;
    bool have_ = false;
    double cached_ = 0;
};

// (site, carry): site left-orthonormal, carry multiplies into the next site.
std::pair<Tensor, Tensor> left_orthonormalize(const Tensor& a) {
    const Index dl = a.extent(0), d = a.extent(1), dr = a.extent(2);
    QrResult qr = qr_positive(a.reshape({dl * d, dr}), Side::Left);
    const Index k = qr.orthonormal.extent(1);
    return {qr.orthonormal.reshape({dl, d, k}), std::move(qr.triangular)};
}

// (carry, site): site right-orthonormal, carry multiplies into the previous site.
std::pair<Tensor, Tensor> right_orthonormalize(const Tensor& a) {
    const Index dl = a.extent(0), d = a.extent(1), dr = a.extent(2);
    QrResult qr = qr_positive(a.reshape({dl, d * dr}), Side::Right);
    const Index k = qr.orthonormal.extent(0);
    return {std::move(qr.triangular), qr.orthonormal.reshape({k, d, dr})};
}

Tensor absorb_from_left(const Tensor& carry, const Tensor& site) {
    return contract(carry, site, {{1, 0}});
}

Tensor absorb_from_right(const Tensor& site, const Tensor& carry) {
    return contract(site, carry, {{2, 0}});
}

bool is_identity(const Tensor& m, double tol) {
    if (m.rank() != 2 || m.extent(0) != m.extent(1)) return false;
    const Index n = m.extent(0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (std::abs(m[i * n + j] - (i == j ? 1.0 : 0.0)) > tol) return false;
    return true;
}

bool left_orthonormal(const Tensor& a, double tol) {
    return is_identity(contract(a.conj(), a, {{0, 0}, {1, 1}}), tol);
}

bool right_orthonormal(const Tensor& a, double tol) {
    return is_identity(contract(a, a.conj(), {{1, 1}, {2, 2}}), tol);
}

}  // namespace

MpsState::MpsState(std::vector<Tensor> sites, Gauge gauge)
    : sites_(std::move(sites)), gauge_(std::move(gauge)) {
    const int n = num_sites();
    if (n == 0) throw InvalidInputError("MPS needs at least one site");
    for (const Tensor& t : sites_)
        if (t.rank() != 3) throw DimensionError("MPS site tensors must be rank 3");
    if (sites_.front().extent(0) != 1 || sites_.back().extent(2) != 1)
        throw DimensionError("boundary bond dimensions must be 1");

    const bool has_bond_c = gauge_.kind == GaugeKind::CenterBond;
    if (has_bond_c) {
        if (gauge_.position < 0 || gauge_.position > n)
            throw IndexError("center bond out of range");
        if (gauge_.bond_c.rank() != 2) throw DimensionError("center bond matrix must be rank 2");
    }
    if (gauge_.kind == GaugeKind::CenterSite && (gauge_.position < 0 || gauge_.position >= n))
        throw IndexError("center site out of range");

    for (int i = 0; i + 1 < n; ++i) {
        Index rhs = sites_[static_cast<std::size_t>(i)].extent(2);
        Index lhs = sites_[static_cast<std::size_t>(i + 1)].extent(0);
        if (has_bond_c && gauge_.position == i + 1) {
            if (gauge_.bond_c.extent(0) != rhs || gauge_.bond_c.extent(1) != lhs)
                throw DimensionError("center bond matrix does not fit its bond");
        } else if (rhs != lhs) {
            throw DimensionError("adjacent bond dimensions do not chain");
        }
    }
}

const Tensor& MpsState::site(int n) const {
    if (n < 0 || n >= num_sites()) throw IndexError("site index out of range");
    return sites_[static_cast<std::size_t>(n)];
}

Index MpsState::bond_dim(int b) const {
    const int n = num_sites();
    if (b < 0 || b > n) throw IndexError("bond index out of range");
    if (b == n) return sites_.back().extent(2);
    return sites_[static_cast<std::size_t>(b)].extent(0);
}

MpsState MpsState::with_site(int n, Tensor t, Gauge gauge) const {
    std::vector<Tensor> sites = sites_;
    sites.at(static_cast<std::size_t>(n)) = std::move(t);
    return MpsState(std::move(sites), std::move(gauge));
}

MpsState product_mps(const std::vector<std::vector<Complex>>& local_states) {
    if (local_states.empty()) throw InvalidInputError("product_mps needs at least one site");
    std::vector<Tensor> sites;
    sites.reserve(local_states.size());
    for (const auto& v : local_states) {
        if (v.empty()) throw InvalidInputError("empty local state vector");
        double nrm = 0;
        for (const Complex& c : v) nrm += std::norm(c);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-14) throw InvalidInputError("zero local state vector");
        Tensor t({1, static_cast<Index>(v.size()), 1});
        for (std::size_t s = 0; s < v.size(); ++s) t[static_cast<Index>(s)] = v[s] / nrm;
        sites.push_back(std::move(t));
    }
    return MpsState(std::move(sites), Gauge::left_canonical());
}

MpsState random_mps(int n_sites, Index d, Index max_bond, std::uint64_t seed) {
    if (n_sites < 1) throw InvalidInputError("random_mps: n_sites must be >= 1");
    if (d < 2) throw InvalidInputError("random_mps: local dimension must be >= 2");
    if (max_bond < 1) throw InvalidInputError("random_mps: max_bond must be >= 1");

    // entanglement-maximal cap: D_b = min(max_bond, d^b, d^(N-b))
    std::vector<Index> bonds(static_cast<std::size_t>(n_sites) + 1, 1);
    for (int b = 0; b <= n_sites; ++b) {
        Index cap = max_bond;
        Index grow = 1;
        for (int i = 0; i < std::min(b, n_sites - b); ++i) {
            grow *= d;
            if (grow >= cap) {
                grow = cap;
                break;
            }
        }
        bonds[static_cast<std::size_t>(b)] = std::min(cap, grow);
    }

    GaussianSource rng(seed);
    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n_sites));
    for (int n = 0; n < n_sites; ++n) {
        Tensor t({bonds[static_cast<std::size_t>(n)], d, bonds[static_cast<std::size_t>(n) + 1]});
        for (Index i = 0; i < t.size(); ++i) t[i] = rng.next_complex();
        sites.push_back(std::move(t));
    }
    return canonicalize(MpsState(std::move(sites), Gauge::none()), GaugeTarget::right_canonical());
}

MpsState gauge_transform(const MpsState& state, const std::vector<Tensor>& g) {
    const int n = state.num_sites();
    if (static_cast<int>(g.size()) != n + 1)
        throw DimensionError("gauge_transform needs N+1 matrices");
    auto check_boundary = [](const Tensor& t) {
        if (t.rank() != 2 || t.extent(0) != 1 || t.extent(1) != 1 ||
            std::abs(t[0] - Complex(1.0)) > 1e-12)
            throw InvalidInputError("boundary gauge matrices must be the scalar 1");
    };
    check_boundary(g.front());
    check_boundary(g.back());

    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Tensor& a = state.site(i);
        const Tensor& gl = g[static_cast<std::size_t>(i)];
        const Tensor& gr = g[static_cast<std::size_t>(i) + 1];
        const Index dl = a.extent(0), d = a.extent(1), dr = a.extent(2);
        if (gl.rank() != 2 || gl.extent(0) != dl || gl.extent(1) != dl ||
            gr.rank() != 2 || gr.extent(0) != dr || gr.extent(1) != dr)
            throw DimensionError("gauge matrix shape does not match bond");

        Eigen::Map<const RowMatrix> gmap(gl.data().data(), dl, dl);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(gmap);
        if (!lu.isInvertible()) throw GaugeError("singular gauge matrix");
        Eigen::Map<const RowMatrix> amap(a.data().data(), dl, d * dr);
        Tensor x({dl, d, dr});
        Eigen::Map<RowMatrix>(x.data().data(), dl, d * dr) = lu.solve(Eigen::MatrixXcd(amap));
        sites.push_back(contract(x, gr, {{2, 0}}));
    }
    return MpsState(std::move(sites), Gauge::none());
}

MpsState canonicalize(const MpsState& state, GaugeTarget target) {
    const int n = state.num_sites();
    std::vector<Tensor> sites = state.sites();
    if (state.gauge().kind == GaugeKind::CenterBond) {
        // fold the bond matrix into the site to its right (or left at b = N)
        const int b = state.gauge().position;
        if (b < n)
            sites[static_cast<std::size_t>(b)] =
                absorb_from_left(state.gauge().bond_c, sites[static_cast<std::size_t>(b)]);
        else
            sites[static_cast<std::size_t>(b) - 1] =
                absorb_from_right(sites[static_cast<std::size_t>(b) - 1], state.gauge().bond_c);
    }

    int left_until, right_from;  // sites [0, left_until) left-orthonormal, [right_from, N) right
    switch (target.kind) {
        case GaugeKind::LeftCanonical:
            left_until = n;
            right_from = n;
            break;
        case GaugeKind::RightCanonical:
            left_until = 0;
            right_from = 0;
            break;
        case GaugeKind::CenterSite:
            if (target.position < 0 || target.position >= n)
                throw IndexError("canonicalize: center site out of range");
            left_until = target.position;
            right_from = target.position + 1;
            break;
        case GaugeKind::CenterBond:
            if (target.position < 0 || target.position > n)
                throw IndexError("canonicalize: center bond out of range");
            left_until = target.position;
            right_from = target.position;
            break;
        default:
            throw InvalidInputError("canonicalize: invalid target gauge");
    }

    Tensor rcarry = Tensor::identity(1);
    for (int m = n - 1; m >= right_from; --m) {
        auto [carry, q] = right_orthonormalize(absorb_from_right(sites[static_cast<std::size_t>(m)], rcarry));
        sites[static_cast<std::size_t>(m)] = std::move(q);
        rcarry = std::move(carry);
    }
    Tensor lcarry = Tensor::identity(1);
    for (int m = 0; m < left_until; ++m) {
        auto [q, carry] = left_orthonormalize(absorb_from_left(lcarry, sites[static_cast<std::size_t>(m)]));
        sites[static_cast<std::size_t>(m)] = std::move(q);
        lcarry = std::move(carry);
    }

    auto normalized = [](Tensor t) {
        const double nrm = t.norm();
        if (nrm < kZeroNormTol) throw InvalidInputError("canonicalize: zero-norm state");
        t *= 1.0 / nrm;
        return t;
    };

    switch (target.kind) {
        case GaugeKind::LeftCanonical:
            // lcarry is the 1x1 norm scalar; discard it
            if (std::abs(lcarry[0]) < kZeroNormTol)
                throw InvalidInputError("canonicalize: zero-norm state");
            return MpsState(std::move(sites), Gauge::left_canonical());
        case GaugeKind::RightCanonical:
            if (std::abs(rcarry[0]) < kZeroNormTol)
                throw InvalidInputError("canonicalize: zero-norm state");
            return MpsState(std::move(sites), Gauge::right_canonical());
        case GaugeKind::CenterSite: {
            const int c = target.position;
            Tensor ac = absorb_from_right(
                absorb_from_left(lcarry, sites[static_cast<std::size_t>(c)]), rcarry);
            sites[static_cast<std::size_t>(c)] = normalized(std::move(ac));
            return MpsState(std::move(sites), Gauge::center_site(c));
        }
        case GaugeKind::CenterBond: {
            Tensor c = normalized(contract(lcarry, rcarry, {{1, 0}}));
            return MpsState(std::move(sites), Gauge::center_bond(target.position, std::move(c)));
        }
        default:
            throw InvalidInputError("canonicalize: invalid target gauge");
    }
}

MpsState move_center(const MpsState& state, int to_site) {
    if (state.gauge().kind != GaugeKind::CenterSite)
        throw InvalidInputError("move_center requires a CenterSite state");
    const int from = state.gauge().position;
    const int n = state.num_sites();
    if (to_site < 0 || to_site >= n) throw IndexError("move_center: target site out of range");
    if (to_site == from) return state;
    if (std::abs(to_site - from) != 1)
        throw IndexError("move_center moves by one site at a time");

    std::vector<Tensor> sites = state.sites();
    if (to_site == from + 1) {
        auto [q, carry] = left_orthonormalize(sites[static_cast<std::size_t>(from)]);
        sites[static_cast<std::size_t>(from)] = std::move(q);
        sites[static_cast<std::size_t>(to_site)] =
            absorb_from_left(carry, sites[static_cast<std::size_t>(to_site)]);
    } else {
        auto [carry, q] = right_orthonormalize(sites[static_cast<std::size_t>(from)]);
        sites[static_cast<std::size_t>(from)] = std::move(q);
        sites[static_cast<std::size_t>(to_site)] =
            absorb_from_right(sites[static_cast<std::size_t>(to_site)], carry);
    }
    return MpsState(std::move(sites), Gauge::center_site(to_site));
}

MpsState center_to_bond(const MpsState& state, Side side) {
    if (state.gauge().kind != GaugeKind::CenterSite)
        throw InvalidInputError("center_to_bond requires a CenterSite state");
    const int c = state.gauge().position;
    std::vector<Tensor> sites = state.sites();
    if (side == Side::Right) {
        auto [q, carry] = left_orthonormalize(sites[static_cast<std::size_t>(c)]);
        sites[static_cast<std::size_t>(c)] = std::move(q);
        return MpsState(std::move(sites), Gauge::center_bond(c + 1, std::move(carry)));
    }
    auto [carry, q] = right_orthonormalize(sites[static_cast<std::size_t>(c)]);
    sites[static_cast<std::size_t>(c)] = std::move(q);
    return MpsState(std::move(sites), Gauge::center_bond(c, std::move(carry)));
}

MpsState bond_to_site(const MpsState& state, Side side) {
    if (state.gauge().kind != GaugeKind::CenterBond)
        throw InvalidInputError("bond_to_site requires a CenterBond state");
    const int b = state.gauge().position;
    const int n = state.num_sites();
    std::vector<Tensor> sites = state.sites();
    if (side == Side::Right) {
        if (b >= n) throw IndexError("no site to the right of the last bond");
        sites[static_cast<std::size_t>(b)] =
            absorb_from_left(state.gauge().bond_c, sites[static_cast<std::size_t>(b)]);
        return MpsState(std::move(sites), Gauge::center_site(b));
    }
    if (b <= 0) throw IndexError("no site to the left of the first bond");
    sites[static_cast<std::size_t>(b) - 1] =
        absorb_from_right(sites[static_cast<std::size_t>(b) - 1], state.gauge().bond_c);
    return MpsState(std::move(sites), Gauge::center_site(b - 1));
}

SchmidtSpectrum schmidt_spectrum(const MpsState& state, int bond) {
    const int n = state.num_sites();
    if (bond < 0 || bond > n) throw IndexError("schmidt_spectrum: bond out of range");
    MpsState centered = canonicalize(state, GaugeTarget::center_bond(bond));
    SvdResult svd = svd_truncate(centered.gauge().bond_c, 0.0);
    return {bond, std::move(svd.singular)};
}

DensityMatrices density_matrices(const MpsState& state) {
    const int n = state.num_sites();
    DensityMatrices out;
    out.left.resize(static_cast<std::size_t>(n) + 1);
    out.right.resize(static_cast<std::size_t>(n) + 1);
    out.left[0] = Tensor::identity(1);
    out.right[static_cast<std::size_t>(n)] = Tensor::identity(1);
    for (int m = 0; m < n; ++m) {
        const Tensor& a = state.site(m);
        Tensor t1 = contract(out.left[static_cast<std::size_t>(m)], a, {{1, 0}});
        out.left[static_cast<std::size_t>(m) + 1] = contract(a.conj(), t1, {{0, 0}, {1, 1}});
    }
    for (int m = n - 1; m >= 0; --m) {
        const Tensor& a = state.site(m);
        Tensor t1 = contract(a, out.right[static_cast<std::size_t>(m) + 1], {{2, 0}});
        out.right[static_cast<std::size_t>(m)] = contract(t1, a.conj(), {{1, 1}, {2, 2}});
    }
    return out;
}

Complex overlap(const MpsState& a, const MpsState& b) {
    const int n = a.num_sites();
    if (n != b.num_sites()) throw DimensionError("overlap: site count mismatch");
    Tensor t({1, 1});
    t[0] = 1.0;
    for (int m = 0; m < n; ++m) {
        if (a.phys_dim(m) != b.phys_dim(m))
            throw DimensionError("overlap: local dimension mismatch");
        Tensor t1 = contract(t, b.site(m), {{1, 0}});
        t = contract(a.site(m).conj(), t1, {{0, 0}, {1, 1}});
    }
    return t[0];
}

double norm(const MpsState& state) {
    return std::sqrt(std::abs(overlap(state, state).real()));
}

Complex local_expectation(const MpsState& state, const Tensor& op, int site) {
    const int n = state.num_sites();
    if (site < 0 || site >= n) throw IndexError("local_expectation: site out of range");
    if (op.rank() != 2 || op.extent(0) != state.phys_dim(site) ||
        op.extent(1) != state.phys_dim(site))
        throw DimensionError("local_expectation: operator does not match local dimension");

    MpsState centered = state;
    if (centered.gauge().kind == GaugeKind::CenterSite) {
        while (centered.gauge().position < site)
            centered = move_center(centered, centered.gauge().position + 1);
        while (centered.gauge().position > site)
            centered = move_center(centered, centered.gauge().position - 1);
    } else {
        centered = canonicalize(centered, GaugeTarget::center_site(site));
    }
    const Tensor& ac = centered.site(site);
    Tensor v = contract(op, ac, {{1, 1}});  // [s, Dl, Dr]
    Tensor r = contract(ac.conj(), v, {{1, 0}, {0, 1}, {2, 2}});
    return r[0];
}

double entanglement_entropy(const MpsState& state, int bond) {
    SchmidtSpectrum spec = schmidt_spectrum(state, bond);
    double h = 0;
    for (double s : spec.values) {
        const double p = s * s;
        if (p > 0) h -= p * std::log(p);
    }
    return h;
}

bool gauge_holds(const MpsState& state, double tol) {
    const int n = state.num_sites();
    const Gauge& g = state.gauge();
    int left_until = 0, right_from = n;
    switch (g.kind) {
        case GaugeKind::None:
            return true;
        case GaugeKind::LeftCanonical:
            left_until = n;
            break;
        case GaugeKind::RightCanonical:
            right_from = 0;
            break;
        case GaugeKind::CenterSite:
            left_until = g.position;
            right_from = g.position + 1;
            break;
        case GaugeKind::CenterBond:
            left_until = g.position;
            right_from = g.position;
            break;
    }
    for (int m = 0; m < left_until; ++m)
        if (!left_orthonormal(state.site(m), tol)) return false;
    for (int m = right_from; m < n; ++m)
        if (!right_orthonormal(state.site(m), tol)) return false;
    if (g.kind == GaugeKind::CenterBond &&
        std::abs(g.bond_c.norm() - 1.0) > tol * 10)
        return false;
    return true;
}

void write_mps(std::ostream& os, const MpsState& state) {
    const int n = state.num_sites();
    os << "mps 1\nsites: " << n << "\ndims:";
    for (int m = 0; m < n; ++m) os << ' ' << state.phys_dim(m);
    os << "\nbonds:";
    for (int b = 0; b <= n; ++b) os << ' ' << state.bond_dim(b);
    os << "\ngauge: ";
    switch (state.gauge().kind) {
        case GaugeKind::None: os << "none"; break;
        case GaugeKind::LeftCanonical: os << "left"; break;
        case GaugeKind::RightCanonical: os << "right"; break;
        case GaugeKind::CenterSite: os << "center_site " << state.gauge().position; break;
        case GaugeKind::CenterBond: os << "center_bond " << state.gauge().position; break;
    }
    os << '\n';
    for (int m = 0; m < n; ++m) write_tensor(os, state.site(m));
    if (state.gauge().kind == GaugeKind::CenterBond) write_tensor(os, state.gauge().bond_c);
}

MpsState read_mps(std::istream& is) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "mps" || version != 1) throw InvalidInputError("not an MPS checkpoint");
    int n = 0;
    is >> tag >> n;
    if (tag != "sites:" || n < 1) throw InvalidInputError("bad MPS checkpoint header");
    is >> tag;  // dims:
    for (int m = 0; m < n; ++m) {
        Index d;
        is >> d;
    }
    is >> tag;  // bonds:
    for (int b = 0; b <= n; ++b) {
        Index d;
        is >> d;
    }
    is >> tag;
    if (tag != "gauge:") throw InvalidInputError("bad MPS checkpoint header");
    std::string kind;
    is >> kind;
    Gauge gauge;
    if (kind == "none") {
        gauge = Gauge::none();
    } else if (kind == "left") {
        gauge = Gauge::left_canonical();
    } else if (kind == "right") {
        gauge = Gauge::right_canonical();
    } else if (kind == "center_site") {
        int pos;
        is >> pos;
        gauge = Gauge::center_site(pos);
    } else if (kind == "center_bond") {
        int pos;
        is >> pos;
        gauge = Gauge::center_bond(pos, {});
    } else {
        throw InvalidInputError("unknown gauge tag '" + kind + "'");
    }
    is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');

    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) sites.push_back(read_tensor(is));
    if (gauge.kind == GaugeKind::CenterBond) gauge.bond_c = read_tensor(is);
    return MpsState(std::move(sites), std::move(gauge));
}

}  // namespace mpsim
