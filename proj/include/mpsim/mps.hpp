#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mpsim/tensor.hpp"

namespace mpsim {

enum class GaugeKind { None, LeftCanonical, RightCanonical, CenterSite, CenterBond };

/// Gauge annotation carried by an MpsState. For CenterSite, `position` is a
/// site index; for CenterBond it is a bond index (bond b sits between sites
/// b-1 and b; bonds 0 and N are the trivial boundaries) and `bond_c` holds
/// the center matrix on that bond.
struct Gauge {
    GaugeKind kind = GaugeKind::None;
    int position = -1;
    Tensor bond_c;

    static Gauge none() { return {}; }
    static Gauge left_canonical() { return {GaugeKind::LeftCanonical, -1, {}}; }
    static Gauge right_canonical() { return {GaugeKind::RightCanonical, -1, {}}; }
    static Gauge center_site(int n) { return {GaugeKind::CenterSite, n, {}}; }
    static Gauge center_bond(int b, Tensor c) { return {GaugeKind::CenterBond, b, std::move(c)}; }
};

/// Requested canonical form for canonicalize().
struct GaugeTarget {
    GaugeKind kind;
    int position = -1;  // CenterSite / CenterBond only

    static GaugeTarget left_canonical() { return {GaugeKind::LeftCanonical, -1}; }
    static GaugeTarget right_canonical() { return {GaugeKind::RightCanonical, -1}; }
    static GaugeTarget center_site(int n) { return {GaugeKind::CenterSite, n}; }
    static GaugeTarget center_bond(int b) { return {GaugeKind::CenterBond, b}; }
};

/// Matrix product state with open boundary conditions.
///
/// Site tensor n has shape (D_{n-1}, d_n, D_n); D_0 = D_N = 1. States are
/// immutable values: every operation returns a new state.
class MpsState {
public:
    MpsState() = default;
    MpsState(std::vector<Tensor> sites, Gauge gauge);

    int num_sites() const { return static_cast<int>(sites_.size()); }
    const Tensor& site(int n) const;
    const std::vector<Tensor>& sites() const { return sites_; }
    Index phys_dim(int n) const { return site(n).extent(1); }

    /// Bond dimension at bond b in 0..N.
    Index bond_dim(int b) const;

    const Gauge& gauge() const { return gauge_; }

    /// New state with one site tensor replaced (gauge annotation supplied by
    /// the caller, who knows what the replacement did to it).
    MpsState with_site(int n, Tensor t, Gauge gauge) const;

private:
    std::vector<Tensor> sites_;
    Gauge gauge_;
};

struct SchmidtSpectrum {
    int bond = 0;
    std::vector<double> values;  // descending, non-negative
};

/// D=1 product state from per-site local vectors (need not be normalized;
/// each must be nonzero). The result is normalized and simultaneously left-
/// and right-canonical; the annotation says LeftCanonical.
MpsState product_mps(const std::vector<std::vector<Complex>>& local_states);

/// Reproducible random MPS: normalized, right-canonical, bond dimensions
/// capped at the entanglement-maximal values min(max_bond, d^b, d^(N-b)).
MpsState random_mps(int n_sites, Index d, Index max_bond, std::uint64_t seed);

/// A(n) -> G(n-1)^{-1} A(n) G(n) for invertible gauge matrices G(0..N) with
/// G(0) = G(N) = scalar 1. The physical state is unchanged; the gauge
/// annotation is reset to None. Inverses are applied through LU solves.
MpsState gauge_transform(const MpsState& state, const std::vector<Tensor>& g);

/// Establishes the requested canonical form via QR sweeps (no matrix
/// inverses) and divides out the final scalar, so the result is normalized.
MpsState canonicalize(const MpsState& state, GaugeTarget target);

/// Moves the orthogonality center of a CenterSite state by one position.
MpsState move_center(const MpsState& state, int to_site);

/// CenterSite(n) -> CenterBond: Side::Left exposes C on bond n,
/// Side::Right on bond n+1.
MpsState center_to_bond(const MpsState& state, Side side);

/// CenterBond(b) -> CenterSite: Side::Left absorbs C into site b-1,
/// Side::Right into site b.
MpsState bond_to_site(const MpsState& state, Side side);

/// Schmidt coefficients of the normalized state across bond b.
SchmidtSpectrum schmidt_spectrum(const MpsState& state, int bond);

struct DensityMatrices {
    std::vector<Tensor> left;   // l(0..N), l(n) is D_n x D_n
    std::vector<Tensor> right;  // r(0..N)
};

/// Transfer density matrices l(n), r(n) with l(0) = r(N) = 1.
DensityMatrices density_matrices(const MpsState& state);

Complex overlap(const MpsState& a, const MpsState& b);  // <a|b>
double norm(const MpsState& state);

/// <op> at site n, evaluated in the center-site form. Intended for
/// normalized states; an unnormalized input is normalized on the way.
Complex local_expectation(const MpsState& state, const Tensor& op, int site);

/// Von Neumann entropy -sum s^2 ln s^2 across bond b.
double entanglement_entropy(const MpsState& state, int bond);

/// Audits the gauge annotation against the orthonormality conditions.
bool gauge_holds(const MpsState& state, double tol = 1e-10);

/// Checkpoint format: header (N, d list, D list, gauge tag) followed by the
/// per-site tensor dumps (and the bond matrix for CenterBond states).
void write_mps(std::ostream& os, const MpsState& state);
MpsState read_mps(std::istream& is);

}  // namespace mpsim
