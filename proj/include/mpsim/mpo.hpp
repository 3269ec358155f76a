#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mpsim/mps.hpp"
#include "mpsim/tensor.hpp"

namespace mpsim {

/// Matrix product operator: rank-4 site tensors W(n) with axes
/// (left bond, bra physical, ket physical, right bond); M_0 = M_N = 1.
class Mpo {
public:
    Mpo() = default;
    explicit Mpo(std::vector<Tensor> sites);

    int num_sites() const { return static_cast<int>(sites_.size()); }
    const Tensor& site(int n) const;
    const std::vector<Tensor>& sites() const { return sites_; }
    Index phys_dim(int n) const { return site(n).extent(1); }
    Index bond_dim(int b) const;
    Index max_bond_dim() const;

private:
    std::vector<Tensor> sites_;
};

Mpo identity_mpo(int n_sites, Index d);

/// Uniform-chain Hamiltonian sum(n) sum(c) L_c(n) R_c(n+1) + sum(n) sum(f) f(n)
/// via the standard finite-automaton construction; M = 2 + #couplings.
Mpo nearest_neighbor_mpo(int n_sites,
                         const std::vector<std::pair<Tensor, Tensor>>& couplings,
                         const std::vector<Tensor>& fields);

struct ExpSumTerm {
    double weight;  // c_k
    double rate;    // lambda_k in (0, 1]
};

/// Certified exponential-sum approximation of r^(-alpha) on r = 1..range.
struct ExpSumFit {
    double alpha = 0;
    int range = 0;
    std::vector<ExpSumTerm> terms;
    double max_abs_error = 0;  // max_r |sum_k c_k lambda_k^r - r^(-alpha)|
};

/// Deterministic two-stage fit: log-spaced rate seeding, then alternating
/// linear least squares (weights) and damped Gauss-Newton (rates), raising
/// the term count until the max-abs error on 1..range drops below tol.
/// alpha = 0 is the exact one-term special case. Throws FitFailureError
/// (carrying the best error) if max_terms is exhausted.
ExpSumFit fit_exponential_sum(double alpha, int range, double tol, int max_terms = 64);

/// Re-evaluates max_r |sum_k c_k lambda_k^r - r^(-alpha)| by direct summation.
double exp_sum_fit_error(const ExpSumFit& fit);

/// Long-range XY Hamiltonian
///   H = (1/2) sum_{i<j} J/|i-j|^alpha (sx_i sx_j + sy_i sy_j)
/// with the power-law coupling replaced by an exponential-sum fit over the
/// realized distances 1..N-1; MPO bond dimension 2K + 2.
Mpo xy_power_law_mpo(int n_sites, double j, double alpha, double fit_tol);

/// Overload that reuses (and exposes) the certified fit.
Mpo xy_power_law_mpo(int n_sites, double j, const ExpSumFit& fit);

/// Nearest-neighbor XY chain, the alpha -> infinity limit.
Mpo xy_nearest_neighbor_mpo(int n_sites, double j);

/// <state|h|state> by transfer contraction; the imaginary part (zero for
/// Hermitian builders up to roundoff) is dropped.
double mpo_expectation(const MpsState& state, const Mpo& h);

std::string fit_report_json(const ExpSumFit& fit);

void write_mpo(std::ostream& os, const Mpo& mpo);
Mpo read_mpo(std::istream& is);

/// Pauli matrices as 2x2 tensors.
Tensor pauli_x();
Tensor pauli_y();
Tensor pauli_z();
Tensor pauli_plus();
Tensor pauli_minus();

}  // namespace mpsim
