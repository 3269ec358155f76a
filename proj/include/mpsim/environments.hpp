#pragma once

#include "mpsim/mpo.hpp"
#include "mpsim/mps.hpp"

namespace mpsim {

/// Cached left/right Hamiltonian environment blocks.
///
/// Block axes are (bra bond, MPO bond, ket bond). L(b) contracts sites
/// 0..b-1, R(b) contracts sites b..N-1; L(0) and R(N) are the scalar 1.
/// Validity is tracked by cursors: L(b) is current for b <= left_valid(),
/// R(b) for b >= right_valid(). Sweeps extend blocks one site at a time via
/// refresh_left / refresh_right, passing the tensor the block should be
/// built from; extending across a stale predecessor throws StalenessError.
class EnvironmentStack {
public:
    /// Builds the blocks a sweep from the state's orthogonality center needs:
    /// left blocks up to the center, right blocks down to it. The MPO is
    /// held by reference and must outlive the stack.
    EnvironmentStack(const MpsState& state, const Mpo& h);

    int num_sites() const { return n_sites_; }
    const Mpo& mpo() const { return *mpo_; }

    const Tensor& left(int bond) const;
    const Tensor& right(int bond) const;

    int left_valid() const { return left_valid_; }
    int right_valid() const { return right_valid_; }

    /// Recomputes L(site+1) from L(site) and the given site tensor.
    void refresh_left(int site, const Tensor& a);

    /// Recomputes R(site) from R(site+1) and the given site tensor.
    void refresh_right(int site, const Tensor& a);

private:
    const Mpo* mpo_ = nullptr;
    int n_sites_ = 0;
    std::vector<Tensor> left_;   // L(0..N)
    std::vector<Tensor> right_;  // R(0..N)
    int left_valid_ = 0;
    int right_valid_ = 0;
};

/// H(n) x for the vectorized one-site center x of shape (D_{n-1}, d, D_n).
Tensor h1_matvec(const EnvironmentStack& stack, int site, const Tensor& x);

/// K(b) c for the bond matrix c of shape (D_b, D_b) on bond b.
Tensor k0_matvec(const EnvironmentStack& stack, int bond, const Tensor& c);

/// H(n:n+1) x for the two-site block x of shape (D_{n-1}, d, d, D_{n+1}).
Tensor h2_matvec(const EnvironmentStack& stack, int site, const Tensor& x);

/// One-site effective Hamiltonian with the L*W contraction cached, for
/// repeated application inside a Krylov loop.
class OneSiteOp {
public:
    OneSiteOp(const EnvironmentStack& stack, int site);
    Tensor apply(const Tensor& x) const;

private:
    Tensor lw_;           // [bra, ket, s_out, s_in, m']
    const Tensor* right_;
};

/// Zero-site effective Hamiltonian K(b) on bond b.
class ZeroSiteOp {
public:
    ZeroSiteOp(const EnvironmentStack& stack, int bond);
    Tensor apply(const Tensor& c) const;

private:
    const Tensor* left_;
    const Tensor* right_;
};

/// Two-site effective Hamiltonian with both MPO contractions cached.
class TwoSiteOp {
public:
    TwoSiteOp(const EnvironmentStack& stack, int site);
    Tensor apply(const Tensor& x) const;

private:
    Tensor lw_;  // [bra, ket, s1_out, s1_in, m1]
    Tensor wr_;  // [m1, s2_out, s2_in, bra', ket']
};

}  // namespace mpsim
