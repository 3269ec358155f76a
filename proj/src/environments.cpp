#include "mpsim/environments.hpp"

#include <sstream>

namespace mpsim {

namespace {

Tensor boundary_block() {
    Tensor t({1, 1, 1});
    t[0] = 1.0;
    return t;
}

// L(b+1) from L(b): attach bra/ket copies of `a` and one MPO tensor.
Tensor extend_left(const Tensor& l, const Tensor& w, const Tensor& a) {
    Tensor t1 = contract(l, a, {{2, 0}});                  // [bra, m, s_in, ket']
    Tensor t2 = contract(t1, w, {{1, 0}, {2, 2}});         // [bra, ket', s_out, m']
    Tensor t3 = contract(a.conj(), t2, {{0, 0}, {1, 2}});  // [bra', ket', m']
    return t3.transpose({0, 2, 1});
}

// R(b) from R(b+1).
Tensor extend_right(const Tensor& r, const Tensor& w, const Tensor& a) {
    Tensor t1 = contract(a, r, {{2, 2}});                  // [ket, s_in, bra', m']
    Tensor t2 = contract(w, t1, {{2, 1}, {3, 3}});         // [m, s_out, ket, bra']
    Tensor t3 = contract(a.conj(), t2, {{1, 1}, {2, 3}});  // [bra, m, ket]
    return t3;
}

}  // namespace

EnvironmentStack::EnvironmentStack(const MpsState& state, const Mpo& h)
    : mpo_(&h), n_sites_(state.num_sites()) {
    if (h.num_sites() != n_sites_)
        throw DimensionError("environment stack: MPS/MPO site count mismatch");
    for (int n = 0; n < n_sites_; ++n)
        if (state.phys_dim(n) != h.phys_dim(n))
            throw DimensionError("environment stack: local dimension mismatch");

    int center_left, center_right;  // orthonormal up to these bonds
    switch (state.gauge().kind) {
        case GaugeKind::CenterSite:
            center_left = state.gauge().position;
            center_right = state.gauge().position + 1;
            break;
        case GaugeKind::CenterBond:
            center_left = center_right = state.gauge().position;
            break;
        case GaugeKind::LeftCanonical:
            center_left = center_right = n_sites_;
            break;
        case GaugeKind::RightCanonical:
            center_left = center_right = 0;
            break;
        default:
            throw InvalidInputError("environment stack needs a gauged state");
    }

    left_.assign(static_cast<std::size_t>(n_sites_) + 1, Tensor());
    right_.assign(static_cast<std::size_t>(n_sites_) + 1, Tensor());
    left_[0] = boundary_block();
    right_[static_cast<std::size_t>(n_sites_)] = boundary_block();
    for (int b = 0; b < center_left; ++b)
        left_[static_cast<std::size_t>(b) + 1] =
            extend_left(left_[static_cast<std::size_t>(b)], h.site(b), state.site(b));
    for (int b = n_sites_ - 1; b >= center_right; --b)
        right_[static_cast<std::size_t>(b)] =
            extend_right(right_[static_cast<std::size_t>(b) + 1], h.site(b), state.site(b));
    left_valid_ = center_left;
    right_valid_ = center_right;
}

const Tensor& EnvironmentStack::left(int bond) const {
    if (bond < 0 || bond > n_sites_) throw IndexError("environment bond out of range");
    if (bond > left_valid_) {
        std::ostringstream os;
        os << "left block " << bond << " is stale (valid up to " << left_valid_ << ")";
        throw StalenessError(os.str());
    }
    return left_[static_cast<std::size_t>(bond)];
}

const Tensor& EnvironmentStack::right(int bond) const {
    if (bond < 0 || bond > n_sites_) throw IndexError("environment bond out of range");
    if (bond < right_valid_) {
        std::ostringstream os;
        os << "right block " << bond << " is stale (valid from " << right_valid_ << ")";
        throw StalenessError(os.str());
    }
    return right_[static_cast<std::size_t>(bond)];
}

void EnvironmentStack::refresh_left(int site, const Tensor& a) {
    if (site < 0 || site >= n_sites_) throw IndexError("refresh_left: site out of range");
    if (site > left_valid_)
        throw StalenessError("refresh_left would extend across an invalid predecessor");
    left_[static_cast<std::size_t>(site) + 1] =
        extend_left(left_[static_cast<std::size_t>(site)], mpo_->site(site), a);
    left_valid_ = site + 1;
}

void EnvironmentStack::refresh_right(int site, const Tensor& a) {
    if (site < 0 || site >= n_sites_) throw IndexError("refresh_right: site out of range");
    if (site + 1 < right_valid_)
        throw StalenessError("refresh_right would extend across an invalid predecessor");
    right_[static_cast<std::size_t>(site)] =
        extend_right(right_[static_cast<std::size_t>(site) + 1], mpo_->site(site), a);
    right_valid_ = site;
}

Tensor h1_matvec(const EnvironmentStack& stack, int site, const Tensor& x) {
    const Tensor& l = stack.left(site);
    const Tensor& r = stack.right(site + 1);
    const Tensor& w = stack.mpo().site(site);
    Tensor t1 = contract(l, x, {{2, 0}});            // [bra, m, s_in, ket']
    Tensor t2 = contract(t1, w, {{1, 0}, {2, 2}});   // [bra, ket', s_out, m']
    return contract(t2, r, {{1, 2}, {3, 1}});        // [bra, s_out, bra']
}

Tensor k0_matvec(const EnvironmentStack& stack, int bond, const Tensor& c) {
    const Tensor& l = stack.left(bond);
    const Tensor& r = stack.right(bond);
    Tensor t1 = contract(l, c, {{2, 0}});            // [bra, m, ket']
    return contract(t1, r, {{1, 1}, {2, 2}});        // [bra, bra']
}

Tensor h2_matvec(const EnvironmentStack& stack, int site, const Tensor& x) {
    if (site + 1 >= stack.num_sites())
        throw IndexError("h2_matvec: two-site block exceeds the chain");
    const Tensor& l = stack.left(site);
    const Tensor& r = stack.right(site + 2);
    const Tensor& w1 = stack.mpo().site(site);
    const Tensor& w2 = stack.mpo().site(site + 1);
    Tensor t1 = contract(l, x, {{2, 0}});                // [bra, m, t1, t2, ket']
    Tensor t2 = contract(t1, w1, {{1, 0}, {2, 2}});      // [bra, t2, ket', s1, m1]
    Tensor t3 = contract(t2, w2, {{4, 0}, {1, 2}});      // [bra, ket', s1, s2, m2]
    return contract(t3, r, {{1, 2}, {4, 1}});            // [bra, s1, s2, bra']
}

OneSiteOp::OneSiteOp(const EnvironmentStack& stack, int site)
    : lw_(contract(stack.left(site), stack.mpo().site(site), {{1, 0}})),
      right_(&stack.right(site + 1)) {}

Tensor OneSiteOp::apply(const Tensor& x) const {
    // lw_: [bra, ket, s_out, s_in, m']
    Tensor t1 = contract(lw_, x, {{1, 0}, {3, 1}});      // [bra, s_out, m', ket']
    return contract(t1, *right_, {{2, 1}, {3, 2}});      // [bra, s_out, bra']
}

ZeroSiteOp::ZeroSiteOp(const EnvironmentStack& stack, int bond)
    : left_(&stack.left(bond)), right_(&stack.right(bond)) {}

Tensor ZeroSiteOp::apply(const Tensor& c) const {
    Tensor t1 = contract(*left_, c, {{2, 0}});
    return contract(t1, *right_, {{1, 1}, {2, 2}});
}

TwoSiteOp::TwoSiteOp(const EnvironmentStack& stack, int site)
    : lw_(contract(stack.left(site), stack.mpo().site(site), {{1, 0}})),
      wr_(contract(stack.mpo().site(site + 1), stack.right(site + 2), {{3, 1}})) {
    if (site + 1 >= stack.num_sites())
        throw IndexError("two-site operator exceeds the chain");
}

Tensor TwoSiteOp::apply(const Tensor& x) const {
    // lw_: [bra, ket, s1_out, s1_in, m1]; wr_: [m1, s2_out, s2_in, bra', ket']
    Tensor t1 = contract(lw_, x, {{1, 0}, {3, 1}});           // [bra, s1, m1, t2, ket']
    return contract(t1, wr_, {{2, 0}, {3, 2}, {4, 4}});       // [bra, s1, s2, bra']
}

}  // namespace mpsim
