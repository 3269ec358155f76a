#include "mpsim/mpo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mpsim {

namespace {

constexpr Complex kI{0.0, 1.0};

Tensor make2x2(Complex a, Complex b, Complex c, Complex d) {
    return Tensor({2, 2}, {a, b, c, d});
}

// Places a d x d operator block at automaton entry (row, col) of W.
void set_block(Tensor& w, Index row, Index col, const Tensor& op, Complex scale = 1.0) {
    const Index d = w.extent(1);
    for (Index s = 0; s < d; ++s)
        for (Index t = 0; t < d; ++t)
            w.at({row, s, t, col}) = scale * op.at({s, t});
}

}  // namespace

Tensor pauli_x() { return make2x2(0, 1, 1, 0); }
Tensor pauli_y() { return make2x2(0, -kI, kI, 0); }
Tensor pauli_z() { return make2x2(1, 0, 0, -1); }
Tensor pauli_plus() { return make2x2(0, 1, 0, 0); }
Tensor pauli_minus() { return make2x2(0, 0, 1, 0); }

Mpo::Mpo(std::vector<Tensor> sites) : sites_(std::move(sites)) {
    if (sites_.empty()) throw InvalidInputError("MPO needs at least one site");
    for (const Tensor& t : sites_)
        if (t.rank() != 4) throw DimensionError("MPO site tensors must be rank 4");
    if (sites_.front().extent(0) != 1 || sites_.back().extent(3) != 1)
        throw DimensionError("MPO boundary bond dimensions must be 1");
    for (std::size_t i = 0; i + 1 < sites_.size(); ++i)
        if (sites_[i].extent(3) != sites_[i + 1].extent(0))
            throw DimensionError("MPO bond dimensions do not chain");
    for (const Tensor& t : sites_)
        if (t.extent(1) != t.extent(2))
            throw DimensionError("MPO physical dimensions must be square");
}

const Tensor& Mpo::site(int n) const {
    if (n < 0 || n >= num_sites()) throw IndexError("MPO site index out of range");
    return sites_[static_cast<std::size_t>(n)];
}

Index Mpo::bond_dim(int b) const {
    const int n = num_sites();
    if (b < 0 || b > n) throw IndexError("MPO bond index out of range");
    if (b == n) return sites_.back().extent(3);
    return sites_[static_cast<std::size_t>(b)].extent(0);
}

Index Mpo::max_bond_dim() const {
    Index m = 1;
    for (int b = 0; b <= num_sites(); ++b) m = std::max(m, bond_dim(b));
    return m;
}

Mpo identity_mpo(int n_sites, Index d) {
    if (n_sites < 1) throw InvalidInputError("identity_mpo: n_sites must be >= 1");
    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n_sites));
    for (int n = 0; n < n_sites; ++n) {
        Tensor w({1, d, d, 1});
        for (Index s = 0; s < d; ++s) w.at({0, s, s, 0}) = 1.0;
        sites.push_back(std::move(w));
    }
    return Mpo(std::move(sites));
}

Mpo nearest_neighbor_mpo(int n_sites,
                         const std::vector<std::pair<Tensor, Tensor>>& couplings,
                         const std::vector<Tensor>& fields) {
    if (n_sites < 1) throw InvalidInputError("nearest_neighbor_mpo: n_sites must be >= 1");
    Index d = 0;
    auto check_op = [&](const Tensor& op) {
        if (op.rank() != 2 || op.extent(0) != op.extent(1))
            throw DimensionError("coupling/field matrices must be square");
        if (d == 0) d = op.extent(0);
        if (op.extent(0) != d)
            throw DimensionError("all coupling/field matrices must share one local dimension");
    };
    for (const auto& [l, r] : couplings) {
        check_op(l);
        check_op(r);
    }
    for (const Tensor& f : fields) check_op(f);
    if (d == 0) throw InvalidInputError("nearest_neighbor_mpo: no terms given");
    if (n_sites == 1 && !couplings.empty())
        throw DimensionError("two-site couplings need at least two sites");

    const Index c = static_cast<Index>(couplings.size());
    const Index m = 2 + c;
    Tensor field_sum({d, d});
    for (const Tensor& f : fields) field_sum += f;

    // automaton rows: 0 = nothing placed, 1..c = coupling in flight, m-1 = done
    Tensor w({m, d, d, m});
    set_block(w, 0, 0, Tensor::identity(d));
    set_block(w, m - 1, m - 1, Tensor::identity(d));
    set_block(w, 0, m - 1, field_sum);
    for (Index k = 0; k < c; ++k) {
        set_block(w, 0, 1 + k, couplings[static_cast<std::size_t>(k)].first);
        set_block(w, 1 + k, m - 1, couplings[static_cast<std::size_t>(k)].second);
    }

    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n_sites));
    for (int n = 0; n < n_sites; ++n) {
        Index lo = (n == 0) ? 0 : m - 1;          // first site: row 0 only
        Index hi = (n == n_sites - 1) ? 0 : m - 1;  // last site: column m-1 only
        Tensor site({(n == 0) ? 1 : m, d, d, (n == n_sites - 1) ? 1 : m});
        for (Index row = 0; row <= ((n == 0) ? 0 : m - 1); ++row)
            for (Index col = 0; col <= ((n == n_sites - 1) ? 0 : m - 1); ++col)
                for (Index s = 0; s < d; ++s)
                    for (Index t = 0; t < d; ++t)
                        site.at({row, s, t, col}) =
                            w.at({(n == 0) ? 0 : row, s, t, (n == n_sites - 1) ? m - 1 : col});
        (void)lo;
        (void)hi;
        sites.push_back(std::move(site));
    }
    return Mpo(std::move(sites));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd solve_weights(const VectorXd& lam, const VectorXd& f, int range, MatrixXd& v_out) {
    const int k = static_cast<int>(lam.size());
    MatrixXd v(range, k);
    for (int r = 0; r < range; ++r)
        for (int j = 0; j < k; ++j) v(r, j) = std::pow(lam(j), double(r + 1));
    v_out = v;
    Eigen::BDCSVD<MatrixXd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-14);
    return svd.solve(f);
}

double max_abs_residual(const MatrixXd& v, const VectorXd& c, const VectorXd& f) {
    return ((v * c) - f).cwiseAbs().maxCoeff();
}

struct FitAttempt {
    VectorXd lam, c;
    double err;
};

/// One deterministic fit at fixed term count: log-spaced seeding followed by
/// alternating weight solves and Levenberg-damped Gauss-Newton on the rates.
FitAttempt fit_terms(double alpha, int range, int k, int rounds = 40) {
    VectorXd f(range);
    for (int r = 0; r < range; ++r) f(r) = std::pow(double(r + 1), -alpha);

    VectorXd lam(k);
    if (k == 1) {
        lam(0) = std::exp(-1.0);
    } else {
        const double t_min = std::log(1.0 / (4.0 * range));
        const double t_max = std::log(std::log(1e16));
        for (int j = 0; j < k; ++j)
            lam(j) = std::exp(-std::exp(t_min + (t_max - t_min) * j / double(k - 1)));
    }

    MatrixXd v;
    VectorXd c = solve_weights(lam, f, range, v);
    FitAttempt best{lam, c, max_abs_residual(v, c, f)};

    double mu = 1e-3;
    for (int it = 0; it < rounds; ++it) {
        VectorXd e = v * c - f;
        const double err = e.cwiseAbs().maxCoeff();
        if (err < best.err) best = {lam, c, err};

        MatrixXd jac(range, k);
        for (int r = 0; r < range; ++r)
            for (int j = 0; j < k; ++j)
                jac(r, j) = c(j) * double(r + 1) * std::pow(lam(j), double(r));
        MatrixXd a = jac.transpose() * jac;
        VectorXd g = jac.transpose() * e;
        const double scale = std::max(a.trace() / k, 1e-30);

        bool accepted = false;
        for (int tries = 0; tries < 8; ++tries) {
            MatrixXd damped = a + mu * scale * MatrixXd::Identity(k, k);
            VectorXd dl = damped.ldlt().solve(-g);
            VectorXd lam_new = (lam + dl).cwiseMax(1e-12).cwiseMin(1.0);
            MatrixXd v_new;
            VectorXd c_new = solve_weights(lam_new, f, range, v_new);
            if (max_abs_residual(v_new, c_new, f) <= err) {
                lam = lam_new;
                c = c_new;
                v = v_new;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if (!accepted) break;
    }

    VectorXd e = v * c - f;
    const double err = e.cwiseAbs().maxCoeff();
    if (err < best.err) best = {lam, c, err};
    return best;
}

}  // namespace

ExpSumFit fit_exponential_sum(double alpha, int range, double tol, int max_terms) {
    if (alpha < 0) throw InvalidInputError("fit_exponential_sum: alpha must be >= 0");
    if (range < 1) throw InvalidInputError("fit_exponential_sum: range must be >= 1");
    if (tol <= 0) throw InvalidInputError("fit_exponential_sum: tol must be > 0");
    if (max_terms < 1) throw InvalidInputError("fit_exponential_sum: max_terms must be >= 1");

    ExpSumFit fit;
    fit.alpha = alpha;
    fit.range = range;

    if (alpha == 0.0 || range == 1) {
        // r^0 = 1 is the geometric term (c, lambda) = (1, 1); a single sample
        // point at r = 1 is matched the same way.
        fit.terms = {{1.0, 1.0}};
        fit.max_abs_error = exp_sum_fit_error(fit);
        return fit;
    }

    double best_err = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_terms; ++k) {
        FitAttempt attempt = fit_terms(alpha, range, k);
        best_err = std::min(best_err, attempt.err);
        if (attempt.err < tol) {
            fit.terms.reserve(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) fit.terms.push_back({attempt.c(j), attempt.lam(j)});
            fit.max_abs_error = exp_sum_fit_error(fit);
            if (fit.max_abs_error < tol) return fit;
            fit.terms.clear();
        }
    }
    std::ostringstream os;
    os << "exponential-sum fit failed: best error " << best_err << " after " << max_terms
       << " terms (alpha=" << alpha << ", range=" << range << ", tol=" << tol << ")";
    throw FitFailureError(os.str(), best_err, max_terms);
}

double exp_sum_fit_error(const ExpSumFit& fit) {
    double worst = 0;
    for (int r = 1; r <= fit.range; ++r) {
        double s = 0;
        for (const ExpSumTerm& t : fit.terms) s += t.weight * std::pow(t.rate, double(r));
        worst = std::max(worst, std::abs(s - std::pow(double(r), -fit.alpha)));
    }
    return worst;
}

Mpo xy_power_law_mpo(int n_sites, double j, double alpha, double fit_tol) {
    if (n_sites < 2) throw InvalidInputError("xy_power_law_mpo: need at least two sites");
    ExpSumFit fit = fit_exponential_sum(alpha, n_sites - 1, fit_tol);
    return xy_power_law_mpo(n_sites, j, fit);
}

Mpo xy_power_law_mpo(int n_sites, double j, const ExpSumFit& fit) {
    if (n_sites < 2) throw InvalidInputError("xy_power_law_mpo: need at least two sites");
    const Index k = static_cast<Index>(fit.terms.size());
    const Index m = 2 * k + 2;
    const Index d = 2;
    const Tensor sp = pauli_plus();
    const Tensor sm = pauli_minus();

    // (1/2)(sx sx + sy sy) = s+ s- + s- s+, so each fit term feeds two
    // decay channels with starter weight J c_k lambda_k and unit finisher.
    Tensor w({m, d, d, m});
    set_block(w, 0, 0, Tensor::identity(d));
    set_block(w, m - 1, m - 1, Tensor::identity(d));
    for (Index q = 0; q < k; ++q) {
        const auto& term = fit.terms[static_cast<std::size_t>(q)];
        const Complex start = j * term.weight * term.rate;
        set_block(w, 0, 1 + 2 * q, sp, start);
        set_block(w, 1 + 2 * q, 1 + 2 * q, Tensor::identity(d), term.rate);
        set_block(w, 1 + 2 * q, m - 1, sm);
        set_block(w, 0, 2 + 2 * q, sm, start);
        set_block(w, 2 + 2 * q, 2 + 2 * q, Tensor::identity(d), term.rate);
        set_block(w, 2 + 2 * q, m - 1, sp);
    }

    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n_sites));
    for (int n = 0; n < n_sites; ++n) {
        const Index rows = (n == 0) ? 1 : m;
        const Index cols = (n == n_sites - 1) ? 1 : m;
        Tensor site({rows, d, d, cols});
        for (Index row = 0; row < rows; ++row)
            for (Index col = 0; col < cols; ++col)
                for (Index s = 0; s < d; ++s)
                    for (Index t = 0; t < d; ++t)
                        site.at({row, s, t, col}) =
                            w.at({(n == 0) ? 0 : row, s, t, (n == n_sites - 1) ? m - 1 : col});
        sites.push_back(std::move(site));
    }
    return Mpo(std::move(sites));
}

Mpo xy_nearest_neighbor_mpo(int n_sites, double j) {
    Tensor sxl = pauli_x();
    sxl *= 0.5 * j;
    Tensor syl = pauli_y();
    syl *= 0.5 * j;
    return nearest_neighbor_mpo(n_sites, {{sxl, pauli_x()}, {syl, pauli_y()}}, {});
}

double mpo_expectation(const MpsState& state, const Mpo& h) {
    const int n = state.num_sites();
    if (n != h.num_sites()) throw DimensionError("mpo_expectation: site count mismatch");
    Tensor t({1, 1, 1});
    t[0] = 1.0;
    for (int m = 0; m < n; ++m) {
        if (state.phys_dim(m) != h.phys_dim(m))
            throw DimensionError("mpo_expectation: local dimension mismatch");
        const Tensor& a = state.site(m);
        Tensor t1 = contract(t, a, {{2, 0}});                    // [bra, mpo, s, ket']
        Tensor t2 = contract(t1, h.site(m), {{1, 0}, {2, 2}});   // [bra, ket', s', mpo']
        Tensor t3 = contract(a.conj(), t2, {{0, 0}, {1, 2}});    // [bra', ket', mpo']
        t = t3.transpose({0, 2, 1});
    }
    return t[0].real();
}

std::string fit_report_json(const ExpSumFit& fit) {
    nlohmann::ordered_json doc;
    doc["alpha"] = fit.alpha;
    doc["K"] = fit.terms.size();
    auto terms = nlohmann::ordered_json::array();
    for (const ExpSumTerm& t : fit.terms) terms.push_back({{"c", t.weight}, {"lambda", t.rate}});
    doc["terms"] = std::move(terms);
    doc["max_abs_error"] = fit.max_abs_error;
    doc["R"] = fit.range;
    return doc.dump(2);
}

void write_mpo(std::ostream& os, const Mpo& mpo) {
    os << "mpo 1\nsites: " << mpo.num_sites() << '\n';
    for (int n = 0; n < mpo.num_sites(); ++n) write_tensor(os, mpo.site(n));
}

Mpo read_mpo(std::istream& is) {
    std::string tag;
    int version = 0, n = 0;
    is >> tag >> version;
    if (tag != "mpo" || version != 1) throw InvalidInputError("not an MPO checkpoint");
    is >> tag >> n;
    if (tag != "sites:" || n < 1) throw InvalidInputError("bad MPO checkpoint header");
    is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    std::vector<Tensor> sites;
    sites.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) sites.push_back(read_tensor(is));
    return Mpo(std::move(sites));
}

}  // namespace mpsim
