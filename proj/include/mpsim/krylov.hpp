#pragma once

#include <functional>

#include "mpsim/tensor.hpp"

namespace mpsim {

/// Hermitian operator action on a tensor (the caller guarantees Hermiticity
/// with respect to the flat inner product).
using LinearMap = std::function<Tensor(const Tensor&)>;

struct KrylovConfig {
    double tol = 1e-12;          ///< target residual / error estimate (relative)
    int max_dim = 30;            ///< Krylov dimension ceiling
    bool reorthogonalize = true; ///< full reorthogonalization of the basis
};

struct ExpmResult {
    Tensor vector;
    double est_error = 0;  ///< last-subdiagonal-term estimate, absolute
    int dim_used = 0;
    bool converged = true; ///< false: hit max_dim with est_error > tol*|v|
};

/// w ~ exp(z H) v by a Lanczos iteration on the Krylov space of (H, v).
/// Intended for z = -i dt, +i dt or -dtau. z = 0 returns v exactly.
ExpmResult expm_apply(const LinearMap& matvec, const Tensor& v, Complex z,
                      const KrylovConfig& cfg);

struct GroundResult {
    double value = 0;      ///< lowest Ritz value
    Tensor vector;         ///< normalized Ritz vector
    double residual = 0;   ///< ||H u - theta u||
    int restarts = 0;
    bool converged = true;
};

/// Lowest eigenpair by restarted Lanczos; converged when
/// ||H u - theta u|| <= tol * (|theta| + 1).
GroundResult ground_state(const LinearMap& matvec, const Tensor& v0,
                          const KrylovConfig& cfg);

}  // namespace mpsim
