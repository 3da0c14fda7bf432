#pragma once

#include "greg/types.hpp"

#include <cstdint>
#include <string>

namespace greg {

enum class ActivationId : uint32_t { tanh = 0, sigmoid = 1, identity = 2 };

// Scalar nonlinearity g plus its analytic derivative. The derivative is what
// the update rules consume: Gamma(a) is the diagonal matrix with entries
// g'(a_i), applied per sample at the current feature values.
struct Activation {
    ActivationId id = ActivationId::tanh;

    double g(double x) const;
    double gprime(double x) const;

    std::string name() const;
    static Activation from_id(ActivationId id) { return Activation{id}; }
    static Activation from_name(const std::string& name);
};

// Gamma(f_vals) * v, i.e. g'(f_vals) applied elementwise to v.
Vector gamma_apply(const Activation& act, const Eigen::Ref<const Vector>& f_vals,
                   const Eigen::Ref<const Vector>& v);

// Columnwise variant used on feature matrices: entry (i,t) is g'(F(i,t)).
Matrix gprime_matrix(const Activation& act, const Eigen::Ref<const Matrix>& F);

}  // namespace greg
