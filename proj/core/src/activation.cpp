#include "greg/activation.hpp"

#include <cmath>

namespace greg {

double Activation::g(double x) const {
    switch (id) {
        case ActivationId::tanh: return std::tanh(x);
        case ActivationId::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case ActivationId::identity: return x;
    }
    return x;
}

double Activation::gprime(double x) const {
    switch (id) {
        case ActivationId::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationId::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case ActivationId::identity: return 1.0;
    }
    return 1.0;
}

std::string Activation::name() const {
    switch (id) {
        case ActivationId::tanh: return "tanh";
        case ActivationId::sigmoid: return "sigmoid";
        case ActivationId::identity: return "identity";
    }
    return "?";
}

Activation Activation::from_name(const std::string& name) {
    if (name == "tanh") return Activation{ActivationId::tanh};
    if (name == "sigmoid") return Activation{ActivationId::sigmoid};
    if (name == "identity") return Activation{ActivationId::identity};
    throw ConfigError("unknown activation: " + name);
}

Vector gamma_apply(const Activation& act, const Eigen::Ref<const Vector>& f_vals,
                   const Eigen::Ref<const Vector>& v) {
    if (f_vals.size() != v.size())
        throw std::invalid_argument("gamma_apply: size mismatch");
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) out[i] = act.gprime(f_vals[i]) * v[i];
    return out;
}

Matrix gprime_matrix(const Activation& act, const Eigen::Ref<const Matrix>& F) {
    switch (act.id) {
        case ActivationId::identity:
            return Matrix::Ones(F.rows(), F.cols());
        case ActivationId::tanh:
            return F.unaryExpr([](double x) {
                const double t = std::tanh(x);
                return 1.0 - t * t;
            });
        case ActivationId::sigmoid:
            return F.unaryExpr([](double x) {
                const double s = 1.0 / (1.0 + std::exp(-x));
                return s * (1.0 - s);
            });
    }
    return Matrix::Ones(F.rows(), F.cols());
}

}  // namespace greg
