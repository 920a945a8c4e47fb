#include "qspec/presets.hpp"

#include "qspec/densecoding.hpp"

#include <cmath>

namespace qspec::presets {

Matrix diag_state(const std::vector<double>& probs) {
    const int d = static_cast<int>(probs.size());
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = probs[i];
    return m;
}

Matrix pauli_x() {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

Matrix bell_state() {
    Vector phi = Vector::Zero(4);
    phi[0] = 1.0 / std::sqrt(2.0);
    phi[3] = 1.0 / std::sqrt(2.0);
    return phi * phi.adjoint();
}

BipartiteFactor bell_pair() { return BipartiteFactor{bell_state(), 2, 2}; }

BipartiteFactor product_00() {
    Matrix rho = Matrix::Zero(4, 4);
    rho(0, 0) = 1.0;
    return BipartiteFactor{rho, 2, 2};
}

BipartiteFactor bell_mixture(double a) {
    Vector plus = Vector::Zero(4), minus = Vector::Zero(4);
    plus[0] = plus[3] = 1.0 / std::sqrt(2.0);
    minus[0] = 1.0 / std::sqrt(2.0);
    minus[3] = -1.0 / std::sqrt(2.0);
    Matrix rho = a * (plus * plus.adjoint()) + (1.0 - a) * (minus * minus.adjoint());
    return BipartiteFactor{rho, 2, 2};
}

KrausChannel dephasing_qubit() {
    Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k1(1, 1) = 1.0;
    return KrausChannel(2, 2, {k0, k1});
}

KrausChannel depolarizing(int dim) {
    std::vector<Matrix> kraus;
    kraus.reserve(dim * dim);
    const double w = 1.0 / dim;
    for (int p = 0; p < dim; ++p) {
        for (int q = 0; q < dim; ++q) {
            kraus.push_back(w * weyl(dim, p, q));
        }
    }
    return KrausChannel(dim, dim, std::move(kraus));
}

KrausChannel flip_channel(double f) {
    if (f < 0.0 || f > 1.0) throw std::invalid_argument("flip_channel: f must lie in [0,1]");
    return KrausChannel(2, 2,
                        {std::sqrt(1.0 - f) * Matrix::Identity(2, 2), std::sqrt(f) * pauli_x()});
}

CQEnsemble orthogonal_qubit_ensemble() {
    Matrix zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    one(1, 1) = 1.0;
    return CQEnsemble({0.5, 0.5}, {zero, one});
}

} // namespace qspec::presets
