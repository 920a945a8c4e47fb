#include "qspec/channels.hpp"

#include "qspec/rng.hpp"

#include <cmath>
#include <sstream>

namespace qspec {

KrausChannel::KrausChannel(int in_dim, int out_dim, std::vector<Matrix> kraus_ops)
    : in_dim_(in_dim), out_dim_(out_dim), kraus_(std::move(kraus_ops)) {
    if (in_dim_ <= 0 || out_dim_ <= 0) {
        throw std::invalid_argument("KrausChannel: dimensions must be positive");
    }
    if (kraus_.empty()) throw std::invalid_argument("KrausChannel: empty Kraus list");
    for (const Matrix& k : kraus_) {
        if (k.rows() != out_dim_ || k.cols() != in_dim_) {
            throw std::invalid_argument("KrausChannel: Kraus operator has wrong shape");
        }
    }
    Matrix sum = Matrix::Zero(in_dim_, in_dim_);
    for (const Matrix& k : kraus_) sum += k.adjoint() * k;
    const double dev = (sum - Matrix::Identity(in_dim_, in_dim_)).cwiseAbs().maxCoeff();
    if (dev > 1e-9) {
        std::ostringstream oss;
        oss << "KrausChannel: not trace preserving, max |sum K^dag K - I| = " << dev;
        throw std::invalid_argument(oss.str());
    }
}

KrausChannel KrausChannel::identity_channel(int dim) {
    return KrausChannel(dim, dim, {Matrix::Identity(dim, dim)});
}

KrausChannel KrausChannel::from_isometry(const Matrix& v, int out_dim, int env_dim) {
    const int in_dim = static_cast<int>(v.cols());
    if (v.rows() != static_cast<Eigen::Index>(out_dim) * env_dim) {
        throw std::invalid_argument("from_isometry: row count != out_dim * env_dim");
    }
    std::vector<Matrix> ops;
    ops.reserve(env_dim);
    for (int e = 0; e < env_dim; ++e) {
        Matrix k(out_dim, in_dim);
        for (int o = 0; o < out_dim; ++o) k.row(o) = v.row(o * env_dim + e);
        ops.push_back(std::move(k));
    }
    return KrausChannel(in_dim, out_dim, std::move(ops));
}

Matrix KrausChannel::apply_matrix(const Matrix& x) const {
    if (x.rows() != in_dim_ || x.cols() != in_dim_) {
        throw std::invalid_argument("KrausChannel::apply: dimension mismatch");
    }
    Matrix out = Matrix::Zero(out_dim_, out_dim_);
    for (const Matrix& k : kraus_) out += k * x * k.adjoint();
    return out;
}

DensityMatrix KrausChannel::apply(const DensityMatrix& rho) const {
    Matrix out = apply_matrix(rho.matrix());
    return DensityMatrix(0.5 * (out + out.adjoint()));
}

POVM::POVM(int dim, std::vector<Matrix> elements) : dim_(dim), elements_(std::move(elements)) {
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (const Matrix& e : elements_) {
        if (e.rows() != dim_ || e.cols() != dim_) {
            throw std::invalid_argument("POVM: element has wrong shape");
        }
        if (max_asymmetry(e) > 1e-9) throw std::invalid_argument("POVM: element not Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> solver(e, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -kPsdTol) {
            throw std::invalid_argument("POVM: element not PSD");
        }
        sum += e;
    }
    // I - sum must be PSD: the implicit failure element completes the identity.
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(Matrix::Identity(dim_, dim_) - sum),
                                                 Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-9) {
        throw std::invalid_argument("POVM: elements sum above identity");
    }
}

double entanglement_fidelity(const DensityMatrix& rho, const KrausChannel& phi) {
    if (phi.in_dim() != rho.dim() || phi.out_dim() != rho.dim()) {
        throw std::invalid_argument("entanglement_fidelity: channel must preserve the space");
    }
    double f = 0.0;
    for (const Matrix& k : phi.kraus()) {
        f += std::norm((k * rho.matrix()).trace());
    }
    return f;
}

KrausChannel compose(const KrausChannel& phi2, const KrausChannel& phi1) {
    if (phi1.out_dim() != phi2.in_dim()) {
        throw std::invalid_argument("compose: inner dimensions do not match");
    }
    std::vector<Matrix> ops;
    ops.reserve(phi1.kraus().size() * phi2.kraus().size());
    for (const Matrix& k2 : phi2.kraus()) {
        for (const Matrix& k1 : phi1.kraus()) ops.push_back(k2 * k1);
    }
    return KrausChannel(phi1.in_dim(), phi2.out_dim(), std::move(ops));
}

KrausChannel tensor_channel(const KrausChannel& a, const KrausChannel& b) {
    std::vector<Matrix> ops;
    ops.reserve(a.kraus().size() * b.kraus().size());
    for (const Matrix& ka : a.kraus()) {
        for (const Matrix& kb : b.kraus()) ops.push_back(tensor(ka, kb));
    }
    return KrausChannel(a.in_dim() * b.in_dim(), a.out_dim() * b.out_dim(), std::move(ops));
}

KrausChannel channel_power(const KrausChannel& phi, int n) {
    if (n < 1) throw std::invalid_argument("channel_power: n must be >= 1");
    KrausChannel out = phi;
    for (int i = 1; i < n; ++i) out = tensor_channel(out, phi);
    return out;
}

KrausChannel random_cptp(int in_dim, int out_dim, int env_dim, std::uint64_t seed) {
    if (env_dim < 1) throw std::invalid_argument("random_cptp: env_dim must be >= 1");
    if (out_dim * env_dim < in_dim) {
        throw std::invalid_argument("random_cptp: out_dim * env_dim must be >= in_dim");
    }
    auto rng = make_rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(out_dim * env_dim, in_dim);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = Matrix(qr.householderQ()).leftCols(in_dim);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < in_dim; ++j) {
        Complex rjj = r(j, j);
        const double a = std::abs(rjj);
        q.col(j) *= (a > 0 ? rjj / a : Complex(1.0, 0.0));
    }
    return KrausChannel::from_isometry(q, out_dim, env_dim);
}

} // namespace qspec
