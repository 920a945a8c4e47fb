#include "qspec/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qspec {

double max_asymmetry(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw std::invalid_argument("HermitianOperator: matrix must be square and nonempty");
    }
    const double asym = max_asymmetry(m_);
    if (asym > kHermTol) {
        std::ostringstream oss;
        oss << "HermitianOperator: input is not Hermitian, max |A_ij - conj(A_ji)| = " << asym;
        throw std::invalid_argument(oss.str());
    }
}

DensityMatrix::DensityMatrix(Matrix m) : HermitianOperator(std::move(m)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -kPsdTol) {
        std::ostringstream oss;
        oss << "DensityMatrix: not positive semidefinite, min eigenvalue = " << min_eig;
        throw std::invalid_argument(oss.str());
    }
    const double tr = trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream oss;
        oss << "DensityMatrix: trace = " << tr << ", expected 1";
        throw std::invalid_argument(oss.str());
    }
}

Projector::Projector(Matrix m) : HermitianOperator(std::move(m)) {
    const double idem = (m_ * m_ - m_).cwiseAbs().maxCoeff();
    if (idem > kProjTol) {
        std::ostringstream oss;
        oss << "Projector: not idempotent, max |P^2 - P| = " << idem;
        throw std::invalid_argument(oss.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
    int r = 0;
    for (int i = 0; i < solver.eigenvalues().size(); ++i) {
        const double ev = solver.eigenvalues()[i];
        if (std::abs(ev) > kProjTol && std::abs(ev - 1.0) > kProjTol) {
            std::ostringstream oss;
            oss << "Projector: eigenvalue " << ev << " not in {0,1}";
            throw std::invalid_argument(oss.str());
        }
        if (ev > 0.5) ++r;
    }
    rank_ = r;
}

int SubsystemShape::dim() const {
    int d = 1;
    for (int f : factor_dims) d *= f;
    return d;
}

void SubsystemShape::validate_against(int operator_dim) const {
    if (factor_dims.empty()) throw std::invalid_argument("SubsystemShape: no factors");
    for (int f : factor_dims) {
        if (f <= 0) throw std::invalid_argument("SubsystemShape: nonpositive factor dim");
    }
    if (dim() != operator_dim) {
        std::ostringstream oss;
        oss << "SubsystemShape: factor product " << dim() << " != operator dim "
            << operator_dim;
        throw std::invalid_argument(oss.str());
    }
}

EigSystem eig(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig: matrix must be square");
    const double asym = max_asymmetry(m);
    if (asym > 1e-9) {
        std::ostringstream oss;
        oss << "eig: input is not Hermitian, max asymmetry = " << asym;
        throw std::invalid_argument(oss.str());
    }
    // Symmetrize so roundoff in callers cannot leak into the solver.
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eig: eigensolver failed to converge");
    }
    return EigSystem{solver.eigenvalues(), solver.eigenvectors()};
}

EigSystem eig(const HermitianOperator& h) { return eig(h.matrix()); }

namespace {

bool satisfies(double eigenvalue, Relation relation, double threshold) {
    const double delta = eigenvalue - threshold;
    const bool on_threshold = std::abs(delta) <= kTieTol;
    switch (relation) {
        case Relation::Geq: return on_threshold || delta > 0.0;
        case Relation::Gt: return !on_threshold && delta > 0.0;
        case Relation::Leq: return on_threshold || delta < 0.0;
        case Relation::Lt: return !on_threshold && delta < 0.0;
    }
    return false;
}

} // namespace

Projector spectral_projection(const Matrix& a, Relation relation, double threshold) {
    const EigSystem es = eig(a);
    const int d = static_cast<int>(a.rows());
    Matrix p = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        if (satisfies(es.eigenvalues[i], relation, threshold)) {
            p += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
        }
    }
    p = 0.5 * (p + p.adjoint());
    return Projector(std::move(p));
}

Projector spectral_projection(const HermitianOperator& a, Relation relation,
                              double threshold) {
    return spectral_projection(a.matrix(), relation, threshold);
}

Projector relative_projection(const Matrix& a, const Matrix& b, Relation relation) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("relative_projection: dimension mismatch");
    }
    return spectral_projection(Matrix(a - b), relation, 0.0);
}

Projector relative_projection(const HermitianOperator& a, const HermitianOperator& b,
                              Relation relation) {
    return relative_projection(a.matrix(), b.matrix(), relation);
}

Matrix tensor(const Matrix& a, const Matrix& b) {
    const int ra = static_cast<int>(a.rows()), ca = static_cast<int>(a.cols());
    const int rb = static_cast<int>(b.rows()), cb = static_cast<int>(b.cols());
    Matrix out(ra * rb, ca * cb);
    for (int i = 0; i < ra; ++i) {
        for (int j = 0; j < ca; ++j) {
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
        }
    }
    return out;
}

Matrix kron_power(const Matrix& a, int n) {
    if (n < 1) throw std::invalid_argument("kron_power: n must be >= 1");
    Matrix out = a;
    for (int i = 1; i < n; ++i) out = tensor(out, a);
    return out;
}

namespace {

// Flat index for multi-index (factor 0 most significant).
int flatten(const std::vector<int>& idx, const std::vector<int>& dims) {
    int flat = 0;
    for (size_t k = 0; k < dims.size(); ++k) flat = flat * dims[k] + idx[k];
    return flat;
}

bool advance(std::vector<int>& idx, const std::vector<int>& dims) {
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        if (++idx[k] < dims[k]) return true;
        idx[k] = 0;
    }
    return false;
}

} // namespace

Matrix partial_trace(const Matrix& ab, const SubsystemShape& shape,
                     const std::vector<int>& keep) {
    shape.validate_against(static_cast<int>(ab.rows()));
    const int nf = static_cast<int>(shape.factor_dims.size());
    std::vector<bool> kept(nf, false);
    for (int k : keep) {
        if (k < 0 || k >= nf) throw std::invalid_argument("partial_trace: bad keep index");
        if (kept[k]) throw std::invalid_argument("partial_trace: duplicate keep index");
        kept[k] = true;
    }

    std::vector<int> keep_dims, trace_dims, keep_pos, trace_pos;
    for (int k = 0; k < nf; ++k) {
        if (kept[k]) {
            keep_dims.push_back(shape.factor_dims[k]);
            keep_pos.push_back(k);
        } else {
            trace_dims.push_back(shape.factor_dims[k]);
            trace_pos.push_back(k);
        }
    }
    const int out_dim = std::accumulate(keep_dims.begin(), keep_dims.end(), 1,
                                        std::multiplies<int>());
    Matrix out = Matrix::Zero(out_dim, out_dim);

    std::vector<int> row_keep(keep_dims.size(), 0);
    std::vector<int> full_row(nf, 0), full_col(nf, 0);
    do {
        std::vector<int> col_keep(keep_dims.size(), 0);
        do {
            Complex sum = 0.0;
            std::vector<int> tr_idx(trace_dims.size(), 0);
            bool more = true;
            while (more) {
                for (size_t k = 0; k < keep_pos.size(); ++k) {
                    full_row[keep_pos[k]] = row_keep[k];
                    full_col[keep_pos[k]] = col_keep[k];
                }
                for (size_t k = 0; k < trace_pos.size(); ++k) {
                    full_row[trace_pos[k]] = tr_idx[k];
                    full_col[trace_pos[k]] = tr_idx[k];
                }
                sum += ab(flatten(full_row, shape.factor_dims),
                          flatten(full_col, shape.factor_dims));
                more = !trace_dims.empty() && advance(tr_idx, trace_dims);
            }
            out(flatten(row_keep, keep_dims), flatten(col_keep, keep_dims)) = sum;
        } while (advance(col_keep, keep_dims));
    } while (advance(row_keep, keep_dims));
    return out;
}

Matrix permute_subsystems(const Matrix& op, const SubsystemShape& shape,
                          const std::vector<int>& perm) {
    shape.validate_against(static_cast<int>(op.rows()));
    const int nf = static_cast<int>(shape.factor_dims.size());
    if (static_cast<int>(perm.size()) != nf) {
        throw std::invalid_argument("permute_subsystems: permutation size mismatch");
    }
    std::vector<int> new_dims(nf);
    for (int j = 0; j < nf; ++j) new_dims[j] = shape.factor_dims[perm[j]];

    const int d = static_cast<int>(op.rows());
    Matrix out(d, d);
    std::vector<int> new_row(nf, 0);
    std::vector<int> old_row(nf), old_col(nf);
    do {
        std::vector<int> new_col(nf, 0);
        do {
            for (int j = 0; j < nf; ++j) {
                old_row[perm[j]] = new_row[j];
                old_col[perm[j]] = new_col[j];
            }
            out(flatten(new_row, new_dims), flatten(new_col, new_dims)) =
                op(flatten(old_row, shape.factor_dims), flatten(old_col, shape.factor_dims));
        } while (advance(new_col, new_dims));
    } while (advance(new_row, new_dims));
    return out;
}

double entropy_of_spectrum(const RealVector& eigenvalues) {
    double s = 0.0;
    for (int i = 0; i < eigenvalues.size(); ++i) {
        const double lam = eigenvalues[i];
        if (lam >= 1e-14) s -= lam * std::log(lam);
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    return entropy_of_spectrum(solver.eigenvalues());
}

double binary_entropy(double p) {
    double s = 0.0;
    if (p > 0.0) s -= p * std::log(p);
    if (p < 1.0) s -= (1.0 - p) * std::log(1.0 - p);
    return s;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

Matrix random_hermitian(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (m + m.adjoint());
}

Matrix random_psd(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    Matrix p = m * m.adjoint() / static_cast<double>(dim);
    return 0.5 * (p + p.adjoint());
}

DensityMatrix random_density(int dim, std::mt19937_64& rng) {
    Matrix p = random_psd(dim, rng);
    p /= p.trace().real();
    return DensityMatrix(0.5 * (p + p.adjoint()));
}

Vector random_pure_ket(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = Complex(g(rng), g(rng));
    v /= v.norm();
    return v;
}

Matrix random_unitary(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase of each column so the draw is Haar and seed-deterministic.
    for (int j = 0; j < dim; ++j) {
        Complex rjj = r(j, j);
        const double a = std::abs(rjj);
        q.col(j) *= (a > 0 ? rjj / a : Complex(1.0, 0.0));
    }
    return q;
}

Matrix random_effect(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix basis = random_unitary(dim, rng);
    Matrix p = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        p += u(rng) * basis.col(i) * basis.col(i).adjoint();
    }
    return 0.5 * (p + p.adjoint());
}

} // namespace qspec
