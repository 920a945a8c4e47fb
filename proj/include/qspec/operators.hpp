#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Tolerances used by the type invariants below.
inline constexpr double kHermTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kProjTol = 1e-9;
// Eigenvalues within this distance of a projection threshold count as lying
// on the threshold: they satisfy the closed relations (>=, <=) and fail the
// open ones (>, <).
inline constexpr double kTieTol = 1e-12;

enum class Relation { Geq, Gt, Leq, Lt };

double max_asymmetry(const Matrix& m);

/// Dense Hermitian operator; validates A = A^dagger entrywise on construction.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m);
    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    double trace() const { return m_.trace().real(); }

protected:
    Matrix m_;
};

/// Positive unit-trace operator (a quantum state).
class DensityMatrix : public HermitianOperator {
public:
    explicit DensityMatrix(Matrix m);
};

/// Idempotent Hermitian operator with spectrum in {0,1}.
class Projector : public HermitianOperator {
public:
    explicit Projector(Matrix m);
    int rank() const { return rank_; }

private:
    int rank_;
};

/// Tensor-factor bookkeeping for multipartite operators.
struct SubsystemShape {
    std::vector<int> factor_dims;

    int dim() const;
    void validate_against(int operator_dim) const;
};

struct EigSystem {
    RealVector eigenvalues; // ascending
    Matrix eigenvectors;    // columns, unitary
};

/// Eigendecomposition of a Hermitian matrix. Throws with a diagnostic naming
/// the maximum asymmetry if the input is not Hermitian.
EigSystem eig(const Matrix& m);
EigSystem eig(const HermitianOperator& h);

/// Projector onto the eigenspaces of `a` whose eigenvalue satisfies
/// `relation` against `threshold`.
Projector spectral_projection(const HermitianOperator& a, Relation relation,
                              double threshold = 0.0);
Projector spectral_projection(const Matrix& a, Relation relation, double threshold = 0.0);

/// { A >= B } and friends, i.e. spectral_projection(A - B, relation, 0).
Projector relative_projection(const HermitianOperator& a, const HermitianOperator& b,
                              Relation relation);
Projector relative_projection(const Matrix& a, const Matrix& b, Relation relation);

Matrix tensor(const Matrix& a, const Matrix& b);
Matrix kron_power(const Matrix& a, int n);

/// Trace out the factors not listed in `keep` (indices into shape.factor_dims,
/// strictly increasing). The kept factors keep their relative order.
Matrix partial_trace(const Matrix& ab, const SubsystemShape& shape,
                     const std::vector<int>& keep);

/// Reorder tensor factors: new factor j is old factor perm[j].
Matrix permute_subsystems(const Matrix& op, const SubsystemShape& shape,
                          const std::vector<int>& perm);

/// -Tr[rho log rho] in nats; eigenvalues below 1e-14 contribute zero.
double von_neumann_entropy(const DensityMatrix& rho);
double entropy_of_spectrum(const RealVector& eigenvalues);

/// Binary entropy -p log p - (1-p) log(1-p), nats.
double binary_entropy(double p);

Matrix identity(int dim);

// Seeded random instances for property tests and Monte Carlo.
Matrix random_hermitian(int dim, std::mt19937_64& rng);
Matrix random_psd(int dim, std::mt19937_64& rng);
DensityMatrix random_density(int dim, std::mt19937_64& rng);
Vector random_pure_ket(int dim, std::mt19937_64& rng);
Matrix random_unitary(int dim, std::mt19937_64& rng);
/// Random operator with spectrum inside [0,1] (for Lemma-style tests).
Matrix random_effect(int dim, std::mt19937_64& rng);

} // namespace qspec
