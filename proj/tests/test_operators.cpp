#include "qspec/operators.hpp"

#include "qspec/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace qspec;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

} // namespace

TEST_CASE("eig returns ascending eigenvalues and a unitary basis") {
    Matrix m = diag2(2.0, -1.0);
    EigSystem es = eig(m);
    CHECK(es.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(es.eigenvalues[1] == doctest::Approx(2.0));

    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    es = eig(x);
    CHECK(es.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(es.eigenvalues[1] == doctest::Approx(1.0));

    auto rng = make_rng(11);
    Matrix h = random_hermitian(4, rng);
    es = eig(h);
    Matrix rebuilt = es.eigenvectors *
                     es.eigenvalues.cast<Complex>().asDiagonal().toDenseMatrix() *
                     es.eigenvectors.adjoint();
    CHECK((rebuilt - h).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((es.eigenvectors.adjoint() * es.eigenvectors - Matrix::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
}

TEST_CASE("eig rejects non-Hermitian input naming the asymmetry") {
    Matrix bad(2, 2);
    bad << 1.0, Complex(0.0, 0.5), 0.0, 1.0;
    CHECK_THROWS_WITH_AS(eig(bad), doctest::Contains("asymmetry"), std::invalid_argument);
}

TEST_CASE("spectral projection selects eigenspaces by relation") {
    Projector p = spectral_projection(diag2(1.0, -1.0), Relation::Geq);
    CHECK((p.matrix() - diag2(1.0, 0.0)).cwiseAbs().maxCoeff() < 1e-12);

    // Eigenvalue 0 satisfies the closed relation.
    p = spectral_projection(Matrix(Matrix::Zero(2, 2)), Relation::Geq);
    CHECK((p.matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.rank() == 2);

    auto rng = make_rng(5);
    Matrix a = random_hermitian(3, rng);
    Projector pos = spectral_projection(a, Relation::Geq);
    double expected = 0.0;
    EigSystem es = eig(a);
    for (int i = 0; i < 3; ++i) {
        if (es.eigenvalues[i] >= 0.0) expected += es.eigenvalues[i];
    }
    CHECK((pos.matrix() * a).trace().real() == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("threshold ties go to the closed relations") {
    Matrix m = diag2(1e-13, 1.0);
    CHECK(spectral_projection(m, Relation::Geq).rank() == 2);
    CHECK(spectral_projection(m, Relation::Gt).rank() == 1);
    CHECK(spectral_projection(m, Relation::Leq).rank() == 1);
    CHECK(spectral_projection(m, Relation::Lt).rank() == 0);
}

TEST_CASE("relative projection reduces to the difference operator") {
    Matrix id = Matrix::Identity(2, 2);
    CHECK(relative_projection(Matrix(2.0 * id), id, Relation::Geq).rank() == 2);
    CHECK(relative_projection(id, id, Relation::Geq).rank() == 2);
    CHECK(relative_projection(id, id, Relation::Gt).rank() == 0);

    Projector p = relative_projection(diag2(3.0, 1.0), diag2(1.0, 3.0), Relation::Geq);
    CHECK((p.matrix() - diag2(1.0, 0.0)).cwiseAbs().maxCoeff() < 1e-12);

    Matrix odd = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(relative_projection(id, odd, Relation::Geq), std::invalid_argument);
}

TEST_CASE("tensor and partial trace") {
    CHECK((tensor(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) - Matrix::Identity(6, 6))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    auto rng = make_rng(17);
    Matrix rho = random_density(2, rng).matrix();
    Matrix sigma = random_psd(3, rng);
    SubsystemShape shape{{2, 3}};
    Matrix joint = tensor(rho, sigma);
    Matrix back = partial_trace(joint, shape, {0});
    CHECK((back - sigma.trace().real() * rho).cwiseAbs().maxCoeff() < 1e-10);

    // Bell state: tracing out either side leaves the maximally mixed state.
    Vector phi = Vector::Zero(4);
    phi[0] = phi[3] = 1.0 / std::sqrt(2.0);
    Matrix bell = phi * phi.adjoint();
    Matrix reduced = partial_trace(bell, SubsystemShape{{2, 2}}, {0});
    CHECK((reduced - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // Trace preservation and linearity on random input.
    Matrix a = random_hermitian(6, rng);
    Matrix b = random_hermitian(6, rng);
    Matrix lin = partial_trace(Matrix(2.0 * a + 0.5 * b), shape, {1}) -
                 2.0 * partial_trace(a, shape, {1}) - 0.5 * partial_trace(b, shape, {1});
    CHECK(lin.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(partial_trace(a, shape, {1}).trace().real() ==
          doctest::Approx(a.trace().real()).epsilon(1e-10));

    CHECK_THROWS_AS(partial_trace(a, SubsystemShape{{4, 2}}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(a, SubsystemShape{{2, 2}}, {0}), std::invalid_argument);
}

TEST_CASE("permute_subsystems swaps tensor factors") {
    auto rng = make_rng(23);
    Matrix a = random_hermitian(2, rng);
    Matrix b = random_hermitian(3, rng);
    Matrix swapped = permute_subsystems(tensor(a, b), SubsystemShape{{2, 3}}, {1, 0});
    CHECK((swapped - tensor(b, a)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("von Neumann entropy in nats") {
    Vector psi = Vector::Zero(3);
    psi[1] = 1.0;
    CHECK(von_neumann_entropy(DensityMatrix(psi * psi.adjoint())) == doctest::Approx(0.0));

    const int d = 5;
    CHECK(von_neumann_entropy(DensityMatrix(Matrix::Identity(d, d) / d)) ==
          doctest::Approx(std::log(double(d))).epsilon(1e-12));

    CHECK(von_neumann_entropy(DensityMatrix(diag2(0.25, 0.75))) ==
          doctest::Approx(0.5623351446188083).epsilon(1e-12));
    CHECK(binary_entropy(0.25) == doctest::Approx(0.5623351446188083).epsilon(1e-12));
}

TEST_CASE("type invariants are enforced") {
    Matrix notherm(2, 2);
    notherm << 1.0, Complex(0.2, 0.1), Complex(0.2, -0.2), 1.0;
    CHECK_THROWS_AS((HermitianOperator{notherm}), std::invalid_argument);

    CHECK_THROWS_AS((DensityMatrix{diag2(0.5, 0.6)}), std::invalid_argument);  // trace 1.1
    CHECK_THROWS_AS((DensityMatrix{diag2(1.5, -0.5)}), std::invalid_argument); // negative

    CHECK_THROWS_AS((Projector{diag2(0.5, 1.0)}), std::invalid_argument);
    CHECK_NOTHROW((Projector{diag2(1.0, 0.0)}));
}

TEST_CASE("operator ordering lemma on random instances") {
    for (int trial = 0; trial < 60; ++trial) {
        auto rng = make_rng(derive_seed(99, trial));
        std::uniform_int_distribution<int> dim_dist(2, 8);
        const int d = dim_dist(rng);
        Matrix a = random_hermitian(d, rng);
        Matrix b = random_hermitian(d, rng);
        Matrix p = random_effect(d, rng);
        const Matrix diff = a - b;
        const double rhs =
            (relative_projection(a, b, Relation::Geq).matrix() * diff).trace().real();
        CHECK((p * diff).trace().real() <= rhs + 1e-9);

        // The maximizer value is the nonnegative eigenvalue sum.
        EigSystem es = eig(diff);
        double pos = 0.0;
        for (int i = 0; i < d; ++i) {
            if (es.eigenvalues[i] >= 0.0) pos += es.eigenvalues[i];
        }
        CHECK(rhs == doctest::Approx(pos).epsilon(1e-9));
    }
}
