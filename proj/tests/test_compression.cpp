#include "qspec/compression.hpp"

#include "qspec/presets.hpp"
#include "qspec/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace qspec;

TEST_CASE("build_scheme on hand-computable cases") {
    Matrix pure = Matrix::Zero(2, 2);
    pure(0, 0) = 1.0;
    CompressionScheme s = build_scheme(pure, 1, 0.1);
    CHECK(s.compressed_dim == 1);
    CHECK(scheme_fidelity(DensityMatrix(pure), s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((s.projection.matrix() * s.chi0 - s.chi0).norm() < 1e-9);

    // Threshold below both eigenvalues keeps everything.
    Matrix half = 0.5 * Matrix::Identity(2, 2);
    s = build_scheme(half, 1, std::log(2.0) + 0.01);
    CHECK(s.compressed_dim == 2);
    CHECK(scheme_fidelity(DensityMatrix(half), s) == doctest::Approx(1.0).epsilon(1e-12));

    // Threshold between the eigenvalues keeps the large one only.
    Matrix skew = presets::diag_state({0.9, 0.1});
    s = build_scheme(skew, 1, -std::log(0.5)); // e^{-gamma} = 0.5
    CHECK(s.compressed_dim == 1);
    CHECK(scheme_fidelity(DensityMatrix(skew), s) == doctest::Approx(0.81).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(build_scheme(skew, 1, -std::log(2.0)),
                         doctest::Contains("rate window below all eigenvalues"),
                         std::runtime_error);
}

TEST_CASE("scheme encoder is the projected-plus-funnel channel") {
    auto rng = make_rng(101);
    Matrix rho = random_density(4, rng).matrix();
    CompressionScheme s = build_scheme(rho, 1, std::log(3.0));
    // Kraus list: projection first, then one funnel operator per complement axis.
    CHECK(static_cast<int>(s.encoder.kraus().size()) == 1 + (4 - s.compressed_dim));
    // Fidelity from the composed channel equals the explicit Kraus formula.
    double f = std::norm((s.projection.matrix() * rho).trace());
    for (size_t k = 1; k < s.encoder.kraus().size(); ++k) {
        f += std::norm((s.encoder.kraus()[k] * rho).trace());
    }
    CHECK(scheme_fidelity(DensityMatrix(rho), s) == doctest::Approx(f).epsilon(1e-10));
}

TEST_CASE("achievability bound: fidelity dominates the squared thresholded trace") {
    for (int trial = 0; trial < 20; ++trial) {
        auto rng = make_rng(derive_seed(103, trial));
        const int d = 3 + trial % 3;
        std::uniform_real_distribution<double> gamma_dist(0.1, 2.0);
        const Matrix rho = random_density(d, rng).matrix();
        const double gamma = gamma_dist(rng);
        double t;
        try {
            CompressionScheme s = build_scheme(rho, 1, gamma);
            t = difference_trace(rho, Matrix::Identity(d, d), 1, -gamma);
            CHECK(scheme_fidelity(DensityMatrix(rho), s) >= t * t - 1e-9);
            // Proposition-style dimension bound.
            CHECK(s.compressed_dim <= std::exp(gamma) + 1e-9);
        } catch (const std::runtime_error&) {
            // Degenerate: threshold above every eigenvalue.
        }
    }
}

TEST_CASE("converse bound holds for every scheme, including adversarial ones") {
    auto base_rng = make_rng(107);
    const int d = 8;
    const int n = 1;
    const Matrix rho = random_density(d, base_rng).matrix();
    const DensityMatrix rho_dm(rho);

    for (int trial = 0; trial < 20; ++trial) {
        auto rng = make_rng(derive_seed(109, trial));
        std::uniform_int_distribution<int> rank_dist(1, d - 1);
        const int rank = rank_dist(rng);
        const double rate = std::log(static_cast<double>(rank)) + 1e-9;
        const double gamma = rate + 0.2;

        // Adversarial rank-limited scheme from a random subspace.
        const Matrix basis = random_unitary(d, rng);
        Matrix p = Matrix::Zero(d, d);
        for (int k = 0; k < rank; ++k) p += basis.col(k) * basis.col(k).adjoint();
        Vector chi0 = basis.col(0);
        std::vector<Matrix> kraus{0.5 * (p + p.adjoint())};
        for (int k = rank; k < d; ++k) kraus.push_back(chi0 * basis.col(k).adjoint());
        KrausChannel encoder(d, d, std::move(kraus));
        const double f = entanglement_fidelity(rho_dm, encoder);

        CHECK(f <= converse_fidelity_bound(rho, n, rate, gamma) + 1e-9);
    }

    // Vacuous regimes.
    CHECK(converse_fidelity_bound(rho, 1, std::log(8.0), std::log(8.0)) >= 1.0 - 1e-9);
    Matrix pure = Matrix::Zero(2, 2);
    pure(0, 0) = 1.0;
    CHECK(converse_fidelity_bound(pure, 1, 0.3, 0.3) >= 1.0 - 1e-9);

    // Below the entropy the bound bites: strictly less than 1 at n = 12.
    Source src = Source::iid_entropy(presets::diag_state({0.25, 0.75}));
    const double h = binary_entropy(0.25);
    const double below = converse_fidelity_bound(*src.block_spectrum(12), 12, h - 0.1,
                                                 h - 0.1 + 0.05);
    CHECK(below < 1.0);
}

TEST_CASE("scheme fidelity at a pinned threshold matches the kept mass") {
    Source src = Source::iid_entropy(presets::diag_state({0.25, 0.75}));
    const double h = binary_entropy(0.25);

    // Dense scheme at n = 8 against the fast-path kept-mass evaluation.
    auto spec8 = src.block_spectrum(8);
    REQUIRE(spec8.has_value());
    auto [rho8, ref8] = src.dense_pair(8);
    (void)ref8;
    for (double gamma : {h - 0.15, h + 0.1, h + 0.3}) {
        CompressionScheme s = build_scheme(rho8, 8, gamma);
        const double mass = fast_curve_point(*spec8, 8, -gamma).mass;
        CHECK(scheme_fidelity(DensityMatrix(rho8), s) ==
              doctest::Approx(mass * mass).epsilon(1e-9));
    }

    // Below the entropy the kept mass collapses: F <= 0.5 well before n = 10.
    auto spec10 = src.block_spectrum(10);
    const double low_mass = fast_curve_point(*spec10, 10, -(h - 0.15)).mass;
    CHECK(low_mass * low_mass <= 0.5);
}

TEST_CASE("best-case and class-aligned schemes at a rate budget") {
    Source src = Source::iid_entropy(presets::diag_state({0.25, 0.75}));
    auto spec = src.block_spectrum(10);
    REQUIRE(spec.has_value());
    const double h = binary_entropy(0.25);

    // Values pinned by the binomial spectrum (independent hand evaluation).
    CHECK(threshold_scheme_fidelity(*spec, 10, h + 0.1) ==
          doctest::Approx(0.9609).epsilon(1e-3));
    CHECK(best_case_fidelity(*spec, 10, h - 0.15) == doctest::Approx(0.2873).epsilon(1e-3));
    // The class-aligned scheme can never beat the unconstrained top-M scheme.
    CHECK(threshold_scheme_fidelity(*spec, 10, h - 0.15) <=
          best_case_fidelity(*spec, 10, h - 0.15) + 1e-12);
}

TEST_CASE("strong converse probe decays below the inf-spectral entropy") {
    Source src = Source::iid_entropy(presets::diag_state({0.25, 0.75}));
    auto rows = strong_converse_probe(src, binary_entropy(0.25) - 0.2, {4, 8, 12});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].fidelity > rows[1].fidelity);
    CHECK(rows[1].fidelity > rows[2].fidelity);
    CHECK(rows[2].fidelity < 0.2);

    // Rate 0 keeps one dimension: fidelity is the squared top eigenvalue.
    auto rank1 = strong_converse_probe(src, 0.0, {3});
    CHECK(rank1[0].m == 1.0);
    CHECK(rank1[0].fidelity ==
          doctest::Approx(std::pow(std::pow(0.75, 3), 2)).epsilon(1e-12));

    // A pure source is unaffected at any rate.
    Matrix pure = Matrix::Zero(2, 2);
    pure(0, 0) = 1.0;
    auto flat = strong_converse_probe(Source::iid_entropy(pure), 0.05, {2, 4});
    CHECK(flat[0].fidelity == doctest::Approx(1.0));
    CHECK(flat[1].fidelity == doctest::Approx(1.0));
}

TEST_CASE("mixed projector on orthogonal and equal supports") {
    // Orthogonal supports: the union is the direct sum.
    Matrix sigma = Matrix::Zero(4, 4), omega = Matrix::Zero(4, 4);
    sigma(0, 0) = 0.6;
    sigma(1, 1) = 0.4;
    omega(2, 2) = 0.7;
    omega(3, 3) = 0.3;
    MixedSourceProjector mp = mixed_projector(sigma, omega, 1, 2.0);
    CHECK(mp.pk.rank() == mp.p0.rank() + mp.q.rank());
    CHECK((mp.pk.matrix() - mp.p0.matrix() - mp.q.matrix()).cwiseAbs().maxCoeff() < 1e-9);

    // Equal sources: nothing new is adjoined.
    mp = mixed_projector(sigma, sigma, 1, 2.0);
    CHECK(mp.pk.rank() == mp.p0.rank());
    CHECK((mp.pk.matrix() - mp.p0.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("mixed projector invariants on random instances") {
    for (int trial = 0; trial < 30; ++trial) {
        auto rng = make_rng(derive_seed(113, trial));
        std::uniform_real_distribution<double> alpha_dist(0.4, 1.6);
        std::uniform_real_distribution<double> t_dist(0.15, 0.85);
        const int d = 4;
        const Matrix sigma = random_density(d, rng).matrix();
        const Matrix omega = random_density(d, rng).matrix();
        const double alpha = alpha_dist(rng);
        const double gamma = alpha + 0.25;
        const double t = t_dist(rng);
        const int n = 1;

        MixedSourceProjector mp = mixed_projector(sigma, omega, n, alpha);
        CHECK(mp.pk.rank() <= mp.p0.rank() + mp.q.rank());
        CHECK((mp.pk.matrix() * mp.p0.matrix() - mp.p0.matrix()).cwiseAbs().maxCoeff() <
              1e-9);
        CHECK((mp.pk.matrix() * omega).trace().real() >=
              (mp.q.matrix() * omega).trace().real() - 1e-9);

        // Union-projector lower bound for the mixture rho = t sigma + (1-t) omega.
        const Matrix rho = t * sigma + (1.0 - t) * omega;
        const double lhs =
            (mp.pk.matrix() * (rho - std::exp(-gamma) * Matrix::Identity(d, d)))
                .trace()
                .real();
        const double sig_term = (mp.p0.matrix() * sigma).trace().real();
        const double omg_term = (mp.q.matrix() * omega).trace().real();
        CHECK(lhs >= t * sig_term + (1.0 - t) * omg_term - 2.0 * std::exp(-(gamma - alpha)) -
                         1e-9);
    }
}

TEST_CASE("mixture trace splits by component thresholded traces") {
    for (int trial = 0; trial < 20; ++trial) {
        auto rng = make_rng(derive_seed(127, trial));
        std::uniform_real_distribution<double> t_dist(0.1, 0.9);
        std::uniform_real_distribution<double> gamma_dist(0.2, 1.8);
        const int d = 4;
        const Matrix sigma = random_density(d, rng).matrix();
        const Matrix omega = random_density(d, rng).matrix();
        const double t = t_dist(rng);
        const double gamma = gamma_dist(rng);
        const Matrix id = Matrix::Identity(d, d);
        const Matrix rho = t * sigma + (1.0 - t) * omega;
        const double mix = difference_trace(rho, id, 1, -gamma);
        const double split = t * difference_trace(sigma, id, 1, -gamma) +
                             (1.0 - t) * difference_trace(omega, id, 1, -gamma);
        CHECK(mix <= split + 1e-9);
    }
}

TEST_CASE("mixed rate estimates recover the component entropies") {
    EstimatorOptions opt;
    opt.window = {0.02, 1.2};
    opt.epsilon = 0.4;

    // sigma pure, omega maximally mixed: optimal rate log 2, strong converse 0.
    Matrix pure = Matrix::Zero(2, 2);
    pure(0, 0) = 1.0;
    EstimatorOptions wide = opt;
    wide.window = {-0.3, 1.2};
    MixedRateEstimate mre =
        mixed_rate_estimate(pure, Matrix(0.5 * Matrix::Identity(2, 2)), 0.5, 8, wide);
    CHECK(mre.optimal_rate == doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK(std::abs(mre.strong_converse_rate) < 1e-3);

    // Equal components collapse to the single-source values.
    const Matrix f = presets::diag_state({0.25, 0.75});
    mre = mixed_rate_estimate(f, f, 0.5, 8, opt);
    CHECK(mre.optimal_rate == doctest::Approx(mre.strong_converse_rate).epsilon(1e-9));
    CHECK(mre.optimal_rate == doctest::Approx(binary_entropy(0.25)).epsilon(1e-2));

    // The acceptance pair: optimal rate tracks h(.4), strong converse h(.1).
    mre = mixed_rate_estimate(presets::diag_state({0.1, 0.9}),
                              presets::diag_state({0.4, 0.6}), 0.3, 12, opt);
    CHECK(std::abs(mre.optimal_rate - binary_entropy(0.4)) < 0.05);
    CHECK(std::abs(mre.strong_converse_rate - binary_entropy(0.1)) < 0.05);
    // The gap between them is the strong-converse failure window.
    CHECK(mre.optimal_rate - mre.strong_converse_rate > 0.25);
}
