#include "qspec/compression.hpp"

#include <algorithm>
#include <cmath>

namespace qspec {

CompressionScheme build_scheme(const Matrix& rho_n, int n, double gamma) {
    const int d = static_cast<int>(rho_n.rows());
    const double threshold = std::exp(-static_cast<double>(n) * gamma);
    EigSystem es = eig(rho_n);

    std::vector<int> inside, outside;
    for (int i = 0; i < d; ++i) {
        if (es.eigenvalues[i] >= threshold - kTieTol) {
            inside.push_back(i);
        } else {
            outside.push_back(i);
        }
    }
    if (inside.empty()) {
        throw std::runtime_error("build_scheme: rate window below all eigenvalues");
    }

    Matrix p = Matrix::Zero(d, d);
    for (int i : inside) p += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
    p = 0.5 * (p + p.adjoint());

    // chi0 = top eigenvector of P rho P, i.e. the highest-weight kept vector.
    int top = inside.front();
    for (int i : inside) {
        if (es.eigenvalues[i] > es.eigenvalues[top]) top = i;
    }
    Vector chi0 = es.eigenvectors.col(top);

    std::vector<Matrix> kraus;
    kraus.reserve(outside.size() + 1);
    kraus.push_back(p);
    for (int k : outside) {
        kraus.push_back(chi0 * es.eigenvectors.col(k).adjoint());
    }
    KrausChannel encoder(d, d, std::move(kraus));
    KrausChannel decoder = KrausChannel::identity_channel(d);
    return CompressionScheme(n, gamma, Projector(p), std::move(chi0), std::move(encoder),
                             std::move(decoder), static_cast<int>(inside.size()));
}

double scheme_fidelity(const DensityMatrix& rho_n, const CompressionScheme& scheme) {
    return entanglement_fidelity(rho_n, compose(scheme.decoder, scheme.encoder));
}

double converse_fidelity_bound(const Matrix& rho_n, int n, double rate, double gamma) {
    const Matrix id = Matrix::Identity(rho_n.rows(), rho_n.cols());
    const double t = difference_trace(rho_n, id, n, -gamma);
    return t + std::exp(-static_cast<double>(n) * (gamma - rate));
}

double converse_fidelity_bound(const BlockSpectrum& spectrum, int n, double rate,
                               double gamma) {
    const double t = fast_curve_point(spectrum, n, -gamma).trace;
    return t + std::exp(-static_cast<double>(n) * (gamma - rate));
}

namespace {

std::vector<SpectralClass> sorted_by_eigenvalue(const BlockSpectrum& spectrum) {
    std::vector<SpectralClass> classes = spectrum;
    std::sort(classes.begin(), classes.end(),
              [](const SpectralClass& a, const SpectralClass& b) {
                  return a.rho_eig > b.rho_eig;
              });
    return classes;
}

} // namespace

double top_eigenvalue_mass(const BlockSpectrum& spectrum, double budget) {
    double mass = 0.0;
    double remaining = std::max(1.0, std::floor(budget));
    for (const SpectralClass& c : sorted_by_eigenvalue(spectrum)) {
        if (remaining <= 0.0) break;
        const double take = std::min(remaining, c.weight);
        mass += take * c.rho_eig;
        remaining -= take;
    }
    return mass;
}

double best_case_fidelity(const BlockSpectrum& spectrum, int n, double rate) {
    const double budget = std::floor(std::exp(static_cast<double>(n) * rate));
    const double mass = top_eigenvalue_mass(spectrum, budget);
    return mass * mass;
}

double threshold_scheme_fidelity(const BlockSpectrum& spectrum, int n, double rate) {
    const double budget = std::max(1.0, std::floor(std::exp(static_cast<double>(n) * rate)));
    double mass = 0.0;
    double used = 0.0;
    for (const SpectralClass& c : sorted_by_eigenvalue(spectrum)) {
        if (used + c.weight > budget) break; // classes are kept whole
        mass += c.weight * c.rho_eig;
        used += c.weight;
    }
    if (used == 0.0) {
        throw std::runtime_error("threshold_scheme_fidelity: rate budget below one state");
    }
    return mass * mass;
}

std::vector<StrongConverseRow> strong_converse_probe(const Source& src, double rate,
                                                     const std::vector<int>& n_sweep) {
    std::vector<StrongConverseRow> rows;
    rows.reserve(n_sweep.size());
    for (int n : n_sweep) {
        auto spectrum = src.block_spectrum(n);
        BlockSpectrum spec;
        if (spectrum) {
            spec = std::move(*spectrum);
        } else {
            auto [rho, ref] = src.dense_pair(n);
            (void)ref;
            EigSystem es = eig(rho);
            for (int i = 0; i < es.eigenvalues.size(); ++i) {
                spec.push_back({es.eigenvalues[i], 1.0, 1.0});
            }
        }
        const double m = std::max(1.0, std::floor(std::exp(static_cast<double>(n) * rate)));
        rows.push_back({n, m, best_case_fidelity(spec, n, rate)});
    }
    return rows;
}

MixedSourceProjector mixed_projector(const Matrix& sigma_n, const Matrix& omega_n, int n,
                                     double alpha) {
    if (sigma_n.rows() != omega_n.rows()) {
        throw std::invalid_argument("mixed_projector: dimension mismatch");
    }
    const int d = static_cast<int>(sigma_n.rows());
    const double threshold = std::exp(-static_cast<double>(n) * alpha);

    Projector p0 = spectral_projection(sigma_n, Relation::Geq, threshold);
    Projector q = spectral_projection(omega_n, Relation::Geq, threshold);

    // Adjoin the orthogonal component of each eigenvector spanning range(Q).
    EigSystem es = eig(omega_n);
    Matrix pk = p0.matrix();
    for (int i = 0; i < d; ++i) {
        if (es.eigenvalues[i] < threshold - kTieTol) continue;
        Vector v = es.eigenvectors.col(i) - pk * es.eigenvectors.col(i);
        const double norm = v.norm();
        if (norm <= 1e-9) continue; // already inside the subspace
        v /= norm;
        pk += v * v.adjoint();
    }
    pk = 0.5 * (pk + pk.adjoint());
    return MixedSourceProjector{std::move(p0), std::move(q), Projector(std::move(pk))};
}

MixedRateEstimate mixed_rate_estimate(const Matrix& sigma_factor, const Matrix& omega_factor,
                                      double t, int n, const EstimatorOptions& opt) {
    Source sigma_src = Source::iid_entropy(sigma_factor);
    Source omega_src = Source::iid_entropy(omega_factor);
    Source mix_src = Source::mixture(t, sigma_factor, omega_factor);

    EntropyEstimates sigma_est = spectral_entropy_estimates(sigma_src, n, opt);
    EntropyEstimates omega_est = spectral_entropy_estimates(omega_src, n, opt);
    EntropyEstimates mix_est = spectral_entropy_estimates(mix_src, n, opt);

    return MixedRateEstimate{std::max(sigma_est.sup_entropy, omega_est.sup_entropy),
                             std::min(sigma_est.inf_entropy, omega_est.inf_entropy),
                             sigma_est, omega_est, mix_est};
}

} // namespace qspec
