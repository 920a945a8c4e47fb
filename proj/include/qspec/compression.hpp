#pragma once

#include "qspec/channels.hpp"
#include "qspec/spectrum.hpp"

#include <vector>

namespace qspec {

/// Blind compression scheme built from the spectral projection
/// P_n = {rho_n >= e^{-n gamma} I}: the encoder keeps the projected block and
/// funnels the complement onto a fixed vector chi0 inside the compressed
/// subspace; the decoder is the identity on the ambient space.
struct CompressionScheme {
    int n = 0;
    double gamma = 0.0;
    Projector projection;
    Vector chi0;
    KrausChannel encoder;
    KrausChannel decoder;
    int compressed_dim = 0; // M_n = Tr P_n

    CompressionScheme(int n_, double gamma_, Projector p, Vector chi, KrausChannel enc,
                      KrausChannel dec, int m)
        : n(n_), gamma(gamma_), projection(std::move(p)), chi0(std::move(chi)),
          encoder(std::move(enc)), decoder(std::move(dec)), compressed_dim(m) {}
};

CompressionScheme build_scheme(const Matrix& rho_n, int n, double gamma);

/// Entanglement fidelity of the composed decode-encode channel.
double scheme_fidelity(const DensityMatrix& rho_n, const CompressionScheme& scheme);

/// Upper bound Tr[{rho >= e^{-n gamma} I}(rho - e^{-n gamma} I)] + e^{-n(gamma - R)}
/// valid for every scheme of compressed rank <= e^{nR}.
double converse_fidelity_bound(const Matrix& rho_n, int n, double rate, double gamma);
double converse_fidelity_bound(const BlockSpectrum& spectrum, int n, double rate,
                               double gamma);

/// |Tr P rho|^2 for the best rank-M projector (top eigenvalue mass), M capped
/// at floor(e^{n rate}); the strongest scheme any converse must beat.
double best_case_fidelity(const BlockSpectrum& spectrum, int n, double rate);
double top_eigenvalue_mass(const BlockSpectrum& spectrum, double budget);

/// Fidelity of the spectral-projection scheme with the largest threshold
/// whose rank fits inside e^{n rate} (eigenvalue classes kept whole).
double threshold_scheme_fidelity(const BlockSpectrum& spectrum, int n, double rate);

struct StrongConverseRow {
    int n;
    double m;
    double fidelity;
};

/// Best-case scheme fidelities across a block-length sweep; decays to zero
/// when rate sits below the inf-spectral entropy.
std::vector<StrongConverseRow> strong_converse_probe(const Source& src, double rate,
                                                     const std::vector<int>& n_sweep);

/// Iterated union projector for the mixed-source converse: starts from
/// P0 = {sigma >= e^{-n alpha} I} and adjoins the orthogonal component of each
/// eigenvector of Q = {omega >= e^{-n alpha} I}.
struct MixedSourceProjector {
    Projector p0;
    Projector q;
    Projector pk;
};

MixedSourceProjector mixed_projector(const Matrix& sigma_n, const Matrix& omega_n, int n,
                                     double alpha);

struct MixedRateEstimate {
    double optimal_rate;         // max of the component sup-entropy estimates
    double strong_converse_rate; // min of the component inf-entropy estimates
    EntropyEstimates sigma_est;
    EntropyEstimates omega_est;
    EntropyEstimates mixture_est;
};

MixedRateEstimate mixed_rate_estimate(const Matrix& sigma_factor, const Matrix& omega_factor,
                                      double t, int n, const EstimatorOptions& opt);

} // namespace qspec
